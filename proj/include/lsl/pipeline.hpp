#pragma once

#include <lsl/lippmann.hpp>
#include <lsl/model.hpp>
#include <lsl/rom.hpp>
#include <lsl/wave_sim.hpp>

#include <optional>
#include <string>
#include <vector>

namespace lsl {

/// Everything computed once for q = 0: full background transfer function
/// (2n-1 samples), background snapshots u0 and antiderivatives w0 (n samples).
struct Background {
    Grid2D simulation_grid;
    Grid2D inversion_grid;
    SourceSet sources;
    TimeAxis axis;
    TransferData data;
    std::vector<SnapshotSet> fields;
    std::vector<SnapshotSet> antiderivatives;
};

Background make_background(const Grid2D& simulation_grid, std::size_t inversion_ratio,
                           const SourceSet& sources, const TimeAxis& axis,
                           const SolverSettings& settings);

/// Checks that background and measured data describe the same acquisition.
void check_compatible(const Background& bg, const TransferData& data);

struct Thresholds {
    double born = 1e-2;
    double siso = 1e-2;
    double mimo = 1e-2;
};

/// Axis-aligned rectangle used to restrict error norms.
struct Region {
    std::string name;
    double x_min, x_max, y_min, y_max;
    bool contains(double x, double y) const {
        return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
    }
};

struct RegionError {
    std::string name;
    double relative_l2 = 0.0;
    double peak_offset = 0.0;  // distance from the region's |q_est| peak to its centre
};

struct ErrorReport {
    double relative_l2 = 0.0;
    double absolute_l2 = 0.0;
    std::vector<RegionError> regions;
};

/// Relative L2 errors on q_true's grid; q_estimate is resampled when needed.
ErrorReport metrics(const Potential& q_estimate, const Potential& q_true,
                    const std::vector<Region>& regions = {});

struct StepResult {
    Potential q;
    std::vector<SnapshotSet> fields;  // internal fields used by the inversion
    std::size_t rank = 0;
};

/// Inverse Born: Lippmann-Schwinger with the background fields.
StepResult run_born(const TransferData& data, const Background& bg, double threshold);

/// SISO LSL: per-source ROM fields from the measured diagonals, then invert.
StepResult run_siso_step(const TransferData& data, const Background& bg, double threshold);

struct StageRecord {
    std::string name;
    std::size_t time_samples = 0;  // length of the fields used in this stage
    std::size_t rank = 0;
    std::optional<ErrorReport> error;
    std::optional<Regularization> regularization;
};

struct PipelineState {
    std::size_t iteration = 0;
    TransferData current;              // measured, or measured + lifted
    std::vector<SnapshotSet> fields;   // current internal fields
    Potential q;                       // current estimate on the inversion grid
    std::size_t active_length = 0;     // samples in `current` usable by the ROM
    std::vector<std::size_t> schedule; // N_0 = n, N_{m+1} = floor((N_m - 1)/2) + 1
    std::vector<StageRecord> log;
};

PipelineState initial_state(const TransferData& data, const Background& bg, StepResult siso);

/// Populates every off-diagonal pair by forward Lippmann-Schwinger with the
/// current fields and estimate.
PipelineState run_lift_step(const PipelineState& state, const TransferData& measured,
                            const Background& bg);

/// Block ROM on the completed data, regularized to SPD, then re-inversion
/// against the measured diagonals only. Returns the next estimate and fields.
StepResult run_mimo_step(const TransferData& completed, const TransferData& measured,
                         const Background& bg, double threshold,
                         Regularization* regularization = nullptr);

struct AlgorithmOptions {
    std::size_t iterations = 1;
    Thresholds thresholds;
    bool positivity = false;  // clamp every stage estimate at zero
    const Potential* truth = nullptr;
    std::vector<Region> regions;
};

void clamp_nonnegative(Potential& q);

/// SISO step followed by `iterations` rounds of (lift, MIMO step).
PipelineState run_algorithm(const TransferData& data, const Background& bg,
                            const AlgorithmOptions& options);

}  // namespace lsl
