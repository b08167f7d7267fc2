#pragma once

#include <lsl/model.hpp>

#include <cstdint>
#include <functional>

namespace lsl {

struct SolverSettings {
    std::size_t substeps = 4;   // fine leapfrog steps per tau
    double cfl_safety = 0.9;    // c_safe in (0, 1]
    double noise_level = 0.0;   // relative noise eta applied to measured data
    std::uint64_t seed = 1;
};

enum class InitialCondition {
    cosine,         // u(0) = g, u_t(0) = 0
    antiderivative  // w(0) = 0, w_t(0) = g
};

enum class AcquisitionMode { siso, mimo };

/// Upper bound on the spectral radius of A_h = -Delta_h + q.
double spectral_radius_bound(const Potential& q);

/// Throws a configuration error naming solver.substeps when the fine step
/// tau / substeps violates the leapfrog stability bound.
void check_cfl(const Potential& q, double tau, const SolverSettings& settings);

/// y = A_h u with Neumann mirror ghost nodes.
void apply_operator(const Potential& q, const Field& u, Field& y);

/// Leapfrog propagation of one initial condition. Calls on_sample(k, u) for
/// k = 0..samples-1 at times k tau.
void propagate(const Potential& q, const Field& g, double tau, std::size_t samples,
               const SolverSettings& settings, InitialCondition ic,
               const std::function<void(std::size_t, const Field&)>& on_sample);

/// Snapshots of source `source` at k tau, k = 0..samples-1.
SnapshotSet simulate_snapshots(const Potential& q, const SourceSet& sources, std::size_t source,
                               const TimeAxis& axis, const SolverSettings& settings,
                               InitialCondition ic, std::size_t samples);

/// Transfer data for k = 0..2n-2. SISO fills the diagonal only.
TransferData simulate_transfer(const Potential& q, const SourceSet& sources, const TimeAxis& axis,
                               const SolverSettings& settings, AcquisitionMode mode);

/// Adds Gaussian noise with standard deviation eta * RMS(measured entries) to
/// every measured entry. Lifted and absent entries are left alone.
TransferData add_noise(const TransferData& data, double eta, std::uint64_t seed);

}  // namespace lsl
