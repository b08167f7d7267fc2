#pragma once

#include <lsl/grid.hpp>

#include <Eigen/Core>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lsl {

/// Scattering potential q sampled on a grid. Reconstructions may be negative.
struct Potential {
    Grid2D grid;
    Field values;

    static Potential zero(const Grid2D& grid) { return {grid, grid.zeros()}; }
    double max() const { return values.size() ? values.maxCoeff() : 0.0; }
    double min() const { return values.size() ? values.minCoeff() : 0.0; }

    /// True when q >= 0 everywhere and q == 0 within `margin` of the boundary.
    bool is_admissible_truth(double margin) const;
};

/// Gaussian sources g_i(x) = a exp(-|x - x_i|^2 / (2 sigma^2)), cut to zero
/// outside a disc of radius 6 sigma.
class SourceSet {
public:
    static constexpr double support_radius_in_widths = 6.0;

    SourceSet(std::vector<std::array<double, 2>> centers, double width, double amplitude);

    /// `count` sources evenly spaced on [x_begin, x_end] at depth `depth` below y = y0.
    static SourceSet along_line(std::size_t count, double x_begin, double x_end, double y0,
                                double depth, double width, double amplitude);

    std::size_t size() const { return centers_.size(); }
    const std::array<double, 2>& center(std::size_t i) const { return centers_.at(i); }
    const std::vector<std::array<double, 2>>& centers() const { return centers_; }
    double width() const { return width_; }
    double amplitude() const { return amplitude_; }

    double value(std::size_t i, double x, double y) const;
    Field sample(std::size_t i, const Grid2D& grid) const;

private:
    std::vector<std::array<double, 2>> centers_;
    double width_;
    double amplitude_;
};

/// Sampling interval tau and ROM half-length n; data samples k = 0..2n-2.
struct TimeAxis {
    double tau;
    std::size_t n;

    TimeAxis(double tau_, std::size_t n_);
    std::size_t data_samples() const { return 2 * n - 1; }
};

enum class SnapshotKind : std::uint8_t {
    truth = 0,
    background = 1,
    background_antiderivative = 2,
    data_generated = 3
};

/// Time samples u_k = u(k tau) of one source's field, stored as columns.
struct SnapshotSet {
    Grid2D grid;
    std::size_t source = 0;
    double tau = 0.0;
    SnapshotKind kind = SnapshotKind::truth;
    Eigen::MatrixXd samples;  // grid.size() rows, one column per time sample

    std::size_t count() const { return static_cast<std::size_t>(samples.cols()); }
    Field sample(std::size_t k) const { return samples.col(static_cast<Eigen::Index>(k)); }
};

enum class EntryMask : std::uint8_t { absent = 0, measured = 1, lifted = 2 };

/// Matrix-valued transfer function F[i][j][k] = <g_j, u^{(i)}(k tau)> with a
/// provenance mask per (i, j) pair.
class TransferData {
public:
    TransferData(std::size_t sources, std::size_t samples, double tau);

    std::size_t sources() const { return k_; }
    std::size_t samples() const { return t_; }
    double tau() const { return tau_; }

    EntryMask mask(std::size_t i, std::size_t j) const { return mask_[i * k_ + j]; }
    void set_mask(std::size_t i, std::size_t j, EntryMask m) { mask_[i * k_ + j] = m; }

    double& at(std::size_t i, std::size_t j, std::size_t k) { return values_[(i * k_ + j) * t_ + k]; }
    double at(std::size_t i, std::size_t j, std::size_t k) const {
        return values_[(i * k_ + j) * t_ + k];
    }
    std::span<double> series(std::size_t i, std::size_t j) {
        return {values_.data() + (i * k_ + j) * t_, t_};
    }
    std::span<const double> series(std::size_t i, std::size_t j) const {
        return {values_.data() + (i * k_ + j) * t_, t_};
    }

    /// K-by-K matrix of all entries at sample k (absent entries read as zero).
    Eigen::MatrixXd at_time(std::size_t k) const;

    bool diagonal_measured() const;
    bool complete() const;  // no absent entries
    std::size_t count(EntryMask m) const;

    /// Copy keeping the first `samples` time samples.
    TransferData truncated(std::size_t samples) const;

    /// Copy with lifted entries cleared to absent and zeroed.
    TransferData measured_only() const;

    const std::vector<double>& raw() const { return values_; }
    const std::vector<EntryMask>& raw_mask() const { return mask_; }

    friend bool operator==(const TransferData&, const TransferData&) = default;

private:
    std::size_t k_, t_;
    double tau_;
    std::vector<EntryMask> mask_;
    std::vector<double> values_;
};

}  // namespace lsl
