#include <lsl/error.hpp>
#include <lsl/model.hpp>

#include <cmath>
#include <string>

namespace lsl {

bool Potential::is_admissible_truth(double margin) const {
    for (std::size_t iy = 0; iy < grid.nodes_y(); ++iy)
        for (std::size_t ix = 0; ix < grid.nodes_x(); ++ix) {
            const double v = values[static_cast<Eigen::Index>(grid.index(ix, iy))];
            if (!(v >= 0.0)) return false;
            const double dx = std::min(grid.x(ix) - grid.origin_x(),
                                       grid.origin_x() + grid.width() - grid.x(ix));
            const double dy = std::min(grid.y(iy) - grid.origin_y(),
                                       grid.origin_y() + grid.height() - grid.y(iy));
            if (std::min(dx, dy) < margin && v != 0.0) return false;
        }
    return true;
}

SourceSet::SourceSet(std::vector<std::array<double, 2>> centers, double width, double amplitude)
    : centers_(std::move(centers)), width_(width), amplitude_(amplitude) {
    if (centers_.empty()) throw configuration_error("sources.count: need at least one source");
    if (!(width > 0.0)) throw configuration_error("sources.width: must be positive");
    if (!(amplitude != 0.0) || !std::isfinite(amplitude))
        throw configuration_error("sources.amplitude: must be finite and nonzero");
}

SourceSet SourceSet::along_line(std::size_t count, double x_begin, double x_end, double y0,
                                double depth, double width, double amplitude) {
    std::vector<std::array<double, 2>> centers;
    for (std::size_t i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(count - 1);
        centers.push_back({x_begin + t * (x_end - x_begin), y0 + depth});
    }
    return SourceSet(std::move(centers), width, amplitude);
}

double SourceSet::value(std::size_t i, double x, double y) const {
    const auto& c = centers_.at(i);
    const double r2 = (x - c[0]) * (x - c[0]) + (y - c[1]) * (y - c[1]);
    const double cutoff = support_radius_in_widths * width_;
    if (r2 > cutoff * cutoff) return 0.0;
    return amplitude_ * std::exp(-r2 / (2.0 * width_ * width_));
}

Field SourceSet::sample(std::size_t i, const Grid2D& grid) const {
    return grid.sample([&](double x, double y) { return value(i, x, y); });
}

TimeAxis::TimeAxis(double tau_, std::size_t n_) : tau(tau_), n(n_) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw configuration_error("time.tau: must be positive");
    if (n < 2) throw configuration_error("time.n: must be at least 2");
}

TransferData::TransferData(std::size_t sources, std::size_t samples, double tau)
    : k_(sources), t_(samples), tau_(tau), mask_(sources * sources, EntryMask::absent),
      values_(sources * sources * samples, 0.0) {
    if (sources == 0 || samples == 0)
        throw dimension_error("transfer data: need at least one source and one sample");
}

Eigen::MatrixXd TransferData::at_time(std::size_t k) const {
    Eigen::MatrixXd f(static_cast<Eigen::Index>(k_), static_cast<Eigen::Index>(k_));
    for (std::size_t i = 0; i < k_; ++i)
        for (std::size_t j = 0; j < k_; ++j)
            f(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = at(i, j, k);
    return f;
}

bool TransferData::diagonal_measured() const {
    for (std::size_t i = 0; i < k_; ++i)
        if (mask(i, i) != EntryMask::measured) return false;
    return true;
}

bool TransferData::complete() const { return count(EntryMask::absent) == 0; }

std::size_t TransferData::count(EntryMask m) const {
    std::size_t c = 0;
    for (auto v : mask_) c += (v == m);
    return c;
}

TransferData TransferData::truncated(std::size_t samples) const {
    if (samples > t_ || samples == 0)
        throw dimension_error("transfer data: cannot truncate " + std::to_string(t_) + " samples to " +
                              std::to_string(samples));
    TransferData out(k_, samples, tau_);
    out.mask_ = mask_;
    for (std::size_t p = 0; p < k_ * k_; ++p)
        for (std::size_t k = 0; k < samples; ++k) out.values_[p * samples + k] = values_[p * t_ + k];
    return out;
}

TransferData TransferData::measured_only() const {
    TransferData out = *this;
    for (std::size_t p = 0; p < k_ * k_; ++p)
        if (out.mask_[p] == EntryMask::lifted) {
            out.mask_[p] = EntryMask::absent;
            std::fill_n(out.values_.begin() + static_cast<std::ptrdiff_t>(p * t_), t_, 0.0);
        }
    return out;
}

}  // namespace lsl
