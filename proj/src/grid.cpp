#include <lsl/error.hpp>
#include <lsl/grid.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace lsl {

Grid2D::Grid2D(std::size_t nx, std::size_t ny, double hx, double hy, double origin_x,
               double origin_y)
    : nx_(nx), ny_(ny), hx_(hx), hy_(hy), ox_(origin_x), oy_(origin_y) {
    if (nx < 2 || ny < 2)
        throw configuration_error("grid: need at least 2 cells per direction, got " +
                                  std::to_string(nx) + "x" + std::to_string(ny));
    if (!(hx > 0.0) || !(hy > 0.0) || !std::isfinite(hx) || !std::isfinite(hy))
        throw configuration_error("grid: spacing must be positive and finite");

    weights_.resize(static_cast<Eigen::Index>(size()));
    for (std::size_t iy = 0; iy < nodes_y(); ++iy) {
        const double wy = (iy == 0 || iy == ny_) ? 0.5 : 1.0;
        for (std::size_t ix = 0; ix < nodes_x(); ++ix) {
            const double wx = (ix == 0 || ix == nx_) ? 0.5 : 1.0;
            weights_[static_cast<Eigen::Index>(index(ix, iy))] = wx * wy * hx_ * hy_;
        }
    }
}

Grid2D Grid2D::covering(double width, double height, std::size_t nx, std::size_t ny,
                        double origin_x, double origin_y) {
    if (nx == 0 || ny == 0) throw configuration_error("grid: cell count must be positive");
    return Grid2D(nx, ny, width / static_cast<double>(nx), height / static_cast<double>(ny),
                  origin_x, origin_y);
}

bool Grid2D::same_as(const Grid2D& o) const {
    return nx_ == o.nx_ && ny_ == o.ny_ && hx_ == o.hx_ && hy_ == o.hy_ && ox_ == o.ox_ &&
           oy_ == o.oy_;
}

double inner_product(const Grid2D& grid, const Field& f, const Field& g) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    if (f.size() != n || g.size() != n)
        throw dimension_error("inner_product: field sizes " + std::to_string(f.size()) + ", " +
                              std::to_string(g.size()) + " do not match grid size " +
                              std::to_string(n));
    return (grid.weights().array() * f.array() * g.array()).sum();
}

namespace {

bool close(double a, double b, double scale) { return std::abs(a - b) <= 1e-9 * scale; }

}  // namespace

std::size_t refinement_ratio(const Grid2D& fine, const Grid2D& coarse) {
    const double scale = std::max(fine.width(), fine.height());
    const double rx = coarse.hx() / fine.hx();
    const auto ratio = static_cast<std::size_t>(std::llround(rx));
    const bool nested =
        ratio >= 1 && close(rx, static_cast<double>(ratio), 1.0) &&
        close(coarse.hy() / fine.hy(), static_cast<double>(ratio), 1.0) &&
        fine.nx() == coarse.nx() * ratio && fine.ny() == coarse.ny() * ratio &&
        close(fine.origin_x(), coarse.origin_x(), scale) &&
        close(fine.origin_y(), coarse.origin_y(), scale);
    if (!nested)
        throw configuration_error("grid: inversion grid " + std::to_string(coarse.nx()) + "x" +
                                  std::to_string(coarse.ny()) + " is not nested in " +
                                  std::to_string(fine.nx()) + "x" + std::to_string(fine.ny()));
    return ratio;
}

Grid2D coarsen(const Grid2D& fine, std::size_t ratio) {
    if (ratio == 0 || fine.nx() % ratio != 0 || fine.ny() % ratio != 0)
        throw configuration_error("grid.inversion_ratio: " + std::to_string(ratio) +
                                  " does not divide the simulation grid");
    return Grid2D(fine.nx() / ratio, fine.ny() / ratio, fine.hx() * static_cast<double>(ratio),
                  fine.hy() * static_cast<double>(ratio), fine.origin_x(), fine.origin_y());
}

Field restrict_field(const Grid2D& fine, const Field& f, const Grid2D& coarse) {
    const std::size_t r = refinement_ratio(fine, coarse);
    if (f.size() != static_cast<Eigen::Index>(fine.size()))
        throw dimension_error("restrict: field does not match the fine grid");
    Field out(static_cast<Eigen::Index>(coarse.size()));
    for (std::size_t iy = 0; iy < coarse.nodes_y(); ++iy)
        for (std::size_t ix = 0; ix < coarse.nodes_x(); ++ix)
            out[static_cast<Eigen::Index>(coarse.index(ix, iy))] =
                f[static_cast<Eigen::Index>(fine.index(ix * r, iy * r))];
    return out;
}

namespace {

// Coarse neighbours and bilinear weights of one fine node.
struct Stencil {
    std::size_t index[4];
    double weight[4];
};

Stencil stencil(const Grid2D& coarse, std::size_t r, std::size_t fx, std::size_t fy) {
    const std::size_t cx = std::min(fx / r, coarse.nx() - 1);
    const std::size_t cy = std::min(fy / r, coarse.ny() - 1);
    const double tx = static_cast<double>(fx - cx * r) / static_cast<double>(r);
    const double ty = static_cast<double>(fy - cy * r) / static_cast<double>(r);
    return {{coarse.index(cx, cy), coarse.index(cx + 1, cy), coarse.index(cx, cy + 1),
             coarse.index(cx + 1, cy + 1)},
            {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty}};
}

}  // namespace

Field prolong_field(const Grid2D& coarse, const Field& q, const Grid2D& fine) {
    const std::size_t r = refinement_ratio(fine, coarse);
    if (q.size() != static_cast<Eigen::Index>(coarse.size()))
        throw dimension_error("prolong: field does not match the coarse grid");
    Field out(static_cast<Eigen::Index>(fine.size()));
    for (std::size_t fy = 0; fy < fine.nodes_y(); ++fy)
        for (std::size_t fx = 0; fx < fine.nodes_x(); ++fx) {
            const Stencil s = stencil(coarse, r, fx, fy);
            double v = 0.0;
            for (int m = 0; m < 4; ++m)
                if (s.weight[m] != 0.0) v += s.weight[m] * q[static_cast<Eigen::Index>(s.index[m])];
            out[static_cast<Eigen::Index>(fine.index(fx, fy))] = v;
        }
    return out;
}

Eigen::SparseMatrix<double> prolongation_matrix(const Grid2D& coarse, const Grid2D& fine) {
    const std::size_t r = refinement_ratio(fine, coarse);
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(fine.size() * 4);
    for (std::size_t fy = 0; fy < fine.nodes_y(); ++fy)
        for (std::size_t fx = 0; fx < fine.nodes_x(); ++fx) {
            const Stencil s = stencil(coarse, r, fx, fy);
            for (int m = 0; m < 4; ++m)
                if (s.weight[m] != 0.0)
                    entries.emplace_back(static_cast<int>(fine.index(fx, fy)),
                                         static_cast<int>(s.index[m]), s.weight[m]);
        }
    Eigen::SparseMatrix<double> p(static_cast<Eigen::Index>(fine.size()),
                                  static_cast<Eigen::Index>(coarse.size()));
    p.setFromTriplets(entries.begin(), entries.end());
    return p;
}

}  // namespace lsl
