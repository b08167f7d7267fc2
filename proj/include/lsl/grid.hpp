#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <cstddef>

namespace lsl {

/// Nodal field values in row-major order: index = iy * nodes_x() + ix.
using Field = Eigen::VectorXd;

/// Uniform rectangular grid of nx-by-ny cells, i.e. (nx+1)-by-(ny+1) nodes.
/// The y axis points into the medium; y = origin.y is the acquisition side.
class Grid2D {
public:
    Grid2D() : Grid2D(2, 2, 1.0, 1.0) {}
    Grid2D(std::size_t nx, std::size_t ny, double hx, double hy, double origin_x = 0.0,
           double origin_y = 0.0);

    /// Grid covering [x0, x0+width] x [y0, y0+height] with nx-by-ny cells.
    static Grid2D covering(double width, double height, std::size_t nx, std::size_t ny,
                           double origin_x = 0.0, double origin_y = 0.0);

    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    double hx() const { return hx_; }
    double hy() const { return hy_; }
    double origin_x() const { return ox_; }
    double origin_y() const { return oy_; }
    double width() const { return hx_ * static_cast<double>(nx_); }
    double height() const { return hy_ * static_cast<double>(ny_); }

    std::size_t nodes_x() const { return nx_ + 1; }
    std::size_t nodes_y() const { return ny_ + 1; }
    std::size_t size() const { return nodes_x() * nodes_y(); }
    std::size_t index(std::size_t ix, std::size_t iy) const { return iy * nodes_x() + ix; }

    double x(std::size_t ix) const { return ox_ + hx_ * static_cast<double>(ix); }
    double y(std::size_t iy) const { return oy_ + hy_ * static_cast<double>(iy); }

    /// Trapezoidal quadrature weights: hx*hy inside, halved on faces, quartered at corners.
    const Eigen::VectorXd& weights() const { return weights_; }

    Field zeros() const { return Field::Zero(static_cast<Eigen::Index>(size())); }
    Field constant(double c) const { return Field::Constant(static_cast<Eigen::Index>(size()), c); }

    template <class F>
    Field sample(F&& f) const {
        Field out(static_cast<Eigen::Index>(size()));
        for (std::size_t iy = 0; iy < nodes_y(); ++iy)
            for (std::size_t ix = 0; ix < nodes_x(); ++ix)
                out[static_cast<Eigen::Index>(index(ix, iy))] = f(x(ix), y(iy));
        return out;
    }

    bool same_as(const Grid2D& other) const;

private:
    std::size_t nx_, ny_;
    double hx_, hy_, ox_, oy_;
    Eigen::VectorXd weights_;
};

/// Discrete L2 inner product with trapezoidal weights.
double inner_product(const Grid2D& grid, const Field& f, const Field& g);

/// Integer refinement ratio of `fine` over `coarse`; throws a configuration
/// error when the coarse nodes are not a sub-lattice of the fine nodes.
std::size_t refinement_ratio(const Grid2D& fine, const Grid2D& coarse);

/// The inversion grid obtained by coarsening `fine` by `ratio` in both directions.
Grid2D coarsen(const Grid2D& fine, std::size_t ratio);

/// Pointwise injection onto the coarse nodes.
Field restrict_field(const Grid2D& fine, const Field& f, const Grid2D& coarse);

/// Bilinear interpolation from the coarse nodes onto the fine nodes.
Field prolong_field(const Grid2D& coarse, const Field& q, const Grid2D& fine);

/// Sparse fine-by-coarse matrix P with prolong_field(q) == P * q.
Eigen::SparseMatrix<double> prolongation_matrix(const Grid2D& coarse, const Grid2D& fine);

}  // namespace lsl
