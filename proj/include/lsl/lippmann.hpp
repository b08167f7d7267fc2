#pragma once

#include <lsl/model.hpp>

#include <Eigen/Core>
#include <utility>
#include <vector>

namespace lsl {

/// Linearized time-domain Lippmann-Schwinger system G q = r over the
/// inversion-grid nodes. Row (j, k) pairs source j with sample k >= 1.
struct LSSystem {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd rhs;
    std::vector<std::pair<std::size_t, std::size_t>> rows;  // (source, time index)
    Grid2D grid;                                            // inversion grid
    double threshold = 1e-2;                                // relative TSVD cut
};

/// Trapezoidal weight of sample l in a convolution over [0, k tau].
inline double trapezoid_weight(std::size_t l, std::size_t k) {
    return (l == 0 || l == k) ? 0.5 : 1.0;
}

/// tau * sum_l omega_l w0_{k-l}(x) u_l(x): the space-time kernel of the
/// Lippmann-Schwinger integral at time k tau, on the field grid.
Field convolution_kernel(const SnapshotSet& antiderivative, const SnapshotSet& field,
                         std::size_t k);

/// Assembles rows for every source j and k = 1..N-1, where N is the number
/// of field samples. The kernel is evaluated on the field grid and mapped
/// onto inversion nodes through the adjoint of bilinear prolongation, so
/// that G q equals the field-grid integral against prolong(q). The rhs
/// F0^{jj} - F^{jj} reads measured diagonal entries only.
LSSystem assemble_system(const std::vector<SnapshotSet>& antiderivatives,
                         const std::vector<SnapshotSet>& fields, const TransferData& data,
                         const TransferData& background_data, const Grid2D& inversion_grid,
                         double threshold);

struct TsvdSolution {
    Potential q;
    std::size_t rank = 0;
    Eigen::VectorXd singular_values;
};

/// Minimum-norm solution keeping singular values >= threshold * sigma_max.
TsvdSolution solve_tsvd(const LSSystem& system);

/// F0^{ij}(k tau) - F^{ij}(k tau) predicted by the Lippmann-Schwinger integral
/// for field i and antiderivative j, k = 0..samples-1; q on the field grid.
Eigen::VectorXd lift_residual(const SnapshotSet& field, const SnapshotSet& antiderivative,
                              const Field& q_on_field_grid, std::size_t samples);

/// Completes the data: off-diagonals F0^{ij} - residual(i, j), diagonals
/// copied from the measured data. Output has `samples` time samples.
/// q_estimate may live on any grid the field grid refines.
TransferData forward_lift(const std::vector<SnapshotSet>& fields, const Potential& q_estimate,
                          const std::vector<SnapshotSet>& antiderivatives,
                          const TransferData& background_data, const TransferData& measured,
                          std::size_t samples);

}  // namespace lsl
