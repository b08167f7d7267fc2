#pragma once

#include <lsl/model.hpp>

#include <Eigen/Core>
#include <span>
#include <vector>

namespace lsl {

struct Regularization {
    bool applied = false;
    double epsilon = 0.0;
    double lambda_min_positive = 0.0;
    double lambda_max_positive = 0.0;
};

/// Gram matrix of snapshots, either scalar (block_size 1) or made of
/// block_size-by-block_size blocks ordered time-major.
struct MassMatrix {
    Eigen::MatrixXd values;
    std::size_t block_size = 1;
    std::size_t blocks = 0;
    Regularization regularization;

    std::size_t dim() const { return static_cast<std::size_t>(values.rows()); }
};

/// Upper-triangular Cholesky factor with M = U^T U.
struct OrthogonalizedBasis {
    Eigen::MatrixXd upper;
    std::size_t block_size = 1;
    std::size_t blocks = 0;
    double tau = 0.0;

    std::size_t dim() const { return static_cast<std::size_t>(upper.rows()); }
};

/// M_kl = (F((k-l) tau) + F((k+l) tau)) / 2 for k, l = 0..n-1.
MassMatrix siso_mass_from_data(std::span<const double> f, std::size_t n);

/// Number of block rows the block mass formula yields from n lifted samples.
constexpr std::size_t block_count(std::size_t n) { return (n - 1) / 2 + 1; }

/// Block mass matrix with block (k, l) = (F_{|k-l|} + F_{k+l}) / 2 for
/// k, l = 0..floor((n-1)/2), each F_k symmetrized first.
MassMatrix block_mass_from_data(const TransferData& data, std::size_t n);

/// Symmetrizes M and lifts every eigenvalue below
/// eps0 = sqrt(1e-12 * lambda_max+ * lambda_min+) up to eps0.
MassMatrix regularize_spd(const MassMatrix& m);

/// Throws a numerical error when M is not numerically positive definite.
OrthogonalizedBasis cholesky_upper(const MassMatrix& m, double tau = 0.0);

/// Cholesky, falling back to regularize_spd when the plain factorization fails.
OrthogonalizedBasis cholesky_or_regularize(const MassMatrix& m, double tau,
                                           Regularization* applied = nullptr);

/// Columns of bg * U0^{-1} * U. `background` holds one snapshot per column
/// in the same order as the factors.
Eigen::MatrixXd synthesize_columns(const OrthogonalizedBasis& data_basis,
                                   const OrthogonalizedBasis& background_basis,
                                   const Eigen::MatrixXd& background);

/// SISO form: one background set, one data-generated set.
SnapshotSet synthesize_internal(const OrthogonalizedBasis& data_basis,
                                const OrthogonalizedBasis& background_basis,
                                const SnapshotSet& background);

/// MIMO form: background sets for all K sources, columns interleaved
/// time-major (block row k holds sources 0..K-1 at k tau).
std::vector<SnapshotSet> synthesize_internal(const OrthogonalizedBasis& data_basis,
                                             const OrthogonalizedBasis& background_basis,
                                             const std::vector<SnapshotSet>& background);

/// Direct Gram matrix of snapshot columns under the grid inner product.
Eigen::MatrixXd snapshot_gram(const Grid2D& grid, const Eigen::MatrixXd& columns);

/// Stacks the first `blocks` samples of each set time-major.
Eigen::MatrixXd interleave_time_major(const std::vector<SnapshotSet>& sets, std::size_t blocks);

}  // namespace lsl
