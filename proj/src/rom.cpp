#include <lsl/error.hpp>
#include <lsl/rom.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <string>

namespace lsl {

MassMatrix siso_mass_from_data(std::span<const double> f, std::size_t n) {
    if (n == 0 || f.size() < 2 * n - 1)
        throw dimension_error("siso_mass_from_data: need " + std::to_string(2 * n - 1) +
                              " samples, got " + std::to_string(f.size()));
    MassMatrix m;
    m.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) {
            const std::size_t diff = k > l ? k - l : l - k;
            m.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) =
                0.5 * (f[diff] + f[k + l]);
        }
    m.block_size = 1;
    m.blocks = n;
    return m;
}

MassMatrix block_mass_from_data(const TransferData& data, std::size_t n) {
    if (!data.complete())
        throw precondition_error("block_mass_from_data: transfer data has absent entries");
    if (n == 0 || n > data.samples())
        throw dimension_error("block_mass_from_data: need " + std::to_string(n) + " samples, have " +
                              std::to_string(data.samples()));
    const std::size_t blocks = block_count(n);
    const auto kk = static_cast<Eigen::Index>(data.sources());

    std::vector<Eigen::MatrixXd> f(2 * blocks - 1);
    for (std::size_t t = 0; t < f.size(); ++t) {
        const Eigen::MatrixXd raw = data.at_time(t);
        f[t] = 0.5 * (raw + raw.transpose());
    }
    MassMatrix m;
    m.values.resize(kk * static_cast<Eigen::Index>(blocks), kk * static_cast<Eigen::Index>(blocks));
    for (std::size_t k = 0; k < blocks; ++k)
        for (std::size_t l = 0; l < blocks; ++l) {
            const std::size_t diff = k > l ? k - l : l - k;
            m.values.block(static_cast<Eigen::Index>(k) * kk, static_cast<Eigen::Index>(l) * kk, kk,
                           kk) = 0.5 * (f[diff] + f[k + l]);
        }
    m.block_size = data.sources();
    m.blocks = blocks;
    return m;
}

MassMatrix regularize_spd(const MassMatrix& m) {
    if (m.values.rows() != m.values.cols() || m.values.rows() == 0)
        throw dimension_error("regularize_spd: matrix must be square and nonempty");
    const Eigen::MatrixXd sym = 0.5 * (m.values + m.values.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    if (eig.info() != Eigen::Success)
        throw numerical_error("regularize_spd: symmetric eigensolver did not converge");

    Eigen::VectorXd lambda = eig.eigenvalues();
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double v : lambda)
        if (v > 0.0) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (!(hi > 0.0))
        throw numerical_error("regularize_spd: degenerate data, mass matrix has no positive eigenvalue");

    const double eps = std::sqrt(1e-12 * hi * lo);
    for (auto& v : lambda) v = std::max(v, eps);

    MassMatrix out;
    out.values = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
    out.values = 0.5 * (out.values + out.values.transpose());
    out.block_size = m.block_size;
    out.blocks = m.blocks;
    out.regularization = {true, eps, lo, hi};
    return out;
}

OrthogonalizedBasis cholesky_upper(const MassMatrix& m, double tau) {
    if (m.values.rows() != m.values.cols() || m.values.rows() == 0)
        throw dimension_error("cholesky_upper: matrix must be square and nonempty");
    Eigen::LLT<Eigen::MatrixXd> llt(m.values);
    OrthogonalizedBasis basis;
    if (llt.info() == Eigen::Success) basis.upper = llt.matrixU();
    const bool ok = llt.info() == Eigen::Success && basis.upper.allFinite() &&
                    (basis.upper.diagonal().array() > 0.0).all();
    if (!ok)
        throw numerical_error("cholesky_upper: mass matrix is not numerically positive definite; "
                              "apply regularize_spd first");
    basis.block_size = m.block_size;
    basis.blocks = m.blocks;
    basis.tau = tau;
    return basis;
}

OrthogonalizedBasis cholesky_or_regularize(const MassMatrix& m, double tau, Regularization* applied) {
    try {
        auto basis = cholesky_upper(m, tau);
        if (applied) *applied = m.regularization;
        return basis;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::numerical) throw;
    }
    const MassMatrix reg = regularize_spd(m);
    if (applied) *applied = reg.regularization;
    return cholesky_upper(reg, tau);
}

Eigen::MatrixXd synthesize_columns(const OrthogonalizedBasis& data_basis,
                                   const OrthogonalizedBasis& background_basis,
                                   const Eigen::MatrixXd& background) {
    if (data_basis.dim() != background_basis.dim() ||
        static_cast<std::size_t>(background.cols()) != data_basis.dim())
        throw dimension_error("synthesize_internal: factor sizes " + std::to_string(data_basis.dim()) +
                              ", " + std::to_string(background_basis.dim()) + " and " +
                              std::to_string(background.cols()) + " background snapshots disagree");
    if (data_basis.block_size != background_basis.block_size)
        throw dimension_error("synthesize_internal: block structures differ");
    const Eigen::MatrixXd transform =
        background_basis.upper.triangularView<Eigen::Upper>().solve(data_basis.upper);
    return background * transform.triangularView<Eigen::Upper>();
}

SnapshotSet synthesize_internal(const OrthogonalizedBasis& data_basis,
                                const OrthogonalizedBasis& background_basis,
                                const SnapshotSet& background) {
    if (data_basis.block_size != 1)
        throw dimension_error("synthesize_internal: SISO form needs scalar factors");
    if (background.count() < data_basis.dim())
        throw dimension_error("synthesize_internal: too few background snapshots");
    SnapshotSet out;
    out.grid = background.grid;
    out.source = background.source;
    out.tau = background.tau;
    out.kind = SnapshotKind::data_generated;
    out.samples = synthesize_columns(data_basis, background_basis,
                                     background.samples.leftCols(static_cast<Eigen::Index>(data_basis.dim())));
    return out;
}

Eigen::MatrixXd interleave_time_major(const std::vector<SnapshotSet>& sets, std::size_t blocks) {
    if (sets.empty()) throw dimension_error("interleave_time_major: no snapshot sets");
    const auto rows = static_cast<Eigen::Index>(sets.front().grid.size());
    const std::size_t k = sets.size();
    Eigen::MatrixXd out(rows, static_cast<Eigen::Index>(k * blocks));
    for (std::size_t i = 0; i < k; ++i) {
        if (sets[i].count() < blocks || sets[i].samples.rows() != rows)
            throw dimension_error("interleave_time_major: snapshot set " + std::to_string(i) +
                                  " is too short or on another grid");
        for (std::size_t t = 0; t < blocks; ++t)
            out.col(static_cast<Eigen::Index>(t * k + i)) = sets[i].samples.col(static_cast<Eigen::Index>(t));
    }
    return out;
}

std::vector<SnapshotSet> synthesize_internal(const OrthogonalizedBasis& data_basis,
                                             const OrthogonalizedBasis& background_basis,
                                             const std::vector<SnapshotSet>& background) {
    const std::size_t k = background.size();
    if (k == 0 || data_basis.block_size != k)
        throw dimension_error("synthesize_internal: block size does not match the source count");
    const std::size_t blocks = data_basis.dim() / k;
    const Eigen::MatrixXd columns =
        synthesize_columns(data_basis, background_basis, interleave_time_major(background, blocks));
    std::vector<SnapshotSet> out(k);
    for (std::size_t i = 0; i < k; ++i) {
        out[i].grid = background[i].grid;
        out[i].source = background[i].source;
        out[i].tau = background[i].tau;
        out[i].kind = SnapshotKind::data_generated;
        out[i].samples.resize(columns.rows(), static_cast<Eigen::Index>(blocks));
        for (std::size_t t = 0; t < blocks; ++t)
            out[i].samples.col(static_cast<Eigen::Index>(t)) = columns.col(static_cast<Eigen::Index>(t * k + i));
    }
    return out;
}

Eigen::MatrixXd snapshot_gram(const Grid2D& grid, const Eigen::MatrixXd& columns) {
    if (columns.rows() != static_cast<Eigen::Index>(grid.size()))
        throw dimension_error("snapshot_gram: snapshots do not match the grid");
    return columns.transpose() * grid.weights().asDiagonal() * columns;
}

}  // namespace lsl
