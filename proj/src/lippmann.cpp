#include <lsl/error.hpp>
#include <lsl/lippmann.hpp>
#include <lsl/parallel.hpp>

#include <Eigen/SVD>
#include <Eigen/SparseCore>
#include <string>

namespace lsl {

Field convolution_kernel(const SnapshotSet& antiderivative, const SnapshotSet& field, std::size_t k) {
    Field kernel = Field::Zero(field.samples.rows());
    if (k == 0) return kernel;
    for (std::size_t l = 0; l <= k; ++l)
        kernel.array() += trapezoid_weight(l, k) *
                          antiderivative.samples.col(static_cast<Eigen::Index>(k - l)).array() *
                          field.samples.col(static_cast<Eigen::Index>(l)).array();
    return field.tau * kernel;
}

namespace {

void check_pairing(const std::vector<SnapshotSet>& antiderivatives,
                   const std::vector<SnapshotSet>& fields, std::size_t samples) {
    if (fields.empty() || fields.size() != antiderivatives.size())
        throw dimension_error("lippmann: need one field and one antiderivative set per source");
    for (std::size_t j = 0; j < fields.size(); ++j) {
        const auto& f = fields[j];
        const auto& w = antiderivatives[j];
        if (f.count() < samples || w.count() < samples)
            throw dimension_error("lippmann: source " + std::to_string(j) + " has fewer than " +
                                  std::to_string(samples) + " snapshots");
        if (!f.grid.same_as(w.grid) || f.samples.rows() != w.samples.rows())
            throw dimension_error("lippmann: fields and antiderivatives live on different grids");
        if (f.tau != w.tau)
            throw dimension_error("lippmann: fields and antiderivatives use different time axes");
    }
}

}  // namespace

LSSystem assemble_system(const std::vector<SnapshotSet>& antiderivatives,
                         const std::vector<SnapshotSet>& fields, const TransferData& data,
                         const TransferData& background_data, const Grid2D& inversion_grid,
                         double threshold) {
    if (fields.empty()) throw dimension_error("assemble_system: no fields");
    const std::size_t samples = fields.front().count();
    check_pairing(antiderivatives, fields, samples);
    const std::size_t count = fields.size();
    if (data.sources() != count || background_data.sources() != count)
        throw dimension_error("assemble_system: source counts of data and fields differ");
    if (!data.diagonal_measured())
        throw precondition_error("assemble_system: measured diagonal data is required");
    for (std::size_t j = 0; j < count; ++j)
        if (background_data.mask(j, j) == EntryMask::absent)
            throw precondition_error("assemble_system: background diagonal missing");
    if (data.samples() < samples || background_data.samples() < samples)
        throw dimension_error("assemble_system: data shorter than the fields");
    if (data.tau() != fields.front().tau || background_data.tau() != fields.front().tau)
        throw dimension_error("assemble_system: time axis of data and fields differ");
    if (samples < 2) throw dimension_error("assemble_system: need at least two time samples");

    const Grid2D& field_grid = fields.front().grid;
    const Eigen::SparseMatrix<double> p = prolongation_matrix(inversion_grid, field_grid);
    const Eigen::SparseMatrix<double> pt = p.transpose();

    const std::size_t per_source = samples - 1;
    LSSystem sys;
    sys.grid = inversion_grid;
    sys.threshold = threshold;
    sys.matrix.resize(static_cast<Eigen::Index>(count * per_source),
                      static_cast<Eigen::Index>(inversion_grid.size()));
    sys.rhs.resize(static_cast<Eigen::Index>(count * per_source));
    sys.rows.resize(count * per_source);

    parallel_for(count, [&](std::size_t j) {
        for (std::size_t k = 1; k < samples; ++k) {
            const auto r = static_cast<Eigen::Index>(j * per_source + (k - 1));
            const Field weighted =
                field_grid.weights().cwiseProduct(convolution_kernel(antiderivatives[j], fields[j], k));
            sys.matrix.row(r) = (pt * weighted).transpose();
            sys.rhs[r] = background_data.at(j, j, k) - data.at(j, j, k);
            sys.rows[static_cast<std::size_t>(r)] = {j, k};
        }
    });
    return sys;
}

TsvdSolution solve_tsvd(const LSSystem& system) {
    if (system.matrix.rows() != system.rhs.size())
        throw dimension_error("solve_tsvd: rhs length does not match the system");
    if (system.matrix.cols() != static_cast<Eigen::Index>(system.grid.size()))
        throw dimension_error("solve_tsvd: column count does not match the inversion grid");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(system.matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    const double smax = s.size() ? s[0] : 0.0;
    Eigen::Index rank = 0;
    while (rank < s.size() && s[rank] > 0.0 && s[rank] >= system.threshold * smax) ++rank;
    if (rank == 0)
        throw numerical_error("solve_tsvd: every singular value was truncated (threshold " +
                              std::to_string(system.threshold) + ")");

    const Eigen::VectorXd coeff =
        (svd.matrixU().leftCols(rank).transpose() * system.rhs).cwiseQuotient(s.head(rank));
    TsvdSolution out;
    out.q = {system.grid, svd.matrixV().leftCols(rank) * coeff};
    out.rank = static_cast<std::size_t>(rank);
    out.singular_values = s;
    return out;
}

Eigen::VectorXd lift_residual(const SnapshotSet& field, const SnapshotSet& antiderivative,
                              const Field& q_on_field_grid, std::size_t samples) {
    const auto n = static_cast<Eigen::Index>(samples);
    const Eigen::MatrixXd weighted =
        field.grid.weights().cwiseProduct(q_on_field_grid).asDiagonal() * field.samples.leftCols(n);
    const Eigen::MatrixXd corr = antiderivative.samples.leftCols(n).transpose() * weighted;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 1; k < samples; ++k) {
        double acc = 0.0;
        for (std::size_t l = 0; l <= k; ++l)
            acc += trapezoid_weight(l, k) *
                   corr(static_cast<Eigen::Index>(k - l), static_cast<Eigen::Index>(l));
        out[static_cast<Eigen::Index>(k)] = field.tau * acc;
    }
    return out;
}

TransferData forward_lift(const std::vector<SnapshotSet>& fields, const Potential& q_estimate,
                          const std::vector<SnapshotSet>& antiderivatives,
                          const TransferData& background_data, const TransferData& measured,
                          std::size_t samples) {
    check_pairing(antiderivatives, fields, samples);
    const std::size_t count = fields.size();
    if (background_data.sources() != count || measured.sources() != count)
        throw dimension_error("forward_lift: source counts of data and fields differ");
    if (background_data.samples() < samples || measured.samples() < samples)
        throw dimension_error("forward_lift: data shorter than the requested lift length");
    if (!measured.diagonal_measured())
        throw precondition_error("forward_lift: measured diagonal data is required");
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < count; ++j)
            if (i != j && background_data.mask(i, j) == EntryMask::absent)
                throw precondition_error("forward_lift: background off-diagonal data missing for pair (" +
                                         std::to_string(i) + ", " + std::to_string(j) + ")");

    const Grid2D& field_grid = fields.front().grid;
    const Field q = q_estimate.grid.same_as(field_grid)
                        ? q_estimate.values
                        : prolong_field(q_estimate.grid, q_estimate.values, field_grid);

    TransferData out(count, samples, measured.tau());
    for (std::size_t i = 0; i < count; ++i) {
        out.set_mask(i, i, EntryMask::measured);
        auto src = measured.series(i, i);
        std::copy_n(src.begin(), samples, out.series(i, i).begin());
    }
    parallel_for(count * count, [&](std::size_t pair) {
        const std::size_t i = pair / count, j = pair % count;
        if (i == j) return;
        const Eigen::VectorXd residual = lift_residual(fields[i], antiderivatives[j], q, samples);
        for (std::size_t k = 0; k < samples; ++k)
            out.at(i, j, k) = background_data.at(i, j, k) - residual[static_cast<Eigen::Index>(k)];
    });
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < count; ++j)
            if (i != j) out.set_mask(i, j, EntryMask::lifted);
    return out;
}

}  // namespace lsl
