#include <lsl/error.hpp>
#include <lsl/parallel.hpp>
#include <lsl/pipeline.hpp>

#include <cmath>
#include <limits>
#include <string>

namespace lsl {

Background make_background(const Grid2D& simulation_grid, std::size_t inversion_ratio,
                           const SourceSet& sources, const TimeAxis& axis,
                           const SolverSettings& settings) {
    const Potential zero = Potential::zero(simulation_grid);
    const std::size_t count = sources.size();
    Background bg{simulation_grid,
                  coarsen(simulation_grid, inversion_ratio),
                  sources,
                  axis,
                  simulate_transfer(zero, sources, axis, settings, AcquisitionMode::mimo),
                  std::vector<SnapshotSet>(count),
                  std::vector<SnapshotSet>(count)};
    parallel_for(2 * count, [&](std::size_t task) {
        const std::size_t i = task % count;
        if (task < count)
            bg.fields[i] = simulate_snapshots(zero, sources, i, axis, settings,
                                              InitialCondition::cosine, axis.n);
        else
            bg.antiderivatives[i] = simulate_snapshots(zero, sources, i, axis, settings,
                                                       InitialCondition::antiderivative, axis.n);
    });
    return bg;
}

void check_compatible(const Background& bg, const TransferData& data) {
    if (data.sources() != bg.sources.size())
        throw dimension_error("data has " + std::to_string(data.sources()) +
                              " sources, background has " + std::to_string(bg.sources.size()));
    if (data.tau() != bg.axis.tau) throw dimension_error("data and background use different tau");
    if (data.samples() < bg.axis.data_samples())
        throw dimension_error("data has " + std::to_string(data.samples()) + " samples, need " +
                              std::to_string(bg.axis.data_samples()));
    if (!data.diagonal_measured())
        throw precondition_error("data: every diagonal entry must be measured");
}

namespace {

// Compares on the coarser of the two grids.
std::pair<Potential, Potential> on_common_grid(const Potential& est, const Potential& truth) {
    if (est.grid.same_as(truth.grid)) return {est, truth};
    try {
        refinement_ratio(truth.grid, est.grid);
        return {est, {est.grid, restrict_field(truth.grid, truth.values, est.grid)}};
    } catch (const Error&) {
    }
    refinement_ratio(est.grid, truth.grid);
    return {{truth.grid, restrict_field(est.grid, est.values, truth.grid)}, truth};
}

double weighted_norm(const Grid2D& grid, const Field& f) { return std::sqrt(inner_product(grid, f, f)); }

}  // namespace

ErrorReport metrics(const Potential& q_estimate, const Potential& q_true,
                    const std::vector<Region>& regions) {
    const auto [est, truth] = on_common_grid(q_estimate, q_true);
    const Grid2D& grid = truth.grid;
    const Field diff = est.values - truth.values;
    const double truth_norm = weighted_norm(grid, truth.values);

    ErrorReport report;
    report.absolute_l2 = weighted_norm(grid, diff);
    report.relative_l2 = truth_norm > 0.0 ? report.absolute_l2 / truth_norm
                                          : std::numeric_limits<double>::infinity();
    for (const Region& region : regions) {
        const Field inside = grid.sample([&](double x, double y) { return region.contains(x, y) ? 1.0 : 0.0; });
        const double num = weighted_norm(grid, diff.cwiseProduct(inside));
        const double den = weighted_norm(grid, truth.values.cwiseProduct(inside));
        RegionError e{region.name, den > 0.0 ? num / den : std::numeric_limits<double>::infinity(), 0.0};

        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t iy = 0; iy < grid.nodes_y(); ++iy)
            for (std::size_t ix = 0; ix < grid.nodes_x(); ++ix) {
                if (!region.contains(grid.x(ix), grid.y(iy))) continue;
                const double v = est.values[static_cast<Eigen::Index>(grid.index(ix, iy))];
                if (v > best) {
                    best = v;
                    e.peak_offset = std::hypot(grid.x(ix) - 0.5 * (region.x_min + region.x_max),
                                               grid.y(iy) - 0.5 * (region.y_min + region.y_max));
                }
            }
        report.regions.push_back(e);
    }
    return report;
}

StepResult run_born(const TransferData& data, const Background& bg, double threshold) {
    check_compatible(bg, data);
    const LSSystem sys =
        assemble_system(bg.antiderivatives, bg.fields, data, bg.data, bg.inversion_grid, threshold);
    TsvdSolution sol = solve_tsvd(sys);
    return {std::move(sol.q), bg.fields, sol.rank};
}

StepResult run_siso_step(const TransferData& data, const Background& bg, double threshold) {
    check_compatible(bg, data);
    const std::size_t n = bg.axis.n;
    const std::size_t count = bg.sources.size();
    std::vector<SnapshotSet> fields(count);
    parallel_for(count, [&](std::size_t j) {
        const auto basis = cholesky_or_regularize(siso_mass_from_data(data.series(j, j), n), bg.axis.tau);
        const auto background =
            cholesky_or_regularize(siso_mass_from_data(bg.data.series(j, j), n), bg.axis.tau);
        fields[j] = synthesize_internal(basis, background, bg.fields[j]);
    });
    const LSSystem sys =
        assemble_system(bg.antiderivatives, fields, data, bg.data, bg.inversion_grid, threshold);
    TsvdSolution sol = solve_tsvd(sys);
    return {std::move(sol.q), std::move(fields), sol.rank};
}

PipelineState initial_state(const TransferData& data, const Background& bg, StepResult siso) {
    PipelineState state{0, data, std::move(siso.fields), std::move(siso.q), bg.axis.n, {bg.axis.n}, {}};
    state.log.push_back({"siso", bg.axis.n, siso.rank, std::nullopt, std::nullopt});
    return state;
}

PipelineState run_lift_step(const PipelineState& state, const TransferData& measured,
                            const Background& bg) {
    PipelineState next = state;
    next.current = forward_lift(state.fields, state.q, bg.antiderivatives, bg.data, measured,
                                state.active_length);
    return next;
}

StepResult run_mimo_step(const TransferData& completed, const TransferData& measured,
                         const Background& bg, double threshold, Regularization* regularization) {
    check_compatible(bg, measured);
    if (!completed.complete())
        throw precondition_error("run_mimo_step: completed data still has absent entries");
    const std::size_t length = completed.samples();
    const std::size_t blocks = block_count(length);
    if (blocks < 2)
        throw configuration_error("iterations: time axis exhausted, " + std::to_string(length) +
                                  " samples leave fewer than 2 ROM blocks");

    const MassMatrix mass = regularize_spd(block_mass_from_data(completed, length));
    if (regularization) *regularization = mass.regularization;
    const OrthogonalizedBasis basis = cholesky_upper(mass, bg.axis.tau);
    const OrthogonalizedBasis background =
        cholesky_or_regularize(block_mass_from_data(bg.data, length), bg.axis.tau);
    std::vector<SnapshotSet> fields = synthesize_internal(basis, background, bg.fields);

    const LSSystem sys =
        assemble_system(bg.antiderivatives, fields, measured, bg.data, bg.inversion_grid, threshold);
    TsvdSolution sol = solve_tsvd(sys);
    return {std::move(sol.q), std::move(fields), sol.rank};
}

void clamp_nonnegative(Potential& q) { q.values = q.values.cwiseMax(0.0); }

PipelineState run_algorithm(const TransferData& data, const Background& bg,
                            const AlgorithmOptions& options) {
    StepResult siso = run_siso_step(data, bg, options.thresholds.siso);
    if (options.positivity) clamp_nonnegative(siso.q);
    PipelineState state = initial_state(data, bg, std::move(siso));
    if (options.truth) state.log.back().error = metrics(state.q, *options.truth, options.regions);

    for (std::size_t it = 1; it <= options.iterations; ++it) {
        if (block_count(state.active_length) < 2)
            throw configuration_error("iterations: time axis exhausted after " +
                                      std::to_string(it - 1) + " iterations (N = " +
                                      std::to_string(state.active_length) + ")");
        PipelineState lifted = run_lift_step(state, data, bg);
        Regularization reg;
        StepResult mimo = run_mimo_step(lifted.current, data, bg, options.thresholds.mimo, &reg);
        if (options.positivity) clamp_nonnegative(mimo.q);

        state = std::move(lifted);
        state.iteration = it;
        state.fields = std::move(mimo.fields);
        state.q = std::move(mimo.q);
        state.active_length = block_count(state.current.samples());
        state.schedule.push_back(state.active_length);
        StageRecord record{"mimo-" + std::to_string(it), state.active_length, mimo.rank, std::nullopt, reg};
        if (options.truth) record.error = metrics(state.q, *options.truth, options.regions);
        state.log.push_back(std::move(record));
    }
    return state;
}

}  // namespace lsl
