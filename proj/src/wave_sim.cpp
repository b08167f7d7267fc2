#include <lsl/error.hpp>
#include <lsl/parallel.hpp>
#include <lsl/wave_sim.hpp>

#include <cmath>
#include <random>
#include <sstream>

namespace lsl {

double spectral_radius_bound(const Potential& q) {
    const Grid2D& g = q.grid;
    return 4.0 / (g.hx() * g.hx()) + 4.0 / (g.hy() * g.hy()) + std::max(0.0, q.max());
}

void check_cfl(const Potential& q, double tau, const SolverSettings& settings) {
    if (settings.substeps == 0) throw configuration_error("solver.substeps: must be at least 1");
    if (!(settings.cfl_safety > 0.0) || settings.cfl_safety > 1.0)
        throw configuration_error("solver.cfl_safety: must lie in (0, 1]");
    const double dt = tau / static_cast<double>(settings.substeps);
    const double lhs = dt * dt * spectral_radius_bound(q);
    const double rhs = 4.0 * settings.cfl_safety * settings.cfl_safety;
    if (!(lhs < rhs)) {
        const double needed = std::ceil(tau * std::sqrt(spectral_radius_bound(q)) /
                                        (2.0 * settings.cfl_safety));
        std::ostringstream msg;
        msg << "solver.substeps: fine step " << dt << " violates the stability bound (dt^2 rho = "
            << lhs << " >= " << rhs << "); use at least " << static_cast<long long>(needed) + 1
            << " substeps per tau";
        throw configuration_error(msg.str());
    }
}

void apply_operator(const Potential& q, const Field& u, Field& y) {
    const Grid2D& g = q.grid;
    const std::size_t nx = g.nodes_x(), ny = g.nodes_y();
    const double cx = 1.0 / (g.hx() * g.hx()), cy = 1.0 / (g.hy() * g.hy());
    y.resize(u.size());
    const double* in = u.data();
    const double* qv = q.values.data();
    double* out = y.data();
    for (std::size_t iy = 0; iy < ny; ++iy) {
        const std::size_t up = iy == 0 ? 1 : iy - 1;
        const std::size_t down = iy == ny - 1 ? ny - 2 : iy + 1;
        const double* row = in + iy * nx;
        const double* row_up = in + up * nx;
        const double* row_down = in + down * nx;
        double* dst = out + iy * nx;
        const double* qrow = qv + iy * nx;
        {
            const double c = row[0];
            dst[0] = cx * (2.0 * c - 2.0 * row[1]) + cy * (2.0 * c - row_up[0] - row_down[0]) +
                     qrow[0] * c;
        }
        for (std::size_t ix = 1; ix + 1 < nx; ++ix) {
            const double c = row[ix];
            dst[ix] = cx * (2.0 * c - row[ix - 1] - row[ix + 1]) +
                      cy * (2.0 * c - row_up[ix] - row_down[ix]) + qrow[ix] * c;
        }
        {
            const std::size_t ix = nx - 1;
            const double c = row[ix];
            dst[ix] = cx * (2.0 * c - 2.0 * row[ix - 1]) +
                      cy * (2.0 * c - row_up[ix] - row_down[ix]) + qrow[ix] * c;
        }
    }
}

void propagate(const Potential& q, const Field& g, double tau, std::size_t samples,
               const SolverSettings& settings, InitialCondition ic,
               const std::function<void(std::size_t, const Field&)>& on_sample) {
    if (q.values.size() != static_cast<Eigen::Index>(q.grid.size()) || g.size() != q.values.size())
        throw dimension_error("propagate: source and potential must live on the same grid");
    if (q.min() < 0.0) throw domain_error("propagate: potential must be nonnegative");
    check_cfl(q, tau, settings);
    if (samples == 0) return;

    const std::size_t p = settings.substeps;
    const double dt = tau / static_cast<double>(p);
    const double dt2 = dt * dt;

    Field prev, curr, next, au;
    apply_operator(q, g, au);
    if (ic == InitialCondition::cosine) {
        prev = g;
        curr = g - (0.5 * dt2) * au;
    } else {
        prev = Field::Zero(g.size());
        curr = dt * g - (dt2 * dt / 6.0) * au;
    }
    on_sample(0, prev);
    if (samples == 1) return;
    // prev holds step m-1, curr holds step m.
    std::size_t step = 1;
    const std::size_t last = (samples - 1) * p;
    next.resize(g.size());
    while (true) {
        if (step % p == 0) on_sample(step / p, curr);
        if (step == last) break;
        apply_operator(q, curr, au);
        next = 2.0 * curr - prev - dt2 * au;
        std::swap(prev, curr);
        std::swap(curr, next);
        ++step;
    }
}

SnapshotSet simulate_snapshots(const Potential& q, const SourceSet& sources, std::size_t source,
                               const TimeAxis& axis, const SolverSettings& settings,
                               InitialCondition ic, std::size_t samples) {
    if (source >= sources.size()) throw dimension_error("simulate_snapshots: source out of range");
    SnapshotSet out;
    out.grid = q.grid;
    out.source = source;
    out.tau = axis.tau;
    if (ic == InitialCondition::antiderivative)
        out.kind = SnapshotKind::background_antiderivative;
    else
        out.kind = q.values.isZero(0.0) ? SnapshotKind::background : SnapshotKind::truth;
    out.samples.resize(static_cast<Eigen::Index>(q.grid.size()), static_cast<Eigen::Index>(samples));
    propagate(q, sources.sample(source, q.grid), axis.tau, samples, settings, ic,
              [&](std::size_t k, const Field& u) { out.samples.col(static_cast<Eigen::Index>(k)) = u; });
    return out;
}

TransferData simulate_transfer(const Potential& q, const SourceSet& sources, const TimeAxis& axis,
                               const SolverSettings& settings, AcquisitionMode mode) {
    check_cfl(q, axis.tau, settings);
    if (q.min() < 0.0) throw domain_error("simulate_transfer: potential must be nonnegative");
    const std::size_t count = sources.size();
    const std::size_t samples = axis.data_samples();
    TransferData data(count, samples, axis.tau);

    std::vector<Field> g(count);
    Eigen::MatrixXd weighted(static_cast<Eigen::Index>(q.grid.size()), static_cast<Eigen::Index>(count));
    for (std::size_t j = 0; j < count; ++j) {
        g[j] = sources.sample(j, q.grid);
        weighted.col(static_cast<Eigen::Index>(j)) = q.grid.weights().cwiseProduct(g[j]);
    }
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < count; ++j)
            if (mode == AcquisitionMode::mimo || i == j) data.set_mask(i, j, EntryMask::measured);

    parallel_for(count, [&](std::size_t i) {
        propagate(q, g[i], axis.tau, samples, settings, InitialCondition::cosine,
                  [&](std::size_t k, const Field& u) {
                      if (mode == AcquisitionMode::siso) {
                          data.at(i, i, k) = weighted.col(static_cast<Eigen::Index>(i)).dot(u);
                      } else {
                          for (std::size_t j = 0; j < count; ++j)
                              data.at(i, j, k) = weighted.col(static_cast<Eigen::Index>(j)).dot(u);
                      }
                  });
    });
    return data;
}

TransferData add_noise(const TransferData& data, double eta, std::uint64_t seed) {
    if (!(eta >= 0.0)) throw configuration_error("noise.level: must be nonnegative");
    TransferData out = data;
    if (eta == 0.0) return out;
    const std::size_t count = data.sources(), samples = data.samples();
    double sum2 = 0.0;
    std::size_t entries = 0;
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < count; ++j)
            if (data.mask(i, j) == EntryMask::measured)
                for (double v : data.series(i, j)) {
                    sum2 += v * v;
                    ++entries;
                }
    if (entries == 0) return out;
    const double sigma = eta * std::sqrt(sum2 / static_cast<double>(entries));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < count; ++j)
            if (data.mask(i, j) == EntryMask::measured)
                for (std::size_t k = 0; k < samples; ++k) out.at(i, j, k) += normal(rng);
    return out;
}

}  // namespace lsl
