// Command-line front end: simulate data, invert, lift, run the full pipeline,
// compare against a truth field and render images.

#include <lsl/config.hpp>
#include <lsl/error.hpp>
#include <lsl/io.hpp>
#include <lsl/parallel.hpp>
#include <lsl/pipeline.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace lsl;

namespace {

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::string out;
};

ExperimentConfig load_config(const Globals& g) {
    if (g.config.empty()) throw configuration_error("--config: required for this command");
    ExperimentConfig cfg = parse_config(g.config);
    if (g.seed) cfg.solver.seed = *g.seed;
    if (!g.out.empty()) cfg.output_dir = g.out;
    return cfg;
}

fs::path out_dir(const Globals& g, const ExperimentConfig* cfg = nullptr) {
    const fs::path dir = !g.out.empty() ? fs::path(g.out) : cfg ? cfg->output_dir : fs::path("out");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw io_error("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

fs::path or_default(const std::string& given, const fs::path& fallback) {
    return given.empty() ? fallback : fs::path(given);
}

// Measured monostatic data, with noise when the config asks for it.
TransferData measured_data(const ExperimentConfig& cfg) {
    TransferData d = simulate_transfer(cfg.true_potential(), cfg.sources(), cfg.axis(), cfg.solver,
                                       AcquisitionMode::siso);
    if (cfg.solver.noise_level > 0.0) d = add_noise(d, cfg.solver.noise_level, cfg.solver.seed);
    return d;
}

Background load_background(const ExperimentConfig& cfg, const fs::path& dir) {
    Background bg{cfg.simulation_grid(),
                  cfg.inversion_grid(),
                  cfg.sources(),
                  cfg.axis(),
                  load_transfer(dir / "background.lslt"),
                  load_snapshots(dir / "u0.lsls"),
                  load_snapshots(dir / "w0.lsls")};
    auto check = [&](const std::vector<SnapshotSet>& sets, const char* name) {
        if (sets.size() != bg.sources.size())
            throw dimension_error(std::string(name) + ": source count does not match the config");
        for (const auto& s : sets)
            if (!s.grid.same_as(bg.simulation_grid) || s.count() < bg.axis.n || s.tau != bg.axis.tau)
                throw dimension_error(std::string(name) + ": snapshots do not match the config");
    };
    check(bg.fields, "u0.lsls");
    check(bg.antiderivatives, "w0.lsls");
    if (bg.data.sources() != bg.sources.size() || !bg.data.complete())
        throw dimension_error("background.lslt: expected complete data for every source pair");
    check_compatible(bg, bg.data);
    return bg;
}

void write_report(const fs::path& path, const PipelineState& state) {
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& r : state.log) {
        nlohmann::json s{{"stage", r.name}, {"time_samples", r.time_samples}, {"rank", r.rank}};
        if (r.error) {
            s["relative_l2"] = r.error->relative_l2;
            for (const auto& e : r.error->regions)
                s["regions"][e.name] = {{"relative_l2", e.relative_l2}, {"peak_offset", e.peak_offset}};
        }
        if (r.regularization && r.regularization->applied) s["regularization_epsilon"] = r.regularization->epsilon;
        stages.push_back(std::move(s));
    }
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    out << nlohmann::json{{"schedule", state.schedule}, {"stages", stages}}.dump(2) << "\n";
}

int cmd_simulate(const Globals& g) {
    const ExperimentConfig cfg = load_config(g);
    const fs::path dir = out_dir(g, &cfg);
    const Potential truth = cfg.true_potential();
    save_field(dir / "truth.lslf", truth.grid, truth.values);
    save_transfer(dir / "data.lslt", measured_data(cfg));
    save_transfer(dir / "data_mimo.lslt",
                  simulate_transfer(truth, cfg.sources(), cfg.axis(), cfg.solver, AcquisitionMode::mimo));

    const Background bg = make_background(cfg.simulation_grid(), cfg.inversion_ratio, cfg.sources(),
                                          cfg.axis(), cfg.solver);
    save_transfer(dir / "background.lslt", bg.data);
    save_snapshots(dir / "u0.lsls", bg.fields);
    save_snapshots(dir / "w0.lsls", bg.antiderivatives);
    std::cout << "wrote data and background artifacts to " << dir.string() << "\n";
    return 0;
}

struct InvertArgs {
    std::string method = "lsl";
    std::string data, completed, q_out, fields_out;
    std::optional<double> threshold;
};

int cmd_invert(const Globals& g, const InvertArgs& a) {
    const ExperimentConfig cfg = load_config(g);
    const fs::path dir = out_dir(g, &cfg);
    const Background bg = load_background(cfg, dir);
    const TransferData data = load_transfer(or_default(a.data, dir / "data.lslt"));

    StepResult r;
    std::string stage;
    if (a.method == "born") {
        if (!a.completed.empty()) throw configuration_error("--completed: only used with --method lsl");
        r = run_born(data, bg, a.threshold.value_or(cfg.thresholds.born));
        stage = "born";
    } else if (a.completed.empty()) {
        r = run_siso_step(data, bg, a.threshold.value_or(cfg.thresholds.siso));
        stage = "siso";
    } else {
        r = run_mimo_step(load_transfer(a.completed), data, bg, a.threshold.value_or(cfg.thresholds.mimo));
        stage = "mimo";
    }
    if (cfg.positivity) clamp_nonnegative(r.q);

    const fs::path q_path = or_default(a.q_out, dir / ("q_" + a.method + ".lslf"));
    save_field(q_path, r.q.grid, r.q.values);
    save_snapshots(or_default(a.fields_out, dir / ("fields_" + a.method + ".lsls")), r.fields);
    const ErrorReport e = metrics(r.q, cfg.true_potential(), cfg.regions());
    std::cout << stage << ": rank " << r.rank << ", relative L2 error " << e.relative_l2 << ", wrote "
              << q_path.string() << "\n";
    return 0;
}

struct LiftArgs {
    std::string data, q, fields, lifted_out;
};

int cmd_lift(const Globals& g, const LiftArgs& a) {
    const ExperimentConfig cfg = load_config(g);
    const fs::path dir = out_dir(g, &cfg);
    const Background bg = load_background(cfg, dir);
    const TransferData data = load_transfer(or_default(a.data, dir / "data.lslt"));
    const Potential q = load_field(or_default(a.q, dir / "q_lsl.lslf"));
    const std::vector<SnapshotSet> fields = load_snapshots(or_default(a.fields, dir / "fields_lsl.lsls"));
    if (fields.empty()) throw dimension_error("lift: no internal fields");
    check_compatible(bg, data);

    const std::size_t samples = fields.front().count();
    const TransferData lifted = forward_lift(fields, q, bg.antiderivatives, bg.data, data, samples);
    const fs::path path = or_default(a.lifted_out, dir / "lifted.lslt");
    save_transfer(path, lifted);
    std::cout << "lifted " << lifted.count(EntryMask::lifted) << " pairs over " << samples
              << " samples, wrote " << path.string() << "\n";
    return 0;
}

int cmd_pipeline(const Globals& g, std::optional<std::size_t> iterations) {
    ExperimentConfig cfg = load_config(g);
    if (iterations) {
        cfg.iterations = *iterations;
        cfg.validate();
    }
    const fs::path dir = out_dir(g, &cfg);
    const Potential truth = cfg.true_potential();
    const TransferData data = measured_data(cfg);
    const Background bg = make_background(cfg.simulation_grid(), cfg.inversion_ratio, cfg.sources(),
                                          cfg.axis(), cfg.solver);

    AlgorithmOptions options;
    options.iterations = cfg.iterations;
    options.thresholds = cfg.thresholds;
    options.positivity = cfg.positivity;
    options.truth = &truth;
    options.regions = cfg.regions();
    const PipelineState state = run_algorithm(data, bg, options);

    save_field(dir / "q_pipeline.lslf", state.q.grid, state.q.values);
    write_report(dir / "report.json", state);
    for (const auto& r : state.log)
        std::cout << r.name << ": N = " << r.time_samples << ", rank " << r.rank << ", relative L2 error "
                  << r.error->relative_l2 << "\n";
    return 0;
}

int cmd_compare(const Globals& g, const std::string& estimate, const std::string& truth_path) {
    const Potential est = load_field(estimate);
    const Potential truth = load_field(truth_path);
    std::vector<Region> regions;
    if (!g.config.empty()) regions = load_config(g).regions();
    const ErrorReport e = metrics(est, truth, regions);
    nlohmann::json j{{"relative_l2", e.relative_l2}, {"absolute_l2", e.absolute_l2}};
    for (const auto& r : e.regions)
        j["regions"][r.name] = {{"relative_l2", r.relative_l2}, {"peak_offset", r.peak_offset}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_render(const std::string& field, const std::string& image, ClipPercentiles clip) {
    const Potential q = load_field(field);
    const fs::path path = image.empty() ? fs::path(field).replace_extension(".pgm") : fs::path(image);
    render_pgm(q.grid, q.values, path, clip);
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lippmann-Schwinger-Lanczos imaging with ROM data completion"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config, "Experiment config (JSON)");
    app.add_option("--seed", g.seed, "Noise seed, overrides noise.seed");
    app.add_option("--threads", g.threads, "Worker thread cap (0 = hardware)");
    app.add_option("--out", g.out, "Output directory, overrides output.dir");

    auto* simulate = app.add_subcommand("simulate", "Simulate measured data and background artifacts");

    InvertArgs inv;
    auto* invert = app.add_subcommand("invert", "Born or LSL inversion of the measured data");
    invert->add_option("--method", inv.method)->check(CLI::IsMember({"born", "lsl"}));
    invert->add_option("--data", inv.data, "Measured data (default <out>/data.lslt)");
    invert->add_option("--completed", inv.completed, "Lifted data; selects the block ROM step");
    invert->add_option("--threshold", inv.threshold, "Relative TSVD threshold");
    invert->add_option("--q-out", inv.q_out, "Estimate (default <out>/q_<method>.lslf)");
    invert->add_option("--fields-out", inv.fields_out, "Internal fields (default <out>/fields_<method>.lsls)");

    LiftArgs lift_args;
    auto* lift = app.add_subcommand("lift", "Complete the off-diagonal data");
    lift->add_option("--data", lift_args.data, "Measured data (default <out>/data.lslt)");
    lift->add_option("--q", lift_args.q, "Estimate (default <out>/q_lsl.lslf)");
    lift->add_option("--fields", lift_args.fields, "Internal fields (default <out>/fields_lsl.lsls)");
    lift->add_option("--lifted-out", lift_args.lifted_out, "Output (default <out>/lifted.lslt)");

    std::optional<std::size_t> iterations;
    auto* pipeline = app.add_subcommand("pipeline", "Simulate and run the full algorithm");
    pipeline->add_option("--iterations", iterations, "Lift/ROM rounds, overrides inversion.iterations");

    std::string estimate, truth;
    auto* compare = app.add_subcommand("compare", "Error of an estimate against a truth field");
    compare->add_option("estimate", estimate, "Estimate (LSLF)")->required();
    compare->add_option("--truth", truth, "Truth (LSLF)")->required();

    std::string field, image;
    ClipPercentiles clip;
    auto* render = app.add_subcommand("render", "Render a field as a 16-bit PGM");
    render->add_option("field", field, "Field (LSLF)")->required();
    render->add_option("--image", image, "Output image (default: field path with .pgm)");
    render->add_option("--clip-low", clip.low, "Lower clip percentile");
    render->add_option("--clip-high", clip.high, "Upper clip percentile");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_code(ErrorKind::configuration);
    }

    try {
        set_max_threads(g.threads);
        if (*simulate) return cmd_simulate(g);
        if (*invert) return cmd_invert(g, inv);
        if (*lift) return cmd_lift(g, lift_args);
        if (*pipeline) return cmd_pipeline(g, iterations);
        if (*compare) return cmd_compare(g, estimate, truth);
        if (*render) return cmd_render(field, image, clip);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
