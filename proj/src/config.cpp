#include <lsl/config.hpp>
#include <lsl/error.hpp>

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <utility>

namespace lsl {

using nlohmann::json;

namespace {

// Ramp from 1 (d <= 0) to 0 (d >= width), C1 across both ends.
double taper(double d, double width) {
    if (d <= 0.0) return 1.0;
    if (width <= 0.0 || d >= width) return 0.0;
    const double c = std::cos(0.5 * std::numbers::pi * d / width);
    return c * c;
}

class Section {
public:
    Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw configuration_error(path_ + ": expected an object");
    }

    void allow(std::initializer_list<const char*> keys) const {
        std::set<std::string> known(keys.begin(), keys.end());
        for (const auto& item : node_.items())
            if (!known.count(item.key()))
                throw configuration_error(key(item.key()) + ": unknown key");
    }
    bool has(const char* name) const { return node_.contains(name); }
    std::string key(const std::string& name) const { return path_.empty() ? name : path_ + "." + name; }
    const json& raw(const char* name) const { return node_.at(name); }

    Section child(const char* name) const {
        static const json empty = json::object();
        return has(name) ? Section(node_.at(name), key(name)) : Section(empty, key(name));
    }

    void get(const char* name, double& out) const {
        if (!has(name)) return;
        const json& v = node_.at(name);
        if (!v.is_number()) throw configuration_error(key(name) + ": expected a number");
        out = v.get<double>();
        if (!std::isfinite(out)) throw configuration_error(key(name) + ": must be finite");
    }
    void get(const char* name, std::size_t& out) const {
        if (!has(name)) return;
        const json& v = node_.at(name);
        if (!v.is_number_integer() || v.get<long long>() < 0)
            throw configuration_error(key(name) + ": expected a nonnegative integer");
        out = v.get<std::size_t>();
    }
    void get(const char* name, std::uint64_t& out, int) const {
        if (!has(name)) return;
        const json& v = node_.at(name);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            throw configuration_error(key(name) + ": expected an unsigned integer");
        out = v.get<std::uint64_t>();
    }
    void get(const char* name, bool& out) const {
        if (!has(name)) return;
        const json& v = node_.at(name);
        if (!v.is_boolean()) throw configuration_error(key(name) + ": expected true or false");
        out = v.get<bool>();
    }
    void get(const char* name, std::string& out) const {
        if (!has(name)) return;
        const json& v = node_.at(name);
        if (!v.is_string()) throw configuration_error(key(name) + ": expected a string");
        out = v.get<std::string>();
    }
    std::array<double, 2> pair(const json& v, const std::string& where) const {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            throw configuration_error(where + ": expected [x, y]");
        return {v[0].get<double>(), v[1].get<double>()};
    }

private:
    const json& node_;
    std::string path_;
};

Inclusion parse_inclusion(const Section& s) {
    s.allow({"shape", "center", "size", "amplitude", "smoothing"});
    Inclusion inc;
    std::string shape = "rectangle";
    s.get("shape", shape);
    if (shape == "rectangle")
        inc.shape = Inclusion::Shape::rectangle;
    else if (shape == "ellipse")
        inc.shape = Inclusion::Shape::ellipse;
    else
        throw configuration_error(s.key("shape") + ": expected \"rectangle\" or \"ellipse\"");
    if (!s.has("center") || !s.has("size") || !s.has("amplitude"))
        throw configuration_error(s.key("center") + ": inclusions need center, size and amplitude");
    const auto c = s.pair(s.raw("center"), s.key("center"));
    const auto z = s.pair(s.raw("size"), s.key("size"));
    inc.center_x = c[0];
    inc.center_y = c[1];
    inc.size_x = z[0];
    inc.size_y = z[1];
    s.get("amplitude", inc.amplitude);
    s.get("smoothing", inc.smoothing);
    if (!(inc.size_x > 0.0 && inc.size_y > 0.0)) throw configuration_error(s.key("size") + ": must be positive");
    if (inc.amplitude < 0.0) throw configuration_error(s.key("amplitude") + ": q must be nonnegative");
    if (inc.smoothing < 0.0) throw configuration_error(s.key("smoothing") + ": must be nonnegative");
    return inc;
}

}  // namespace

double Inclusion::value(double x, double y) const {
    const double dx = x - center_x, dy = y - center_y;
    if (shape == Shape::rectangle) {
        const double ox = std::abs(dx) - 0.5 * size_x;
        const double oy = std::abs(dy) - 0.5 * size_y;
        return amplitude * taper(ox, smoothing) * taper(oy, smoothing);
    }
    const double a = 0.5 * size_x, b = 0.5 * size_y;
    const double rho = std::hypot(dx / a, dy / b);
    return amplitude * taper((rho - 1.0) * std::min(a, b), smoothing);
}

Region Inclusion::bounding_region(double padding, const std::string& name) const {
    const double hx = 0.5 * size_x + smoothing + padding;
    const double hy = 0.5 * size_y + smoothing + padding;
    return {name, center_x - hx, center_x + hx, center_y - hy, center_y + hy};
}

Grid2D ExperimentConfig::simulation_grid() const { return Grid2D::covering(width, height, nx, ny); }

Grid2D ExperimentConfig::inversion_grid() const { return coarsen(simulation_grid(), inversion_ratio); }

SourceSet ExperimentConfig::sources() const {
    if (!source_positions.empty()) return SourceSet(source_positions, source_width, source_amplitude);
    return SourceSet::along_line(source_count, source_x_begin, source_x_end, 0.0, source_depth,
                                 source_width, source_amplitude);
}

TimeAxis ExperimentConfig::axis() const { return TimeAxis(tau, n); }

Potential ExperimentConfig::true_potential() const {
    const Grid2D grid = simulation_grid();
    return {grid, grid.sample([&](double x, double y) {
                double q = 0.0;
                for (const auto& inc : inclusions) q += inc.value(x, y);
                return q;
            })};
}

std::vector<Region> ExperimentConfig::regions() const {
    std::vector<Region> out;
    for (std::size_t i = 0; i < inclusions.size(); ++i)
        out.push_back(inclusions[i].bounding_region(region_padding, "inclusion-" + std::to_string(i)));
    return out;
}

void ExperimentConfig::validate() const {
    if (!(width > 0.0)) throw configuration_error("domain.width: must be positive");
    if (!(height > 0.0)) throw configuration_error("domain.height: must be positive");
    if (nx < 2) throw configuration_error("grid.nx: need at least 2 cells");
    if (ny < 2) throw configuration_error("grid.ny: need at least 2 cells");
    if (inversion_ratio == 0 || nx % inversion_ratio || ny % inversion_ratio ||
        nx / inversion_ratio < 2 || ny / inversion_ratio < 2)
        throw configuration_error("grid.inversion_ratio: must divide grid.nx and grid.ny and leave 2+ cells");
    if (!(tau > 0.0)) throw configuration_error("time.tau: must be positive");
    if (n < 2) throw configuration_error("time.n: must be at least 2");
    if (!(source_width > 0.0)) throw configuration_error("sources.width: must be positive");
    if (source_positions.empty() && source_count == 0)
        throw configuration_error("sources.count: need at least one source");

    const SourceSet src = sources();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const auto& c = src.center(i);
        if (c[0] < 0.0 || c[0] > width || c[1] < 0.0 || c[1] > 3.0 * source_width) {
            std::ostringstream msg;
            msg << (source_positions.empty() ? "sources.depth" : "sources.positions")
                << ": source " << i << " at (" << c[0] << ", " << c[1]
                << ") must lie inside the domain within 3 widths of the acquisition line y = 0";
            throw configuration_error(msg.str());
        }
    }
    for (const auto& [name, t] : {std::pair{"born", thresholds.born}, std::pair{"siso", thresholds.siso},
                                  std::pair{"mimo", thresholds.mimo}})
        if (!(t > 0.0 && t <= 1.0))
            throw configuration_error(std::string("inversion.tsvd_") + name + ": must lie in (0, 1]");
    if (!(solver.noise_level >= 0.0)) throw configuration_error("noise.level: must be nonnegative");
    if (!(model_margin >= 0.0)) throw configuration_error("model.margin: must be nonnegative");

    const Potential q = true_potential();
    if (!q.is_admissible_truth(model_margin))
        throw configuration_error("model.inclusions: potential must vanish within model.margin of the boundary");
    check_cfl(q, tau, solver);

    std::size_t length = n;
    for (std::size_t it = 0; it < iterations; ++it) {
        length = block_count(length);
        if (length < 2)
            throw configuration_error("inversion.iterations: " + std::to_string(iterations) +
                                      " halvings exhaust time.n = " + std::to_string(n));
    }
}

ExperimentConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw configuration_error(std::string("config: not valid JSON: ") + e.what());
    }
    const Section top(root, "");
    top.allow({"domain", "grid", "sources", "time", "solver", "inversion", "noise", "model", "output"});

    ExperimentConfig c;
    const Section domain = top.child("domain");
    domain.allow({"width", "height"});
    domain.get("width", c.width);
    domain.get("height", c.height);

    const Section grid = top.child("grid");
    grid.allow({"nx", "ny", "inversion_ratio"});
    grid.get("nx", c.nx);
    grid.get("ny", c.ny);
    grid.get("inversion_ratio", c.inversion_ratio);

    const Section src = top.child("sources");
    src.allow({"count", "x_begin", "x_end", "depth", "width", "amplitude", "positions"});
    src.get("count", c.source_count);
    src.get("x_begin", c.source_x_begin);
    src.get("x_end", c.source_x_end);
    src.get("depth", c.source_depth);
    src.get("width", c.source_width);
    src.get("amplitude", c.source_amplitude);
    if (src.has("positions")) {
        const json& list = src.raw("positions");
        if (!list.is_array()) throw configuration_error("sources.positions: expected a list of [x, y]");
        for (std::size_t i = 0; i < list.size(); ++i)
            c.source_positions.push_back(src.pair(list[i], "sources.positions[" + std::to_string(i) + "]"));
        c.source_count = c.source_positions.size();
    }

    const Section time = top.child("time");
    time.allow({"tau", "n"});
    time.get("tau", c.tau);
    time.get("n", c.n);

    const Section solver = top.child("solver");
    solver.allow({"substeps", "cfl_safety"});
    solver.get("substeps", c.solver.substeps);
    solver.get("cfl_safety", c.solver.cfl_safety);

    const Section inv = top.child("inversion");
    inv.allow({"tsvd_born", "tsvd_siso", "tsvd_mimo", "iterations", "positivity"});
    inv.get("tsvd_born", c.thresholds.born);
    inv.get("tsvd_siso", c.thresholds.siso);
    inv.get("tsvd_mimo", c.thresholds.mimo);
    inv.get("iterations", c.iterations);
    inv.get("positivity", c.positivity);

    const Section noise = top.child("noise");
    noise.allow({"level", "seed"});
    noise.get("level", c.solver.noise_level);
    noise.get("seed", c.solver.seed, 0);

    const Section model = top.child("model");
    model.allow({"margin", "region_padding", "inclusions"});
    model.get("margin", c.model_margin);
    model.get("region_padding", c.region_padding);
    if (model.has("inclusions")) {
        const json& list = model.raw("inclusions");
        if (!list.is_array()) throw configuration_error("model.inclusions: expected a list");
        for (std::size_t i = 0; i < list.size(); ++i)
            c.inclusions.push_back(parse_inclusion(Section(list[i], "model.inclusions[" + std::to_string(i) + "]")));
    }

    const Section output = top.child("output");
    output.allow({"dir"});
    std::string dir = c.output_dir.string();
    output.get("dir", dir);
    c.output_dir = dir;

    c.validate();
    return c;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace lsl
