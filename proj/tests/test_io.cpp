#include <lsl/config.hpp>
#include <lsl/error.hpp>
#include <lsl/io.hpp>
#include <lsl/wave_sim.hpp>

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

using namespace lsl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "lsl_test_io";
    fs::create_directories(dir);
    return dir / (std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" + name);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::string& bytes) {
    std::ofstream(p, std::ios::binary) << bytes;
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::io;
}

TransferData sample_transfer() {
    TransferData d(3, 7, 0.25);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            d.set_mask(i, j, i == j ? EntryMask::measured : (i < j ? EntryMask::lifted : EntryMask::absent));
            if (d.mask(i, j) == EntryMask::absent) continue;
            for (std::size_t k = 0; k < 7; ++k) d.at(i, j, k) = std::sin(1.0 + i + 3.0 * j + 0.1 * k) * 1e3;
        }
    return d;
}

}  // namespace

TEST(FieldFile, RoundTripIsExact) {
    const Grid2D g(6, 4, 0.5, 0.25, -1.0, 2.0);
    const Field f = g.sample([](double x, double y) { return std::exp(x) * std::cos(7.0 * y) / 3.0; });
    const fs::path p = scratch("f.lslf");
    save_field(p, g, f);
    EXPECT_EQ(fs::file_size(p), 4u + 4u + 16u + 32u + 8u * g.size());
    const Potential back = load_field(p);
    EXPECT_TRUE(back.grid.same_as(g));
    EXPECT_EQ(back.values, f);
    EXPECT_EQ(back.grid.origin_x(), -1.0);
    EXPECT_EQ(back.grid.hy(), 0.25);
}

TEST(FieldFile, Corruption) {
    const Grid2D g(4, 4, 1.0, 1.0);
    const fs::path p = scratch("c.lslf");
    save_field(p, g, g.constant(1.0));
    const std::string good = slurp(p);

    std::string bad = good;
    bad[0] = 'X';
    spit(p, bad);
    EXPECT_EQ(kind_of([&] { load_field(p); }), ErrorKind::format);

    spit(p, good.substr(0, good.size() - 3));
    EXPECT_EQ(kind_of([&] { load_field(p); }), ErrorKind::format);

    spit(p, good + "x");
    EXPECT_EQ(kind_of([&] { load_field(p); }), ErrorKind::format);

    bad = good;
    bad[4] = 9;
    spit(p, bad);
    EXPECT_EQ(kind_of([&] { load_field(p); }), ErrorKind::format);

    EXPECT_EQ(kind_of([&] { load_field(scratch("missing.lslf")); }), ErrorKind::io);
}

TEST(FieldFile, EmptyGridRejected) {
    const fs::path p = scratch("e.lslf");
    std::string bytes = "LSLF";
    bytes += std::string("\x01\0\0\0", 4);
    bytes += std::string(16, '\0');
    bytes += std::string(32, '\0');
    spit(p, bytes);
    EXPECT_EQ(kind_of([&] { load_field(p); }), ErrorKind::format);
}

TEST(FieldFile, DimensionMismatchOnSave) {
    const Grid2D g(4, 4, 1.0, 1.0);
    EXPECT_EQ(kind_of([&] { save_field(scratch("d.lslf"), g, Field::Zero(3)); }), ErrorKind::dimension);
}

TEST(FieldFile, Csv) {
    const Grid2D g(2, 2, 1.0, 1.0);
    const fs::path p = scratch("f.csv");
    save_field_csv(p, g, g.sample([](double x, double y) { return x + 10 * y; }));
    EXPECT_EQ(slurp(p), "0,1,2\n10,11,12\n20,21,22\n");
}

TEST(TransferFile, RoundTripKeepsMasks) {
    const TransferData d = sample_transfer();
    const fs::path p = scratch("t.lslt");
    save_transfer(p, d);
    EXPECT_EQ(fs::file_size(p), 4u + 4u + 16u + 8u + 9u + 6u * 7u * 8u);
    EXPECT_EQ(load_transfer(p), d);
}

TEST(TransferFile, Corruption) {
    const fs::path p = scratch("c.lslt");
    save_transfer(p, sample_transfer());
    const std::string good = slurp(p);
    spit(p, good.substr(0, 30));
    EXPECT_EQ(kind_of([&] { load_transfer(p); }), ErrorKind::format);
    std::string bad = good;
    bad[32] = 7;  // first mask byte
    spit(p, bad);
    EXPECT_EQ(kind_of([&] { load_transfer(p); }), ErrorKind::format);
    spit(p, "LSLF" + good.substr(4));
    EXPECT_EQ(kind_of([&] { load_transfer(p); }), ErrorKind::format);
}

TEST(SnapshotFile, RoundTrip) {
    const Grid2D g(5, 3, 0.5, 0.5);
    std::vector<SnapshotSet> sets(2);
    for (std::size_t i = 0; i < 2; ++i) {
        sets[i].grid = g;
        sets[i].source = i + 4;
        sets[i].tau = 0.75;
        sets[i].kind = i ? SnapshotKind::background_antiderivative : SnapshotKind::data_generated;
        sets[i].samples = Eigen::MatrixXd::Random(static_cast<Eigen::Index>(g.size()), 3);
    }
    const fs::path p = scratch("s.lsls");
    save_snapshots(p, sets);
    const auto back = load_snapshots(p);
    ASSERT_EQ(back.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_TRUE(back[i].grid.same_as(g));
        EXPECT_EQ(back[i].source, sets[i].source);
        EXPECT_EQ(back[i].kind, sets[i].kind);
        EXPECT_EQ(back[i].tau, 0.75);
        EXPECT_EQ(back[i].samples, sets[i].samples);
    }
}

TEST(Reciprocity, DetectsCorruptedEntry) {
    const Grid2D g = Grid2D::covering(30.0, 15.0, 30, 15);
    const SourceSet s = SourceSet::along_line(3, 5.0, 25.0, 0.0, 2.0, 1.5, 1.0);
    const Potential q{g, g.sample([](double x, double y) { return 0.1 * (x > 10 && x < 20 && y > 6 && y < 9); })};
    TransferData d = simulate_transfer(q, s, TimeAxis(1.0, 8), SolverSettings{}, AcquisitionMode::mimo);
    EXPECT_LE(reciprocity_defect(d), 1e-10);
    d.at(0, 2, 5) += 1e-3 * std::abs(d.at(0, 0, 0));
    EXPECT_GE(reciprocity_defect(d), 5e-4);
}

TEST(Render, ConstantFieldIsMidGray) {
    const Grid2D g(3, 2, 1.0, 1.0);
    const fs::path p = scratch("c.pgm");
    render_pgm(g, g.constant(4.0), p);
    const std::string bytes = slurp(p);
    const std::string header = "P5\n4 3\n65535\n";
    ASSERT_EQ(bytes.substr(0, header.size()), header);
    ASSERT_EQ(bytes.size(), header.size() + 2 * 12);
    for (std::size_t i = header.size(); i < bytes.size(); i += 2) {
        const unsigned v = (static_cast<unsigned char>(bytes[i]) << 8) | static_cast<unsigned char>(bytes[i + 1]);
        EXPECT_NEAR(v, 32768u, 1u);
    }
}

TEST(Render, RampIsMonotoneAndClipped) {
    const Grid2D g(99, 2, 1.0, 1.0);
    const fs::path p = scratch("r.pgm");
    render_pgm(g, g.sample([](double x, double) { return x; }), p, {10.0, 90.0});
    const std::string bytes = slurp(p);
    const std::size_t start = bytes.size() - 2 * g.size();  // first image row
    auto pixel = [&](std::size_t ix) {
        const std::size_t i = start + 2 * ix;
        return (static_cast<unsigned char>(bytes[i]) << 8) | static_cast<unsigned char>(bytes[i + 1]);
    };
    EXPECT_EQ(pixel(0), 0);
    EXPECT_EQ(pixel(5), 0);
    EXPECT_EQ(pixel(99), 65535);
    for (std::size_t ix = 1; ix < 100; ++ix) EXPECT_GE(pixel(ix), pixel(ix - 1));
    EXPECT_EQ(kind_of([&] { render_pgm(g, g.zeros(), p, {50.0, 50.0}); }), ErrorKind::configuration);
}

TEST(Config, DefaultsAndOverrides) {
    const ExperimentConfig c = parse_config_text(R"({"time": {"tau": 1.0, "n": 30}})");
    EXPECT_EQ(c.n, 30u);
    EXPECT_EQ(c.nx, 100u);
    EXPECT_EQ(c.source_count, 9u);
    EXPECT_EQ(c.iterations, 1u);
    EXPECT_EQ(c.simulation_grid().size(), 101u * 51u);
    EXPECT_EQ(c.inversion_grid().nx(), 50u);
    EXPECT_EQ(c.sources().size(), 9u);
}

TEST(Config, ErrorsNameTheKey) {
    auto message = [](const std::string& text) {
        try {
            parse_config_text(text);
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::configuration);
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_EQ(message(R"({"time": {"tau": 1.0}, "solver": {"substeps": 1, "cfl_safety": 0.95}})").rfind("solver.substeps", 0), 0u);
    EXPECT_NE(message(R"({"grid": {"nx": 10, "colour": 3}})").find("grid.colour"), std::string::npos);
    EXPECT_NE(message(R"({"inversion": {"tsvd_mimo": 0}})").find("inversion.tsvd_mimo"), std::string::npos);
    EXPECT_NE(message(R"({"grid": {"nx": 101}})").find("grid"), std::string::npos);
    EXPECT_NE(message("{ not json").find("config"), std::string::npos);
}

TEST(Config, ModelFromInclusions) {
    const ExperimentConfig c = parse_config_text(R"({
        "time": {"tau": 1.0, "n": 20},
        "model": {"inclusions": [{"shape": "ellipse", "center": [50, 25], "size": [10, 4], "amplitude": 0.3}]}})");
    const Potential q = c.true_potential();
    EXPECT_NEAR(q.max(), 0.3, 1e-15);
    EXPECT_EQ(q.min(), 0.0);
    ASSERT_EQ(c.regions().size(), 1u);
    EXPECT_TRUE(c.regions()[0].contains(50, 25));
}

TEST(Config, BundledFullScaleTwoTargets) {
    const ExperimentConfig c = parse_config(fs::path(LSL_CONFIG_DIR) / "two_targets.json");
    EXPECT_EQ(c.source_count, 27u);
    EXPECT_EQ(c.nx, 400u);
    EXPECT_EQ(c.ny, 200u);
    EXPECT_EQ(c.inclusions.size(), 2u);
}
