#pragma once

#include <lsl/pipeline.hpp>

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace lsl {

struct Inclusion {
    enum class Shape { rectangle, ellipse };
    Shape shape = Shape::rectangle;
    double center_x = 0.0, center_y = 0.0;
    double size_x = 0.0, size_y = 0.0;  // full extents (rectangle) or diameters (ellipse)
    double amplitude = 0.0;
    double smoothing = 0.0;  // edge ramp width; 0 gives a sharp indicator

    double value(double x, double y) const;
    Region bounding_region(double padding, const std::string& name) const;
};

struct ExperimentConfig {
    double width = 100.0, height = 50.0;
    std::size_t nx = 100, ny = 50;
    std::size_t inversion_ratio = 2;

    std::size_t source_count = 9;
    std::vector<std::array<double, 2>> source_positions;  // overrides the line layout
    double source_x_begin = 10.0, source_x_end = 90.0;
    double source_depth = 3.0;
    double source_width = 2.0;
    double source_amplitude = 1.0;

    double tau = 1.0;
    std::size_t n = 60;

    SolverSettings solver;
    Thresholds thresholds;
    std::size_t iterations = 1;
    bool positivity = false;

    double model_margin = 5.0;
    std::vector<Inclusion> inclusions;
    double region_padding = 2.0;

    std::filesystem::path output_dir = "out";

    Grid2D simulation_grid() const;
    Grid2D inversion_grid() const;
    SourceSet sources() const;
    TimeAxis axis() const;
    Potential true_potential() const;
    std::vector<Region> regions() const;  // one per inclusion, in declaration order

    /// Validates every module precondition; throws a configuration error
    /// whose message starts with the offending key path.
    void validate() const;
};

ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& json_text);

}  // namespace lsl
