#pragma once

#include <lsl/model.hpp>

#include <filesystem>
#include <vector>

namespace lsl {

// LSLF: "LSLF", u32 version, u64 nodes_x, u64 nodes_y, f64 origin_x, origin_y,
// hx, hy, then nodes_x * nodes_y f64 values in row-major order. Little-endian.
void save_field(const std::filesystem::path& path, const Grid2D& grid, const Field& values);
Potential load_field(const std::filesystem::path& path);
void save_field_csv(const std::filesystem::path& path, const Grid2D& grid, const Field& values);

// LSLT: "LSLT", u32 version, u64 K, u64 T, f64 tau, K*K mask bytes, then T
// f64 values for every non-absent (i, j) pair in row-major pair order.
void save_transfer(const std::filesystem::path& path, const TransferData& data);
TransferData load_transfer(const std::filesystem::path& path);

// LSLS: "LSLS", u32 version, u64 set count; per set: u64 source, u8 kind,
// f64 tau, grid header as in LSLF, u64 sample count, samples column by column.
void save_snapshots(const std::filesystem::path& path, const std::vector<SnapshotSet>& sets);
std::vector<SnapshotSet> load_snapshots(const std::filesystem::path& path);

/// Largest |F^{ij} - F^{ji}| over pairs where both are present, relative to max |F|.
double reciprocity_defect(const TransferData& data);

struct ClipPercentiles {
    double low = 1.0;
    double high = 99.0;
};

/// 16-bit binary PGM, linear between the clip percentiles, row iy = 0 on top.
void render_pgm(const Grid2D& grid, const Field& values, const std::filesystem::path& path,
                ClipPercentiles clip = {});

}  // namespace lsl
