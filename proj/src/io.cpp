#include <lsl/error.hpp>
#include <lsl/io.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <string>

namespace lsl {

namespace {

constexpr std::uint32_t format_version = 1;

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw io_error("cannot open " + path.string() + " for writing");
    }
    void bytes(const void* data, std::size_t n) { out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n)); }
    void magic(const char (&m)[5]) { bytes(m, 4); }
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void u32(std::uint32_t v) {
        unsigned char b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        bytes(b, 4);
    }
    void u64(std::uint64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        bytes(b, 8);
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void finish() {
        out_.flush();
        if (!out_) throw io_error("write failed for " + path_.string());
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
        if (!in_) throw io_error("cannot open " + path.string());
    }
    void bytes(void* data, std::size_t n) {
        in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n)
            throw format_error(path_.string() + ": truncated file");
    }
    void magic(const char (&m)[5]) {
        char got[4];
        bytes(got, 4);
        if (std::memcmp(got, m, 4) != 0)
            throw format_error(path_.string() + ": bad magic, expected " + std::string(m, 4));
    }
    std::uint8_t u8() {
        std::uint8_t v;
        bytes(&v, 1);
        return v;
    }
    std::uint32_t u32() {
        unsigned char b[4];
        bytes(b, 4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t{b[i]} << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        unsigned char b[8];
        bytes(b, 8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[i]} << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    void version() {
        const std::uint32_t v = u32();
        if (v != format_version)
            throw format_error(path_.string() + ": unsupported version " + std::to_string(v));
    }
    void expect_end() {
        if (in_.peek() != std::char_traits<char>::eof())
            throw format_error(path_.string() + ": trailing bytes");
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ifstream in_;
};

void write_grid(Writer& w, const Grid2D& g) {
    w.u64(g.nodes_x());
    w.u64(g.nodes_y());
    w.f64(g.origin_x());
    w.f64(g.origin_y());
    w.f64(g.hx());
    w.f64(g.hy());
}

Grid2D read_grid(Reader& r) {
    const std::uint64_t nx = r.u64(), ny = r.u64();
    const double ox = r.f64(), oy = r.f64(), hx = r.f64(), hy = r.f64();
    if (nx < 3 || ny < 3 || nx > (1u << 24) || ny > (1u << 24))
        throw format_error(r.path().string() + ": invalid grid size " + std::to_string(nx) + "x" +
                           std::to_string(ny));
    try {
        return Grid2D(nx - 1, ny - 1, hx, hy, ox, oy);
    } catch (const Error& e) {
        throw format_error(r.path().string() + ": " + e.what());
    }
}

void write_values(Writer& w, const double* v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) w.f64(v[i]);
}

void read_values(Reader& r, double* v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) v[i] = r.f64();
}

}  // namespace

void save_field(const std::filesystem::path& path, const Grid2D& grid, const Field& values) {
    if (values.size() != static_cast<Eigen::Index>(grid.size()))
        throw dimension_error("save_field: field does not match grid");
    Writer w(path);
    w.magic("LSLF");
    w.u32(format_version);
    write_grid(w, grid);
    write_values(w, values.data(), grid.size());
    w.finish();
}

Potential load_field(const std::filesystem::path& path) {
    Reader r(path);
    r.magic("LSLF");
    r.version();
    const Grid2D grid = read_grid(r);
    Field values(static_cast<Eigen::Index>(grid.size()));
    read_values(r, values.data(), grid.size());
    r.expect_end();
    return {grid, values};
}

void save_field_csv(const std::filesystem::path& path, const Grid2D& grid, const Field& values) {
    if (values.size() != static_cast<Eigen::Index>(grid.size()))
        throw dimension_error("save_field_csv: field does not match grid");
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    out << std::setprecision(17);
    for (std::size_t iy = 0; iy < grid.nodes_y(); ++iy) {
        for (std::size_t ix = 0; ix < grid.nodes_x(); ++ix)
            out << (ix ? "," : "") << values[static_cast<Eigen::Index>(grid.index(ix, iy))];
        out << '\n';
    }
    if (!out) throw io_error("write failed for " + path.string());
}

void save_transfer(const std::filesystem::path& path, const TransferData& data) {
    Writer w(path);
    w.magic("LSLT");
    w.u32(format_version);
    w.u64(data.sources());
    w.u64(data.samples());
    w.f64(data.tau());
    for (auto m : data.raw_mask()) w.u8(static_cast<std::uint8_t>(m));
    for (std::size_t i = 0; i < data.sources(); ++i)
        for (std::size_t j = 0; j < data.sources(); ++j)
            if (data.mask(i, j) != EntryMask::absent) {
                auto s = data.series(i, j);
                write_values(w, s.data(), s.size());
            }
    w.finish();
}

TransferData load_transfer(const std::filesystem::path& path) {
    Reader r(path);
    r.magic("LSLT");
    r.version();
    const std::uint64_t k = r.u64(), t = r.u64();
    const double tau = r.f64();
    if (k == 0 || t == 0 || k > 100000 || t > (1u << 28))
        throw format_error(path.string() + ": invalid transfer dimensions");
    if (!(tau > 0.0)) throw format_error(path.string() + ": invalid tau");
    TransferData data(k, t, tau);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            const std::uint8_t m = r.u8();
            if (m > 2) throw format_error(path.string() + ": invalid mask byte");
            data.set_mask(i, j, static_cast<EntryMask>(m));
        }
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (data.mask(i, j) != EntryMask::absent) read_values(r, data.series(i, j).data(), t);
    r.expect_end();
    return data;
}

void save_snapshots(const std::filesystem::path& path, const std::vector<SnapshotSet>& sets) {
    Writer w(path);
    w.magic("LSLS");
    w.u32(format_version);
    w.u64(sets.size());
    for (const auto& s : sets) {
        if (s.samples.rows() != static_cast<Eigen::Index>(s.grid.size()))
            throw dimension_error("save_snapshots: snapshots do not match grid");
        w.u64(s.source);
        w.u8(static_cast<std::uint8_t>(s.kind));
        w.f64(s.tau);
        write_grid(w, s.grid);
        w.u64(s.count());
        write_values(w, s.samples.data(), static_cast<std::size_t>(s.samples.size()));
    }
    w.finish();
}

std::vector<SnapshotSet> load_snapshots(const std::filesystem::path& path) {
    Reader r(path);
    r.magic("LSLS");
    r.version();
    const std::uint64_t count = r.u64();
    if (count > 100000) throw format_error(path.string() + ": invalid set count");
    std::vector<SnapshotSet> sets(count);
    for (auto& s : sets) {
        s.source = r.u64();
        const std::uint8_t kind = r.u8();
        if (kind > 3) throw format_error(path.string() + ": invalid snapshot kind");
        s.kind = static_cast<SnapshotKind>(kind);
        s.tau = r.f64();
        s.grid = read_grid(r);
        const std::uint64_t samples = r.u64();
        if (samples > (1u << 20)) throw format_error(path.string() + ": invalid sample count");
        s.samples.resize(static_cast<Eigen::Index>(s.grid.size()), static_cast<Eigen::Index>(samples));
        read_values(r, s.samples.data(), static_cast<std::size_t>(s.samples.size()));
    }
    r.expect_end();
    return sets;
}

double reciprocity_defect(const TransferData& data) {
    double scale = 0.0, defect = 0.0;
    for (double v : data.raw()) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < data.sources(); ++i)
        for (std::size_t j = i + 1; j < data.sources(); ++j) {
            if (data.mask(i, j) == EntryMask::absent || data.mask(j, i) == EntryMask::absent) continue;
            for (std::size_t k = 0; k < data.samples(); ++k)
                defect = std::max(defect, std::abs(data.at(i, j, k) - data.at(j, i, k)));
        }
    return scale > 0.0 ? defect / scale : 0.0;
}

void render_pgm(const Grid2D& grid, const Field& values, const std::filesystem::path& path,
                ClipPercentiles clip) {
    if (values.size() != static_cast<Eigen::Index>(grid.size()))
        throw dimension_error("render_pgm: field does not match grid");
    if (!values.allFinite()) throw domain_error("render_pgm: field has non-finite values");
    if (!(clip.low >= 0.0 && clip.low < clip.high && clip.high <= 100.0))
        throw configuration_error("render: clip percentiles must satisfy 0 <= low < high <= 100");

    std::vector<double> sorted(values.data(), values.data() + values.size());
    std::sort(sorted.begin(), sorted.end());
    auto percentile = [&](double p) {
        const double pos = p / 100.0 * static_cast<double>(sorted.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, sorted.size() - 1);
        return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    };
    const double lo = percentile(clip.low), hi = percentile(clip.high);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    out << "P5\n" << grid.nodes_x() << ' ' << grid.nodes_y() << "\n65535\n";
    for (std::size_t iy = 0; iy < grid.nodes_y(); ++iy)
        for (std::size_t ix = 0; ix < grid.nodes_x(); ++ix) {
            const double v = values[static_cast<Eigen::Index>(grid.index(ix, iy))];
            double t = 0.5;
            if (hi > lo) t = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
            const auto pixel = static_cast<std::uint16_t>(std::lround(t * 65535.0));
            const char bytes[2] = {static_cast<char>(pixel >> 8), static_cast<char>(pixel & 0xff)};
            out.write(bytes, 2);
        }
    if (!out) throw io_error("write failed for " + path.string());
}

}  // namespace lsl
