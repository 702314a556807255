#include "padam/dataset_io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "padam/errors.hpp"

namespace padam {

namespace {

// Explicit little-endian packing keeps the format byte-stable regardless of
// host conventions.
void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

void put_f32(std::string& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

class Reader {
public:
    explicit Reader(std::string bytes) : b_(std::move(bytes)) {}

    std::size_t offset() const { return pos_; }
    bool exhausted() const { return pos_ >= b_.size(); }

    void need(std::size_t n, const char* what) {
        if (pos_ + n > b_.size())
            throw FormatError(std::string("PADM: truncated while reading ") + what,
                              static_cast<long long>(pos_));
    }

    std::uint8_t u8(const char* what) {
        need(1, what);
        return static_cast<std::uint8_t>(b_[pos_++]);
    }

    std::uint16_t u16(const char* what) {
        need(2, what);
        std::uint16_t v = 0;
        for (int k = 0; k < 2; ++k) v |= std::uint16_t(static_cast<unsigned char>(b_[pos_++])) << (8 * k);
        return v;
    }

    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int k = 0; k < 4; ++k) v |= std::uint32_t(static_cast<unsigned char>(b_[pos_++])) << (8 * k);
        return v;
    }

    std::uint64_t u64(const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int k = 0; k < 8; ++k) v |= std::uint64_t(static_cast<unsigned char>(b_[pos_++])) << (8 * k);
        return v;
    }

    float f32(const char* what) {
        const std::uint32_t bits = u32(what);
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }

    std::string text(std::size_t n, const char* what) {
        need(n, what);
        std::string s = b_.substr(pos_, n);
        pos_ += n;
        return s;
    }

private:
    std::string b_;
    std::size_t pos_ = 0;
};

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

using KvMap = std::map<std::string, std::string>;

KvMap parse_kv(const std::string& text) {
    KvMap kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw FormatError("PADM: malformed metadata line: " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

const std::string& kv_get(const KvMap& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw FormatError("PADM: missing metadata key " + key);
    return it->second;
}

std::string grid_metadata(const Grid2D& g) {
    std::ostringstream m;
    m << "grid.nx=" << g.nx << "\n";
    m << "grid.ny=" << g.ny << "\n";
    m << "grid.x0=" << fmt_double(g.x0) << "\n";
    m << "grid.x1=" << fmt_double(g.x1) << "\n";
    m << "grid.y0=" << fmt_double(g.y0) << "\n";
    m << "grid.y1=" << fmt_double(g.y1) << "\n";
    m << "grid.bc=" << to_string(g.bc) << "\n";
    return m.str();
}

Grid2D grid_from_metadata(const KvMap& kv) {
    return Grid2D(std::stoi(kv_get(kv, "grid.nx")), std::stoi(kv_get(kv, "grid.ny")),
                  std::stod(kv_get(kv, "grid.x0")), std::stod(kv_get(kv, "grid.x1")),
                  std::stod(kv_get(kv, "grid.y0")), std::stod(kv_get(kv, "grid.y1")),
                  boundary_tag_from_string(kv_get(kv, "grid.bc")));
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("PADM: cannot open for writing: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("PADM: write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("PADM: cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void append_sample(std::string& out, int class_id, int d_c, const Field& x,
                   std::span<const double> phi, std::uint64_t seed) {
    out.push_back(static_cast<char>(class_id & 0xff));
    out.push_back(static_cast<char>(d_c & 0xff));
    put_u16(out, static_cast<std::uint16_t>(x.n_channels));
    put_u32(out, static_cast<std::uint32_t>(x.grid.ny));
    put_u32(out, static_cast<std::uint32_t>(x.grid.nx));
    put_u64(out, seed);
    for (double v : phi) put_f32(out, static_cast<float>(v));
    for (double v : x.data) put_f32(out, static_cast<float>(v));
}

std::string header(std::uint32_t count) {
    std::string out = "PADM";
    put_u16(out, 1);
    put_u16(out, 0);
    put_u32(out, count);
    return out;
}

} // namespace

void write_dataset(const Dataset& ds, const std::string& path) {
    std::string out = header(static_cast<std::uint32_t>(ds.samples.size()));
    if (ds.samples.empty()) {
        // An empty dataset is the bare 12-byte header.
        write_file(path, out);
        return;
    }

    std::ostringstream m;
    m << "kind=dataset\n";
    m << "investigation=" << to_string(ds.registry.investigation) << "\n";
    m << "n_per_class=" << ds.n_per_class << "\n";
    m << "seed=" << ds.seed << "\n";
    m << "config_hash=" << ds.config_hash << "\n";
    m << grid_metadata(ds.grid);
    m << "class.count=" << ds.registry.size() << "\n";
    for (const auto& c : ds.registry.classes) {
        m << "class." << c.id << ".name=" << c.name << "\n";
        m << "class." << c.id << ".layout=" << to_string(c.layout) << "\n";
        m << "class." << c.id << ".d_c=" << c.param_dim << "\n";
    }
    m << "sigma_data=" << fmt_double(ds.sigma_data) << "\n";
    for (int c = 0; c < ds.norm.n_classes; ++c)
        for (int ch = 0; ch < 3; ++ch) {
            m << "norm." << c << "." << ch << ".mean=" << fmt_double(ds.norm.m(c, ch)) << "\n";
            m << "norm." << c << "." << ch << ".scale=" << fmt_double(ds.norm.s(c, ch)) << "\n";
        }
    const std::string meta = m.str();
    put_u32(out, static_cast<std::uint32_t>(meta.size()));
    out += meta;

    for (const auto& s : ds.samples)
        append_sample(out, s.class_id, static_cast<int>(s.phi.size()), s.x, s.phi, s.seed);
    write_file(path, out);
}

Dataset read_dataset(const std::string& path) {
    Reader r(read_file(path));
    if (r.text(4, "magic") != "PADM") throw FormatError("PADM: bad magic", 0);
    const std::uint16_t version = r.u16("version");
    if (version != 1) throw FormatError("PADM: unsupported version", 4);
    r.u16("reserved");
    const std::uint32_t count = r.u32("sample_count");

    Dataset ds;
    if (count == 0 && r.exhausted()) return ds;

    const std::uint32_t meta_len = r.u32("metadata length");
    const KvMap kv = parse_kv(r.text(meta_len, "metadata"));

    const std::string kind = kv.count("kind") ? kv.at("kind") : "dataset";
    if (kind != "dataset") throw FormatError("PADM: container is not a dataset (kind=" + kind + ")");

    ds.registry = make_registry(investigation_from_string(kv_get(kv, "investigation")));
    ds.n_per_class = std::stoi(kv_get(kv, "n_per_class"));
    ds.seed = std::stoull(kv_get(kv, "seed"));
    ds.config_hash = kv_get(kv, "config_hash");
    ds.grid = grid_from_metadata(kv);
    if (std::stoi(kv_get(kv, "class.count")) != ds.registry.size())
        throw FormatError("PADM: class registry does not match the named investigation");

    ds.sigma_data = std::stod(kv_get(kv, "sigma_data"));
    ds.norm.n_classes = ds.registry.size();
    ds.norm.mean.assign(static_cast<std::size_t>(ds.norm.n_classes) * 3, 0.0);
    ds.norm.scale.assign(static_cast<std::size_t>(ds.norm.n_classes) * 3, 1.0);
    for (int c = 0; c < ds.norm.n_classes; ++c)
        for (int ch = 0; ch < 3; ++ch) {
            const std::string base = "norm." + std::to_string(c) + "." + std::to_string(ch);
            ds.norm.mean[static_cast<std::size_t>(c) * 3 + ch] = std::stod(kv_get(kv, base + ".mean"));
            ds.norm.scale[static_cast<std::size_t>(c) * 3 + ch] = std::stod(kv_get(kv, base + ".scale"));
        }

    ds.samples.reserve(count);
    for (std::uint32_t k = 0; k < count; ++k) {
        UnifiedSample s;
        s.class_id = r.u8("class_id");
        const int d_c = r.u8("d_c");
        const int n_channels = r.u16("n_channels");
        const int H = static_cast<int>(r.u32("H"));
        const int W = static_cast<int>(r.u32("W"));
        s.seed = r.u64("seed");
        if (s.class_id >= ds.registry.size())
            throw FormatError("PADM: sample class id out of range",
                              static_cast<long long>(r.offset()));
        const PDEClass& cls = ds.registry.by_id(s.class_id);
        if (d_c != cls.param_dim)
            throw FormatError("PADM: sample d_c disagrees with registry",
                              static_cast<long long>(r.offset()));
        s.phi.resize(d_c);
        for (int p = 0; p < d_c; ++p) s.phi[p] = r.f32("phi");
        s.x = Field(class_grid(cls, W, H), n_channels);
        for (std::size_t q = 0; q < s.x.data.size(); ++q) s.x.data[q] = r.f32("sample data");
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

void write_trajectory_padm(const std::vector<Field>& frames, const std::string& path) {
    std::string out = header(static_cast<std::uint32_t>(frames.size()));
    if (frames.empty()) {
        write_file(path, out);
        return;
    }
    std::ostringstream m;
    m << "kind=trajectory\n";
    m << grid_metadata(frames[0].grid);
    const std::string meta = m.str();
    put_u32(out, static_cast<std::uint32_t>(meta.size()));
    out += meta;
    for (std::size_t k = 0; k < frames.size(); ++k)
        append_sample(out, 255, 0, frames[k], {}, static_cast<std::uint64_t>(k));
    write_file(path, out);
}

std::vector<Field> read_trajectory_padm(const std::string& path) {
    Reader r(read_file(path));
    if (r.text(4, "magic") != "PADM") throw FormatError("PADM: bad magic", 0);
    if (r.u16("version") != 1) throw FormatError("PADM: unsupported version", 4);
    r.u16("reserved");
    const std::uint32_t count = r.u32("sample_count");
    std::vector<Field> frames;
    if (count == 0 && r.exhausted()) return frames;

    const std::uint32_t meta_len = r.u32("metadata length");
    const KvMap kv = parse_kv(r.text(meta_len, "metadata"));
    if (kv_get(kv, "kind") != "trajectory")
        throw FormatError("PADM: container is not a trajectory");
    const Grid2D grid = grid_from_metadata(kv);

    for (std::uint32_t k = 0; k < count; ++k) {
        r.u8("class_id");
        r.u8("d_c");
        const int n_channels = r.u16("n_channels");
        r.u32("H");
        r.u32("W");
        r.u64("seed");
        Field f(grid, n_channels);
        for (std::size_t q = 0; q < f.data.size(); ++q) f.data[q] = r.f32("frame data");
        frames.push_back(std::move(f));
    }
    return frames;
}

} // namespace padam
