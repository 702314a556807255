#include "padam/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "padam/errors.hpp"

namespace padam {

namespace {

void write_p5(const std::string& path, int nx, int ny, const std::vector<unsigned char>& pixels) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("pgm: cannot open for writing: " + path);
    out << "P5\n" << nx << " " << ny << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));
    if (!out) throw FormatError("pgm: write failed: " + path);
}

} // namespace

void write_pgm(const Field& f, int channel, const std::string& path) {
    const auto ch = f.channel(channel);
    double lo = ch[0], hi = ch[0];
    for (double v : ch) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double range = hi - lo;
    std::vector<unsigned char> px(ch.size());
    for (std::size_t k = 0; k < ch.size(); ++k)
        px[k] = range > 0.0
                    ? static_cast<unsigned char>(std::lround(255.0 * (ch[k] - lo) / range))
                    : 128;
    write_p5(path, f.grid.nx, f.grid.ny, px);
}

void write_pgm_masked(const Field& f, int channel, const ObservationMask& mask,
                      const std::string& path) {
    const auto ch = f.channel(channel);
    double lo = ch[0], hi = ch[0];
    for (double v : ch) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double range = hi - lo;
    const std::size_t base = static_cast<std::size_t>(channel) * f.grid.n_points();
    std::vector<unsigned char> px(ch.size(), 0);
    for (std::size_t k = 0; k < ch.size(); ++k)
        if (mask.indicator[base + k])
            px[k] = range > 0.0
                        ? static_cast<unsigned char>(std::lround(255.0 * (ch[k] - lo) / range))
                        : 128;
    write_p5(path, f.grid.nx, f.grid.ny, px);
}

} // namespace padam
