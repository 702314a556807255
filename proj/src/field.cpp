#include "padam/field.hpp"

#include <algorithm>
#include <cmath>

#include "padam/errors.hpp"

namespace padam {

Field Field::extract_channel(int c) const {
    Field out(grid, 1);
    const auto src = channel(c);
    std::copy(src.begin(), src.end(), out.data.begin());
    return out;
}

bool Field::finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

FieldStats field_stats(const Field& f) {
    FieldStats s;
    if (f.data.empty()) return s;
    s.min = f.data[0];
    s.max = f.data[0];
    double sq = 0.0;
    for (std::size_t k = 0; k < f.data.size(); ++k) {
        const double v = f.data[k];
        if (!std::isfinite(v))
            throw DivergenceError("field_stats: non-finite entry at flat index " + std::to_string(k));
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
        sq += v * v;
    }
    s.l2norm = std::sqrt(sq);
    return s;
}

namespace {

// Locate x between grid nodes along one axis; returns (i0, i1, weight of i1).
std::tuple<int, int, double> locate(double x, double origin, double h, int n, bool periodic) {
    if (periodic) {
        // Cell-centered nodes at origin + (i+0.5)h; wrap the fractional index.
        double t = (x - origin) / h - 0.5;
        double tf = std::floor(t);
        int i0 = static_cast<int>(tf);
        double w = t - tf;
        int a = ((i0 % n) + n) % n;
        int b = (a + 1) % n;
        return {a, b, w};
    }
    double t = (x - origin) / h;
    if (t <= 0.0) return {0, 0, 0.0};
    if (t >= n - 1) return {n - 1, n - 1, 0.0};
    int i0 = static_cast<int>(std::floor(t));
    return {i0, i0 + 1, t - i0};
}

} // namespace

double bilinear_sample(const Field& f, int c, double x, double y) {
    const Grid2D& g = f.grid;
    auto [i0, i1, wx] = locate(x, g.x0, g.hx(), g.nx, g.periodic());
    auto [j0, j1, wy] = locate(y, g.y0, g.hy(), g.ny, g.periodic());
    const double v00 = f.at(c, j0, i0);
    const double v01 = f.at(c, j0, i1);
    const double v10 = f.at(c, j1, i0);
    const double v11 = f.at(c, j1, i1);
    return (1 - wy) * ((1 - wx) * v00 + wx * v01) + wy * ((1 - wx) * v10 + wx * v11);
}

Field resample(const Field& f, const Grid2D& target) {
    Field out(target, f.n_channels);
    for (int c = 0; c < f.n_channels; ++c)
        for (int j = 0; j < target.ny; ++j)
            for (int i = 0; i < target.nx; ++i)
                out.at(c, j, i) = bilinear_sample(f, c, target.x(i), target.y(j));
    return out;
}

} // namespace padam
