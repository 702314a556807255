#pragma once

#include <stdexcept>
#include <string>

namespace padam {

enum class BoundaryTag { neumann, dirichlet, periodic };

inline const char* to_string(BoundaryTag bc) {
    switch (bc) {
        case BoundaryTag::neumann: return "neumann";
        case BoundaryTag::dirichlet: return "dirichlet";
        case BoundaryTag::periodic: return "periodic";
    }
    return "?";
}

inline BoundaryTag boundary_tag_from_string(const std::string& s) {
    if (s == "neumann") return BoundaryTag::neumann;
    if (s == "dirichlet") return BoundaryTag::dirichlet;
    if (s == "periodic") return BoundaryTag::periodic;
    throw std::invalid_argument("unknown boundary tag: " + s);
}

// Uniform 2D grid. Non-periodic grids are node-centered (both endpoints are
// grid points, spacing (x1-x0)/(nx-1)); periodic grids are cell-centered
// (spacing (x1-x0)/nx, no duplicated seam point).
struct Grid2D {
    int nx = 0;
    int ny = 0;
    double x0 = 0.0, x1 = 1.0;
    double y0 = 0.0, y1 = 1.0;
    BoundaryTag bc = BoundaryTag::neumann;

    Grid2D() = default;

    Grid2D(int nx_, int ny_, double x0_, double x1_, double y0_, double y1_, BoundaryTag bc_)
        : nx(nx_), ny(ny_), x0(x0_), x1(x1_), y0(y0_), y1(y1_), bc(bc_) {
        if (nx < 4 || ny < 4) throw std::invalid_argument("Grid2D: nx and ny must be >= 4");
        if (!(x1 > x0) || !(y1 > y0)) throw std::invalid_argument("Grid2D: domain bounds must be increasing");
    }

    bool periodic() const { return bc == BoundaryTag::periodic; }

    double hx() const { return (x1 - x0) / (periodic() ? nx : nx - 1); }
    double hy() const { return (y1 - y0) / (periodic() ? ny : ny - 1); }

    double x(int i) const { return x0 + (periodic() ? (i + 0.5) : double(i)) * hx(); }
    double y(int j) const { return y0 + (periodic() ? (j + 0.5) : double(j)) * hy(); }

    long n_points() const { return static_cast<long>(nx) * ny; }

    bool same_geometry(const Grid2D& o) const {
        return nx == o.nx && ny == o.ny && x0 == o.x0 && x1 == o.x1 && y0 == o.y0 && y1 == o.y1 &&
               bc == o.bc;
    }
};

/// Unit square with the given BC; the default substrate for the scalar PDEs.
inline Grid2D unit_grid(int n, BoundaryTag bc) { return Grid2D(n, n, 0.0, 1.0, 0.0, 1.0, bc); }

} // namespace padam
