#include "padam/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace padam {

const char* to_string(ScalarFamily f) {
    switch (f) {
        case ScalarFamily::diffusion: return "diffusion";
        case ScalarFamily::advection: return "advection";
        case ScalarFamily::advection_diffusion: return "advection_diffusion";
        case ScalarFamily::adr: return "adr";
        case ScalarFamily::allen_cahn: return "allen_cahn";
    }
    return "?";
}

const char* to_string(VectorFamily f) {
    switch (f) {
        case VectorFamily::burgers: return "burgers";
        case VectorFamily::navier_stokes: return "navier_stokes";
    }
    return "?";
}

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace

void ScalarPDEParams::validate() const {
    switch (family) {
        case ScalarFamily::diffusion:
            require(nu > 0.0, "diffusion requires nu > 0");
            require(ax == 0.0 && ay == 0.0 && k == 0.0 && eps2 == 0.0,
                    "diffusion: unrelated coefficients must be zero");
            break;
        case ScalarFamily::advection:
            require(nu == 0.0 && k == 0.0 && eps2 == 0.0,
                    "advection: unrelated coefficients must be zero");
            break;
        case ScalarFamily::advection_diffusion:
            require(nu > 0.0, "advection_diffusion requires nu > 0");
            require(k == 0.0 && eps2 == 0.0,
                    "advection_diffusion: unrelated coefficients must be zero");
            break;
        case ScalarFamily::adr:
            require(nu > 0.0, "adr requires nu > 0");
            require(k >= 0.0, "adr requires k >= 0");
            require(eps2 == 0.0, "adr: eps2 must be zero");
            break;
        case ScalarFamily::allen_cahn:
            require(eps2 > 0.0, "allen_cahn requires eps2 > 0");
            require(nu == 0.0 && ax == 0.0 && ay == 0.0 && k == 0.0,
                    "allen_cahn: unrelated coefficients must be zero");
            break;
    }
}

void VectorPDEParams::validate() const {
    require(nu > 0.0, "vector families require nu > 0");
    if (family == VectorFamily::navier_stokes) require(L > 0.0, "navier_stokes requires L > 0");
}

void SolverConfig::validate() const {
    require(T > 0.0, "SolverConfig: T must be positive");
    require(cfl > 0.0 && cfl <= 1.0, "SolverConfig: cfl must lie in (0, 1]");
    require(max_steps > 0, "SolverConfig: max_steps must be positive");
}

double stable_dt(ScalarFamily family, const ScalarPDEParams& p, const Grid2D& grid, double cfl) {
    p.validate();
    const double h = std::min(grid.hx(), grid.hy());
    double dt = std::numeric_limits<double>::infinity();
    const bool has_diffusion = family == ScalarFamily::diffusion ||
                               family == ScalarFamily::advection_diffusion ||
                               family == ScalarFamily::adr;
    const bool has_advection = family == ScalarFamily::advection ||
                               family == ScalarFamily::advection_diffusion ||
                               family == ScalarFamily::adr;
    if (has_diffusion) dt = std::min(dt, h * h / (4.0 * p.nu));
    if (has_advection) {
        const double speed = std::abs(p.ax) + std::abs(p.ay);
        if (speed > 0.0) dt = std::min(dt, h / speed);
    }
    if (family == ScalarFamily::allen_cahn)
        dt = std::min(h * h / (4.0 * p.eps2), p.eps2 / 2.0);
    // No active constraint (e.g. advection with zero velocity): the state is
    // steady, so any step is stable; callers cap by the horizon.
    if (!std::isfinite(dt)) return std::numeric_limits<double>::infinity();
    return cfl * dt;
}

double stable_dt(VectorFamily family, const VectorPDEParams& p, const Grid2D& grid, double cfl,
                 const Field& state) {
    p.validate();
    if (state.n_channels != 2)
        throw std::invalid_argument("stable_dt: vector families need a 2-channel state");
    const double h = std::min(grid.hx(), grid.hy());
    double maxu = 0.0, maxv = 0.0;
    for (long k = 0; k < grid.n_points(); ++k) {
        maxu = std::max(maxu, std::abs(state.channel(0)[k]));
        maxv = std::max(maxv, std::abs(state.channel(1)[k]));
    }
    const double eps_speed = 1e-8;
    if (family == VectorFamily::burgers) {
        const double dt_adv = h / (maxu + maxv + eps_speed);
        const double dt_diff = h * h / (4.0 * p.nu);
        return cfl * std::min(dt_adv, dt_diff);
    }
    // Navier-Stokes: viscosity is integrated exactly in spectral space, so
    // only the advective CFL constrains the step.
    return cfl * h / (maxu + maxv + eps_speed);
}

Field gaussian_bump_ic(const Grid2D& grid, double xc, double yc, double w0) {
    if (w0 <= 0.0) throw std::invalid_argument("gaussian_bump_ic: w0 must be positive");
    if (xc < grid.x0 || xc > grid.x1 || yc < grid.y0 || yc > grid.y1)
        throw std::invalid_argument("gaussian_bump_ic: centroid outside domain");
    Field f(grid, 1);
    const double pi = 3.14159265358979323846;
    for (int j = 0; j < grid.ny; ++j) {
        const double y = grid.y(j);
        for (int i = 0; i < grid.nx; ++i) {
            const double x = grid.x(i);
            const double r2 = (x - xc) * (x - xc) + (y - yc) * (y - yc);
            f.at(0, j, i) = std::exp(-r2 / w0) * std::sin(pi * x) * std::sin(pi * y);
        }
    }
    return f;
}

Field burgers_ic(const Grid2D& grid, double c1x, double c1y, double w1, double c2x, double c2y,
                 double w2) {
    if (w1 <= 0.0 || w2 <= 0.0) throw std::invalid_argument("burgers_ic: widths must be positive");
    Field f(grid, 2);
    const double pi = 3.14159265358979323846;
    for (int j = 0; j < grid.ny; ++j) {
        const double y = grid.y(j);
        for (int i = 0; i < grid.nx; ++i) {
            const double x = grid.x(i);
            const double taper = std::sin(pi * x) * std::sin(pi * y);
            const double r1 = (x - c1x) * (x - c1x) + (y - c1y) * (y - c1y);
            const double r2 = (x - c2x) * (x - c2x) + (y - c2y) * (y - c2y);
            f.at(0, j, i) = std::exp(-r1 / w1) * taper;
            f.at(1, j, i) = std::exp(-r2 / w2) * taper;
        }
    }
    return f;
}

Field ns_ic(const Grid2D& grid, double a, TrigChoice phi_choice, TrigChoice psi_choice, double L) {
    if (a <= 0.0) throw std::invalid_argument("ns_ic: amplitude must be positive");
    if (!grid.periodic()) throw std::invalid_argument("ns_ic: grid must be periodic");
    Field f(grid, 2);
    const double two_pi = 6.28318530717958647692;
    auto trig = [](TrigChoice t, double arg) {
        return t == TrigChoice::sin ? std::sin(arg) : std::cos(arg);
    };
    for (int j = 0; j < grid.ny; ++j) {
        const double y = grid.y(j);
        for (int i = 0; i < grid.nx; ++i) {
            const double x = grid.x(i);
            f.at(0, j, i) = -a * trig(phi_choice, two_pi * y / L);
            f.at(1, j, i) = a * trig(psi_choice, 2.0 * two_pi * x / L);
        }
    }
    return f;
}

} // namespace padam
