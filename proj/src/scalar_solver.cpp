#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "padam/errors.hpp"
#include "padam/pde.hpp"

namespace padam {

namespace {

constexpr double kBlowupThreshold = 1e8;

void check_finite(const std::vector<double>& u, long step) {
    for (double v : u)
        if (!std::isfinite(v) || std::abs(v) > kBlowupThreshold)
            throw DivergenceError("solve_scalar: solution blew up", step);
}

long plan_steps(double T, double& dt, long max_steps) {
    if (!std::isfinite(dt) || dt > T) dt = T;
    long n = static_cast<long>(std::ceil(T / dt - 1e-12));
    if (n < 1) n = 1;
    if (n > max_steps)
        throw std::invalid_argument("solver: required steps exceed max_steps");
    dt = T / static_cast<double>(n); // land exactly on T
    return n;
}

int traj_stride(const SolverConfig& cfg, long n_steps) {
    if (!cfg.record_trajectory) return 0;
    if (cfg.trajectory_stride > 0) return cfg.trajectory_stride;
    return static_cast<int>(std::max<long>(1, n_steps / 16));
}

} // namespace

SolveResult solve_scalar(const ScalarPDEParams& p, const Field& ic, const SolverConfig& cfg) {
    p.validate();
    cfg.validate();
    if (ic.n_channels != 1) throw std::invalid_argument("solve_scalar: ic must have one channel");

    const BoundaryTag want =
        p.family == ScalarFamily::allen_cahn ? BoundaryTag::dirichlet : BoundaryTag::neumann;
    if (ic.grid.bc != want)
        throw std::invalid_argument("solve_scalar: grid boundary tag does not match the family");

    const Grid2D& g = ic.grid;
    const int nx = g.nx, ny = g.ny;
    const double hx = g.hx(), hy = g.hy();

    double dt = stable_dt(p.family, p, g, cfg.cfl);
    const long n_steps = plan_steps(cfg.T, dt, cfg.max_steps);
    const int stride = traj_stride(cfg, n_steps);

    const bool has_diffusion = p.family == ScalarFamily::diffusion ||
                               p.family == ScalarFamily::advection_diffusion ||
                               p.family == ScalarFamily::adr;
    const bool has_advection = p.family == ScalarFamily::advection ||
                               p.family == ScalarFamily::advection_diffusion ||
                               p.family == ScalarFamily::adr;
    const bool allen_cahn = p.family == ScalarFamily::allen_cahn;
    const double diff_coef = allen_cahn ? p.eps2 : p.nu;

    SolveResult result;
    result.terminal = ic;
    std::vector<double>& u = result.terminal.data;
    std::vector<double> un(u.size());

    // Neumann: mirrored ghost across the boundary node. Dirichlet: boundary
    // rows are pinned to zero each step, so indexing never leaves the domain.
    auto mirror = [](int i, int n) { return i < 0 ? -i : (i >= n ? 2 * n - 2 - i : i); };
    auto at = [&](int j, int i) { return u[static_cast<std::size_t>(j) * nx + i]; };

    for (long step = 0; step < n_steps; ++step) {
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                if (allen_cahn && (i == 0 || j == 0 || i == nx - 1 || j == ny - 1)) {
                    un[static_cast<std::size_t>(j) * nx + i] = 0.0;
                    continue;
                }
                const double c = at(j, i);
                const double w = at(j, mirror(i - 1, nx));
                const double e = at(j, mirror(i + 1, nx));
                const double s = at(mirror(j - 1, ny), i);
                const double n = at(mirror(j + 1, ny), i);

                double rhs = 0.0;
                if (has_diffusion || allen_cahn)
                    rhs += diff_coef * ((w - 2.0 * c + e) / (hx * hx) + (s - 2.0 * c + n) / (hy * hy));
                if (has_advection) {
                    const double dudx = p.ax >= 0.0 ? (c - w) / hx : (e - c) / hx;
                    const double dudy = p.ay >= 0.0 ? (c - s) / hy : (n - c) / hy;
                    rhs -= p.ax * dudx + p.ay * dudy;
                }
                if (p.family == ScalarFamily::adr) rhs += p.k * c;
                if (allen_cahn) rhs -= (c * c * c - c) / p.eps2;

                un[static_cast<std::size_t>(j) * nx + i] = c + dt * rhs;
            }
        }
        u.swap(un);
        check_finite(u, step);
        if (stride > 0 && ((step + 1) % stride == 0 || step + 1 == n_steps))
            result.trajectory.push_back(result.terminal);
    }
    result.steps = n_steps;
    return result;
}

SolveResult solve_burgers(const VectorPDEParams& p, const Field& ic, const SolverConfig& cfg) {
    p.validate();
    cfg.validate();
    if (p.family != VectorFamily::burgers)
        throw std::invalid_argument("solve_burgers: wrong family");
    if (ic.n_channels != 2) throw std::invalid_argument("solve_burgers: ic must have two channels");
    if (ic.grid.bc != BoundaryTag::dirichlet)
        throw std::invalid_argument("solve_burgers: grid must be Dirichlet");

    const Grid2D& g = ic.grid;
    const int nx = g.nx, ny = g.ny;
    const double hx = g.hx(), hy = g.hy();

    SolveResult result;
    result.terminal = ic;
    Field next(g, 2);
    double t = 0.0;
    long step = 0;
    const int stride = cfg.record_trajectory
                           ? (cfg.trajectory_stride > 0 ? cfg.trajectory_stride : 64)
                           : 0;

    while (t < cfg.T - 1e-14) {
        // dt tracks the current max speed; the field steepens over time.
        double dt = stable_dt(VectorFamily::burgers, p, g, cfg.cfl, result.terminal);
        dt = std::min(dt, cfg.T - t);
        if (++step > cfg.max_steps)
            throw std::invalid_argument("solve_burgers: required steps exceed max_steps");

        auto u = result.terminal.channel(0);
        auto v = result.terminal.channel(1);
        auto idx = [&](int j, int i) { return static_cast<std::size_t>(j) * nx + i; };

        for (int ch = 0; ch < 2; ++ch) {
            auto f = result.terminal.channel(ch);
            auto fn = next.channel(ch);
            for (int j = 0; j < ny; ++j) {
                for (int i = 0; i < nx; ++i) {
                    if (i == 0 || j == 0 || i == nx - 1 || j == ny - 1) {
                        fn[idx(j, i)] = 0.0;
                        continue;
                    }
                    const double c = f[idx(j, i)];
                    const double w = f[idx(j, i - 1)];
                    const double e = f[idx(j, i + 1)];
                    const double s = f[idx(j - 1, i)];
                    const double n = f[idx(j + 1, i)];
                    const double vel_x = u[idx(j, i)];
                    const double vel_y = v[idx(j, i)];
                    const double dfdx = vel_x >= 0.0 ? (c - w) / hx : (e - c) / hx;
                    const double dfdy = vel_y >= 0.0 ? (c - s) / hy : (n - c) / hy;
                    const double lap = (w - 2.0 * c + e) / (hx * hx) + (s - 2.0 * c + n) / (hy * hy);
                    fn[idx(j, i)] = c + dt * (-vel_x * dfdx - vel_y * dfdy + p.nu * lap);
                }
            }
        }
        result.terminal.data.swap(next.data);
        t += dt;
        check_finite(result.terminal.data, step);
        if (stride > 0 && (step % stride == 0 || t >= cfg.T - 1e-14))
            result.trajectory.push_back(result.terminal);
    }
    result.steps = step;
    return result;
}

} // namespace padam
