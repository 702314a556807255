#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

#include "padam/errors.hpp"
#include "padam/pde.hpp"

namespace padam {

namespace {

// FFTW plan creation is not thread-safe; executions on disjoint buffers are.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

// Real <-> half-complex 2D transforms on an ny x nx grid (row-major, rows are
// y). FFTW's r2c layout stores nx/2+1 complex columns per row.
class Spectral2D {
public:
    Spectral2D(int nx, int ny, double lx, double ly) : nx_(nx), ny_(ny) {
        nk_ = nx_ / 2 + 1;
        real_ = fftw_alloc_real(static_cast<std::size_t>(nx_) * ny_);
        cplx_ = fftw_alloc_complex(static_cast<std::size_t>(nk_) * ny_);
        {
            std::lock_guard<std::mutex> lock(fftw_planner_mutex());
            fwd_ = fftw_plan_dft_r2c_2d(ny_, nx_, real_, cplx_, FFTW_ESTIMATE);
            bwd_ = fftw_plan_dft_c2r_2d(ny_, nx_, cplx_, real_, FFTW_ESTIMATE);
        }
        const double two_pi = 6.28318530717958647692;
        kx_.resize(nk_);
        for (int i = 0; i < nk_; ++i) kx_[i] = two_pi * i / lx;
        ky_.resize(ny_);
        for (int j = 0; j < ny_; ++j) ky_[j] = two_pi * (j <= ny_ / 2 ? j : j - ny_) / ly;
        // First derivatives zero the unmatched Nyquist mode; |k|^2 keeps it.
        kxd_ = kx_;
        if (nx_ % 2 == 0) kxd_[nk_ - 1] = 0.0;
        kyd_ = ky_;
        if (ny_ % 2 == 0) kyd_[ny_ / 2] = 0.0;
    }

    ~Spectral2D() {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(real_);
        fftw_free(cplx_);
    }

    Spectral2D(const Spectral2D&) = delete;
    Spectral2D& operator=(const Spectral2D&) = delete;

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nk() const { return nk_; }
    double kx(int i) const { return kx_[i]; }
    double ky(int j) const { return ky_[j]; }
    double kxd(int i) const { return kxd_[i]; }
    double kyd(int j) const { return kyd_[j]; }

    void forward(const double* src, std::complex<double>* dst) {
        std::copy(src, src + static_cast<std::size_t>(nx_) * ny_, real_);
        fftw_execute(fwd_);
        const double scale = 1.0 / (static_cast<double>(nx_) * ny_);
        for (std::size_t k = 0; k < spec_size(); ++k)
            dst[k] = std::complex<double>(cplx_[k][0], cplx_[k][1]) * scale;
    }

    void backward(const std::complex<double>* src, double* dst) {
        for (std::size_t k = 0; k < spec_size(); ++k) {
            cplx_[k][0] = src[k].real();
            cplx_[k][1] = src[k].imag();
        }
        fftw_execute(bwd_);
        std::copy(real_, real_ + static_cast<std::size_t>(nx_) * ny_, dst);
    }

    std::size_t spec_size() const { return static_cast<std::size_t>(nk_) * ny_; }
    std::size_t sidx(int j, int i) const { return static_cast<std::size_t>(j) * nk_ + i; }

private:
    int nx_, ny_, nk_;
    double* real_;
    fftw_complex* cplx_;
    fftw_plan fwd_, bwd_;
    std::vector<double> kx_, ky_, kxd_, kyd_;
};

using Cvec = std::vector<std::complex<double>>;

} // namespace

double spectral_divergence_max(const Field& velocity) {
    if (velocity.n_channels != 2)
        throw std::invalid_argument("spectral_divergence_max: need a 2-channel field");
    const Grid2D& g = velocity.grid;
    if (!g.periodic())
        throw std::invalid_argument("spectral_divergence_max: grid must be periodic");
    Spectral2D sp(g.nx, g.ny, g.x1 - g.x0, g.y1 - g.y0);
    Cvec uh(sp.spec_size()), vh(sp.spec_size()), dh(sp.spec_size());
    sp.forward(velocity.channel(0).data(), uh.data());
    sp.forward(velocity.channel(1).data(), vh.data());
    const std::complex<double> I(0.0, 1.0);
    for (int j = 0; j < sp.ny(); ++j)
        for (int i = 0; i < sp.nk(); ++i)
            dh[sp.sidx(j, i)] = I * (sp.kxd(i) * uh[sp.sidx(j, i)] + sp.kyd(j) * vh[sp.sidx(j, i)]);
    std::vector<double> div(g.n_points());
    sp.backward(dh.data(), div.data());
    double m = 0.0;
    for (double v : div) m = std::max(m, std::abs(v));
    return m;
}

double kinetic_energy(const Field& velocity) {
    double e = 0.0;
    for (double v : velocity.data) e += v * v;
    return 0.5 * e / static_cast<double>(velocity.grid.n_points());
}

SolveResult solve_navier_stokes(const VectorPDEParams& p, const Field& ic, const SolverConfig& cfg) {
    p.validate();
    cfg.validate();
    if (p.family != VectorFamily::navier_stokes)
        throw std::invalid_argument("solve_navier_stokes: wrong family");
    if (ic.n_channels != 2)
        throw std::invalid_argument("solve_navier_stokes: ic must have two channels");
    if (!ic.grid.periodic())
        throw std::invalid_argument("solve_navier_stokes: grid must be periodic");

    const Grid2D& g = ic.grid;
    const int nx = g.nx, ny = g.ny;
    const long npts = g.n_points();
    Spectral2D sp(nx, ny, g.x1 - g.x0, g.y1 - g.y0);
    const std::size_t ns = sp.spec_size();
    const std::complex<double> I(0.0, 1.0);

    // The vorticity formulation keeps the velocity solenoidal; require the
    // same of the input.
    {
        FieldStats st = field_stats(ic);
        const double scale = std::max(std::abs(st.min), std::abs(st.max));
        if (spectral_divergence_max(ic) > 1e-8 * std::max(scale, 1e-30))
            throw std::invalid_argument("solve_navier_stokes: initial velocity is not divergence-free");
    }

    // Vorticity w = dv/dx - du/dy.
    Cvec uh(ns), vh(ns), wh(ns);
    sp.forward(ic.channel(0).data(), uh.data());
    sp.forward(ic.channel(1).data(), vh.data());
    for (int j = 0; j < sp.ny(); ++j)
        for (int i = 0; i < sp.nk(); ++i) {
            const auto k = sp.sidx(j, i);
            wh[k] = I * (sp.kxd(i) * vh[k] - sp.kyd(j) * uh[k]);
        }

    // 2/3-rule dealiasing mask.
    std::vector<std::uint8_t> keep(ns, 1);
    double kx_max = 0.0, ky_max = 0.0;
    for (int i = 0; i < sp.nk(); ++i) kx_max = std::max(kx_max, std::abs(sp.kx(i)));
    for (int j = 0; j < ny; ++j) ky_max = std::max(ky_max, std::abs(sp.ky(j)));
    for (int j = 0; j < sp.ny(); ++j)
        for (int i = 0; i < sp.nk(); ++i)
            if (std::abs(sp.kx(i)) > kx_max * 2.0 / 3.0 || std::abs(sp.ky(j)) > ky_max * 2.0 / 3.0)
                keep[sp.sidx(j, i)] = 0;

    std::vector<double> u(npts), v(npts), wx(npts), wy(npts), nl(npts);
    Cvec psih(ns), gx(ns), gy(ns);

    // Velocity from the streamfunction: -|k|^2 psih = -wh.
    auto velocity_from = [&](const Cvec& w_hat) {
        for (int j = 0; j < sp.ny(); ++j)
            for (int i = 0; i < sp.nk(); ++i) {
                const auto k = sp.sidx(j, i);
                const double k2 = sp.kx(i) * sp.kx(i) + sp.ky(j) * sp.ky(j);
                psih[k] = k2 > 0.0 ? w_hat[k] / k2 : 0.0;
                uh[k] = I * sp.kyd(j) * psih[k];
                vh[k] = -I * sp.kxd(i) * psih[k];
            }
        sp.backward(uh.data(), u.data());
        sp.backward(vh.data(), v.data());
    };

    // N(w) = -dealias(F(u w_x + v w_y)); viscosity is carried by the
    // integrating factor.
    auto nonlinear = [&](const Cvec& w_hat, Cvec& out) {
        velocity_from(w_hat);
        for (int j = 0; j < sp.ny(); ++j)
            for (int i = 0; i < sp.nk(); ++i) {
                const auto k = sp.sidx(j, i);
                gx[k] = I * sp.kxd(i) * w_hat[k];
                gy[k] = I * sp.kyd(j) * w_hat[k];
            }
        sp.backward(gx.data(), wx.data());
        sp.backward(gy.data(), wy.data());
        for (long k = 0; k < npts; ++k) nl[k] = u[k] * wx[k] + v[k] * wy[k];
        sp.forward(nl.data(), out.data());
        for (std::size_t k = 0; k < ns; ++k) out[k] = keep[k] ? -out[k] : 0.0;
    };

    Cvec k1(ns), k2(ns), k3(ns), k4(ns), stage(ns);
    std::vector<double> ef_half(ns), ef_full(ns);

    double t = 0.0;
    long step = 0;
    SolveResult result;
    result.terminal = ic;
    const int stride = cfg.record_trajectory
                           ? (cfg.trajectory_stride > 0 ? cfg.trajectory_stride : 16)
                           : 0;

    auto emit_velocity = [&]() {
        velocity_from(wh);
        std::copy(u.begin(), u.end(), result.terminal.channel(0).begin());
        std::copy(v.begin(), v.end(), result.terminal.channel(1).begin());
    };

    while (t < cfg.T - 1e-14) {
        velocity_from(wh);
        double maxu = 0.0, maxv = 0.0;
        for (long k = 0; k < npts; ++k) {
            maxu = std::max(maxu, std::abs(u[k]));
            maxv = std::max(maxv, std::abs(v[k]));
        }
        double dt = cfg.cfl * std::min(g.hx(), g.hy()) / (maxu + maxv + 1e-8);
        dt = std::min(dt, cfg.T - t);
        if (++step > cfg.max_steps)
            throw std::invalid_argument("solve_navier_stokes: required steps exceed max_steps");

        for (int j = 0; j < sp.ny(); ++j)
            for (int i = 0; i < sp.nk(); ++i) {
                const auto k = sp.sidx(j, i);
                const double k2 = sp.kx(i) * sp.kx(i) + sp.ky(j) * sp.ky(j);
                ef_half[k] = std::exp(-p.nu * k2 * dt * 0.5);
                ef_full[k] = ef_half[k] * ef_half[k];
            }

        // Integrating-factor RK4 on dw/dt = N(w) - nu |k|^2 w.
        nonlinear(wh, k1);
        for (std::size_t k = 0; k < ns; ++k) stage[k] = ef_half[k] * (wh[k] + 0.5 * dt * k1[k]);
        nonlinear(stage, k2);
        for (std::size_t k = 0; k < ns; ++k) stage[k] = ef_half[k] * wh[k] + 0.5 * dt * k2[k];
        nonlinear(stage, k3);
        for (std::size_t k = 0; k < ns; ++k) stage[k] = ef_full[k] * wh[k] + dt * ef_half[k] * k3[k];
        nonlinear(stage, k4);
        for (std::size_t k = 0; k < ns; ++k)
            wh[k] = ef_full[k] * wh[k] +
                    dt / 6.0 * (ef_full[k] * k1[k] + 2.0 * ef_half[k] * (k2[k] + k3[k]) + k4[k]);

        t += dt;
        for (std::size_t k = 0; k < ns; ++k)
            if (!std::isfinite(wh[k].real()) || !std::isfinite(wh[k].imag()))
                throw DivergenceError("solve_navier_stokes: vorticity blew up", step);
        if (stride > 0 && (step % stride == 0 || t >= cfg.T - 1e-14)) {
            emit_velocity();
            result.trajectory.push_back(result.terminal);
        }
    }

    emit_velocity();
    for (double x : result.terminal.data)
        if (!std::isfinite(x)) throw DivergenceError("solve_navier_stokes: output not finite", step);
    result.steps = step;
    return result;
}

} // namespace padam
