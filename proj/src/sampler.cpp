#include "padam/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "padam/errors.hpp"
#include "padam/rng.hpp"

namespace padam {

void SigmaSchedule::validate() const {
    if (sigma_min <= 0.0 || sigma_max <= sigma_min)
        throw std::invalid_argument("SigmaSchedule: need 0 < sigma_min < sigma_max");
    if (rho < 1.0) throw std::invalid_argument("SigmaSchedule: rho must be >= 1");
    if (n_steps < 2) throw std::invalid_argument("SigmaSchedule: n_steps must be >= 2");
}

std::vector<double> karras_sigmas(const SigmaSchedule& s) {
    s.validate();
    std::vector<double> out(s.n_steps + 1);
    const double a = std::pow(s.sigma_max, 1.0 / s.rho);
    const double b = std::pow(s.sigma_min, 1.0 / s.rho);
    for (int i = 0; i < s.n_steps; ++i) {
        const double t = static_cast<double>(i) / (s.n_steps - 1);
        out[i] = std::pow(a + t * (b - a), s.rho);
    }
    out[s.n_steps] = 0.0;
    return out;
}

long MeasurementOp::observed_count() const {
    long n = 0;
    for (int c : observed_channels) n += mask.count(c);
    return n;
}

bool MeasurementOp::channel_fully_observed(int c) const {
    for (int oc : observed_channels)
        if (oc == c) return mask.full(c);
    return false;
}

std::vector<double> MeasurementOp::apply(const Field& x) const {
    std::vector<double> out;
    out.reserve(observed_count());
    const long npts = x.grid.n_points();
    for (int c : observed_channels) {
        const auto ch = x.channel(c);
        const std::size_t base = static_cast<std::size_t>(c) * npts;
        for (long k = 0; k < npts; ++k)
            if (mask.indicator[base + k]) out.push_back(ch[k]);
    }
    return out;
}

Field MeasurementOp::adjoint(std::span<const double> r, const Grid2D& grid, int n_channels) const {
    Field out(grid, n_channels);
    const long npts = grid.n_points();
    std::size_t pos = 0;
    for (int c : observed_channels) {
        auto ch = out.channel(c);
        const std::size_t base = static_cast<std::size_t>(c) * npts;
        for (long k = 0; k < npts; ++k)
            if (mask.indicator[base + k]) ch[k] = r[pos++];
    }
    if (pos != r.size()) throw std::invalid_argument("MeasurementOp::adjoint: value count mismatch");
    return out;
}

void Observation::validate() const {
    if (static_cast<long>(values.size()) != op.observed_count())
        throw std::invalid_argument("Observation: value count does not match the mask support");
}

void GuidanceConfig::validate() const {
    if (!std::isfinite(zeta) || zeta <= 0.0)
        throw std::invalid_argument("GuidanceConfig: zeta must be positive and finite");
}

Field guidance_gradient(const Field& x, const Field& x_hat0, const Observation& obs,
                        const GuidanceConfig& cfg, const Denoiser& denoiser, double sigma,
                        int class_id) {
    obs.validate();
    if (cfg.mode == GuidanceMode::off) return Field(x.grid, x.n_channels);

    // Residual r = y_obs - A x_hat_0 on the observed support.
    std::vector<double> r = obs.op.apply(x_hat0);
    double r_norm_sq = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) {
        r[k] = obs.values[k] - r[k];
        r_norm_sq += r[k] * r[k];
    }

    double lambda = cfg.zeta;
    if (cfg.mode == GuidanceMode::residual_normalized)
        lambda = cfg.zeta / (std::sqrt(r_norm_sq) + 1e-8);

    Field at_r = obs.op.adjoint(r, x.grid, x.n_channels);
    Field g = cfg.jacobian == JacobianMode::exact_oracle
                  ? denoiser.jvp_t(x, sigma, class_id, at_r)
                  : at_r;
    const double scale = 2.0 * lambda;
    for (double& v : g.data) v *= scale;
    return g;
}

namespace {

struct DriftContext {
    const Denoiser& denoiser;
    int class_id;
    const Observation* obs;
    const GuidanceConfig& cfg;
};

// dx/dsigma = (x - x_hat_0)/sigma - sigma * likelihood_score. The guidance
// residual always uses the raw denoiser estimate; hard replacement then pins
// fully observed channels of the clean estimate for the transport term, so
// both forces act: guidance reweights the prior toward consistency while the
// replacement inpaints the known channels exactly.
Field guided_drift(const Field& x, double sigma, const DriftContext& ctx) {
    Field x_hat = ctx.denoiser.evaluate(x, sigma, ctx.class_id);
    const bool guided = ctx.obs != nullptr && ctx.cfg.mode != GuidanceMode::off;

    Field g(x.grid, x.n_channels);
    if (guided)
        g = guidance_gradient(x, x_hat, *ctx.obs, ctx.cfg, ctx.denoiser, sigma, ctx.class_id);

    if (guided && ctx.cfg.hard_replace_full) {
        const long npts = x.grid.n_points();
        std::size_t pos = 0;
        for (int c : ctx.obs->op.observed_channels) {
            // Walk the packed values in the same order apply() produces.
            const std::size_t base = static_cast<std::size_t>(c) * npts;
            const bool full = ctx.obs->op.mask.full(c);
            auto ch = x_hat.channel(c);
            for (long k = 0; k < npts; ++k) {
                if (!ctx.obs->op.mask.indicator[base + k]) continue;
                if (full) ch[k] = ctx.obs->values[pos];
                ++pos;
            }
        }
    }

    Field d(x.grid, x.n_channels);
    const double inv = 1.0 / sigma;
    for (std::size_t k = 0; k < d.data.size(); ++k)
        d.data[k] = (x.data[k] - x_hat.data[k]) * inv - (guided ? sigma * g.data[k] : 0.0);
    return d;
}

Field heun_sweep(Field x, const std::vector<double>& sigmas, const DriftContext& ctx) {
    for (std::size_t i = 0; i + 1 < sigmas.size(); ++i) {
        const double s_cur = sigmas[i];
        const double s_next = sigmas[i + 1];
        const Field d1 = guided_drift(x, s_cur, ctx);
        Field xe(x.grid, x.n_channels);
        for (std::size_t k = 0; k < x.data.size(); ++k)
            xe.data[k] = x.data[k] + (s_next - s_cur) * d1.data[k];
        if (s_next == 0.0) {
            x = std::move(xe);
        } else {
            const Field d2 = guided_drift(xe, s_next, ctx);
            for (std::size_t k = 0; k < x.data.size(); ++k)
                x.data[k] += (s_next - s_cur) * 0.5 * (d1.data[k] + d2.data[k]);
        }
        for (double v : x.data)
            if (!std::isfinite(v))
                throw DivergenceError("sampler: state became non-finite", static_cast<long>(i));
    }
    return x;
}

} // namespace

Field prior_step(const Field& x, double sigma_cur, double sigma_next, const Denoiser& denoiser,
                 int class_id) {
    if (!(sigma_cur > sigma_next) || sigma_next < 0.0)
        throw std::invalid_argument("prior_step: need sigma_cur > sigma_next >= 0");
    GuidanceConfig off;
    off.mode = GuidanceMode::off;
    DriftContext ctx{denoiser, class_id, nullptr, off};
    std::vector<double> sig{sigma_cur, sigma_next};
    return heun_sweep(x, sig, ctx);
}

Field sample_posterior(const Denoiser& denoiser, int class_id, const Grid2D& grid,
                       const Observation* obs, const GuidanceConfig& cfg,
                       const SigmaSchedule& schedule, std::uint64_t seed) {
    cfg.validate();
    if (obs) obs->validate();
    const std::vector<double> sigmas = karras_sigmas(schedule);

    Field x(grid, 3);
    SeededRng rng(seed);
    for (double& v : x.data) v = schedule.sigma_max * rng.normal();

    DriftContext ctx{denoiser, class_id, obs, cfg};
    return heun_sweep(std::move(x), sigmas, ctx);
}

std::vector<Field> sample_ensemble(const Denoiser& denoiser, int class_id, const Grid2D& grid,
                                   const Observation* obs, const GuidanceConfig& cfg,
                                   const SigmaSchedule& schedule, int members, std::uint64_t seed) {
    if (members < 1) throw std::invalid_argument("sample_ensemble: members must be >= 1");
    std::vector<Field> out;
    out.reserve(members);
    for (int j = 0; j < members; ++j) {
        // Member 0 keeps the root seed so a one-member ensemble reproduces
        // sample_posterior exactly.
        const std::uint64_t s = j == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(j));
        try {
            out.push_back(sample_posterior(denoiser, class_id, grid, obs, cfg, schedule, s));
        } catch (const DivergenceError& e) {
            throw DivergenceError("sample_ensemble: member " + std::to_string(j) + ": " + e.what());
        }
    }
    return out;
}

} // namespace padam
