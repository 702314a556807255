#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "padam/metrics.hpp"
#include "padam/mixture_prior.hpp"
#include "padam/rng.hpp"
#include "padam/sampler.hpp"

using namespace padam;

namespace {

Dataset toy_dataset(int n, std::uint64_t seed, int nx = 8) {
    Dataset ds;
    ds.grid = unit_grid(nx, BoundaryTag::neumann);
    ds.registry = make_registry(Investigation::unified);
    SeededRng rng(seed);
    for (int i = 0; i < n; ++i) {
        UnifiedSample s;
        s.class_id = 0;
        s.x = Field(ds.grid, 3);
        for (double& v : s.x.data) v = rng.normal();
        s.seed = i;
        ds.samples.push_back(std::move(s));
    }
    ds.norm.n_classes = ds.registry.size();
    ds.norm.mean.assign(ds.norm.n_classes * 3, 0.0);
    ds.norm.scale.assign(ds.norm.n_classes * 3, 1.0);
    ds.sigma_data = 1.0;
    return ds;
}

struct IdentityDenoiser : Denoiser {
    Field evaluate(const Field& x, double, int) const override { return x; }
};

} // namespace

TEST_CASE("karras schedule endpoints, monotonicity, rho=1 degeneracy") {
    SigmaSchedule s;
    s.sigma_min = 0.01;
    s.sigma_max = 10.0;
    s.rho = 7.0;
    s.n_steps = 20;
    auto sig = karras_sigmas(s);
    REQUIRE(sig.size() == 21);
    CHECK(sig[0] == doctest::Approx(10.0));
    CHECK(sig[19] == doctest::Approx(0.01));
    CHECK(sig[20] == 0.0);
    for (std::size_t i = 0; i + 1 < sig.size(); ++i) CHECK(sig[i] > sig[i + 1]);

    s.rho = 1.0;
    auto lin = karras_sigmas(s);
    for (int i = 0; i < 20; ++i)
        CHECK(lin[i] == doctest::Approx(10.0 + i * (0.01 - 10.0) / 19.0).epsilon(1e-12));

    s.rho = 0.5;
    CHECK_THROWS_AS(karras_sigmas(s), std::invalid_argument);
}

TEST_CASE("prior_step is the identity at a denoiser fixed point") {
    Grid2D g = unit_grid(8, BoundaryTag::neumann);
    IdentityDenoiser id;
    SeededRng rng(3);
    Field x(g, 3);
    for (double& v : x.data) v = rng.normal();
    Field x2 = prior_step(x, 1.0, 0.5, id, 0);
    for (std::size_t k = 0; k < x.data.size(); ++k) CHECK(x2.data[k] == x.data[k]);

    CHECK_THROWS_AS(prior_step(x, 0.5, 1.0, id, 0), std::invalid_argument);
}

TEST_CASE("single-sample sweep recovers the sample exactly") {
    Dataset ds = toy_dataset(1, 5);
    MixtureOraclePrior prior(ds);
    SigmaSchedule sched; // defaults
    GuidanceConfig off;
    off.mode = GuidanceMode::off;

    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        Field out = sample_posterior(prior, 0, ds.grid, nullptr, off, sched, seed);
        Field target(ds.grid, 3);
        std::copy(prior.component(0, 0).begin(), prior.component(0, 0).end(), target.data.begin());
        CHECK(rel_l2(out, target).value < 0.5);
    }
}

TEST_CASE("heun order on a two-point mixture is at least 1.8") {
    Dataset ds = toy_dataset(2, 7);
    MixtureOraclePrior prior(ds);

    // Smooth sub-interval of the schedule, well away from the collapse.
    auto run = [&](int n) {
        SigmaSchedule s;
        s.sigma_min = 0.5;
        s.sigma_max = 10.0;
        s.rho = 3.0;
        s.n_steps = n;
        auto sig = karras_sigmas(s);
        sig.pop_back(); // stop at sigma_min, no terminal Euler half
        SeededRng rng(9);
        Field x(ds.grid, 3);
        for (double& v : x.data) v = 10.0 * rng.normal();
        for (std::size_t i = 0; i + 1 < sig.size(); ++i)
            x = prior_step(x, sig[i], sig[i + 1], prior, 0);
        return x;
    };

    Field ref = run(1024);
    Field c1 = run(16);
    Field c2 = run(32);
    const double e1 = rel_l2(c1, ref).value;
    const double e2 = rel_l2(c2, ref).value;
    const double order = std::log2(e1 / e2);
    CHECK(order >= 1.8);
}

TEST_CASE("guidance off reproduces the prior trajectory bit for bit") {
    Dataset ds = toy_dataset(3, 11);
    MixtureOraclePrior prior(ds);
    SigmaSchedule sched;
    sched.n_steps = 16;

    Observation obs;
    obs.op.mask = make_mask(ds.grid, 3, 0.5, 77);
    obs.op.observed_channels = {0, 1, 2};
    Field truth(ds.grid, 3);
    std::copy(prior.component(0, 0).begin(), prior.component(0, 0).end(), truth.data.begin());
    obs.values = obs.op.apply(truth);

    GuidanceConfig off;
    off.mode = GuidanceMode::off;
    Field a = sample_posterior(prior, 0, ds.grid, &obs, off, sched, 42);
    Field b = sample_posterior(prior, 0, ds.grid, nullptr, off, sched, 42);
    CHECK(a.data == b.data);
}

TEST_CASE("guidance gradient is zero at zero residual and matches arithmetic") {
    Grid2D g = unit_grid(8, BoundaryTag::neumann);
    IdentityDenoiser id;

    Observation obs;
    obs.op.mask = make_mask(g, 3, 0.0, 1);
    // Observe exactly one coordinate of channel 1.
    obs.op.mask.indicator[g.n_points() + 12] = 1;
    obs.op.observed_channels = {1};
    obs.values = {1.0};

    Field x(g, 3);
    Field x_hat(g, 3); // zero estimate -> residual r = 1 at the coordinate

    GuidanceConfig cfg;
    cfg.mode = GuidanceMode::fixed;
    cfg.zeta = 1.0;
    cfg.jacobian = JacobianMode::identity;

    Field grad = guidance_gradient(x, x_hat, obs, cfg, id, 1.0, 0);
    // Likelihood-score term: +2 lambda r at the observed coordinate.
    CHECK(grad.data[g.n_points() + 12] == doctest::Approx(2.0));
    double other = 0.0;
    for (std::size_t k = 0; k < grad.data.size(); ++k)
        if (k != static_cast<std::size_t>(g.n_points()) + 12) other += std::abs(grad.data[k]);
    CHECK(other == 0.0);

    // Zero residual -> zero gradient.
    Field consistent(g, 3);
    consistent.data[g.n_points() + 12] = 1.0;
    Field zg = guidance_gradient(x, consistent, obs, cfg, id, 1.0, 0);
    for (double v : zg.data) CHECK(v == 0.0);
}

TEST_CASE("exact-oracle guidance matches finite differences of the data misfit") {
    Dataset ds = toy_dataset(3, 13);
    MixtureOraclePrior prior(ds);
    SeededRng rng(15);
    // Large enough that several mixture weights stay alive (see jvp_t note).
    const double sigma = 5.0;

    Observation obs;
    obs.op.mask = make_mask(ds.grid, 3, 0.4, 5);
    obs.op.observed_channels = {0, 1, 2};
    Field truth(ds.grid, 3);
    std::copy(prior.component(0, 1).begin(), prior.component(0, 1).end(), truth.data.begin());
    obs.values = obs.op.apply(truth);

    Field x(ds.grid, 3);
    for (std::size_t k = 0; k < x.data.size(); ++k)
        x.data[k] = prior.component(0, 0)[k] + sigma * rng.normal();

    GuidanceConfig cfg;
    cfg.mode = GuidanceMode::fixed;
    cfg.zeta = 1.0;
    cfg.jacobian = JacobianMode::exact_oracle;
    Field x_hat = prior.evaluate(x, sigma, 0);
    Field g = guidance_gradient(x, x_hat, obs, cfg, prior, sigma, 0);

    auto misfit = [&](const Field& xx) {
        Field d = prior.evaluate(xx, sigma, 0);
        const auto got = obs.op.apply(d);
        double sq = 0.0;
        for (std::size_t k = 0; k < got.size(); ++k) {
            const double r = obs.values[k] - got[k];
            sq += r * r;
        }
        return sq;
    };

    // g = -lambda * grad ||y - A xhat(x)||^2 with lambda = 1.
    const double h = 1e-5;
    double num = 0, den = 0;
    for (std::size_t k = 0; k < x.data.size(); k += 7) {
        Field xp = x, xm = x;
        xp.data[k] += h;
        xm.data[k] -= h;
        const double fd = -(misfit(xp) - misfit(xm)) / (2 * h);
        num += (fd - g.data[k]) * (fd - g.data[k]);
        den += g.data[k] * g.data[k];
    }
    CHECK(std::sqrt(num / den) < 1e-4);
}

TEST_CASE("posterior sampling is deterministic and honors full observation") {
    Dataset ds = toy_dataset(8, 17);
    MixtureOraclePrior prior(ds);
    SigmaSchedule sched;
    sched.n_steps = 32;

    Observation obs;
    obs.op.mask = make_mask(ds.grid, 3, 1.0, 3);
    obs.op.observed_channels = {0, 1, 2};
    Field truth(ds.grid, 3);
    std::copy(prior.component(0, 4).begin(), prior.component(0, 4).end(), truth.data.begin());
    obs.values = obs.op.apply(truth);

    GuidanceConfig cfg; // defaults: residual-normalized, hard replace
    Field a = sample_posterior(prior, 0, ds.grid, &obs, cfg, sched, 5);
    Field b = sample_posterior(prior, 0, ds.grid, &obs, cfg, sched, 5);
    CHECK(a.data == b.data);
    CHECK(rel_l2(a, truth).value < 1.0);
}

TEST_CASE("residual shrinks across the sweep under full observation") {
    Dataset ds = toy_dataset(6, 19);
    MixtureOraclePrior prior(ds);
    SigmaSchedule sched;

    int shrunk = 0;
    const int trials = 10;
    for (int t = 0; t < trials; ++t) {
        Observation obs;
        obs.op.mask = make_mask(ds.grid, 3, 1.0, t);
        obs.op.observed_channels = {0, 1, 2};
        Field truth(ds.grid, 3);
        std::copy(prior.component(0, t % 6).begin(), prior.component(0, t % 6).end(),
                  truth.data.begin());
        obs.values = obs.op.apply(truth);

        SeededRng rng(100 + t);
        Field x0(ds.grid, 3);
        for (double& v : x0.data) v = sched.sigma_max * rng.normal();
        auto residual = [&](const Field& x, double sigma) {
            Field d = prior.evaluate(x, sigma, 0);
            const auto got = obs.op.apply(d);
            double sq = 0.0;
            for (std::size_t k = 0; k < got.size(); ++k) {
                const double r = obs.values[k] - got[k];
                sq += r * r;
            }
            return std::sqrt(sq);
        };
        const double first = residual(x0, sched.sigma_max);
        GuidanceConfig cfg;
        Field xT = sample_posterior(prior, 0, ds.grid, &obs, cfg, sched, 100 + t);
        const double last = residual(xT, sched.sigma_min);
        if (last < first) ++shrunk;
    }
    CHECK(shrunk >= static_cast<int>(0.95 * trials));
}

TEST_CASE("ensembles: member zero equals the single sample, sparse members differ") {
    // A clustered bank keeps the sparse posterior genuinely multimodal, so
    // members with different seeds settle on different components.
    Dataset ds = toy_dataset(1, 23);
    SeededRng jitter(27);
    for (int copy = 0; copy < 5; ++copy) {
        UnifiedSample s = ds.samples[0];
        for (double& v : s.x.data) v += 0.3 * jitter.normal();
        ds.samples.push_back(std::move(s));
    }
    MixtureOraclePrior prior(ds);
    SigmaSchedule sched;
    sched.n_steps = 16;

    Observation obs;
    obs.op.mask = make_mask(ds.grid, 3, 0.05, 9);
    obs.op.observed_channels = {1, 2};
    Field truth(ds.grid, 3);
    std::copy(prior.component(0, 2).begin(), prior.component(0, 2).end(), truth.data.begin());
    obs.values = obs.op.apply(truth);

    GuidanceConfig cfg;
    auto ens = sample_ensemble(prior, 0, ds.grid, &obs, cfg, sched, 6, 31);
    REQUIRE(ens.size() == 6);
    Field single = sample_posterior(prior, 0, ds.grid, &obs, cfg, sched, 31);
    CHECK(ens[0].data == single.data);

    bool any_differ = false;
    for (int j = 1; j < 6; ++j)
        if (ens[j].data != ens[0].data) any_differ = true;
    CHECK(any_differ);

    CHECK_THROWS_AS(sample_ensemble(prior, 0, ds.grid, &obs, cfg, sched, 0, 1),
                    std::invalid_argument);
}

TEST_CASE("measurement operator is linear, idempotent on its range, and A(0)=0") {
    Grid2D g = unit_grid(8, BoundaryTag::neumann);
    MeasurementOp op;
    op.mask = make_mask(g, 3, 0.4, 3);
    op.observed_channels = {0, 2};

    Field zero(g, 3);
    for (double v : op.apply(zero)) CHECK(v == 0.0);

    SeededRng rng(7);
    Field x(g, 3), y(g, 3);
    for (double& v : x.data) v = rng.normal();
    for (double& v : y.data) v = rng.normal();
    auto ax = op.apply(x);
    auto ay = op.apply(y);
    Field combo(g, 3);
    for (std::size_t k = 0; k < combo.data.size(); ++k)
        combo.data[k] = 2.0 * x.data[k] - 3.0 * y.data[k];
    auto ac = op.apply(combo);
    for (std::size_t k = 0; k < ac.size(); ++k)
        CHECK(ac[k] == doctest::Approx(2.0 * ax[k] - 3.0 * ay[k]).epsilon(1e-12));

    // A applied to the extension of A(x) returns A(x).
    Field ext = op.adjoint(ax, g, 3);
    auto back = op.apply(ext);
    for (std::size_t k = 0; k < ax.size(); ++k) CHECK(back[k] == ax[k]);
}
