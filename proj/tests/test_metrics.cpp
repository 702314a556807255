#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "padam/metrics.hpp"
#include "padam/rng.hpp"

using namespace padam;

TEST_CASE("rel_l2 pinned cases") {
    Grid2D g = unit_grid(8, BoundaryTag::neumann);
    Field t(g, 1, 1.0);

    CHECK(rel_l2(t, t).value == 0.0);

    Field twice(g, 1, 2.0);
    CHECK(rel_l2(twice, t).value == doctest::Approx(100.0));

    Field zero(g, 1, 0.0);
    CHECK(rel_l2(zero, t).value == doctest::Approx(100.0));

    // Tiny truth norm triggers the absolute fallback.
    Field tiny(g, 1, 1e-12);
    Field pred(g, 1, 3e-12);
    RelL2Result r = rel_l2(pred, tiny);
    CHECK(r.absolute);

    Field other(unit_grid(4, BoundaryTag::neumann), 1);
    CHECK_THROWS_AS(rel_l2(other, t), std::invalid_argument);
}

TEST_CASE("rel_l2 triangle bound on random triples") {
    SeededRng rng(3);
    Grid2D g = unit_grid(8, BoundaryTag::neumann);
    for (int trial = 0; trial < 50; ++trial) {
        Field a(g, 1), b(g, 1), c(g, 1);
        for (long k = 0; k < g.n_points(); ++k) {
            a.data[k] = rng.normal();
            b.data[k] = rng.normal() + 1.0;
            c.data[k] = rng.normal() - 1.0;
        }
        auto norm = [](const Field& f) {
            double s = 0;
            for (double v : f.data) s += v * v;
            return std::sqrt(s);
        };
        const double lhs = rel_l2(a, c).value;
        const double rhs = rel_l2(a, b).value * norm(b) / norm(c) + rel_l2(b, c).value;
        CHECK(lhs <= rhs + 1e-9);
    }
}

TEST_CASE("operator shift identity and monotonicity") {
    Grid2D g = unit_grid(64, BoundaryTag::neumann);
    Field ic = gaussian_bump_ic(g, 0.45, 0.55, 0.05);
    SolverConfig cfg;
    cfg.T = 0.04;

    ScalarPDEParams ad;
    ad.family = ScalarFamily::advection_diffusion;
    ad.nu = 0.25;
    ad.ax = 4;
    ad.ay = 2;

    auto adr_with = [&](double k) {
        ScalarPDEParams p = ad;
        p.family = ScalarFamily::adr;
        p.k = k;
        return p;
    };

    // k = 0: identical operators, shift is exactly zero.
    CHECK(operator_shift(ad, adr_with(0.0), ic, cfg) == doctest::Approx(0.0).epsilon(1e-12));

    // Linear reaction commutes: shift = e^{kT} - 1 analytically.
    const double shift5 = operator_shift(ad, adr_with(5.0), ic, cfg);
    CHECK(shift5 == doctest::Approx(100.0 * (std::exp(0.2) - 1.0)).epsilon(2e-3));

    double prev = -1.0;
    for (double k : {0.0, 2.5, 5.0, 10.0, 15.0}) {
        const double s = operator_shift(ad, adr_with(k), ic, cfg);
        CHECK(s > prev);
        prev = s;
    }
}

TEST_CASE("operator shift is IC-independent for the linear reaction") {
    Grid2D g = unit_grid(48, BoundaryTag::neumann);
    SolverConfig cfg;
    cfg.T = 0.04;
    ScalarPDEParams ad;
    ad.family = ScalarFamily::advection_diffusion;
    ad.nu = 0.25;
    ad.ax = 4;
    ad.ay = 2;
    ScalarPDEParams adr = ad;
    adr.family = ScalarFamily::adr;
    adr.k = 5.0;

    SeededRng rng(9);
    std::vector<double> shifts;
    for (int t = 0; t < 10; ++t) {
        Field ic = gaussian_bump_ic(g, rng.uniform(0.25, 0.75), rng.uniform(0.25, 0.75),
                                    rng.uniform(0.03, 0.07));
        shifts.push_back(operator_shift(ad, adr, ic, cfg));
    }
    for (double s : shifts) CHECK(std::abs(s - shifts[0]) < 0.1);
}

TEST_CASE("metric record emits the schema") {
    CHECK(MetricRecord::csv_header() ==
          std::string("metric,name,class,task,fraction,value,seed,config_hash"));
    MetricRecord r;
    r.metric = "rel_l2";
    r.name = "i007";
    r.pde_class = "diffusion";
    r.task = "forward";
    r.fraction = 0.3;
    r.value = 1.25;
    r.seed = 99;
    r.config_hash = "abc";
    CHECK(r.csv_row() == std::string("rel_l2,i007,diffusion,forward,0.3,1.25,99,abc"));
}
