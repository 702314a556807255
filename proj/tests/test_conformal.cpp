#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "padam/conformal.hpp"
#include "padam/rng.hpp"

using namespace padam;

namespace {

Field const_field(const Grid2D& g, double v) { return Field(g, 1, v); }

} // namespace

TEST_CASE("ensemble stats match the textbook formulas") {
    Grid2D g = unit_grid(4, BoundaryTag::neumann);

    std::vector<Field> same(4, const_field(g, 1.5));
    EnsembleStats st = ensemble_stats(same);
    for (double v : st.stdev.data) CHECK(v == 0.0);
    for (double v : st.mean.data) CHECK(v == 1.5);

    std::vector<Field> two{const_field(g, 0.0), const_field(g, 2.0)};
    EnsembleStats st2 = ensemble_stats(two);
    for (double v : st2.mean.data) CHECK(v == doctest::Approx(1.0));
    for (double v : st2.stdev.data) CHECK(v == doctest::Approx(std::sqrt(2.0)));

    std::vector<Field> one{const_field(g, 0.0)};
    CHECK_THROWS_AS(ensemble_stats(one), std::invalid_argument);
}

TEST_CASE("ensemble stats agree with a brute-force two-pass oracle") {
    Grid2D g = unit_grid(8, BoundaryTag::neumann);
    SeededRng rng(3);
    std::vector<Field> members;
    for (int j = 0; j < 6; ++j) {
        Field f(g, 1);
        for (double& v : f.data) v = rng.normal();
        members.push_back(std::move(f));
    }
    EnsembleStats st = ensemble_stats(members);
    for (long k = 0; k < g.n_points(); ++k) {
        double mu = 0.0;
        for (const auto& m : members) mu += m.data[k] / 6.0;
        double var = 0.0;
        for (const auto& m : members) var += (m.data[k] - mu) * (m.data[k] - mu) / 5.0;
        CHECK(st.mean.data[k] == doctest::Approx(mu).epsilon(1e-12));
        CHECK(st.stdev.data[k] == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
    }
}

TEST_CASE("nonconformity scores and the floor rule") {
    Grid2D g = unit_grid(4, BoundaryTag::neumann);
    EnsembleStats st;
    st.mean = const_field(g, 1.0);
    st.stdev = const_field(g, 0.25);
    st.members = 4;

    Field z = const_field(g, 1.5);
    Field s = nonconformity(z, st, 1e-6);
    for (double v : s.data) CHECK(v == doctest::Approx(2.0));

    Field s0 = nonconformity(st.mean, st, 1e-6);
    for (double v : s0.data) CHECK(v == 0.0);

    st.stdev = const_field(g, 0.0);
    Field sf = nonconformity(z, st, 0.1);
    for (double v : sf.data) CHECK(v == doctest::Approx(5.0)); // |0.5| / 0.1

    CHECK_THROWS_AS(nonconformity(z, st, 0.0), std::invalid_argument);
}

TEST_CASE("calibrate reproduces the rank arithmetic") {
    std::vector<double> scores;
    for (int i = 1; i <= 100; ++i) scores.push_back(i);
    // rank = ceil(101 * 0.95) = 96.
    CHECK(calibrate(scores, 0.05) == doctest::Approx(96.0));

    std::vector<double> s19;
    for (int i = 1; i <= 19; ++i) s19.push_back(10.0 * i);
    // rank = ceil(20 * 0.95) = 19 -> the maximum.
    CHECK(calibrate(s19, 0.05) == doctest::Approx(190.0));

    // Rank beyond the pool yields the +inf sentinel.
    std::vector<double> tiny{1.0, 2.0};
    CHECK(std::isinf(calibrate(tiny, 0.05)));

    CHECK_THROWS_AS(calibrate({}, 0.05), std::invalid_argument);
    CHECK_THROWS_AS(calibrate(tiny, 0.0), std::invalid_argument);
}

TEST_CASE("calibrate agrees with a brute-force sort-and-index oracle") {
    SeededRng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(400));
        const double alpha = rng.uniform(0.02, 0.5);
        std::vector<double> scores(n);
        for (double& s : scores) s = rng.normal();

        std::vector<double> sorted = scores;
        std::sort(sorted.begin(), sorted.end());
        const long rank = static_cast<long>(std::ceil((n + 1) * (1.0 - alpha)));
        const double expect =
            rank > n ? std::numeric_limits<double>::infinity() : sorted[rank - 1];
        const double got = calibrate(scores, alpha);
        if (std::isinf(expect))
            CHECK(std::isinf(got));
        else
            CHECK(got == doctest::Approx(expect));
    }
}

TEST_CASE("intervals: construction, nesting, and monotone q_hat") {
    Grid2D g = unit_grid(4, BoundaryTag::neumann);
    EnsembleStats st;
    st.mean = const_field(g, 1.0);
    st.stdev = const_field(g, 0.2);
    st.members = 6;

    auto [lo, hi] = conformal_interval(st, 2.5, 1e-9);
    for (double v : lo.data) CHECK(v == doctest::Approx(0.5));
    for (double v : hi.data) CHECK(v == doctest::Approx(1.5));

    auto [lo0, hi0] = conformal_interval(st, 0.0, 1e-9);
    for (long k = 0; k < g.n_points(); ++k) CHECK(lo0.data[k] == hi0.data[k]);

    CHECK_THROWS_AS(conformal_interval(st, -1.0, 1e-9), std::invalid_argument);

    // Monotonicity of the quantile in (1 - alpha) and interval nesting.
    SeededRng rng(11);
    std::vector<double> scores(300);
    for (double& s : scores) s = std::abs(rng.normal());
    double prev = 0.0;
    for (double alpha : {0.5, 0.2, 0.1, 0.05, 0.01}) {
        const double q = calibrate(scores, alpha);
        CHECK(q >= prev);
        prev = q;
    }
}

TEST_CASE("picp counts coverage") {
    Grid2D g = unit_grid(4, BoundaryTag::neumann);
    Field truth = const_field(g, 1.0);
    CHECK(picp(truth, const_field(g, 0.0), const_field(g, 2.0)) == 100.0);
    CHECK(picp(truth, const_field(g, 1.5), const_field(g, 2.0)) == 0.0);

    Field lo = const_field(g, 0.0), hi = const_field(g, 2.0);
    for (long k = 0; k < g.n_points() / 2; ++k) hi.data[k] = 0.5; // uncovered half
    CHECK(picp(truth, lo, hi) == 50.0);
}

TEST_CASE("marginal coverage on synthetic exchangeable ensembles") {
    // Same generative law for calibration and test; pixels i.i.d.; the split
    // conformal guarantee then holds marginally over everything.
    SeededRng root(13);
    const Grid2D g = unit_grid(8, BoundaryTag::neumann);
    const double alpha = 0.05;
    const int n_cal = 50, members = 6;

    auto draw_instance = [&](SeededRng& rng, Field& truth, std::vector<Field>& ens) {
        Field center(g, 1);
        for (double& v : center.data) v = rng.normal();
        truth = center;
        // Ensembles underdisperse (0.6x) so raw intervals undercover and the
        // calibrated quantile has to stretch them.
        for (double& v : truth.data) v += 1.0 * rng.normal();
        ens.assign(members, Field(g, 1));
        for (int j = 0; j < members; ++j)
            for (long k = 0; k < g.n_points(); ++k)
                ens[j].data[k] = center.data[k] + 0.6 * rng.normal();
    };

    const int trials = 40;
    double mean_cov = 0.0;
    for (int t = 0; t < trials; ++t) {
        SeededRng rng = root.stream(t);
        std::vector<double> pooled;
        for (int i = 0; i < n_cal; ++i) {
            Field truth;
            std::vector<Field> ens;
            draw_instance(rng, truth, ens);
            EnsembleStats st = ensemble_stats(ens);
            Field sc = nonconformity(truth, st, 1e-8);
            pooled.insert(pooled.end(), sc.data.begin(), sc.data.end());
        }
        const double q = calibrate(pooled, alpha);

        Field truth;
        std::vector<Field> ens;
        draw_instance(rng, truth, ens);
        EnsembleStats st = ensemble_stats(ens);
        auto [lo, hi] = conformal_interval(st, q, 1e-8);
        mean_cov += picp(truth, lo, hi) / 100.0 / trials;
    }
    CHECK(mean_cov >= 1.0 - alpha - 3.0 * std::sqrt(alpha * (1 - alpha) / trials));
}

TEST_CASE("calibration record round trips") {
    CalibrationRecord r;
    r.class_id = 2;
    r.task = "forward";
    r.alpha = 0.05;
    r.n_pool = 51200;
    r.n_instances = 50;
    r.members = 6;
    r.fraction = 0.3;
    r.q_hat = 3.25;
    r.sigma_floor = 1e-7;
    r.score_digest = 0xDEADBEEFULL;
    r.config_hash = "0123456789abcdef";
    r.seed = 42;

    const std::string path =
        (std::filesystem::temp_directory_path() / "padam_test_cal.txt").string();
    r.save(path);
    CalibrationRecord back = CalibrationRecord::load(path);
    CHECK(back.class_id == r.class_id);
    CHECK(back.task == r.task);
    CHECK(back.alpha == r.alpha);
    CHECK(back.n_pool == r.n_pool);
    CHECK(back.q_hat == r.q_hat);
    CHECK(back.score_digest == r.score_digest);
    CHECK(back.config_hash == r.config_hash);
}
