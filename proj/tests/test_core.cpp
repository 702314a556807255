#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "padam/errors.hpp"
#include "padam/field.hpp"
#include "padam/mask.hpp"
#include "padam/pde.hpp"
#include "padam/rng.hpp"

using namespace padam;

TEST_CASE("grid spacing follows the boundary convention") {
    Grid2D node(64, 64, 0.0, 1.0, 0.0, 1.0, BoundaryTag::neumann);
    CHECK(node.hx() == doctest::Approx(1.0 / 63.0));
    CHECK(node.x(0) == 0.0);
    CHECK(node.x(63) == doctest::Approx(1.0));

    Grid2D cell(64, 64, 0.0, 1.0, 0.0, 1.0, BoundaryTag::periodic);
    CHECK(cell.hx() == doctest::Approx(1.0 / 64.0));
    CHECK(cell.x(0) == doctest::Approx(0.5 / 64.0));

    CHECK_THROWS_AS(Grid2D(3, 8, 0, 1, 0, 1, BoundaryTag::neumann), std::invalid_argument);
    CHECK_THROWS_AS(Grid2D(8, 8, 1, 0, 0, 1, BoundaryTag::neumann), std::invalid_argument);
}

TEST_CASE("field_stats exact reductions") {
    Grid2D g = unit_grid(8, BoundaryTag::neumann);

    Field zero(g, 2);
    FieldStats s0 = field_stats(zero);
    CHECK(s0.min == 0.0);
    CHECK(s0.max == 0.0);
    CHECK(s0.l2norm == 0.0);

    Field c2(g, 1, 2.0);
    FieldStats s2 = field_stats(c2);
    CHECK(s2.l2norm == doctest::Approx(2.0 * std::sqrt(64.0)));

    Field bad(g, 1, 1.0);
    bad.data[10] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(field_stats(bad), DivergenceError);
}

TEST_CASE("gaussian bump peaks at the centroid") {
    // 11 nodes put 0.5 exactly on the grid.
    Grid2D g(11, 11, 0.0, 1.0, 0.0, 1.0, BoundaryTag::neumann);
    Field f = gaussian_bump_ic(g, 0.5, 0.5, 0.05);
    CHECK(f.at(0, 5, 5) == doctest::Approx(1.0)); // exp(0) sin^2(pi/2)
    FieldStats st = field_stats(f);
    CHECK(st.max == doctest::Approx(1.0));
}

TEST_CASE("mask counts are exact and deterministic") {
    Grid2D g = unit_grid(64, BoundaryTag::neumann);

    ObservationMask full = make_mask(g, 1, 1.0, 42);
    CHECK(full.count(0) == 64 * 64);
    ObservationMask none = make_mask(g, 1, 0.0, 42);
    CHECK(none.count(0) == 0);

    // round(0.3 * 4096) = 1229, frozen from the counting rule.
    ObservationMask m3 = make_mask(g, 1, 0.3, 42);
    CHECK(m3.count(0) == 1229);

    ObservationMask again = make_mask(g, 1, 0.3, 42);
    CHECK(m3.indicator == again.indicator);

    ObservationMask other_seed = make_mask(g, 1, 0.3, 43);
    CHECK(m3.indicator != other_seed.indicator);

    CHECK_THROWS_AS(make_mask(g, 1, 1.5, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_mask(g, 1, -0.1, 0), std::invalid_argument);
}

TEST_CASE("mask channels draw disjoint streams") {
    Grid2D g = unit_grid(16, BoundaryTag::neumann);
    ObservationMask m = make_mask(g, 3, 0.5, 7);
    CHECK(m.count(0) == 128);
    CHECK(m.count(1) == 128);
    // Distinct channels almost surely select different point sets.
    bool identical = true;
    for (long k = 0; k < g.n_points(); ++k)
        if (m.indicator[k] != m.indicator[g.n_points() + k]) identical = false;
    CHECK_FALSE(identical);
}

TEST_CASE("rng streams are reproducible and independent") {
    SeededRng a(123);
    SeededRng b(123);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

    SeededRng s0 = SeededRng(99).stream(0);
    SeededRng s1 = SeededRng(99).stream(1);
    bool any_diff = false;
    for (int i = 0; i < 10000; ++i)
        if (s0.next_u64() != s1.next_u64()) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("rng uniform and normal are sane") {
    SeededRng r(5);
    double mean = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double u = r.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        mean += u / 20000;
    }
    CHECK(mean == doctest::Approx(0.5).epsilon(0.02));

    double nsum = 0.0, nsq = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double z = r.normal();
        nsum += z / 20000;
        nsq += z * z / 20000;
    }
    CHECK(nsum == doctest::Approx(0.0).epsilon(0.05));
    CHECK(nsq == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("bilinear resampling is exact on coincident nodes") {
    Grid2D fine = unit_grid(65, BoundaryTag::neumann);
    Grid2D coarse = unit_grid(33, BoundaryTag::neumann);
    // 65-node and 33-node grids nest exactly (h doubles).
    Field f = gaussian_bump_ic(fine, 0.4, 0.6, 0.05);
    Field r = resample(f, coarse);
    for (int j = 0; j < 33; ++j)
        for (int i = 0; i < 33; ++i)
            CHECK(r.at(0, j, i) == doctest::Approx(f.at(0, 2 * j, 2 * i)).epsilon(1e-12));
}
