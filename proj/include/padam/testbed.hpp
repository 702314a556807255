#pragma once

#include <cstdint>

#include "padam/dataset.hpp"

namespace padam {

// One evaluation instance: the solver truth a task is asked to recover.
// Scalar classes fill (phi, u0, uT); vector families fill (u0, v0, uT, vT).
struct TestInstance {
    std::vector<double> phi;
    Field u0, uT;
    Field v0, vT;
    std::uint64_t seed = 0;
};

/// Fresh held-out draw from the class's sampling rules (same law as the
/// training generator, disjoint seed stream).
TestInstance make_test_instance(const PDEClass& cls, int solver_nx, int prior_nx, double cfl,
                                std::uint64_t seed);

/// Held-in instance read back from the dataset. For vector families the _u
/// and _v samples at the same index come from one solve, so the instance is
/// consistent across layouts.
TestInstance held_in_instance(const Dataset& ds, const PDEClass& cls, int index);

/// ADR truth sharing the advection-diffusion coefficients (nu, ax, ay) =
/// (0.25, 4, 2) with reaction rate k; the zero-shot protocol's data source.
TestInstance make_adr_instance(double k, int solver_nx, int prior_nx, double cfl,
                               std::uint64_t seed);

} // namespace padam
