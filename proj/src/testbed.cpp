#include "padam/testbed.hpp"

#include <stdexcept>

#include "padam/rng.hpp"

namespace padam {

TestInstance make_test_instance(const PDEClass& cls, int solver_nx, int prior_nx, double cfl,
                                std::uint64_t seed) {
    const Grid2D sg = class_grid(cls, solver_nx, solver_nx);
    const Grid2D pg = class_grid(cls, prior_nx, prior_nx);
    SolverConfig scfg;
    scfg.cfl = cfl;
    scfg.T = cls.terminal_time;

    TestInstance inst;
    inst.seed = seed;
    SeededRng rng(seed);

    if (!cls.vector_family) {
        const double xc = rng.uniform(0.2, 0.8);
        const double yc = rng.uniform(0.2, 0.8);
        const double w0 = rng.uniform(0.025, 0.075);
        for (const auto& law : cls.phi_law) inst.phi.push_back(rng.uniform(law.lo, law.hi));
        Field ic = gaussian_bump_ic(sg, xc, yc, w0);
        SolveResult r = solve_scalar(cls.scalar_params(inst.phi), ic, scfg);
        inst.u0 = resample(ic, pg);
        inst.uT = resample(r.terminal, pg);
        return inst;
    }

    if (cls.vec_family == VectorFamily::burgers) {
        const double c1x = rng.uniform(0.2, 0.8), c1y = rng.uniform(0.2, 0.8);
        const double c2x = rng.uniform(0.2, 0.8), c2y = rng.uniform(0.2, 0.8);
        const double w1 = rng.uniform(0.025, 0.075), w2 = rng.uniform(0.025, 0.075);
        Field ic = burgers_ic(sg, c1x, c1y, w1, c2x, c2y, w2);
        SolveResult r = solve_burgers(cls.vector_params(), ic, scfg);
        inst.u0 = resample(ic.extract_channel(0), pg);
        inst.v0 = resample(ic.extract_channel(1), pg);
        inst.uT = resample(r.terminal.extract_channel(0), pg);
        inst.vT = resample(r.terminal.extract_channel(1), pg);
        return inst;
    }

    const double a = rng.uniform(0.5, 1.5);
    const TrigChoice phi_c = rng.below(2) ? TrigChoice::cos : TrigChoice::sin;
    const TrigChoice psi_c = rng.below(2) ? TrigChoice::cos : TrigChoice::sin;
    Field ic = ns_ic(sg, a, phi_c, psi_c, cls.vector_params().L);
    SolveResult r = solve_navier_stokes(cls.vector_params(), ic, scfg);
    inst.u0 = resample(ic.extract_channel(0), pg);
    inst.v0 = resample(ic.extract_channel(1), pg);
    inst.uT = resample(r.terminal.extract_channel(0), pg);
    inst.vT = resample(r.terminal.extract_channel(1), pg);
    return inst;
}

TestInstance held_in_instance(const Dataset& ds, const PDEClass& cls, int index) {
    TestInstance inst;
    if (!cls.vector_family) {
        const auto ids = ds.indices_of_class(cls.id);
        if (ids.empty()) throw std::invalid_argument("held_in_instance: class has no samples");
        const UnifiedSample& s = ds.samples[ids[index % ids.size()]];
        inst.phi = s.phi;
        inst.seed = s.seed;
        inst.u0 = s.x.extract_channel(1);
        inst.uT = s.x.extract_channel(2);
        return inst;
    }
    // Vector pair: the _u sample carries (u0, v0, uT); the matching _v sample
    // (same index, same seed) carries vT.
    const PDEClass& cls_u = cls.layout == ChannelLayout::vector_state_u
                                ? cls
                                : ds.registry.by_id(cls.id - 1);
    const PDEClass& cls_v = ds.registry.by_id(cls_u.id + 1);
    const auto ids_u = ds.indices_of_class(cls_u.id);
    const auto ids_v = ds.indices_of_class(cls_v.id);
    if (ids_u.empty() || ids_v.empty())
        throw std::invalid_argument("held_in_instance: vector classes have no samples");
    const UnifiedSample& su = ds.samples[ids_u[index % ids_u.size()]];
    const UnifiedSample& sv = ds.samples[ids_v[index % ids_v.size()]];
    if (su.seed != sv.seed)
        throw std::invalid_argument("held_in_instance: paired vector samples out of sync");
    inst.seed = su.seed;
    inst.u0 = su.x.extract_channel(0);
    inst.v0 = su.x.extract_channel(1);
    inst.uT = su.x.extract_channel(2);
    inst.vT = sv.x.extract_channel(2);
    return inst;
}

TestInstance make_adr_instance(double k, int solver_nx, int prior_nx, double cfl,
                               std::uint64_t seed) {
    const Grid2D sg = unit_grid(solver_nx, BoundaryTag::neumann);
    const Grid2D pg = unit_grid(prior_nx, BoundaryTag::neumann);
    ScalarPDEParams p;
    p.family = ScalarFamily::adr;
    p.nu = 0.25;
    p.ax = 4.0;
    p.ay = 2.0;
    p.k = k;
    SolverConfig scfg;
    scfg.cfl = cfl;
    scfg.T = default_terminal_time(ScalarFamily::adr);

    TestInstance inst;
    inst.seed = seed;
    SeededRng rng(seed);
    const double xc = rng.uniform(0.2, 0.8);
    const double yc = rng.uniform(0.2, 0.8);
    const double w0 = rng.uniform(0.025, 0.075);
    Field ic = gaussian_bump_ic(sg, xc, yc, w0);
    SolveResult r = solve_scalar(p, ic, scfg);
    inst.u0 = resample(ic, pg);
    inst.uT = resample(r.terminal, pg);
    return inst;
}

} // namespace padam
