#include "padam/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "padam/errors.hpp"
#include "padam/lifting.hpp"
#include "padam/rng.hpp"

namespace padam {

UnifiedSample assemble_sample(const PDEClass& cls, std::span<const double> phi,
                              std::span<const Field* const> fields, std::uint64_t seed) {
    if (static_cast<int>(phi.size()) != cls.param_dim)
        throw std::invalid_argument("assemble_sample: phi size does not match d_c");
    if (cls.layout == ChannelLayout::scalar_param_state) {
        if (fields.size() != 2)
            throw std::invalid_argument("assemble_sample: scalar layout expects (u0, uT)");
    } else if (fields.size() != 3) {
        throw std::invalid_argument("assemble_sample: vector layouts expect three state fields");
    }

    const Grid2D& g = fields[0]->grid;
    for (const Field* f : fields) {
        if (f->n_channels != 1)
            throw std::invalid_argument("assemble_sample: state fields must be single-channel");
        if (!f->grid.same_geometry(g))
            throw std::invalid_argument("assemble_sample: fields disagree on grid");
    }

    UnifiedSample s;
    s.class_id = cls.id;
    s.phi.assign(phi.begin(), phi.end());
    s.seed = seed;
    s.x = Field(g, 3);

    auto copy_channel = [&](int ch, const Field& src) {
        auto dst = s.x.channel(ch);
        auto from = src.channel(0);
        std::copy(from.begin(), from.end(), dst.begin());
    };

    if (cls.layout == ChannelLayout::scalar_param_state) {
        if (cls.param_dim > 0) {
            Field lifted = lift_params(phi, g);
            copy_channel(0, lifted);
        } // d_c = 0: channel 0 stays zero
        copy_channel(1, *fields[0]);
        copy_channel(2, *fields[1]);
    } else {
        copy_channel(0, *fields[0]);
        copy_channel(1, *fields[1]);
        copy_channel(2, *fields[2]);
    }
    return s;
}

void NormStats::normalize(int c, Field& x) const {
    for (int ch = 0; ch < 3; ++ch) {
        auto span = x.channel(ch);
        const double mu = m(c, ch), sc = s(c, ch);
        for (double& v : span) v = (v - mu) / sc;
    }
}

void NormStats::denormalize(int c, Field& x) const {
    for (int ch = 0; ch < 3; ++ch) {
        auto span = x.channel(ch);
        const double mu = m(c, ch), sc = s(c, ch);
        for (double& v : span) v = v * sc + mu;
    }
}

std::vector<int> Dataset::indices_of_class(int class_id) const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(samples.size()); ++i)
        if (samples[i].class_id == class_id) out.push_back(i);
    return out;
}

void compute_normalization(Dataset& ds) {
    const int C = ds.registry.size();
    ds.norm.n_classes = C;
    ds.norm.mean.assign(static_cast<std::size_t>(C) * 3, 0.0);
    ds.norm.scale.assign(static_cast<std::size_t>(C) * 3, 1.0);

    for (int c = 0; c < C; ++c) {
        for (int ch = 0; ch < 3; ++ch) {
            double sum = 0.0, sq = 0.0;
            long n = 0;
            for (const auto& s : ds.samples) {
                if (s.class_id != c) continue;
                for (double v : s.x.channel(ch)) {
                    sum += v;
                    sq += v * v;
                    ++n;
                }
            }
            if (n == 0) continue;
            const double mu = sum / n;
            const double var = std::max(0.0, sq / n - mu * mu);
            double sd = std::sqrt(var);
            // A constant channel (e.g. the zero parameter plane of a fixed-
            // coefficient class) normalizes to zero rather than blowing up.
            if (sd < 1e-12 * std::max(1.0, std::abs(mu))) sd = 1.0;
            ds.norm.mean[static_cast<std::size_t>(c) * 3 + ch] = mu;
            ds.norm.scale[static_cast<std::size_t>(c) * 3 + ch] = sd;
        }
    }

    // sigma_data over the normalized library; feeds the EDM preconditioning.
    double sq = 0.0;
    long n = 0;
    for (const auto& s : ds.samples) {
        for (int ch = 0; ch < 3; ++ch) {
            const double mu = ds.norm.m(s.class_id, ch), sc = ds.norm.s(s.class_id, ch);
            for (double v : s.x.channel(ch)) {
                const double z = (v - mu) / sc;
                sq += z * z;
                ++n;
            }
        }
    }
    ds.sigma_data = n > 0 ? std::sqrt(sq / n) : 1.0;
}

namespace {

struct ScalarDraw {
    double xc = 0, yc = 0, w0 = 0;
    std::vector<double> phi;
};

ScalarDraw draw_scalar(const PDEClass& cls, SeededRng& rng) {
    ScalarDraw d;
    d.xc = rng.uniform(0.2, 0.8);
    d.yc = rng.uniform(0.2, 0.8);
    d.w0 = rng.uniform(0.025, 0.075);
    for (const auto& law : cls.phi_law) d.phi.push_back(rng.uniform(law.lo, law.hi));
    return d;
}

// A vector-family solve feeds both layout classes: (u0, v0, uT) for the _u
// class and (u0, v0, vT) for its paired _v class (registered at id + 1).
void emit_vector_pair(Dataset& ds, const PDEClass& cls_u, const Field& ic, const Field& terminal,
                      const Grid2D& prior_grid, std::uint64_t seed) {
    const PDEClass& cls_v = ds.registry.by_id(cls_u.id + 1);
    Field u0 = resample(ic.extract_channel(0), prior_grid);
    Field v0 = resample(ic.extract_channel(1), prior_grid);
    Field uT = resample(terminal.extract_channel(0), prior_grid);
    Field vT = resample(terminal.extract_channel(1), prior_grid);
    const Field* fu[] = {&u0, &v0, &uT};
    const Field* fv[] = {&u0, &v0, &vT};
    ds.samples.push_back(assemble_sample(cls_u, {}, fu, seed));
    ds.samples.push_back(assemble_sample(cls_v, {}, fv, seed));
}

} // namespace

Dataset generate_dataset(const GeneratorConfig& cfg, std::uint64_t seed) {
    if (cfg.n_per_class < 1) throw std::invalid_argument("generate_dataset: n_per_class must be >= 1");

    Dataset ds;
    ds.registry = make_registry(cfg.investigation);
    ds.seed = seed;
    ds.n_per_class = cfg.n_per_class;
    ds.config_hash = cfg.config_hash;
    ds.grid = unit_grid(cfg.prior_nx, BoundaryTag::neumann);

    long regen = 0;
    long total = 0;

    auto solve_with_retries = [&](auto&& attempt) {
        for (std::uint64_t a = 0;; ++a) {
            ++total;
            try {
                attempt(a);
                return;
            } catch (const DivergenceError&) {
                ++regen;
                if (regen * 20 > std::max<long>(total, 20))
                    throw std::runtime_error(
                        "generate_dataset: more than 5% of samples required regeneration");
            }
        }
    };

    SolverConfig scfg;
    scfg.cfl = cfg.cfl;

    for (const auto& cls : ds.registry.classes) {
        // _v layout classes are filled by their _u partner's solve.
        if (cls.vector_family && cls.layout == ChannelLayout::vector_state_v) continue;

        const Grid2D sg = class_grid(cls, cfg.solver_nx, cfg.solver_nx);
        const Grid2D pg = class_grid(cls, cfg.prior_nx, cfg.prior_nx);

        for (int i = 0; i < cfg.n_per_class; ++i) {
            if (!cls.vector_family) {
                solve_with_retries([&](std::uint64_t attempt) {
                    const std::uint64_t s = derive_seed(seed, cls.id, i, attempt);
                    SeededRng rng(s);
                    ScalarDraw d = draw_scalar(cls, rng);
                    ScalarPDEParams p = cls.scalar_params(d.phi);
                    Field ic = gaussian_bump_ic(sg, d.xc, d.yc, d.w0);
                    scfg.T = cls.terminal_time;
                    SolveResult r = solve_scalar(p, ic, scfg);
                    Field u0 = resample(ic, pg);
                    Field uT = resample(r.terminal, pg);
                    const Field* fields[] = {&u0, &uT};
                    ds.samples.push_back(assemble_sample(cls, d.phi, fields, s));
                });
            } else if (cls.vec_family == VectorFamily::burgers) {
                solve_with_retries([&](std::uint64_t attempt) {
                    const std::uint64_t s = derive_seed(seed, cls.id, i, attempt);
                    SeededRng rng(s);
                    const double c1x = rng.uniform(0.2, 0.8), c1y = rng.uniform(0.2, 0.8);
                    const double c2x = rng.uniform(0.2, 0.8), c2y = rng.uniform(0.2, 0.8);
                    const double w1 = rng.uniform(0.025, 0.075), w2 = rng.uniform(0.025, 0.075);
                    VectorPDEParams p = cls.vector_params();
                    Field ic = burgers_ic(sg, c1x, c1y, w1, c2x, c2y, w2);
                    scfg.T = cls.terminal_time;
                    SolveResult r = solve_burgers(p, ic, scfg);
                    emit_vector_pair(ds, cls, ic, r.terminal, pg, s);
                });
            } else {
                solve_with_retries([&](std::uint64_t attempt) {
                    const std::uint64_t s = derive_seed(seed, cls.id, i, attempt);
                    SeededRng rng(s);
                    const double a = rng.uniform(0.5, 1.5);
                    const TrigChoice phi_c = rng.below(2) ? TrigChoice::cos : TrigChoice::sin;
                    const TrigChoice psi_c = rng.below(2) ? TrigChoice::cos : TrigChoice::sin;
                    VectorPDEParams p = cls.vector_params();
                    Field ic = ns_ic(sg, a, phi_c, psi_c, p.L);
                    scfg.T = cls.terminal_time;
                    SolveResult r = solve_navier_stokes(p, ic, scfg);
                    emit_vector_pair(ds, cls, ic, r.terminal, pg, s);
                });
            }
        }
    }

    std::stable_sort(ds.samples.begin(), ds.samples.end(),
                     [](const UnifiedSample& a, const UnifiedSample& b) {
                         return a.class_id < b.class_id;
                     });
    compute_normalization(ds);
    return ds;
}

} // namespace padam
