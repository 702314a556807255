#include "padam/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "padam/lifting.hpp"
#include "padam/rng.hpp"

namespace padam {

namespace {

// Sub-seed tags so masks, sampler noise, and paired samplings stay decoupled.
constexpr std::uint64_t kMaskTag = 101;
constexpr std::uint64_t kSamplerTag = 202;

// Residual-normalized guidance everywhere: the un-normalized fixed mode is
// unstable at the strengths needed to sort mixture basins (it remains
// available through GuidanceConfig for experiments). Full-channel tasks take
// their own zeta.
GuidanceConfig pick_guidance(const PriorContext& ctx, std::span<const double> fractions) {
    bool all_full = true;
    for (double f : fractions)
        if (f >= 0.0 && f < 1.0) all_full = false;
    GuidanceConfig g;
    g.mode = GuidanceMode::residual_normalized;
    g.zeta = all_full ? ctx.zeta_full : ctx.zeta_sparse;
    g.jacobian = ctx.jacobian;
    g.hard_replace_full = ctx.hard_replace_full;
    return g;
}

void require_grid(const Field& f, const Grid2D& expect, const char* what) {
    if (!f.grid.same_geometry(expect) || f.n_channels != 1)
        throw std::invalid_argument(std::string(what) + ": field grid/channels do not match the class");
}

Observation build_observation(const PriorContext& ctx, const PDEClass& cls, const Field& cond_norm,
                              ObservationMask mask) {
    Observation obs;
    obs.op.mask = std::move(mask);
    obs.op.observed_channels.clear();
    for (int c = 0; c < 3; ++c)
        if (obs.op.mask.count(c) > 0) obs.op.observed_channels.push_back(c);
    obs.values = obs.op.apply(cond_norm);
    (void)ctx;
    (void)cls;
    return obs;
}

} // namespace

PriorContext PriorContext::from_oracle(const MixtureOraclePrior& prior) {
    PriorContext ctx;
    ctx.denoiser = &prior;
    ctx.registry = prior.registry();
    ctx.norm = prior.norm();
    ctx.resolution = prior.grid().nx;
    return ctx;
}

const char* to_string(TaskKind k) {
    switch (k) {
        case TaskKind::forward: return "forward";
        case TaskKind::inverse_state: return "inverse_state";
        case TaskKind::infer_params: return "infer_params";
        case TaskKind::partial_params: return "partial_params";
        case TaskKind::vector_forward_u: return "vector_forward_u";
        case TaskKind::vector_forward_v: return "vector_forward_v";
        case TaskKind::vector_inverse_u: return "vector_inverse_u";
        case TaskKind::vector_inverse_v: return "vector_inverse_v";
        case TaskKind::ood_joint: return "ood_joint";
    }
    return "?";
}

ObservationMask task_observation_mask(const Grid2D& grid, std::span<const double> fractions,
                                      std::uint64_t seed) {
    return make_mask_per_channel(grid, fractions, derive_seed(seed, kMaskTag));
}

namespace {

struct TaskSetup {
    Grid2D grid;
    Observation obs;
    GuidanceConfig guidance;
};

TaskSetup prepare_task(const PriorContext& ctx, int class_id, const Field& cond_raw,
                       std::span<const double> fractions, std::uint64_t seed) {
    if (!ctx.denoiser) throw std::invalid_argument("PriorContext: no denoiser attached");
    const PDEClass& cls = ctx.registry.by_id(class_id);
    TaskSetup setup;
    setup.grid = ctx.grid_for(cls);
    if (!cond_raw.grid.same_geometry(setup.grid) || cond_raw.n_channels != 3)
        throw std::invalid_argument("task: conditioning field shape mismatch");

    Field cond = cond_raw;
    ctx.norm.normalize(class_id, cond);
    setup.obs = build_observation(ctx, cls, cond, task_observation_mask(setup.grid, fractions, seed));
    setup.guidance = pick_guidance(ctx, fractions);
    return setup;
}

} // namespace

Field sample_task_posterior(const PriorContext& ctx, int class_id, const Field& cond_raw,
                            std::span<const double> fractions, std::uint64_t seed) {
    TaskSetup setup = prepare_task(ctx, class_id, cond_raw, fractions, seed);
    Field x = sample_posterior(*ctx.denoiser, class_id, setup.grid, &setup.obs, setup.guidance,
                               ctx.schedule, derive_seed(seed, kSamplerTag));
    ctx.norm.denormalize(class_id, x);
    return x;
}

std::vector<Field> sample_task_ensemble(const PriorContext& ctx, int class_id,
                                        const Field& cond_raw, std::span<const double> fractions,
                                        int members, std::uint64_t seed) {
    TaskSetup setup = prepare_task(ctx, class_id, cond_raw, fractions, seed);
    std::vector<Field> out = sample_ensemble(*ctx.denoiser, class_id, setup.grid, &setup.obs,
                                             setup.guidance, ctx.schedule, members,
                                             derive_seed(seed, kSamplerTag));
    for (Field& x : out) ctx.norm.denormalize(class_id, x);
    return out;
}

namespace {

// Conditioning field for the scalar forward/inverse protocols: the parameter
// plane is fully known, the given state channel is observed at `fraction`.
Field scalar_state_cond(const PriorContext& ctx, const PDEClass& cls, std::span<const double> phi,
                        const Field& state, int state_channel, const char* what) {
    if (cls.layout != ChannelLayout::scalar_param_state)
        throw std::invalid_argument(std::string(what) + ": class layout is not scalar");
    if (static_cast<int>(phi.size()) != cls.param_dim)
        throw std::invalid_argument(std::string(what) + ": phi size does not match d_c");
    const Grid2D grid = ctx.grid_for(cls);
    require_grid(state, grid, what);

    Field cond(grid, 3);
    if (cls.param_dim > 0) {
        Field lifted = lift_params(phi, grid);
        std::copy(lifted.channel(0).begin(), lifted.channel(0).end(), cond.channel(0).begin());
    }
    std::copy(state.channel(0).begin(), state.channel(0).end(),
              cond.channel(state_channel).begin());
    return cond;
}

} // namespace

Field forward_predict(const PriorContext& ctx, int class_id, std::span<const double> phi,
                      const Field& u0, double fraction, std::uint64_t seed) {
    const PDEClass& cls = ctx.registry.by_id(class_id);
    Field cond = scalar_state_cond(ctx, cls, phi, u0, 1, "forward_predict");
    const double fr[3] = {1.0, fraction, -1.0};
    return sample_task_posterior(ctx, class_id, cond, fr, seed).extract_channel(2);
}

std::vector<Field> forward_predict_ensemble(const PriorContext& ctx, int class_id,
                                            std::span<const double> phi, const Field& u0,
                                            double fraction, int members, std::uint64_t seed) {
    const PDEClass& cls = ctx.registry.by_id(class_id);
    Field cond = scalar_state_cond(ctx, cls, phi, u0, 1, "forward_predict");
    const double fr[3] = {1.0, fraction, -1.0};
    std::vector<Field> ens = sample_task_ensemble(ctx, class_id, cond, fr, members, seed);
    std::vector<Field> out;
    out.reserve(ens.size());
    for (const Field& x : ens) out.push_back(x.extract_channel(2));
    return out;
}

Field inverse_state(const PriorContext& ctx, int class_id, std::span<const double> phi,
                    const Field& uT, double fraction, std::uint64_t seed) {
    const PDEClass& cls = ctx.registry.by_id(class_id);
    Field cond = scalar_state_cond(ctx, cls, phi, uT, 2, "inverse_state");
    const double fr[3] = {1.0, -1.0, fraction};
    return sample_task_posterior(ctx, class_id, cond, fr, seed).extract_channel(1);
}

std::vector<Field> inverse_state_ensemble(const PriorContext& ctx, int class_id,
                                          std::span<const double> phi, const Field& uT,
                                          double fraction, int members, std::uint64_t seed) {
    const PDEClass& cls = ctx.registry.by_id(class_id);
    Field cond = scalar_state_cond(ctx, cls, phi, uT, 2, "inverse_state");
    const double fr[3] = {1.0, -1.0, fraction};
    std::vector<Field> ens = sample_task_ensemble(ctx, class_id, cond, fr, members, seed);
    std::vector<Field> out;
    out.reserve(ens.size());
    for (const Field& x : ens) out.push_back(x.extract_channel(1));
    return out;
}

std::vector<double> infer_params(const PriorContext& ctx, int class_id, const Field& u0,
                                 const Field& uT, double fraction, std::uint64_t seed) {
    const PDEClass& cls = ctx.registry.by_id(class_id);
    if (cls.param_dim < 1)
        throw std::invalid_argument("infer_params: class has no variable parameters");
    const Grid2D grid = ctx.grid_for(cls);
    require_grid(u0, grid, "infer_params");
    require_grid(uT, grid, "infer_params");

    Field cond(grid, 3);
    std::copy(u0.channel(0).begin(), u0.channel(0).end(), cond.channel(1).begin());
    std::copy(uT.channel(0).begin(), uT.channel(0).end(), cond.channel(2).begin());

    const double fr[3] = {-1.0, fraction, fraction};
    Field x = sample_task_posterior(ctx, class_id, cond, fr, seed);
    return unlift_params(x.extract_channel(0), cls.param_dim);
}

std::map<int, double> infer_partial_params(const PriorContext& ctx, int class_id, const Field& u0,
                                           const Field& uT, const std::map<int, double>& known,
                                           double fraction, std::uint64_t seed) {
    const PDEClass& cls = ctx.registry.by_id(class_id);
    if (cls.param_dim < 1)
        throw std::invalid_argument("infer_partial_params: class has no variable parameters");
    if (static_cast<int>(known.size()) >= cls.param_dim)
        throw std::invalid_argument("infer_partial_params: known components must be a strict subset");
    for (const auto& [idx, val] : known) {
        (void)val;
        if (idx < 0 || idx >= cls.param_dim)
            throw std::invalid_argument("infer_partial_params: component index out of range");
    }
    const Grid2D grid = ctx.grid_for(cls);
    require_grid(u0, grid, "infer_partial_params");
    require_grid(uT, grid, "infer_partial_params");

    Field cond(grid, 3);
    std::copy(u0.channel(0).begin(), u0.channel(0).end(), cond.channel(1).begin());
    std::copy(uT.channel(0).begin(), uT.channel(0).end(), cond.channel(2).begin());
    for (const auto& [idx, val] : known) {
        auto [b, e] = strip_columns(grid.nx, cls.param_dim, idx);
        for (int j = 0; j < grid.ny; ++j)
            for (int i = b; i < e; ++i) cond.at(0, j, i) = val;
    }

    // State channels draw their masks from the usual rule; the parameter
    // channel observes exactly the known components' strips.
    const double fr[3] = {-1.0, fraction, fraction};
    ObservationMask mask =
        make_mask_per_channel(grid, fr, derive_seed(seed, kMaskTag));
    long strip_count = 0;
    for (const auto& [idx, val] : known) {
        (void)val;
        auto [b, e] = strip_columns(grid.nx, cls.param_dim, idx);
        for (int j = 0; j < grid.ny; ++j)
            for (int i = b; i < e; ++i) {
                mask.indicator[mask.idx(0, j, i)] = 1;
                ++strip_count;
            }
    }
    mask.fraction[0] = static_cast<double>(strip_count) / grid.n_points();

    Field cond_norm = cond;
    ctx.norm.normalize(class_id, cond_norm);
    Observation obs = build_observation(ctx, cls, cond_norm, std::move(mask));

    const double fr_guidance[3] = {0.5, fraction, fraction}; // never all-full
    const GuidanceConfig g = pick_guidance(ctx, fr_guidance);
    Field x = sample_posterior(*ctx.denoiser, class_id, grid, &obs, g, ctx.schedule,
                               derive_seed(seed, kSamplerTag));
    ctx.norm.denormalize(class_id, x);

    const std::vector<double> phi = unlift_params(x.extract_channel(0), cls.param_dim);
    std::map<int, double> out;
    for (int k = 0; k < cls.param_dim; ++k)
        if (!known.count(k)) out[k] = phi[k];
    return out;
}

namespace {

void require_vector_pair(const ClassRegistry& reg, int class_u, int class_v) {
    const PDEClass& cu = reg.by_id(class_u);
    const PDEClass& cv = reg.by_id(class_v);
    if (cu.layout != ChannelLayout::vector_state_u || cv.layout != ChannelLayout::vector_state_v)
        throw std::invalid_argument("vector task: classes do not carry the (u, v) layouts");
}

} // namespace

std::pair<Field, Field> vector_forward(const PriorContext& ctx, int class_u, int class_v,
                                       const Field& u0, const Field& v0, double fraction,
                                       std::uint64_t seed) {
    require_vector_pair(ctx.registry, class_u, class_v);
    const Grid2D grid = ctx.grid_for(ctx.registry.by_id(class_u));
    require_grid(u0, grid, "vector_forward");
    require_grid(v0, grid, "vector_forward");

    Field cond(grid, 3);
    std::copy(u0.channel(0).begin(), u0.channel(0).end(), cond.channel(0).begin());
    std::copy(v0.channel(0).begin(), v0.channel(0).end(), cond.channel(1).begin());

    const double fr[3] = {fraction, fraction, -1.0};
    Field xu = sample_task_posterior(ctx, class_u, cond, fr, derive_seed(seed, 1));
    Field xv = sample_task_posterior(ctx, class_v, cond, fr, derive_seed(seed, 2));
    return {xu.extract_channel(2), xv.extract_channel(2)};
}

Field vector_inverse(const PriorContext& ctx, int class_u, int class_v, VectorTarget target,
                     const Field& terminal, const Field& auxiliary, double fraction,
                     std::uint64_t seed) {
    require_vector_pair(ctx.registry, class_u, class_v);
    const int class_id = target == VectorTarget::u0 ? class_u : class_v;
    const Grid2D grid = ctx.grid_for(ctx.registry.by_id(class_id));
    require_grid(terminal, grid, "vector_inverse");
    require_grid(auxiliary, grid, "vector_inverse");

    Field cond(grid, 3);
    double fr[3] = {-1.0, -1.0, fraction};
    if (target == VectorTarget::u0) {
        // layout (u0, v0, uT): auxiliary v0 in channel 1.
        std::copy(auxiliary.channel(0).begin(), auxiliary.channel(0).end(),
                  cond.channel(1).begin());
        std::copy(terminal.channel(0).begin(), terminal.channel(0).end(), cond.channel(2).begin());
        fr[1] = fraction;
    } else {
        // layout (u0, v0, vT): auxiliary u0 in channel 0.
        std::copy(auxiliary.channel(0).begin(), auxiliary.channel(0).end(),
                  cond.channel(0).begin());
        std::copy(terminal.channel(0).begin(), terminal.channel(0).end(), cond.channel(2).begin());
        fr[0] = fraction;
    }

    Field x = sample_task_posterior(ctx, class_id, cond, fr, seed);
    return x.extract_channel(target == VectorTarget::u0 ? 0 : 1);
}

std::pair<Field, Field> ood_joint_reconstruct(const PriorContext& ctx, int nearest_class,
                                              const Field& u0_obs_field, const Field& uT_obs_field,
                                              double fraction, std::uint64_t seed) {
    const PDEClass& cls = ctx.registry.by_id(nearest_class);
    if (cls.layout != ChannelLayout::scalar_param_state)
        throw std::invalid_argument("ood_joint_reconstruct: nearest class must be scalar");
    const Grid2D grid = ctx.grid_for(cls);
    require_grid(u0_obs_field, grid, "ood_joint_reconstruct");
    require_grid(uT_obs_field, grid, "ood_joint_reconstruct");

    Field cond(grid, 3);
    std::copy(u0_obs_field.channel(0).begin(), u0_obs_field.channel(0).end(),
              cond.channel(1).begin());
    std::copy(uT_obs_field.channel(0).begin(), uT_obs_field.channel(0).end(),
              cond.channel(2).begin());

    // The parameter plane of a fixed-coefficient class is identically zero
    // and can be conditioned on; parametric classes have no known phi here.
    const double fr[3] = {cls.param_dim == 0 ? 1.0 : -1.0, fraction, fraction};
    Field x = sample_task_posterior(ctx, nearest_class, cond, fr, seed);
    return {x.extract_channel(1), x.extract_channel(2)};
}

} // namespace padam
