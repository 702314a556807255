#include "padam/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "padam/errors.hpp"
#include "padam/lifting.hpp"
#include "padam/metrics.hpp"
#include "padam/rng.hpp"

namespace padam {

namespace {

constexpr std::uint64_t kInferTag = 11;
constexpr std::uint64_t kForwardTag = 12;

// 3-channel mask assembled from per-channel pieces: nullptr = unobserved,
// (mask, true) = as given, full = every point.
ObservationMask compose_mask3(const Grid2D& grid, const ObservationMask* m1,
                              const ObservationMask* m2, bool ch0_full) {
    ObservationMask m;
    m.grid = grid;
    m.n_channels = 3;
    const long npts = grid.n_points();
    m.indicator.assign(static_cast<std::size_t>(3) * npts, 0);
    m.fraction.assign(3, 0.0);
    if (ch0_full) {
        std::fill(m.indicator.begin(), m.indicator.begin() + npts, 1);
        m.fraction[0] = 1.0;
    }
    auto copy_into = [&](int ch, const ObservationMask* src) {
        if (!src) return;
        if (!src->grid.same_geometry(grid) || src->n_channels != 1)
            throw std::invalid_argument("compose_mask3: mask grid mismatch");
        std::copy(src->indicator.begin(), src->indicator.end(),
                  m.indicator.begin() + static_cast<std::size_t>(ch) * npts);
        m.fraction[ch] = src->fraction[0];
    };
    copy_into(1, m1);
    copy_into(2, m2);
    return m;
}

Field posterior_with_mask(const PriorContext& ctx, int class_id, const Field& cond_raw,
                          ObservationMask mask, bool sparse, std::uint64_t seed) {
    Field cond = cond_raw;
    ctx.norm.normalize(class_id, cond);

    Observation obs;
    obs.op.mask = std::move(mask);
    for (int c = 0; c < 3; ++c)
        if (obs.op.mask.count(c) > 0) obs.op.observed_channels.push_back(c);
    obs.values = obs.op.apply(cond);

    GuidanceConfig g;
    g.mode = sparse ? GuidanceMode::residual_normalized : GuidanceMode::fixed;
    g.zeta = sparse ? ctx.zeta_sparse : ctx.zeta_full;
    g.jacobian = ctx.jacobian;
    g.hard_replace_full = ctx.hard_replace_full;

    Field x = sample_posterior(*ctx.denoiser, class_id, cond_raw.grid, &obs, g, ctx.schedule, seed);
    ctx.norm.denormalize(class_id, x);
    return x;
}

} // namespace

SnapshotObservation make_snapshots(const Field& u0_true, const Field& uT_true, double fraction,
                                   std::uint64_t seed) {
    if (!u0_true.grid.same_geometry(uT_true.grid))
        throw std::invalid_argument("make_snapshots: endpoint grids disagree");
    SnapshotObservation s;
    s.u0 = u0_true;
    s.uT = uT_true;
    s.mask_u0 = make_mask(u0_true.grid, 1, fraction, derive_seed(seed, 0));
    s.mask_uT = make_mask(uT_true.grid, 1, fraction, derive_seed(seed, 1));
    return s;
}

CandidateScore score_candidate(const PriorContext& ctx, int class_id,
                               const SnapshotObservation& obs, std::uint64_t seed) {
    const PDEClass& cls = ctx.registry.by_id(class_id);
    if (cls.param_dim < 1)
        throw std::invalid_argument("score_candidate: candidates need d_c >= 1");
    const Grid2D grid = ctx.grid_for(cls);
    if (!obs.u0.grid.same_geometry(grid))
        throw std::invalid_argument("score_candidate: snapshots live on a different grid");

    CandidateScore result;
    result.class_id = class_id;
    const bool sparse = obs.mask_u0.fraction[0] < 1.0 || obs.mask_uT.fraction[0] < 1.0;

    try {
        // Step 1: conditional parameter inference on the observed supports.
        Field cond(grid, 3);
        std::copy(obs.u0.channel(0).begin(), obs.u0.channel(0).end(), cond.channel(1).begin());
        std::copy(obs.uT.channel(0).begin(), obs.uT.channel(0).end(), cond.channel(2).begin());
        Field x = posterior_with_mask(ctx, class_id,  cond,
                                      compose_mask3(grid, &obs.mask_u0, &obs.mask_uT, false),
                                      sparse, derive_seed(seed, kInferTag));
        result.phi_hat = unlift_params(x.extract_channel(0), cls.param_dim);

        // Step 2: generative validation with the inferred coefficients.
        Field cond_fwd(grid, 3);
        Field lifted = lift_params(result.phi_hat, grid);
        std::copy(lifted.channel(0).begin(), lifted.channel(0).end(), cond_fwd.channel(0).begin());
        std::copy(obs.u0.channel(0).begin(), obs.u0.channel(0).end(), cond_fwd.channel(1).begin());
        Field xf = posterior_with_mask(ctx, class_id, cond_fwd,
                                       compose_mask3(grid, &obs.mask_u0, nullptr, true), sparse,
                                       derive_seed(seed, kForwardTag));
        Field uT_hat = xf.extract_channel(2);

        // E(c): absolute L2 on the observed uT support only.
        const long npts = grid.n_points();
        std::span<const std::uint8_t> support(obs.mask_uT.indicator.data(), npts);
        result.discrepancy = masked_l2(uT_hat.channel(0), obs.uT.channel(0), support);
    } catch (const DivergenceError&) {
        result.valid = false;
        result.discrepancy = std::numeric_limits<double>::infinity();
    }
    return result;
}

SelectionResult select_model(const PriorContext& ctx, std::span<const int> candidate_ids,
                             const SnapshotObservation& obs, int repeats, std::uint64_t seed) {
    if (candidate_ids.size() < 1) throw std::invalid_argument("select_model: empty library");
    if (repeats < 1) throw std::invalid_argument("select_model: repeats must be >= 1");
    const int K = static_cast<int>(candidate_ids.size());

    // All repeats of all candidates, aggregated in (repeat, class) order.
    std::vector<std::vector<CandidateScore>> table(repeats);
    std::vector<int> argmin(repeats, -1);
    for (int r = 0; r < repeats; ++r) {
        table[r].reserve(K);
        double best = std::numeric_limits<double>::infinity();
        for (int k = 0; k < K; ++k) {
            CandidateScore cs = score_candidate(ctx, candidate_ids[k], obs,
                                                derive_seed(seed, static_cast<std::uint64_t>(r),
                                                            static_cast<std::uint64_t>(candidate_ids[k])));
            if (cs.valid && (cs.discrepancy < best ||
                             (cs.discrepancy == best && argmin[r] >= 0 &&
                              cs.class_id < table[r][argmin[r]].class_id))) {
                best = cs.discrepancy;
                argmin[r] = k;
            }
            table[r].push_back(std::move(cs));
        }
        if (argmin[r] < 0) throw std::runtime_error("select_model: all candidates invalid");
    }

    SelectionResult res;
    res.candidate_ids.assign(candidate_ids.begin(), candidate_ids.end());
    res.repeats = repeats;
    res.frequency.assign(K, 0.0);
    for (int r = 0; r < repeats; ++r) res.frequency[argmin[r]] += 1.0 / repeats;

    // Modal class; frequency ties resolve toward the lower class id.
    int modal = 0;
    for (int k = 1; k < K; ++k)
        if (res.frequency[k] > res.frequency[modal]) modal = k;
    res.selected_class = candidate_ids[modal];

    // Representative repeat: the modal-selecting repeat with the smallest
    // winning discrepancy. Its row set is the reported table, which makes the
    // argmin-consistency invariant structural.
    int rep = -1;
    for (int r = 0; r < repeats; ++r) {
        if (argmin[r] != modal) continue;
        if (rep < 0 || table[r][modal].discrepancy < table[rep][modal].discrepancy) rep = r;
    }
    if (rep < 0) rep = 0; // modal never selected can only happen with K == 1 edge cases
    res.representative = table[rep];
    res.phi_star = table[rep][modal].phi_hat;

    // Ambiguity: runner-up within 1% relative of the winner.
    double best = std::numeric_limits<double>::infinity(), second = best;
    for (const auto& cs : res.representative) {
        if (cs.discrepancy < best) {
            second = best;
            best = cs.discrepancy;
        } else if (cs.discrepancy < second) {
            second = cs.discrepancy;
        }
    }
    if (K > 1 && std::isfinite(second) && second <= best * 1.01) res.ambiguous = true;

    // Percentile intervals across the modal class's per-repeat estimates.
    const int d = static_cast<int>(res.phi_star.size());
    res.phi_lo.assign(d, 0.0);
    res.phi_hi.assign(d, 0.0);
    auto percentile = [](std::vector<double> v, double q) {
        std::sort(v.begin(), v.end());
        const double pos = q * (v.size() - 1);
        const std::size_t i = static_cast<std::size_t>(std::floor(pos));
        const double w = pos - static_cast<double>(i);
        // v[i] + w * (v[i+1] - v[i]) is exact for ties, so lo <= hi always.
        return i + 1 < v.size() ? v[i] + w * (v[i + 1] - v[i]) : v[i];
    };
    for (int p = 0; p < d; ++p) {
        std::vector<double> vals;
        vals.reserve(repeats);
        for (int r = 0; r < repeats; ++r)
            if (table[r][modal].valid) vals.push_back(table[r][modal].phi_hat[p]);
        res.phi_lo[p] = percentile(vals, 0.025);
        res.phi_hi[p] = percentile(vals, 0.975);
    }
    return res;
}

namespace {

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

std::string fmt_pm(double center, double half) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g +/- %.2g", center, half);
    return buf;
}

// Render the governing equation with the class's coefficient layout. `phi`
// supplies variable components; `lo/hi` non-null renders interval notation.
std::string equation_line(const PDEClass& cls, std::span<const double> phi,
                          const std::vector<double>* lo, const std::vector<double>* hi) {
    ScalarPDEParams p = cls.scalar_params(phi);
    auto comp = [&](CoeffSlot slot, double value) {
        for (int k = 0; k < cls.param_dim; ++k)
            if (cls.phi_slots[k] == slot && lo && hi)
                return fmt_pm(0.5 * ((*lo)[k] + (*hi)[k]), 0.5 * ((*hi)[k] - (*lo)[k]));
        return fmt(value);
    };
    std::ostringstream s;
    switch (cls.scalar_family) {
        case ScalarFamily::diffusion:
            s << "d/dt u = " << comp(CoeffSlot::nu, p.nu) << " lap(u)";
            break;
        case ScalarFamily::advection:
            s << "d/dt u + [" << comp(CoeffSlot::ax, p.ax) << ", " << comp(CoeffSlot::ay, p.ay)
              << "] . grad(u) = 0";
            break;
        case ScalarFamily::advection_diffusion:
            s << "d/dt u + [" << comp(CoeffSlot::ax, p.ax) << ", " << comp(CoeffSlot::ay, p.ay)
              << "] . grad(u) = " << comp(CoeffSlot::nu, p.nu) << " lap(u)";
            break;
        case ScalarFamily::adr:
            s << "d/dt u + [" << comp(CoeffSlot::ax, p.ax) << ", " << comp(CoeffSlot::ay, p.ay)
              << "] . grad(u) = " << comp(CoeffSlot::nu, p.nu) << " lap(u) + k u";
            break;
        case ScalarFamily::allen_cahn:
            s << "d/dt u = " << comp(CoeffSlot::eps2, p.eps2) << " lap(u) - (u^3 - u)/"
              << comp(CoeffSlot::eps2, p.eps2);
            break;
    }
    return s.str();
}

} // namespace

std::string selection_summary(const PriorContext& ctx, const SelectionResult& result,
                              const PDEClass* true_class, std::span<const double> true_phi) {
    const PDEClass& sel = ctx.registry.by_id(result.selected_class);
    std::ostringstream out;
    if (true_class)
        out << "True PDE:     " << equation_line(*true_class, true_phi, nullptr, nullptr) << "\n";
    out << "Sampled PDE:  " << equation_line(sel, result.phi_star, nullptr, nullptr) << "\n";
    if (result.repeats >= 10)
        out << "95% Interval: " << equation_line(sel, result.phi_star, &result.phi_lo, &result.phi_hi)
            << "\n";
    out << "Selected class: " << sel.name;
    for (std::size_t k = 0; k < result.candidate_ids.size(); ++k) {
        const PDEClass& c = ctx.registry.by_id(result.candidate_ids[k]);
        out << (k == 0 ? "  [" : ", ") << c.name << ": freq " << fmt(result.frequency[k]);
    }
    out << "]";
    if (result.ambiguous) out << "  (ambiguous: runner-up within 1%)";
    out << "\n";
    return out.str();
}

} // namespace padam
