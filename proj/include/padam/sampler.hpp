#pragma once

#include <cstdint>
#include <vector>

#include "padam/denoiser.hpp"
#include "padam/mask.hpp"

namespace padam {

struct SigmaSchedule {
    double sigma_min = 0.002;
    double sigma_max = 80.0;
    double rho = 3.0;
    int n_steps = 64;

    void validate() const;
};

/// Karras spacing sigma_i = (max^(1/rho) + i/(n-1) (min^(1/rho) - max^(1/rho)))^rho,
/// i = 0..n-1, with a terminal 0 appended.
std::vector<double> karras_sigmas(const SigmaSchedule& s);

// Linear restriction A: selected channels, masked pixels. apply() packs the
// observed values in (channel, row-major) order; adjoint() scatters them back
// into a zero field.
struct MeasurementOp {
    ObservationMask mask;            // covers all channels of the state
    std::vector<int> observed_channels;

    long observed_count() const;
    std::vector<double> apply(const Field& x) const;
    Field adjoint(std::span<const double> r, const Grid2D& grid, int n_channels) const;
    bool channel_fully_observed(int c) const;
};

/// y_obs on the masked support, in the (normalized) space the sampler works in.
struct Observation {
    MeasurementOp op;
    std::vector<double> values;

    void validate() const;
};

enum class GuidanceMode { off, fixed, residual_normalized };
enum class JacobianMode { exact_oracle, identity };

struct GuidanceConfig {
    GuidanceMode mode = GuidanceMode::residual_normalized;
    double zeta = 1.0;
    JacobianMode jacobian = JacobianMode::exact_oracle;
    bool hard_replace_full = true; // overwrite fully observed channels in x_hat_0

    void validate() const;
};

/// Likelihood-score term of the posterior decomposition:
///   -lambda_obs * grad_x ||y_obs - A x_hat_0(x)||^2
///     = 2 lambda_obs J^T A^T (y_obs - A x_hat_0),
/// with J from the denoiser (exact_oracle) or the identity chain. The result
/// adds to the prior score.
Field guidance_gradient(const Field& x, const Field& x_hat0, const Observation& obs,
                        const GuidanceConfig& cfg, const Denoiser& denoiser, double sigma,
                        int class_id);

/// One Heun step of dx/dsigma = (x - D(x; sigma, c)) / sigma between
/// consecutive schedule levels; the final step to sigma = 0 is the Euler half.
Field prior_step(const Field& x, double sigma_cur, double sigma_next, const Denoiser& denoiser,
                 int class_id);

/// Deterministic guided probability-flow sweep from sigma_max noise.
/// obs == nullptr or mode == off reproduces the unguided prior trajectory
/// bit-for-bit at the same seed.
Field sample_posterior(const Denoiser& denoiser, int class_id, const Grid2D& grid,
                       const Observation* obs, const GuidanceConfig& cfg,
                       const SigmaSchedule& schedule, std::uint64_t seed);

/// M independent posterior samples with member seeds derived from (seed, j).
std::vector<Field> sample_ensemble(const Denoiser& denoiser, int class_id, const Grid2D& grid,
                                   const Observation* obs, const GuidanceConfig& cfg,
                                   const SigmaSchedule& schedule, int members, std::uint64_t seed);

} // namespace padam
