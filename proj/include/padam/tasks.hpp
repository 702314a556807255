#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "padam/dataset.hpp"
#include "padam/mixture_prior.hpp"
#include "padam/sampler.hpp"

namespace padam {

// Everything a task needs to turn observations into posterior samples: the
// denoiser, the class registry, normalization statistics, and the sampler
// constants. Guidance strength follows the observation density: fixed zeta
// for full-channel conditioning, residual-normalized for sparse.
struct PriorContext {
    const Denoiser* denoiser = nullptr;
    ClassRegistry registry;
    NormStats norm;
    int resolution = 32; // prior grid is resolution x resolution
    SigmaSchedule schedule;
    double zeta_sparse = 4.0;
    double zeta_full = 4.0;
    JacobianMode jacobian = JacobianMode::exact_oracle;
    bool hard_replace_full = true;

    static PriorContext from_oracle(const MixtureOraclePrior& prior);

    Grid2D grid_for(const PDEClass& cls) const { return class_grid(cls, resolution, resolution); }
};

enum class TaskKind {
    forward,
    inverse_state,
    infer_params,
    partial_params,
    vector_forward_u,
    vector_forward_v,
    vector_inverse_u,
    vector_inverse_v,
    ood_joint
};

const char* to_string(TaskKind k);

/// u_T ~ p(u_T | u_0, Phi, c): Phi fully observed, u0 at `fraction`.
Field forward_predict(const PriorContext& ctx, int class_id, std::span<const double> phi,
                      const Field& u0, double fraction, std::uint64_t seed);

/// u_0 ~ p(u_0 | u_T, Phi, c).
Field inverse_state(const PriorContext& ctx, int class_id, std::span<const double> phi,
                    const Field& uT, double fraction, std::uint64_t seed);

/// phi ~ p(phi | u_0, u_T, c), read back through the strip means.
std::vector<double> infer_params(const PriorContext& ctx, int class_id, const Field& u0,
                                 const Field& uT, double fraction, std::uint64_t seed);

/// Known components enter the observation through their lifted strips; the
/// remaining components are returned. `known` maps component index -> value.
std::map<int, double> infer_partial_params(const PriorContext& ctx, int class_id, const Field& u0,
                                           const Field& uT, const std::map<int, double>& known,
                                           double fraction, std::uint64_t seed);

/// Component-wise terminal prediction (u_T, v_T) from (u0, v0) observations.
std::pair<Field, Field> vector_forward(const PriorContext& ctx, int class_u, int class_v,
                                       const Field& u0, const Field& v0, double fraction,
                                       std::uint64_t seed);

enum class VectorTarget { u0, v0 };

/// Auxiliary-conditioned inverse: u0 ~ p(u0 | v0, uT, c) or v0 ~ p(v0 | u0, vT, c).
/// `terminal` and `auxiliary` are both observed at `fraction`.
Field vector_inverse(const PriorContext& ctx, int class_u, int class_v, VectorTarget target,
                     const Field& terminal, const Field& auxiliary, double fraction,
                     std::uint64_t seed);

/// Joint (u0, uT) reconstruction under the nearest in-library class from
/// sparse observations of both endpoints (the zero-shot protocol).
std::pair<Field, Field> ood_joint_reconstruct(const PriorContext& ctx, int nearest_class,
                                              const Field& u0_obs_field, const Field& uT_obs_field,
                                              double fraction, std::uint64_t seed);

/// The posterior sample underlying a scalar task: observation fractions per
/// channel (negative = unobserved), conditioning values from `cond` (raw
/// space). Returns the full denormalized sample.
Field sample_task_posterior(const PriorContext& ctx, int class_id, const Field& cond_raw,
                            std::span<const double> fractions, std::uint64_t seed);

/// M posterior samples sharing one observation (mask and values are fixed by
/// `seed`); members differ only in the trajectory initialization, mirroring
/// how predictive ensembles are drawn for uncertainty estimation.
std::vector<Field> sample_task_ensemble(const PriorContext& ctx, int class_id,
                                        const Field& cond_raw, std::span<const double> fractions,
                                        int members, std::uint64_t seed);

/// Ensembles of the forward / inverse-state tasks (target channel extracted).
std::vector<Field> forward_predict_ensemble(const PriorContext& ctx, int class_id,
                                            std::span<const double> phi, const Field& u0,
                                            double fraction, int members, std::uint64_t seed);
std::vector<Field> inverse_state_ensemble(const PriorContext& ctx, int class_id,
                                          std::span<const double> phi, const Field& uT,
                                          double fraction, int members, std::uint64_t seed);

/// The mask a task with these fractions and seed conditions on; exposed so
/// callers can render the observation views the sampler actually saw.
ObservationMask task_observation_mask(const Grid2D& grid, std::span<const double> fractions,
                                      std::uint64_t seed);

} // namespace padam
