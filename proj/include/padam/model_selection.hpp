#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "padam/tasks.hpp"

namespace padam {

// Sparse two-snapshot evidence: both endpoints observed on known masks.
struct SnapshotObservation {
    Field u0;        // values meaningful only where mask_u0 is set
    Field uT;
    ObservationMask mask_u0; // single-channel masks on the class grid
    ObservationMask mask_uT;
};

/// Snapshot pair from full-field truth at the given observation fraction.
SnapshotObservation make_snapshots(const Field& u0_true, const Field& uT_true, double fraction,
                                   std::uint64_t seed);

struct CandidateScore {
    int class_id = 0;
    std::vector<double> phi_hat;
    double discrepancy = 0.0; // E(c): L2 on the observed uT support
    bool valid = true;
};

/// Infer-and-validate for one candidate: phi_hat ~ p(phi | u0, uT, c), then
/// uT_hat ~ p(uT | phi_hat, u0, c); E(c) = ||uT_hat - uT|| on the observed
/// support. Sampler failures mark the candidate invalid with +inf score.
CandidateScore score_candidate(const PriorContext& ctx, int class_id,
                               const SnapshotObservation& obs, std::uint64_t seed);

struct SelectionResult {
    int selected_class = -1;
    std::vector<double> phi_star;
    std::vector<CandidateScore> representative; // one row per candidate
    std::vector<double> frequency;              // per candidate, sums to 1
    std::vector<int> candidate_ids;
    int repeats = 0;
    bool ambiguous = false;
    // Per-parameter 2.5 / 97.5 percentiles across the modal class's repeats.
    std::vector<double> phi_lo, phi_hi;
};

/// R independent repeats of score_candidate over the library; the modal
/// per-repeat argmin wins. The representative table is the winning repeat's
/// row set, so argmin(representative) is the selected class by construction.
SelectionResult select_model(const PriorContext& ctx, std::span<const int> candidate_ids,
                             const SnapshotObservation& obs, int repeats, std::uint64_t seed);

/// Fig-style text block: the governing equation with inferred coefficients
/// and, when repeats allow, the 95% interval line.
std::string selection_summary(const PriorContext& ctx, const SelectionResult& result,
                              const PDEClass* true_class, std::span<const double> true_phi);

} // namespace padam
