#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "padam/field.hpp"

namespace padam {

struct EnsembleStats {
    Field mean;  // mu_M, pointwise
    Field stdev; // sigma_M, pointwise, (M-1) divisor
    int members = 0;
};

/// Unbiased pointwise mean and standard deviation of M >= 2 member fields.
EnsembleStats ensemble_stats(std::span<const Field> members);

/// Pointwise nonconformity s = |z - mu| / max(sigma, floor).
Field nonconformity(const Field& z_true, const EnsembleStats& stats, double floor);

/// The ceil((n_pool + 1)(1 - alpha)) / n_pool-th empirical quantile of the
/// pooled scores; +inf sentinel when the rank exceeds the pool.
double calibrate(std::span<const double> pooled_scores, double alpha);

/// [mu -/+ q_hat * max(sigma, floor)] pointwise.
std::pair<Field, Field> conformal_interval(const EnsembleStats& stats, double q_hat, double floor);

/// Percentage of grid points with lo <= truth <= hi.
double picp(const Field& truth, const Field& lo, const Field& hi);

// Per-(class, task) calibration state, persisted as a small key-value file.
struct CalibrationRecord {
    int class_id = 0;
    std::string task;
    double alpha = 0.05;
    long n_pool = 0;
    int n_instances = 0;
    int members = 0;
    double fraction = 1.0;
    double q_hat = 0.0;
    double sigma_floor = 0.0;
    std::uint64_t score_digest = 0; // FNV-1a over the sorted score bytes
    std::string config_hash;
    std::uint64_t seed = 0;

    void save(const std::string& path) const;
    static CalibrationRecord load(const std::string& path);
};

/// FNV-1a digest of the sorted scores; records carry it so reuse across runs
/// can detect mismatched provenance.
std::uint64_t score_digest(std::span<const double> scores);

} // namespace padam
