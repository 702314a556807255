#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "padam/field.hpp"
#include "padam/pde.hpp"

namespace padam {

struct RelL2Result {
    double value = 0.0;   // percent
    bool absolute = false; // true when the truth norm fell below the guard
};

/// 100 * ||pred - truth|| / ||truth||. When ||truth|| < 1e-8 * sqrt(N) the
/// denominator is unreliable; the result falls back to absolute L2 and is
/// tagged so downstream records can report it honestly.
RelL2Result rel_l2(std::span<const double> pred, std::span<const double> truth);
RelL2Result rel_l2(const Field& pred, const Field& truth);

/// Plain Euclidean norm of pred-truth over a masked subset (absolute L2).
double masked_l2(std::span<const double> pred, std::span<const double> truth,
                 std::span<const std::uint8_t> mask);

/// Operator shift: 100 * ||uT_unseen - uT_train|| / ||uT_train|| with both
/// terminal states evolved from the same initial condition.
double operator_shift(const ScalarPDEParams& params_train, const ScalarPDEParams& params_unseen,
                      const Field& ic, const SolverConfig& cfg);

/// One evaluation-record row of the CSV schema
/// metric,name,class,task,fraction,value,seed,config_hash.
struct MetricRecord {
    std::string metric;
    std::string name;
    std::string pde_class;
    std::string task;
    double fraction = 1.0;
    double value = 0.0;
    std::uint64_t seed = 0;
    std::string config_hash;

    static std::string csv_header();
    std::string csv_row(int precision = 10) const;
};

} // namespace padam
