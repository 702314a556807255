#include "padam/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace padam {

RelL2Result rel_l2(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size())
        throw std::invalid_argument("rel_l2: shape mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < pred.size(); ++k) {
        const double d = pred[k] - truth[k];
        num += d * d;
        den += truth[k] * truth[k];
    }
    num = std::sqrt(num);
    den = std::sqrt(den);
    const double guard = 1e-8 * std::sqrt(static_cast<double>(truth.size()));
    RelL2Result r;
    if (den < guard) {
        r.value = num;
        r.absolute = true;
    } else {
        r.value = 100.0 * num / den;
    }
    return r;
}

RelL2Result rel_l2(const Field& pred, const Field& truth) {
    return rel_l2(std::span<const double>(pred.data), std::span<const double>(truth.data));
}

double masked_l2(std::span<const double> pred, std::span<const double> truth,
                 std::span<const std::uint8_t> mask) {
    if (pred.size() != truth.size() || pred.size() != mask.size())
        throw std::invalid_argument("masked_l2: shape mismatch");
    double num = 0.0;
    for (std::size_t k = 0; k < pred.size(); ++k) {
        if (!mask[k]) continue;
        const double d = pred[k] - truth[k];
        num += d * d;
    }
    return std::sqrt(num);
}

double operator_shift(const ScalarPDEParams& params_train, const ScalarPDEParams& params_unseen,
                      const Field& ic, const SolverConfig& cfg) {
    const Field uT_train = solve_scalar(params_train, ic, cfg).terminal;
    const Field uT_unseen = solve_scalar(params_unseen, ic, cfg).terminal;
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < uT_train.data.size(); ++k) {
        const double d = uT_unseen.data[k] - uT_train.data[k];
        num += d * d;
        den += uT_train.data[k] * uT_train.data[k];
    }
    return 100.0 * std::sqrt(num) / std::sqrt(den);
}

std::string MetricRecord::csv_header() {
    return "metric,name,class,task,fraction,value,seed,config_hash";
}

std::string MetricRecord::csv_row(int precision) const {
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%s,%s,%s,%s,%.*g,%.*g,%llu,%s", metric.c_str(), name.c_str(),
                  pde_class.c_str(), task.c_str(), precision, fraction, precision, value,
                  static_cast<unsigned long long>(seed), config_hash.c_str());
    return std::string(buf);
}

} // namespace padam
