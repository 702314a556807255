#pragma once

#include <cstdint>
#include <vector>

#include "padam/dataset.hpp"
#include "padam/denoiser.hpp"

namespace padam {

// The noised empirical training distribution is a Gaussian mixture with one
// component per stored sample, so its posterior mean (denoiser), score, and
// Jacobian action are available in closed form. No training involved; this
// is the artifact's exact verification path.
//
//   x_hat_0 = sum_i w_i x_i,   w_i = softmax_i(-||x - x_i||^2 / (2 sigma^2))
//   score   = (x_hat_0 - x) / sigma^2   (exactly grad log p_t(x | c))
//   J^T v   = (1/sigma^2) (sum_i w_i x_i <x_i, v> - x_hat_0 <x_hat_0, v>)
class MixtureOraclePrior : public Denoiser {
public:
    /// Stores every dataset sample, normalized per (class, channel).
    explicit MixtureOraclePrior(const Dataset& ds);

    Field evaluate(const Field& x, double sigma, int class_id) const override;
    Field jvp_t(const Field& x, double sigma, int class_id, const Field& v) const override;

    /// Mixture weights at (x, sigma); sums to one. Exposed for tests.
    std::vector<double> weights(const Field& x, double sigma, int class_id) const;

    int count(int class_id) const;
    const Grid2D& grid() const { return grid_; }
    const NormStats& norm() const { return norm_; }
    const ClassRegistry& registry() const { return registry_; }
    double sigma_data() const { return sigma_data_; }

    /// Stored (normalized) sample of a class; for held-in test harnesses.
    const std::vector<double>& component(int class_id, int index) const;

private:
    const std::vector<std::vector<double>>& bank(int class_id) const;

    Grid2D grid_;
    ClassRegistry registry_;
    NormStats norm_;
    double sigma_data_ = 1.0;
    std::vector<std::vector<std::vector<double>>> per_class_; // [class][i][dim]
};

} // namespace padam
