#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "padam/dataset.hpp"
#include "padam/denoiser.hpp"

namespace padam {

// Small trainable denoiser wrapped in EDM preconditioning:
//   D(x; sigma, c) = c_skip(sigma) x + c_out(sigma) F(c_in(sigma) x; c_noise, c)
// F is a residual MLP over the field pooled to (at most) 16x16 per channel,
// with a sinusoidal noise embedding and a learned class embedding. Desk-scale
// stand-in for a full U-Net; gradients are reverse-mode by hand.
class TrainableDenoiser : public Denoiser {
public:
    struct Arch {
        int field_h = 32;
        int field_w = 32;
        int n_classes = 1;
        int hidden = 512;
        int blocks = 4;
        double sigma_data = 1.0;
    };

    TrainableDenoiser(const Arch& arch, std::uint64_t init_seed);

    Field evaluate(const Field& x, double sigma, int class_id) const override;
    // jvp_t stays the base-class identity pass-through: exact network
    // Jacobians are not required for guidance with this realization.

    long param_count() const { return static_cast<long>(theta_.size()); }
    const Arch& arch() const { return arch_; }
    double sigma_data() const { return arch_.sigma_data; }

    std::vector<double>& params() { return theta_; }
    const std::vector<double>& params() const { return theta_; }

    /// lambda(sigma) ||D(y; sigma, c) - x0||^2 for one item; accumulates
    /// dloss/dtheta into grad when non-null. y is the noised input x0 + n.
    double item_loss_grad(const std::vector<double>& x0, const std::vector<double>& y, int class_id,
                          double sigma, std::vector<double>* grad) const;

    void save(const std::string& path, const std::string& registry_hash) const;
    static std::unique_ptr<TrainableDenoiser> load(const std::string& path,
                                                   std::string* registry_hash = nullptr);

public:
    struct Layout;

private:
    std::vector<double> run_core(const std::vector<double>& y, int class_id, double sigma,
                                 struct ForwardCache* cache) const;

    Arch arch_;
    int pool_ = 1;      // pooling factor down to <=16 per side
    int ph_ = 0, pw_ = 0;
    std::vector<double> theta_;
};

/// EDM preconditioning weight lambda(sigma) = (sigma^2 + sd^2) / (sigma sd)^2.
double edm_lambda(double sigma, double sigma_data);

/// Mean of lambda(sigma_b) ||D(x0_b + n_b; sigma_b, c_b) - x0_b||^2 over the
/// batch, for any denoiser realization.
double dsm_loss(const Denoiser& d, std::span<const Field> x0, std::span<const int> class_ids,
                std::span<const double> sigmas, std::span<const Field> noise, double sigma_data);

struct TrainConfig {
    long steps = 2000;
    int batch = 16;
    double lr = 1e-3;
    double lr_min_frac = 0.05; // cosine decay floor
    double p_mean = -1.2;      // ln sigma ~ N(p_mean, p_std^2)
    double p_std = 1.2;
    int hidden = 512;
    int blocks = 4;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainResult {
    std::shared_ptr<TrainableDenoiser> denoiser;
    std::vector<double> loss_trace;
};

/// First-order stochastic training (Adam, cosine decay) of the conditional
/// denoising score-matching objective on the normalized dataset.
TrainResult train_denoiser(const Dataset& ds, const TrainConfig& cfg);

} // namespace padam
