#include "padam/mixture_prior.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace padam {

Field Denoiser::score(const Field& x, double sigma, int class_id) const {
    Field d = evaluate(x, sigma, class_id);
    const double inv_s2 = 1.0 / (sigma * sigma);
    for (std::size_t k = 0; k < d.data.size(); ++k) d.data[k] = (d.data[k] - x.data[k]) * inv_s2;
    return d;
}

MixtureOraclePrior::MixtureOraclePrior(const Dataset& ds)
    : grid_(ds.grid), registry_(ds.registry), norm_(ds.norm), sigma_data_(ds.sigma_data) {
    per_class_.resize(registry_.size());
    for (const auto& s : ds.samples) {
        Field x = s.x;
        norm_.normalize(s.class_id, x);
        per_class_[s.class_id].push_back(std::move(x.data));
    }
}

const std::vector<std::vector<double>>& MixtureOraclePrior::bank(int class_id) const {
    if (class_id < 0 || class_id >= static_cast<int>(per_class_.size()) ||
        per_class_[class_id].empty())
        throw std::invalid_argument("MixtureOraclePrior: class not registered or empty");
    return per_class_[class_id];
}

int MixtureOraclePrior::count(int class_id) const {
    return static_cast<int>(bank(class_id).size());
}

const std::vector<double>& MixtureOraclePrior::component(int class_id, int index) const {
    const auto& b = bank(class_id);
    if (index < 0 || index >= static_cast<int>(b.size()))
        throw std::invalid_argument("MixtureOraclePrior: component index out of range");
    return b[index];
}

std::vector<double> MixtureOraclePrior::weights(const Field& x, double sigma, int class_id) const {
    if (sigma <= 0.0) throw std::invalid_argument("MixtureOraclePrior: sigma must be positive");
    const auto& b = bank(class_id);
    const std::size_t dim = x.data.size();
    const std::size_t n = b.size();

    // Log-sum-exp over -||x - x_i||^2 / (2 sigma^2).
    std::vector<double> logw(n);
    double m = -std::numeric_limits<double>::infinity();
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (std::size_t i = 0; i < n; ++i) {
        if (b[i].size() != dim)
            throw std::invalid_argument("MixtureOraclePrior: input shape does not match samples");
        double d2 = 0.0;
        const double* xi = b[i].data();
        const double* xp = x.data.data();
        for (std::size_t k = 0; k < dim; ++k) {
            const double d = xp[k] - xi[k];
            d2 += d * d;
        }
        logw[i] = -d2 * inv;
        m = std::max(m, logw[i]);
    }
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        logw[i] = std::exp(logw[i] - m);
        z += logw[i];
    }
    for (std::size_t i = 0; i < n; ++i) logw[i] /= z;
    return logw;
}

Field MixtureOraclePrior::evaluate(const Field& x, double sigma, int class_id) const {
    const auto& b = bank(class_id);
    const std::vector<double> w = weights(x, sigma, class_id);
    Field out(x.grid, x.n_channels);
    double* o = out.data.data();
    for (std::size_t i = 0; i < b.size(); ++i) {
        const double wi = w[i];
        if (wi == 0.0) continue;
        const double* xi = b[i].data();
        for (std::size_t k = 0; k < out.data.size(); ++k) o[k] += wi * xi[k];
    }
    return out;
}

Field MixtureOraclePrior::jvp_t(const Field& x, double sigma, int class_id, const Field& v) const {
    if (v.data.size() != x.data.size())
        throw std::invalid_argument("MixtureOraclePrior::jvp_t: v shape mismatch");
    const auto& b = bank(class_id);
    const std::vector<double> w = weights(x, sigma, class_id);
    const std::size_t dim = x.data.size();

    // J = (1/sigma^2) * (sum_i w_i x_i x_i^T - x_hat x_hat^T) is symmetric,
    // so the transpose product is the weighted-covariance action on v.
    Field xhat(x.grid, x.n_channels);
    Field out(x.grid, x.n_channels);
    std::vector<double> dots(b.size(), 0.0);
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (w[i] == 0.0) continue;
        const double* xi = b[i].data();
        double dot = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            dot += xi[k] * v.data[k];
            xhat.data[k] += w[i] * xi[k];
        }
        dots[i] = dot;
    }
    double dot_hat = 0.0;
    for (std::size_t k = 0; k < dim; ++k) dot_hat += xhat.data[k] * v.data[k];

    const double inv_s2 = 1.0 / (sigma * sigma);
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (w[i] == 0.0) continue;
        const double coef = w[i] * dots[i] * inv_s2;
        const double* xi = b[i].data();
        for (std::size_t k = 0; k < dim; ++k) out.data[k] += coef * xi[k];
    }
    for (std::size_t k = 0; k < dim; ++k) out.data[k] -= inv_s2 * dot_hat * xhat.data[k];
    return out;
}

} // namespace padam
