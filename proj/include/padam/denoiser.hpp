#pragma once

#include "padam/field.hpp"

namespace padam {

// D(x; sigma, c): maps a noised 3-channel state at noise level sigma to an
// estimate of the clean state, conditioned on the PDE class. Implementations
// must be pure: identical inputs give identical outputs.
class Denoiser {
public:
    virtual ~Denoiser() = default;

    virtual Field evaluate(const Field& x, double sigma, int class_id) const = 0;

    /// Transpose-Jacobian product (d x_hat / d x)^T v. The default is the
    /// identity pass-through used when exact network Jacobians are not
    /// available; the mixture oracle overrides it with the exact action.
    virtual Field jvp_t(const Field& x, double sigma, int class_id, const Field& v) const {
        (void)x;
        (void)sigma;
        (void)class_id;
        return v;
    }

    /// Score of the noised marginal: s = (D(x) - x) / sigma^2.
    Field score(const Field& x, double sigma, int class_id) const;
};

} // namespace padam
