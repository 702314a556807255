#include "padam/lifting.hpp"

#include <stdexcept>

namespace padam {

std::pair<int, int> strip_columns(int nx, int d_c, int k) {
    const long b = static_cast<long>(k) * nx / d_c;
    const long e = static_cast<long>(k + 1) * nx / d_c;
    return {static_cast<int>(b), static_cast<int>(e)};
}

Field lift_params(std::span<const double> phi, const Grid2D& grid) {
    const int d = static_cast<int>(phi.size());
    if (d < 1) throw std::invalid_argument("lift_params: d_c must be >= 1");
    if (d > grid.nx) throw std::invalid_argument("lift_params: d_c exceeds grid columns");
    Field f(grid, 1);
    for (int k = 0; k < d; ++k) {
        auto [b, e] = strip_columns(grid.nx, d, k);
        for (int j = 0; j < grid.ny; ++j)
            for (int i = b; i < e; ++i) f.at(0, j, i) = phi[k];
    }
    return f;
}

std::vector<double> unlift_params(const Field& phi_field, int d_c) {
    if (d_c < 1) throw std::invalid_argument("unlift_params: d_c must be >= 1");
    if (d_c > phi_field.grid.nx) throw std::invalid_argument("unlift_params: d_c exceeds grid columns");
    if (phi_field.n_channels != 1)
        throw std::invalid_argument("unlift_params: expected a single-channel field");
    std::vector<double> phi(d_c, 0.0);
    for (int k = 0; k < d_c; ++k) {
        auto [b, e] = strip_columns(phi_field.grid.nx, d_c, k);
        double sum = 0.0;
        long n = 0;
        for (int j = 0; j < phi_field.grid.ny; ++j)
            for (int i = b; i < e; ++i) {
                sum += phi_field.at(0, j, i);
                ++n;
            }
        phi[k] = sum / static_cast<double>(n);
    }
    return phi;
}

} // namespace padam
