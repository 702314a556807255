#include "padam/mask.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "padam/rng.hpp"

namespace padam {

long ObservationMask::count(int c) const {
    const std::size_t base = static_cast<std::size_t>(c) * grid.n_points();
    long n = 0;
    for (long k = 0; k < grid.n_points(); ++k) n += indicator[base + k];
    return n;
}

ObservationMask make_mask_per_channel(const Grid2D& grid, std::span<const double> fractions,
                                      std::uint64_t seed) {
    const int n_channels = static_cast<int>(fractions.size());
    if (n_channels < 1) throw std::invalid_argument("make_mask: need at least one channel");
    for (double f : fractions)
        if (f > 1.0) throw std::invalid_argument("make_mask: fraction must lie in [0, 1]");

    ObservationMask m;
    m.grid = grid;
    m.n_channels = n_channels;
    m.fraction.assign(fractions.begin(), fractions.end());
    const long npts = grid.n_points();
    m.indicator.assign(static_cast<std::size_t>(n_channels) * npts, 0);

    SeededRng root(seed);
    std::vector<std::uint32_t> perm(npts);
    for (int c = 0; c < n_channels; ++c) {
        if (fractions[c] < 0.0) {
            m.fraction[c] = 0.0;
            continue;
        }
        // Round half up; the observed-point count is exact, not expected.
        const long target =
            static_cast<long>(std::floor(fractions[c] * static_cast<double>(npts) + 0.5));
        std::iota(perm.begin(), perm.end(), 0u);
        SeededRng rng = root.stream(static_cast<std::uint64_t>(c));
        // Partial Fisher-Yates: the first `target` slots are the sample.
        for (long k = 0; k < target; ++k) {
            const long j = k + static_cast<long>(rng.below(static_cast<std::uint64_t>(npts - k)));
            std::swap(perm[k], perm[j]);
            m.indicator[static_cast<std::size_t>(c) * npts + perm[k]] = 1;
        }
    }
    return m;
}

ObservationMask make_mask(const Grid2D& grid, int n_channels, double fraction, std::uint64_t seed) {
    if (fraction < 0.0 || fraction > 1.0)
        throw std::invalid_argument("make_mask: fraction must lie in [0, 1]");
    if (n_channels < 1) throw std::invalid_argument("make_mask: n_channels must be >= 1");
    std::vector<double> fr(static_cast<std::size_t>(n_channels), fraction);
    return make_mask_per_channel(grid, fr, seed);
}

} // namespace padam
