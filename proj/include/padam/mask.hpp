#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "padam/grid.hpp"

namespace padam {

// Per-channel boolean selection of grid points; the support behind every
// sparse-observation task.
struct ObservationMask {
    Grid2D grid;
    int n_channels = 0;
    std::vector<std::uint8_t> indicator; // channel-major, row-major, 0/1
    std::vector<double> fraction;        // requested fraction per channel

    std::size_t idx(int c, int j, int i) const {
        return (static_cast<std::size_t>(c) * grid.ny + j) * grid.nx + i;
    }

    bool observed(int c, int j, int i) const { return indicator[idx(c, j, i)] != 0; }

    long count(int c) const;

    /// True when every point of channel c is observed.
    bool full(int c) const { return count(c) == grid.n_points(); }
};

/// Exactly round(fraction * nx * ny) points per channel, drawn uniformly
/// without replacement; channels use disjoint derived RNG streams, so the
/// whole mask is a pure function of (seed, grid, fraction).
ObservationMask make_mask(const Grid2D& grid, int n_channels, double fraction, std::uint64_t seed);

/// Same sampling rule with one fraction per channel; negative entries mean
/// the channel is entirely unobserved.
ObservationMask make_mask_per_channel(const Grid2D& grid, std::span<const double> fractions,
                                      std::uint64_t seed);

} // namespace padam
