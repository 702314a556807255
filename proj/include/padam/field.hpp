#pragma once

#include <cstddef>
#include <span>
#include <tuple>
#include <vector>

#include "padam/grid.hpp"

namespace padam {

// Channelized scalar data on a Grid2D. Storage is channel-major, then
// row-major: index = (c*ny + j)*nx + i. Values are 64-bit in memory; the
// on-disk container narrows to 32-bit.
struct Field {
    Grid2D grid;
    int n_channels = 0;
    std::vector<double> data;

    Field() = default;

    Field(const Grid2D& g, int channels, double fill = 0.0)
        : grid(g), n_channels(channels),
          data(static_cast<std::size_t>(channels) * g.n_points(), fill) {
        if (channels < 1) throw std::invalid_argument("Field: n_channels must be >= 1");
    }

    std::size_t idx(int c, int j, int i) const {
        return (static_cast<std::size_t>(c) * grid.ny + j) * grid.nx + i;
    }

    double& at(int c, int j, int i) { return data[idx(c, j, i)]; }
    double at(int c, int j, int i) const { return data[idx(c, j, i)]; }

    std::span<double> channel(int c) {
        return std::span<double>(data).subspan(static_cast<std::size_t>(c) * grid.n_points(),
                                               grid.n_points());
    }
    std::span<const double> channel(int c) const {
        return std::span<const double>(data).subspan(static_cast<std::size_t>(c) * grid.n_points(),
                                                     grid.n_points());
    }

    /// Single-channel view copied out as its own Field.
    Field extract_channel(int c) const;

    bool finite() const;
};

struct FieldStats {
    double min = 0.0;
    double max = 0.0;
    double l2norm = 0.0;
};

/// Exact reductions over all channels; throws DivergenceError on NaN/Inf.
FieldStats field_stats(const Field& f);

/// Bilinear sample of channel c at physical (x, y). Periodic grids wrap;
/// non-periodic grids clamp to the boundary nodes.
double bilinear_sample(const Field& f, int c, double x, double y);

/// Resample every channel onto the target grid (bilinear). Exact where nodes
/// coincide; used to restrict solver-resolution fields to the prior grid.
Field resample(const Field& f, const Grid2D& target);

} // namespace padam
