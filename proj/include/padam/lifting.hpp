#pragma once

#include <span>
#include <vector>

#include "padam/field.hpp"

namespace padam {

/// Broadcast phi into a spatial field: constant for d_c = 1, equal vertical
/// strips for d_c > 1 (strip k covers columns floor(k*nx/d) .. floor((k+1)*nx/d)-1).
Field lift_params(std::span<const double> phi, const Grid2D& grid);

/// Strip-mean read-back; exact inverse of lift_params on lifted fields.
std::vector<double> unlift_params(const Field& phi_field, int d_c);

/// Column range [begin, end) of strip k under the d_c-way partition.
std::pair<int, int> strip_columns(int nx, int d_c, int k);

} // namespace padam
