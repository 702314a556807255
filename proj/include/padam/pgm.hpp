#pragma once

#include <string>

#include "padam/field.hpp"
#include "padam/mask.hpp"

namespace padam {

/// Binary PGM (P5, maxval 255) of one channel. Values map linearly:
/// pixel = round(255 * (v - min) / (max - min)) over the channel's own range
/// (a constant channel renders mid-gray). Rows follow storage order (j = 0
/// first).
void write_pgm(const Field& f, int channel, const std::string& path);

/// Observation view: observed points render as the field, unobserved as 0.
void write_pgm_masked(const Field& f, int channel, const ObservationMask& mask,
                      const std::string& path);

} // namespace padam
