#pragma once

#include <string>
#include <vector>

#include "padam/dataset.hpp"

namespace padam {

// PADM binary container (little-endian):
//   magic "PADM", u16 version = 1, u16 reserved = 0, u32 sample_count,
//   metadata block (u32 byte length + UTF-8 "key=value\n" text),
//   then per sample: u8 class_id, u8 d_c, u16 n_channels, u32 H, u32 W,
//   u64 seed, f32 phi[d_c], f32 data[n_channels*H*W] channel-major row-major.
// An empty dataset is exactly the 12-byte header. Payloads are 32-bit on
// disk, so write(read(write(ds))) is byte-identical.

void write_dataset(const Dataset& ds, const std::string& path);
Dataset read_dataset(const std::string& path);

/// Solver trajectory frames in the same container (metadata kind=trajectory,
/// class id 255, seed = frame index).
void write_trajectory_padm(const std::vector<Field>& frames, const std::string& path);
std::vector<Field> read_trajectory_padm(const std::string& path);

} // namespace padam
