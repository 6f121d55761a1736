#pragma once

#include <string>

#include "lbvs/field2d.hpp"

namespace lbvs {

/// Writes a map normalized to [0,1] as 16-bit binary PGM (P5, maxval 65535,
/// big-endian samples). Pixel value = round(65535 * v), half away from zero.
void write_map(const Field2D& map, const std::string& path);

/// Reads a 16-bit (or 8-bit) binary PGM back into [0,1] (value / maxval).
Field2D read_map(const std::string& path);

}  // namespace lbvs
