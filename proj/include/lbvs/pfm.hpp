#pragma once

#include <string>

#include "lbvs/hdr_frame.hpp"

namespace lbvs {

/// Reads a binary PFM file ("PF" color or "Pf" grayscale). Grayscale data is
/// replicated into all three channels. The header scale's sign selects payload
/// endianness (negative = little endian); |scale| becomes luminance_scale,
/// with 0 treated as 1.0. PFM scanlines are stored bottom-up.
HdrFrame read_pfm(const std::string& path);

/// Writes a color PFM, little endian, scale = -frame.luminance_scale.
/// read_pfm(write_pfm(f)) round-trips bit-exactly for finite non-negative data.
void write_pfm(const HdrFrame& frame, const std::string& path);

}  // namespace lbvs
