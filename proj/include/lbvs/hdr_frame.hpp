#pragma once

#include <cstddef>
#include <vector>

#include "lbvs/field2d.hpp"

namespace lbvs {

/// Linear-light RGB raster with absolute luminance calibration.
/// `rgb` is interleaved row-major (top-left origin), width*height*3 floats,
/// all finite and >= 0. Multiplying luminance by `luminance_scale` yields cd/m^2.
struct HdrFrame {
    int width = 0;
    int height = 0;
    std::vector<float> rgb;
    float luminance_scale = 1.0f;
    int frame_index = 0;

    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }

    const float* pixel(int x, int y) const {
        return &rgb[(static_cast<std::size_t>(y) * width + x) * 3];
    }
    float* pixel(int x, int y) { return &rgb[(static_cast<std::size_t>(y) * width + x) * 3]; }
};

/// Throws DataError unless dimensions, sample count, finiteness, sign and
/// luminance_scale all satisfy the HdrFrame contract.
void validate(const HdrFrame& frame);

}  // namespace lbvs
