#pragma once

#include <vector>

#include "lbvs/field2d.hpp"

namespace lbvs {

/// Gaussian pyramid; level 0 is full resolution, each next level is the
/// 5-tap-binomial-smoothed, 2x-decimated predecessor. Level k+1 dimensions
/// are ceil(level_k / 2) (even-index decimation), minimum 1.
struct Pyramid {
    std::vector<Field2D> levels;

    int level_count() const { return static_cast<int>(levels.size()); }
    const Field2D& level(int k) const { return levels[static_cast<std::size_t>(k)]; }
};

/// Largest level count such that min(w,h) / 2^(levels-1) >= 1.
int max_pyramid_levels(int width, int height);

/// Builds `num_levels` levels using separable [1 4 6 4 1]/16 smoothing with
/// edge-replicate borders followed by even-index decimation.
Pyramid gaussian_pyramid(const Field2D& f, int num_levels);

/// |level_c - upsample(level_{c+delta})| at level-c resolution (bilinear).
Field2D center_surround(const Pyramid& p, int c, int delta);

/// Bilinearly resizes every map to (out_w, out_h), sums, then normalize01.
Field2D across_scale_combine(const std::vector<Field2D>& maps, int out_w, int out_h);

}  // namespace lbvs
