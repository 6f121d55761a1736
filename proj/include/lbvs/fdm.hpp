#pragma once

#include <vector>

#include "lbvs/field2d.hpp"
#include "lbvs/fixation_log.hpp"
#include "lbvs/hvs.hpp"

namespace lbvs {

/// Integer pixel position of one fixation.
struct FixationPoint {
    int x = 0;
    int y = 0;
};

/// Ground-truth saliency for one frame: Gaussian-smoothed fixations,
/// normalized to peak 1 (all-zero when the frame has no fixations).
struct FixationDensityMap {
    Field2D field;
    std::vector<FixationPoint> fixation_points;
};

/// ppd = horizontal_resolution / (2 * atan(screen_width / (2*distance)) in deg).
double degrees_to_pixels(const ViewingGeometry& geom);

/// All records assigned to `frame_index`, subjects pooled, ordered by
/// (subject_id, start_time).
std::vector<FixationRecord> fixations_for_frame(const FixationSet& set, int frame_index);

/// Accumulates impulses at the fixation pixels (optionally weighted) and
/// convolves with an isotropic Gaussian of sigma = one visual degree in
/// pixels, truncated at 3 sigma, edge-replicate; peak-normalized.
/// Out-of-bounds fixations raise DataError naming the offending index.
FixationDensityMap build_fdm(const std::vector<FixationPoint>& fixations,
                             const ViewingGeometry& geom, int width, int height,
                             const std::vector<double>& weights = {});

/// Convenience: rounds the frame's fixation records to pixels and builds the
/// density map. duration_weighted selects duration-ms impulse weights.
FixationDensityMap build_fdm_for_frame(const FixationSet& set, int frame_index,
                                       const ViewingGeometry& geom, int width, int height,
                                       bool duration_weighted = false);

}  // namespace lbvs
