#include "lbvs/fdm.hpp"

#include <algorithm>
#include <cmath>

namespace lbvs {

double degrees_to_pixels(const ViewingGeometry& geom) {
    if (!geom.valid()) throw DataError("degrees_to_pixels: geometry fields must be > 0");
    return geom.pixels_per_degree();
}

std::vector<FixationRecord> fixations_for_frame(const FixationSet& set, int frame_index) {
    std::vector<FixationRecord> out;
    for (std::size_t i = 0; i < set.records.size(); ++i) {
        const auto& [first, last] = set.frame_span[i];
        if (frame_index >= first && frame_index <= last) out.push_back(set.records[i]);
    }
    std::sort(out.begin(), out.end(), [](const FixationRecord& a, const FixationRecord& b) {
        if (a.subject_id != b.subject_id) return a.subject_id < b.subject_id;
        return a.start_ms < b.start_ms;
    });
    return out;
}

FixationDensityMap build_fdm(const std::vector<FixationPoint>& fixations,
                             const ViewingGeometry& geom, int width, int height,
                             const std::vector<double>& weights) {
    if (width < 1 || height < 1) throw DataError("build_fdm: dimensions must be >= 1");
    if (!weights.empty() && weights.size() != fixations.size())
        throw DataError("build_fdm: weights size must match fixations");

    FixationDensityMap fdm;
    fdm.field = Field2D(width, height);
    fdm.fixation_points = fixations;
    if (fixations.empty()) return fdm;

    Field2D impulses(width, height);
    for (std::size_t i = 0; i < fixations.size(); ++i) {
        const auto& p = fixations[i];
        if (p.x < 0 || p.x >= width || p.y < 0 || p.y >= height)
            throw DataError("build_fdm: fixation " + std::to_string(i) + " at (" +
                            std::to_string(p.x) + "," + std::to_string(p.y) +
                            ") is outside the frame");
        impulses.at(p.x, p.y) += weights.empty() ? 1.0 : weights[i];
    }

    const double sigma = degrees_to_pixels(geom);
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
    for (int k = -radius; k <= radius; ++k)
        taps[static_cast<std::size_t>(k + radius)] = std::exp(-(k * k) / (2.0 * sigma * sigma));

    // Separable convolution, edge-replicate.
    Field2D tmp(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += taps[static_cast<std::size_t>(k + radius)] * impulses.at_clamped(x + k, y);
            tmp.at(x, y) = acc;
        }
    Field2D smooth(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += taps[static_cast<std::size_t>(k + radius)] * tmp.at_clamped(x, y + k);
            smooth.at(x, y) = acc;
        }

    const double peak = field_max(smooth);
    if (peak > 0.0)
        for (double& v : smooth.v) v /= peak;
    fdm.field = std::move(smooth);
    return fdm;
}

FixationDensityMap build_fdm_for_frame(const FixationSet& set, int frame_index,
                                       const ViewingGeometry& geom, int width, int height,
                                       bool duration_weighted) {
    const auto records = fixations_for_frame(set, frame_index);
    std::vector<FixationPoint> points;
    std::vector<double> weights;
    points.reserve(records.size());
    for (const FixationRecord& r : records) {
        points.push_back({static_cast<int>(std::lround(r.x)), static_cast<int>(std::lround(r.y))});
        if (duration_weighted) weights.push_back(r.duration_ms);
    }
    return build_fdm(points, geom, width, height, weights);
}

}  // namespace lbvs
