#pragma once

#include <array>
#include <string>
#include <vector>

#include "lbvs/field2d.hpp"
#include "lbvs/hvs.hpp"
#include "lbvs/pyramid.hpp"

namespace lbvs {

/// Feature channel order used everywhere a 4-vector appears.
enum Feature : int { kMotion = 0, kColor = 1, kIntensity = 2, kOrientation = 3 };
constexpr int kNumFeatures = 4;
extern const std::array<const char*, kNumFeatures> kFeatureNames;

/// The four conspicuity maps of one frame, frame resolution, each in [0,1].
struct FeatureStack {
    Field2D motion;
    Field2D color;
    Field2D intensity;
    Field2D orientation;

    const Field2D& map(int feature) const;
    Field2D& map(int feature);
};

struct ChannelParams {
    int pyramid_levels = 9;
    /// (center level, surround offset) pairs; pairs that do not fit a reduced
    /// pyramid are skipped.
    std::vector<std::pair<int, int>> cs_pairs = {{2, 3}, {2, 4}, {3, 3}, {3, 4}, {4, 3}, {4, 4}};

    double gabor_wavelength_px = 7.0;
    double gabor_aspect = 0.5;
    double gabor_phase = 0.0;
    double gabor_sigma_px = 2.8;

    int block_size = 16;
    int search_radius = 8;
    double bilateral_sigma_spatial_px = 3.0;
    /// Range sigma as a fraction of the field's dynamic range.
    double bilateral_range_factor = 0.1;
};

/// Per-block integer displacement field from exhaustive SAD block matching.
struct FlowField {
    Field2D dx;  // one value per block
    Field2D dy;
};

/// Center-surround contrast of a single channel: pyramid, the (c, delta)
/// maps, across-scale combination at frame resolution, normalize01.
/// Reducing the pyramid for small frames is reported through levels_used.
Field2D intensity_feature(const Field2D& csf_luma, const ChannelParams& params = {},
                          int* levels_used = nullptr);

/// Same scale space over both opponent channels (12 maps when all pairs fit).
Field2D color_feature(const OpponentPair& opp, const ChannelParams& params = {},
                      int* levels_used = nullptr);

/// Gabor energy at 0/45/90/135 degrees per pyramid level, center-surround per
/// orientation, combined and normalized.
Field2D orientation_feature(const Field2D& luma, const ChannelParams& params = {},
                            int* levels_used = nullptr);

/// Residual-image block-matching motion. Residual = luma - bilateral(luma);
/// per-block SAD flow magnitude upsampled to frame size and normalized.
/// A missing previous frame yields the all-zero map.
Field2D motion_feature(const Field2D* prev_luma, const Field2D& curr_luma,
                       const ChannelParams& params = {});

/// Brute-force windowed bilateral filter (spatial kernel truncated at 3 sigma).
Field2D bilateral_filter(const Field2D& f, double sigma_spatial_px, double sigma_range);

/// Exhaustive-search block matching between two equally sized fields.
/// Each block of `curr` is matched into `prev` by minimal SAD (ties prefer
/// the smaller displacement, then scan order); the reported vectors are the
/// prev -> curr motion, so content shifted by (+2,0) yields flow (+2,0).
FlowField block_matching_flow(const Field2D& prev, const Field2D& curr, int block_size,
                              int search_radius);

/// Even (cosine) Gabor kernel, zero-mean, support truncated at 3 sigma.
Field2D gabor_kernel(double theta_rad, double wavelength_px, double aspect, double phase,
                     double sigma_px);

/// Convolution with edge-replicate borders.
Field2D convolve(const Field2D& f, const Field2D& kernel);

}  // namespace lbvs
