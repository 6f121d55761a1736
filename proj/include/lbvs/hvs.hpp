#pragma once

#include <cmath>
#include <string>

#include "lbvs/field2d.hpp"
#include "lbvs/hdr_frame.hpp"

namespace lbvs {

/// Physical setup behind cycles/degree and visual-degree conversions.
struct ViewingGeometry {
    double screen_width_m = 0.0;
    double viewing_distance_m = 0.0;
    int horizontal_resolution = 0;

    bool valid() const {
        return screen_width_m > 0.0 && viewing_distance_m > 0.0 && horizontal_resolution > 0;
    }

    /// horizontal_resolution / (total horizontal visual angle in degrees).
    double pixels_per_degree() const {
        const double angle_deg =
            2.0 * std::atan(screen_width_m / (2.0 * viewing_distance_m)) * 180.0 / M_PI;
        return horizontal_resolution / angle_deg;
    }
};

/// Signed red-green / blue-yellow opponent fields, bounded in [-1, 1].
struct OpponentPair {
    Field2D rg;
    Field2D by;
};

enum class JndVariant { MantiukPiecewise, Log10 };
enum class CsfVariant { DalyBandpass, Identity };

JndVariant jnd_variant_from_name(const std::string& name);
CsfVariant csf_variant_from_name(const std::string& name);

/// Absolute luminance in cd/m^2: luminance_scale * BT.709 weighting of RGB.
Field2D luminance_of(const HdrFrame& frame);

/// Perceptually uniform luma. The default three-piece encoding is linear up
/// to 5.6046 cd/m^2, a power segment up to 10469 cd/m^2 and logarithmic
/// above; strictly monotone, continuous at the breakpoints within 0.1 luma.
/// Inputs below 1e-4 cd/m^2 are clamped. The "log10" variant maps
/// L -> 100*log10(L/1e-4).
Field2D jnd_luma(const Field2D& luminance, JndVariant variant = JndVariant::MantiukPiecewise);

/// Scalar versions of the luma encodings (used by tests and tools).
double jnd_luma_value(double luminance_cd_m2, JndVariant variant = JndVariant::MantiukPiecewise);

/// Radially symmetric bandpass gain over spatial frequency in cycles/degree,
/// renormalized to peak 1. Shape: (0.0192 + 0.114 f) * exp(-(0.114 f)^1.1).
double csf_gain(double cycles_per_degree);

/// Frequency of the (continuous) gain curve's maximum, in cycles/degree.
double csf_peak_frequency();

/// Frequency-domain contrast sensitivity filtering. Forward FFT, multiply by
/// the radial gain (peak normalized to 1, DC forced to 1 so the field mean is
/// preserved), inverse FFT. Linear in its input.
Field2D csf_filter(const Field2D& luma, const ViewingGeometry& geom,
                   CsfVariant variant = CsfVariant::DalyBandpass);

/// Compressive color-appearance opponents. Linear BT.709 RGB is mapped to
/// cone-like channels (rows normalized so gray inputs give equal responses),
/// each compressed by x^n / (x^n + s^n) with n = 0.57 and semi-saturation s
/// equal to the adaptation luminance; rg = r' - g', by = b' - (r'+g')/2.
/// adaptation_luminance <= 0 selects the mean frame luminance.
OpponentPair cam_opponents(const HdrFrame& frame, double adaptation_luminance = 0.0);

}  // namespace lbvs
