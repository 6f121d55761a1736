#include "lbvs/hvs.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace lbvs {

namespace {

constexpr double kBt709R = 0.2126;
constexpr double kBt709G = 0.7152;
constexpr double kBt709B = 0.0722;

// Three-piece luma encoding constants (linear / power / logarithmic).
constexpr double kJndA = 17.554;
constexpr double kJndY1 = 5.6046;
constexpr double kJndB = 826.81;
constexpr double kJndC = 0.10013;
constexpr double kJndD = -884.17;
constexpr double kJndY2 = 10469.0;
constexpr double kJndE = 209.16;
constexpr double kJndF = -731.28;
constexpr double kLumenFloor = 1e-4;

// BT.709 RGB -> cone-like responses: Hunt-Pointer-Estevez fundamentals of the
// BT.709/D65 encoding with each row rescaled to sum 1, so achromatic inputs
// excite all three channels equally.
std::array<std::array<double, 3>, 3> cone_matrix() {
    // RGB -> XYZ (BT.709, D65 white).
    const double rgb2xyz[3][3] = {{0.4124564, 0.3575761, 0.1804375},
                                  {0.2126729, 0.7151522, 0.0721750},
                                  {0.0193339, 0.1191920, 0.9503041}};
    // XYZ -> LMS (Hunt-Pointer-Estevez).
    const double xyz2lms[3][3] = {{0.38971, 0.68898, -0.07868},
                                  {-0.22981, 1.18340, 0.04641},
                                  {0.0, 0.0, 1.0}};
    std::array<std::array<double, 3>, 3> m{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (int k = 0; k < 3; ++k) acc += xyz2lms[i][k] * rgb2xyz[k][j];
            m[i][j] = acc;
        }
    }
    for (int i = 0; i < 3; ++i) {
        const double row_sum = m[i][0] + m[i][1] + m[i][2];
        for (int j = 0; j < 3; ++j) m[i][j] /= row_sum;
    }
    return m;
}

}  // namespace

JndVariant jnd_variant_from_name(const std::string& name) {
    if (name == "mantiuk-piecewise") return JndVariant::MantiukPiecewise;
    if (name == "log10") return JndVariant::Log10;
    throw DataError("unknown jnd variant '" + name + "'");
}

CsfVariant csf_variant_from_name(const std::string& name) {
    if (name == "daly-bandpass") return CsfVariant::DalyBandpass;
    if (name == "identity") return CsfVariant::Identity;
    throw DataError("unknown csf variant '" + name + "'");
}

Field2D luminance_of(const HdrFrame& frame) {
    validate(frame);
    Field2D lum(frame.width, frame.height);
    const double scale = frame.luminance_scale;
    for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x) {
            const float* p = frame.pixel(x, y);
            lum.at(x, y) = scale * (kBt709R * p[0] + kBt709G * p[1] + kBt709B * p[2]);
        }
    }
    return lum;
}

double jnd_luma_value(double luminance_cd_m2, JndVariant variant) {
    if (!std::isfinite(luminance_cd_m2)) throw DataError("jnd_luma: non-finite luminance");
    const double lum = std::max(luminance_cd_m2, kLumenFloor);
    if (variant == JndVariant::Log10) return 100.0 * std::log10(lum / kLumenFloor);
    if (lum <= kJndY1) return kJndA * lum;
    if (lum <= kJndY2) return kJndB * std::pow(lum, kJndC) + kJndD;
    return kJndE * std::log(lum) + kJndF;
}

Field2D jnd_luma(const Field2D& luminance, JndVariant variant) {
    Field2D out(luminance.width, luminance.height);
    for (std::size_t i = 0; i < luminance.size(); ++i)
        out.v[i] = jnd_luma_value(luminance.v[i], variant);
    return out;
}

OpponentPair cam_opponents(const HdrFrame& frame, double adaptation_luminance) {
    validate(frame);
    static const auto m = cone_matrix();
    double adapt = adaptation_luminance;
    if (!(adapt > 0.0)) adapt = field_mean(luminance_of(frame));
    adapt = std::max(adapt, kLumenFloor);

    constexpr double n = 0.57;
    const double sn = std::pow(adapt, n);
    const double scale = frame.luminance_scale;

    OpponentPair opp{Field2D(frame.width, frame.height), Field2D(frame.width, frame.height)};
    for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x) {
            const float* p = frame.pixel(x, y);
            double c[3];
            for (int i = 0; i < 3; ++i) {
                const double cone =
                    scale * (m[i][0] * p[0] + m[i][1] * p[1] + m[i][2] * p[2]);
                const double xn = cone > 0.0 ? std::pow(cone, n) : 0.0;
                c[i] = xn / (xn + sn);
            }
            opp.rg.at(x, y) = c[0] - c[1];
            opp.by.at(x, y) = c[2] - 0.5 * (c[0] + c[1]);
        }
    }
    return opp;
}

}  // namespace lbvs
