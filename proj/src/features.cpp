#include "lbvs/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lbvs {

const std::array<const char*, kNumFeatures> kFeatureNames = {"motion", "color", "intensity",
                                                             "orientation"};

const Field2D& FeatureStack::map(int feature) const {
    switch (feature) {
        case kMotion: return motion;
        case kColor: return color;
        case kIntensity: return intensity;
        case kOrientation: return orientation;
        default: throw DataError("FeatureStack: feature index out of range");
    }
}

Field2D& FeatureStack::map(int feature) {
    return const_cast<Field2D&>(static_cast<const FeatureStack*>(this)->map(feature));
}

namespace {

/// Clamp the configured pyramid depth to what the frame supports and keep
/// only the (c, delta) pairs that fit.
struct ScaleSpacePlan {
    int levels;
    std::vector<std::pair<int, int>> pairs;
};

ScaleSpacePlan plan_scale_space(int width, int height, const ChannelParams& params) {
    ScaleSpacePlan plan;
    plan.levels = std::min(params.pyramid_levels, max_pyramid_levels(width, height));
    for (const auto& [c, delta] : params.cs_pairs)
        if (c + delta < plan.levels) plan.pairs.push_back({c, delta});
    return plan;
}

Field2D combine_or_zero(const std::vector<Field2D>& maps, int w, int h) {
    if (maps.empty()) return Field2D(w, h);
    return across_scale_combine(maps, w, h);
}

}  // namespace

Field2D intensity_feature(const Field2D& csf_luma, const ChannelParams& params,
                          int* levels_used) {
    const auto plan = plan_scale_space(csf_luma.width, csf_luma.height, params);
    if (levels_used) *levels_used = plan.levels;
    const Pyramid pyr = gaussian_pyramid(csf_luma, plan.levels);
    std::vector<Field2D> maps;
    maps.reserve(plan.pairs.size());
    for (const auto& [c, delta] : plan.pairs) maps.push_back(center_surround(pyr, c, delta));
    return combine_or_zero(maps, csf_luma.width, csf_luma.height);
}

Field2D color_feature(const OpponentPair& opp, const ChannelParams& params, int* levels_used) {
    require_same_size(opp.rg, opp.by, "color_feature");
    const auto plan = plan_scale_space(opp.rg.width, opp.rg.height, params);
    if (levels_used) *levels_used = plan.levels;
    std::vector<Field2D> maps;
    maps.reserve(plan.pairs.size() * 2);
    for (const Field2D* channel : {&opp.rg, &opp.by}) {
        const Pyramid pyr = gaussian_pyramid(*channel, plan.levels);
        for (const auto& [c, delta] : plan.pairs) maps.push_back(center_surround(pyr, c, delta));
    }
    return combine_or_zero(maps, opp.rg.width, opp.rg.height);
}

Field2D gabor_kernel(double theta_rad, double wavelength_px, double aspect, double phase,
                     double sigma_px) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma_px));
    const int n = 2 * radius + 1;
    Field2D k(n, n);
    const double cos_t = std::cos(theta_rad), sin_t = std::sin(theta_rad);
    double sum = 0.0;
    for (int y = -radius; y <= radius; ++y)
        for (int x = -radius; x <= radius; ++x) {
            const double xr = x * cos_t + y * sin_t;
            const double yr = -x * sin_t + y * cos_t;
            const double envelope =
                std::exp(-(xr * xr + aspect * aspect * yr * yr) / (2.0 * sigma_px * sigma_px));
            const double value =
                envelope * std::cos(2.0 * M_PI * xr / wavelength_px + phase);
            k.at(x + radius, y + radius) = value;
            sum += value;
        }
    // Remove the residual DC component so flat regions give zero response.
    const double mean = sum / k.size();
    for (double& v : k.v) v -= mean;
    return k;
}

Field2D convolve(const Field2D& f, const Field2D& kernel) {
    const int rx = kernel.width / 2;
    const int ry = kernel.height / 2;
    Field2D out(f.width, f.height);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
            double acc = 0.0;
            for (int ky = 0; ky < kernel.height; ++ky)
                for (int kx = 0; kx < kernel.width; ++kx)
                    acc += kernel.at(kx, ky) * f.at_clamped(x + kx - rx, y + ky - ry);
            out.at(x, y) = acc;
        }
    return out;
}

Field2D orientation_feature(const Field2D& luma, const ChannelParams& params, int* levels_used) {
    const auto plan = plan_scale_space(luma.width, luma.height, params);
    if (levels_used) *levels_used = plan.levels;
    const Pyramid pyr = gaussian_pyramid(luma, plan.levels);

    std::vector<Field2D> maps;
    for (int o = 0; o < 4; ++o) {
        const double theta = o * M_PI / 4.0;
        const Field2D kernel = gabor_kernel(theta, params.gabor_wavelength_px,
                                            params.gabor_aspect, params.gabor_phase,
                                            params.gabor_sigma_px);
        // Orientation strength per level = |even Gabor response|.
        Pyramid responses;
        responses.levels.reserve(pyr.levels.size());
        for (const Field2D& level : pyr.levels) {
            Field2D r = convolve(level, kernel);
            for (double& v : r.v) v = std::fabs(v);
            responses.levels.push_back(std::move(r));
        }
        for (const auto& [c, delta] : plan.pairs)
            maps.push_back(center_surround(responses, c, delta));
    }
    return combine_or_zero(maps, luma.width, luma.height);
}

Field2D bilateral_filter(const Field2D& f, double sigma_spatial_px, double sigma_range) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma_spatial_px));
    std::vector<double> spatial_w(static_cast<std::size_t>(2 * radius + 1) * (2 * radius + 1));
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            spatial_w[(dy + radius) * (2 * radius + 1) + (dx + radius)] =
                std::exp(-(dx * dx + dy * dy) / (2.0 * sigma_spatial_px * sigma_spatial_px));
    const double inv_2sr2 = sigma_range > 0.0 ? 1.0 / (2.0 * sigma_range * sigma_range) : 0.0;

    Field2D out(f.width, f.height);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
            const double center = f.at(x, y);
            double num = 0.0, den = 0.0;
            for (int dy = -radius; dy <= radius; ++dy)
                for (int dx = -radius; dx <= radius; ++dx) {
                    const double value = f.at_clamped(x + dx, y + dy);
                    const double diff = value - center;
                    const double w = spatial_w[(dy + radius) * (2 * radius + 1) + (dx + radius)] *
                                     (inv_2sr2 > 0.0 ? std::exp(-diff * diff * inv_2sr2) : 1.0);
                    num += w * value;
                    den += w;
                }
            out.at(x, y) = num / den;
        }
    return out;
}

FlowField block_matching_flow(const Field2D& prev, const Field2D& curr, int block_size,
                              int search_radius) {
    require_same_size(prev, curr, "block_matching_flow");
    const int bw = (curr.width + block_size - 1) / block_size;
    const int bh = (curr.height + block_size - 1) / block_size;
    FlowField flow{Field2D(bw, bh), Field2D(bw, bh)};

    for (int by = 0; by < bh; ++by)
        for (int bx = 0; bx < bw; ++bx) {
            const int x0 = bx * block_size;
            const int y0 = by * block_size;
            const int x1 = std::min(x0 + block_size, curr.width);
            const int y1 = std::min(y0 + block_size, curr.height);

            double best_sad = std::numeric_limits<double>::infinity();
            int best_mag2 = 0, best_dx = 0, best_dy = 0;
            for (int dy = -search_radius; dy <= search_radius; ++dy)
                for (int dx = -search_radius; dx <= search_radius; ++dx) {
                    if (x0 + dx < 0 || y0 + dy < 0 || x1 + dx > prev.width ||
                        y1 + dy > prev.height)
                        continue;
                    double sad = 0.0;
                    for (int y = y0; y < y1; ++y)
                        for (int x = x0; x < x1; ++x)
                            sad += std::fabs(curr.at(x, y) - prev.at(x + dx, y + dy));
                    const int mag2 = dx * dx + dy * dy;
                    // Ties: smaller displacement, then scan order (first wins).
                    if (sad < best_sad || (sad == best_sad && mag2 < best_mag2)) {
                        best_sad = sad;
                        best_mag2 = mag2;
                        best_dx = dx;
                        best_dy = dy;
                    }
                }
            // Report the motion vector prev -> curr: a block found at offset
            // (dx,dy) in prev has moved by (-dx,-dy).
            flow.dx.at(bx, by) = -best_dx;
            flow.dy.at(bx, by) = -best_dy;
        }
    return flow;
}

Field2D motion_feature(const Field2D* prev_luma, const Field2D& curr_luma,
                       const ChannelParams& params) {
    if (prev_luma == nullptr) return Field2D(curr_luma.width, curr_luma.height);
    require_same_size(*prev_luma, curr_luma, "motion_feature");

    const auto residual_of = [&](const Field2D& f) {
        const double range = field_max(f) - field_min(f);
        const Field2D smooth =
            bilateral_filter(f, params.bilateral_sigma_spatial_px,
                             params.bilateral_range_factor * range);
        Field2D r(f.width, f.height);
        for (std::size_t i = 0; i < f.size(); ++i) r.v[i] = f.v[i] - smooth.v[i];
        return r;
    };

    const Field2D prev_res = residual_of(*prev_luma);
    const Field2D curr_res = residual_of(curr_luma);
    const FlowField flow =
        block_matching_flow(prev_res, curr_res, params.block_size, params.search_radius);

    Field2D magnitude(flow.dx.width, flow.dx.height);
    for (std::size_t i = 0; i < magnitude.size(); ++i)
        magnitude.v[i] = std::hypot(flow.dx.v[i], flow.dy.v[i]);
    return normalize01(resize_bilinear(magnitude, curr_luma.width, curr_luma.height));
}

}  // namespace lbvs
