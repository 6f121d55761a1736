#include "lbvs/pyramid.hpp"

#include <cmath>

namespace lbvs {

namespace {

const double kBinomial5[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

Field2D binomial_smooth(const Field2D& f) {
    Field2D tmp(f.width, f.height);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
            double acc = 0.0;
            for (int k = -2; k <= 2; ++k) acc += kBinomial5[k + 2] * f.at_clamped(x + k, y);
            tmp.at(x, y) = acc;
        }
    Field2D out(f.width, f.height);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
            double acc = 0.0;
            for (int k = -2; k <= 2; ++k) acc += kBinomial5[k + 2] * tmp.at_clamped(x, y + k);
            out.at(x, y) = acc;
        }
    return out;
}

Field2D decimate2(const Field2D& f) {
    const int w = (f.width + 1) / 2;
    const int h = (f.height + 1) / 2;
    Field2D out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out.at(x, y) = f.at(2 * x, 2 * y);
    return out;
}

}  // namespace

int max_pyramid_levels(int width, int height) {
    int levels = 1;
    int m = std::min(width, height);
    while (m >= 2) {
        m /= 2;
        ++levels;
    }
    return levels;
}

Pyramid gaussian_pyramid(const Field2D& f, int num_levels) {
    if (num_levels < 1) throw DataError("gaussian_pyramid: num_levels must be >= 1");
    if (num_levels > max_pyramid_levels(f.width, f.height))
        throw DataError("gaussian_pyramid: " + std::to_string(num_levels) +
                        " levels is too many for a " + std::to_string(f.width) + "x" +
                        std::to_string(f.height) + " field");
    if (!field_all_finite(f)) throw DataError("gaussian_pyramid: non-finite input");
    Pyramid p;
    p.levels.reserve(static_cast<std::size_t>(num_levels));
    p.levels.push_back(f);
    for (int k = 1; k < num_levels; ++k)
        p.levels.push_back(decimate2(binomial_smooth(p.levels.back())));
    return p;
}

Field2D center_surround(const Pyramid& p, int c, int delta) {
    if (c < 0 || delta < 1 || c + delta >= p.level_count())
        throw DataError("center_surround: invalid level indices");
    const Field2D& center = p.level(c);
    const Field2D surround = resize_bilinear(p.level(c + delta), center.width, center.height);
    Field2D out(center.width, center.height);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.v[i] = std::fabs(center.v[i] - surround.v[i]);
    return out;
}

Field2D across_scale_combine(const std::vector<Field2D>& maps, int out_w, int out_h) {
    if (maps.empty()) throw DataError("across_scale_combine: empty map list");
    Field2D acc(out_w, out_h);
    for (const Field2D& m : maps) {
        const Field2D resized = resize_bilinear(m, out_w, out_h);
        for (std::size_t i = 0; i < acc.size(); ++i) acc.v[i] += resized.v[i];
    }
    return normalize01(acc);
}

}  // namespace lbvs
