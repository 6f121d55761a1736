#include "lbvs/field2d.hpp"

#include <algorithm>
#include <cmath>

namespace lbvs {

void require_same_size(const Field2D& a, const Field2D& b, const std::string& what) {
    if (!a.same_size(b)) {
        throw DataError(what + ": dimension mismatch " + std::to_string(a.width) + "x" +
                        std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                        std::to_string(b.height));
    }
}

double field_min(const Field2D& f) { return *std::min_element(f.v.begin(), f.v.end()); }
double field_max(const Field2D& f) { return *std::max_element(f.v.begin(), f.v.end()); }

double field_sum(const Field2D& f) {
    double s = 0.0;
    for (double x : f.v) s += x;
    return s;
}

double field_mean(const Field2D& f) { return field_sum(f) / static_cast<double>(f.size()); }

double field_stddev(const Field2D& f) {
    const double m = field_mean(f);
    double acc = 0.0;
    for (double x : f.v) {
        const double d = x - m;
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(f.size()));
}

bool field_all_finite(const Field2D& f) {
    for (double x : f.v)
        if (!std::isfinite(x)) return false;
    return true;
}

Field2D normalize01(const Field2D& f) {
    const double lo = field_min(f);
    const double hi = field_max(f);
    Field2D out(f.width, f.height);
    if (hi == lo) return out;
    const double inv = 1.0 / (hi - lo);
    for (std::size_t i = 0; i < f.size(); ++i) out.v[i] = (f.v[i] - lo) * inv;
    return out;
}

Field2D resize_bilinear(const Field2D& f, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1) throw DataError("resize_bilinear: output dimensions must be >= 1");
    if (out_w == f.width && out_h == f.height) return f;
    Field2D out(out_w, out_h);
    const double sx = static_cast<double>(f.width) / out_w;
    const double sy = static_cast<double>(f.height) / out_h;
    for (int y = 0; y < out_h; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(f.height - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, f.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < out_w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(f.width - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, f.width - 1);
            const double wx = fx - x0;
            const double top = f.at(x0, y0) * (1.0 - wx) + f.at(x1, y0) * wx;
            const double bot = f.at(x0, y1) * (1.0 - wx) + f.at(x1, y1) * wx;
            out.at(x, y) = top * (1.0 - wy) + bot * wy;
        }
    }
    return out;
}

Field2D downsample_area(const Field2D& f, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1) throw DataError("downsample_area: output dimensions must be >= 1");
    if (out_w == f.width && out_h == f.height) return f;
    Field2D out(out_w, out_h);
    const double sx = static_cast<double>(f.width) / out_w;
    const double sy = static_cast<double>(f.height) / out_h;
    for (int oy = 0; oy < out_h; ++oy) {
        const double y0 = oy * sy, y1 = (oy + 1) * sy;
        const int iy0 = static_cast<int>(std::floor(y0));
        const int iy1 = std::min(static_cast<int>(std::ceil(y1)), f.height);
        for (int ox = 0; ox < out_w; ++ox) {
            const double x0 = ox * sx, x1 = (ox + 1) * sx;
            const int ix0 = static_cast<int>(std::floor(x0));
            const int ix1 = std::min(static_cast<int>(std::ceil(x1)), f.width);
            double acc = 0.0;
            for (int iy = iy0; iy < iy1; ++iy) {
                const double hy = std::min<double>(iy + 1, y1) - std::max<double>(iy, y0);
                for (int ix = ix0; ix < ix1; ++ix) {
                    const double hx = std::min<double>(ix + 1, x1) - std::max<double>(ix, x0);
                    acc += f.at(ix, iy) * hx * hy;
                }
            }
            out.at(ox, oy) = acc / (sx * sy);
        }
    }
    return out;
}

}  // namespace lbvs
