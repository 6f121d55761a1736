#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lbvs {

/// Error raised for malformed input data (files, logs, dimension mismatches).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A W x H scalar raster stored row-major, top-left origin.
/// Used for feature maps, saliency maps and fixation density maps.
struct Field2D {
    int width = 0;
    int height = 0;
    std::vector<double> v;

    Field2D() = default;
    Field2D(int w, int h, double fill = 0.0)
        : width(w), height(h), v(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {
        if (w < 1 || h < 1) throw DataError("Field2D: dimensions must be >= 1");
    }

    std::size_t size() const { return v.size(); }

    double& at(int x, int y) { return v[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return v[static_cast<std::size_t>(y) * width + x]; }

    /// at() with coordinates clamped into range; used for edge-replicate borders.
    double at_clamped(int x, int y) const {
        if (x < 0) x = 0;
        if (x >= width) x = width - 1;
        if (y < 0) y = 0;
        if (y >= height) y = height - 1;
        return at(x, y);
    }

    bool same_size(const Field2D& o) const { return width == o.width && height == o.height; }
};

void require_same_size(const Field2D& a, const Field2D& b, const std::string& what);

double field_min(const Field2D& f);
double field_max(const Field2D& f);
double field_mean(const Field2D& f);
/// Population standard deviation over all pixels.
double field_stddev(const Field2D& f);
double field_sum(const Field2D& f);
bool field_all_finite(const Field2D& f);

/// (f - min) / (max - min); a constant field maps to all zeros.
Field2D normalize01(const Field2D& f);

/// Bilinear resize with pixel-center alignment and clamped sampling.
Field2D resize_bilinear(const Field2D& f, int out_w, int out_h);

/// Mass-preserving downsample: each output cell averages the source pixels
/// it covers, with fractional box overlap at cell boundaries.
Field2D downsample_area(const Field2D& f, int out_w, int out_h);

}  // namespace lbvs
