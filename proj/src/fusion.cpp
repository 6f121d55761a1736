#include "lbvs/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lbvs {

const std::array<const char*, 8> kFusionMethodNames = {
    "average", "multiplication", "maximum", "sum-plus-product",
    "gnlns",   "lms",            "std-weighted", "rf"};

FusionKind fusion_kind_from_name(const std::string& name) {
    for (std::size_t i = 0; i < kFusionMethodNames.size(); ++i)
        if (name == kFusionMethodNames[i]) return static_cast<FusionKind>(i);
    throw DataError("unknown fusion method '" + name + "'");
}

const char* fusion_kind_name(FusionKind kind) {
    return kFusionMethodNames[static_cast<std::size_t>(kind)];
}

Field2D gnlns_normalize(const Field2D& f) {
    if (!field_all_finite(f)) throw DataError("gnlns_normalize: non-finite input");
    Field2D n = normalize01(f);

    constexpr double kPeakThreshold = 0.05;
    std::vector<double> maxima;
    for (int y = 0; y < n.height; ++y)
        for (int x = 0; x < n.width; ++x) {
            const double value = n.at(x, y);
            if (value <= kPeakThreshold) continue;
            bool is_max = true;
            for (int dy = -1; dy <= 1 && is_max; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= n.width || ny >= n.height) continue;
                    if (n.at(nx, ny) > value) {
                        is_max = false;
                        break;
                    }
                }
            if (is_max) maxima.push_back(value);
        }

    const double global_max = field_max(n);  // 1 unless the field is all zero
    // Mean of local maxima excluding one instance of the global maximum.
    double mean_other = 0.0;
    if (!maxima.empty()) {
        const auto it = std::max_element(maxima.begin(), maxima.end());
        const double sum = std::accumulate(maxima.begin(), maxima.end(), 0.0) - *it;
        if (maxima.size() > 1) mean_other = sum / static_cast<double>(maxima.size() - 1);
    }
    const double weight = (global_max - mean_other) * (global_max - mean_other);
    for (double& v : n.v) v *= weight;
    return n;
}

std::array<double, 4> fit_lms_weights(const std::vector<PixelSample>& samples) {
    if (samples.size() < 4) throw DataError("fit_lms_weights: need at least 4 samples");
    constexpr double kRidge = 1e-6;
    double ata[4][4] = {};
    double atb[4] = {};
    for (const PixelSample& s : samples) {
        if (s.features.size() < 4) throw DataError("fit_lms_weights: need 4 features");
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) ata[i][j] += s.features[i] * s.features[j];
            atb[i] += s.features[i] * s.target;
        }
    }
    for (int i = 0; i < 4; ++i) ata[i][i] += kRidge;

    // Gaussian elimination with partial pivoting on the 4x4 normal equations.
    double a[4][5];
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) a[i][j] = ata[i][j];
        a[i][4] = atb[i];
    }
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        std::swap_ranges(a[col], a[col] + 5, a[pivot]);
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double factor = a[r][col] / a[col][col];
            for (int j = col; j < 5; ++j) a[r][j] -= factor * a[col][j];
        }
    }
    std::array<double, 4> w{};
    for (int i = 0; i < 4; ++i) w[static_cast<std::size_t>(i)] = a[i][4] / a[i][i];
    return w;
}

Field2D fuse_fixed(const FusionMethod& method, const FeatureStack& stack, int jobs) {
    for (int j = 1; j < kNumFeatures; ++j)
        require_same_size(stack.map(0), stack.map(j), "fuse_fixed");
    const int w = stack.motion.width, h = stack.motion.height;
    const std::size_t n = stack.motion.size();
    Field2D out(w, h);

    switch (method.kind) {
        case FusionKind::Average:
            for (std::size_t i = 0; i < n; ++i)
                out.v[i] = 0.25 * (stack.motion.v[i] + stack.color.v[i] + stack.intensity.v[i] +
                                   stack.orientation.v[i]);
            break;
        case FusionKind::Multiplication:
            for (std::size_t i = 0; i < n; ++i)
                out.v[i] = stack.motion.v[i] * stack.color.v[i] * stack.intensity.v[i] *
                           stack.orientation.v[i];
            break;
        case FusionKind::Maximum:
            for (std::size_t i = 0; i < n; ++i)
                out.v[i] = std::max({stack.motion.v[i], stack.color.v[i], stack.intensity.v[i],
                                     stack.orientation.v[i]});
            break;
        case FusionKind::SumPlusProduct:
            for (std::size_t i = 0; i < n; ++i) {
                const double sum = stack.motion.v[i] + stack.color.v[i] + stack.intensity.v[i] +
                                   stack.orientation.v[i];
                const double prod = stack.motion.v[i] * stack.color.v[i] * stack.intensity.v[i] *
                                    stack.orientation.v[i];
                out.v[i] = sum + prod;
            }
            break;
        case FusionKind::Gnlns: {
            for (int j = 0; j < kNumFeatures; ++j) {
                const Field2D g = gnlns_normalize(stack.map(j));
                for (std::size_t i = 0; i < n; ++i) out.v[i] += g.v[i];
            }
            break;
        }
        case FusionKind::LmsWeighted: {
            for (double wj : method.weights)
                if (!std::isfinite(wj)) throw DataError("fuse_fixed: non-finite LMS weight");
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (int j = 0; j < kNumFeatures; ++j)
                    acc += method.weights[static_cast<std::size_t>(j)] * stack.map(j).v[i];
                out.v[i] = std::max(0.0, acc);
            }
            break;
        }
        case FusionKind::StdWeighted: {
            std::array<double, 4> sigma{};
            double total = 0.0;
            for (int j = 0; j < kNumFeatures; ++j) {
                sigma[static_cast<std::size_t>(j)] = field_stddev(stack.map(j));
                total += sigma[static_cast<std::size_t>(j)];
            }
            if (total == 0.0) {
                return fuse_fixed(FusionMethod::average(), stack, jobs);
            }
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (int j = 0; j < kNumFeatures; ++j)
                    acc += sigma[static_cast<std::size_t>(j)] / total * stack.map(j).v[i];
                out.v[i] = acc;
            }
            break;
        }
        case FusionKind::RandomForest:
            if (method.model == nullptr) throw DataError("fuse_fixed: missing RF model");
            return rf_predict(*method.model, stack, jobs);
    }
    return normalize01(out);
}

std::vector<int> evenly_spaced_indices(int total, double fraction) {
    if (total < 1) throw DataError("evenly_spaced_indices: empty input");
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw DataError("evenly_spaced_indices: fraction must be in (0,1]");
    const int count = static_cast<int>(std::ceil(fraction * total));
    std::vector<int> indices(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        indices[static_cast<std::size_t>(i)] = static_cast<int>(
            static_cast<long long>(i) * total / count);
    return indices;
}

std::vector<PixelSample> sample_pixels(
    const std::vector<std::pair<const FeatureStack*, const FixationDensityMap*>>& frames,
    double frame_fraction, int pixel_stride, std::uint64_t /*seed*/, int num_features) {
    if (frames.empty()) throw DataError("sample_pixels: empty frame list");
    if (pixel_stride < 1) throw DataError("sample_pixels: stride must be >= 1");

    std::vector<PixelSample> samples;
    for (int k : evenly_spaced_indices(static_cast<int>(frames.size()), frame_fraction)) {
        const FeatureStack& stack = *frames[static_cast<std::size_t>(k)].first;
        const FixationDensityMap& fdm = *frames[static_cast<std::size_t>(k)].second;
        for (int j = 0; j < kNumFeatures; ++j)
            require_same_size(stack.map(j), fdm.field, "sample_pixels");
        const int w = stack.motion.width, h = stack.motion.height;
        for (std::size_t i = 0; i < stack.motion.size(); i += static_cast<std::size_t>(pixel_stride)) {
            const int x = static_cast<int>(i % static_cast<std::size_t>(w));
            const int y = static_cast<int>(i / static_cast<std::size_t>(w));
            PixelSample s;
            s.features.resize(static_cast<std::size_t>(num_features));
            for (int j = 0; j < kNumFeatures; ++j)
                s.features[static_cast<std::size_t>(j)] = stack.map(j).at(x, y);
            if (num_features > kNumFeatures) {
                s.features[kNumFeatures] = w > 1 ? static_cast<double>(x) / (w - 1) : 0.0;
                s.features[kNumFeatures + 1] = h > 1 ? static_cast<double>(y) / (h - 1) : 0.0;
            }
            s.target = fdm.field.at(x, y);
            samples.push_back(std::move(s));
        }
    }
    return samples;
}

}  // namespace lbvs
