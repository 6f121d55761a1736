#pragma once

#include <array>
#include <string>
#include <vector>

#include "lbvs/fdm.hpp"
#include "lbvs/random_forest.hpp"

namespace lbvs {

enum class FusionKind {
    Average,
    Multiplication,
    Maximum,
    SumPlusProduct,
    Gnlns,
    LmsWeighted,
    StdWeighted,
    RandomForest,
};

/// A fusion scheme plus its payload: LmsWeighted carries a weight vector,
/// RandomForest a trained model (not owned).
struct FusionMethod {
    FusionKind kind = FusionKind::Average;
    std::array<double, 4> weights{};              // LmsWeighted only
    const RandomForestModel* model = nullptr;     // RandomForest only

    static FusionMethod average() { return {FusionKind::Average, {}, nullptr}; }
    static FusionMethod multiplication() { return {FusionKind::Multiplication, {}, nullptr}; }
    static FusionMethod maximum() { return {FusionKind::Maximum, {}, nullptr}; }
    static FusionMethod sum_plus_product() { return {FusionKind::SumPlusProduct, {}, nullptr}; }
    static FusionMethod gnlns() { return {FusionKind::Gnlns, {}, nullptr}; }
    static FusionMethod lms_weighted(const std::array<double, 4>& w) {
        return {FusionKind::LmsWeighted, w, nullptr};
    }
    static FusionMethod std_weighted() { return {FusionKind::StdWeighted, {}, nullptr}; }
    static FusionMethod random_forest(const RandomForestModel& m) {
        return {FusionKind::RandomForest, {}, &m};
    }
};

extern const std::array<const char*, 8> kFusionMethodNames;
FusionKind fusion_kind_from_name(const std::string& name);
const char* fusion_kind_name(FusionKind kind);

/// Peak-emphasis normalization: normalize01, locate 8-neighborhood local
/// maxima above 0.05, and scale the map by (M - mean of non-global maxima)^2
/// where M is the global maximum.
Field2D gnlns_normalize(const Field2D& f);

/// Ridge-regularized least squares (lambda = 1e-6) of target on the four
/// feature values; one global weight vector, possibly with negative entries.
std::array<double, 4> fit_lms_weights(const std::vector<PixelSample>& samples);

/// Applies the fusion scheme elementwise and normalize01's the result.
Field2D fuse_fixed(const FusionMethod& method, const FeatureStack& stack, int jobs = 1);

/// Deterministic training-set subsampling for one video: ceil(fraction * N)
/// frames at evenly spaced indices, then every stride-th pixel in scan order.
/// The seed is accepted for interface stability; the default selection is
/// fully deterministic and does not consume it.
std::vector<PixelSample> sample_pixels(
    const std::vector<std::pair<const FeatureStack*, const FixationDensityMap*>>& frames,
    double frame_fraction, int pixel_stride, std::uint64_t seed = 0,
    int num_features = kNumFeatures);

/// Frame indices chosen by the fraction rule (exposed for inspection/tests).
std::vector<int> evenly_spaced_indices(int total, double fraction);

}  // namespace lbvs
