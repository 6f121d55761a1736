#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lbvs/features.hpp"
#include "lbvs/field2d.hpp"

namespace lbvs {

/// One training row: the per-pixel feature vector and its fixation-density
/// target, all components in [0,1].
struct PixelSample {
    std::vector<double> features;
    double target = 0.0;
};

/// Flat binary regression tree. Internal nodes carry (feature, threshold,
/// left, right); leaves carry the mean target of their training rows.
struct RegressionTree {
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;  // leaf payload
    };
    std::vector<Node> nodes;

    double predict(const double* features) const {
        int idx = 0;
        while (nodes[static_cast<std::size_t>(idx)].feature >= 0) {
            const Node& n = nodes[static_cast<std::size_t>(idx)];
            idx = features[n.feature] <= n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(idx)].value;
    }
};

struct RandomForestParams {
    int num_trees = 100;
    double bootstrap_ratio = 1.0 / 3.0;  // with replacement
    int min_leaf_samples = 10;
    int features_per_split = 2;
    std::uint64_t seed = 1;
    /// Number of features each sample carries (4, or 6 with pixel coords).
    int num_features = kNumFeatures;
};

struct RandomForestModel {
    RandomForestParams params;
    std::vector<RegressionTree> trees;
    double oob_error = 0.0;               // MSE over out-of-bag predictions
    std::vector<double> importances;      // max-normalized, one per feature

    /// Bootstrap multiplicity per (tree, sample); retained from training so
    /// OOB statistics can be recomputed. Not serialized; empty after load.
    std::vector<std::vector<std::uint32_t>> bag_counts;

    bool has_bag_counts() const { return !bag_counts.empty(); }
    double predict_one(const double* features) const;
};

/// Trains the forest: per-tree bootstrap of ratio*N rows (with replacement),
/// variance-reduction splits over a random feature subset with thresholds at
/// midpoints of sorted unique values, recursion stopping at min_leaf_samples
/// or zero variance. Deterministic given params.seed, regardless of `jobs`.
RandomForestModel rf_train(const std::vector<PixelSample>& samples,
                           const RandomForestParams& params, int jobs = 1);

/// Mean tree output per pixel over the stack's 4-vectors, then normalize01.
Field2D rf_predict(const RandomForestModel& model, const FeatureStack& stack, int jobs = 1);

/// Raw (un-normalized) mean tree output per pixel.
Field2D rf_predict_raw(const RandomForestModel& model, const FeatureStack& stack, int jobs = 1);

/// OOB permutation importance: mean over trees of (OOB MSE with feature j
/// permuted - OOB MSE), floored at 0 and divided by the maximum so the top
/// feature scores exactly 1 (all-zero kept as zeros). Requires bag counts.
std::vector<double> rf_oob_importance(const RandomForestModel& model,
                                      const std::vector<PixelSample>& samples);

/// Versioned JSON serialization ("lbvs-rf/1"); round-trips exactly.
std::string rf_to_json(const RandomForestModel& model);
RandomForestModel rf_from_json(const std::string& text);
void rf_save(const RandomForestModel& model, const std::string& path);
RandomForestModel rf_load(const std::string& path);

}  // namespace lbvs
