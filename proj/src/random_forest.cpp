#include "lbvs/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "lbvs/parallel.hpp"
#include "lbvs/rng.hpp"

namespace lbvs {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kZeroVarianceEps = 1e-24;

void check_samples(const std::vector<PixelSample>& samples, int num_features) {
    for (const PixelSample& s : samples) {
        if (static_cast<int>(s.features.size()) != num_features)
            throw DataError("rf: sample feature count != " + std::to_string(num_features));
        for (double f : s.features)
            if (!(f >= 0.0 && f <= 1.0)) throw DataError("rf: feature outside [0,1]");
        if (!(s.target >= 0.0 && s.target <= 1.0)) throw DataError("rf: target outside [0,1]");
    }
}

struct TreeBuilder {
    const std::vector<PixelSample>& samples;
    const RandomForestParams& params;
    Rng rng;
    RegressionTree tree;

    // Scratch reused across nodes.
    std::vector<std::pair<double, double>> sorted;  // (feature value, target)

    TreeBuilder(const std::vector<PixelSample>& s, const RandomForestParams& p,
                std::uint64_t tree_seed)
        : samples(s), params(p), rng(tree_seed) {}

    int make_leaf(const std::vector<int>& idx, int begin, int end) {
        double sum = 0.0;
        for (int i = begin; i < end; ++i) sum += samples[static_cast<std::size_t>(idx[i])].target;
        RegressionTree::Node leaf;
        leaf.feature = -1;
        leaf.value = sum / (end - begin);
        tree.nodes.push_back(leaf);
        return static_cast<int>(tree.nodes.size()) - 1;
    }

    /// Draws `features_per_split` distinct feature indices, returned sorted so
    /// the split search order does not depend on the draw order.
    std::vector<int> sample_feature_subset() {
        std::vector<int> all(static_cast<std::size_t>(params.num_features));
        std::iota(all.begin(), all.end(), 0);
        const int k = std::min(params.features_per_split, params.num_features);
        for (int i = 0; i < k; ++i) {
            const auto j = i + static_cast<int>(rng.next_below(all.size() - i));
            std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
        }
        all.resize(static_cast<std::size_t>(k));
        std::sort(all.begin(), all.end());
        return all;
    }

    int build(std::vector<int>& idx, int begin, int end) {
        const int n = end - begin;
        double sum = 0.0, sum2 = 0.0;
        for (int i = begin; i < end; ++i) {
            const double t = samples[static_cast<std::size_t>(idx[i])].target;
            sum += t;
            sum2 += t * t;
        }
        const double sse = sum2 - sum * sum / n;
        if (n < 2 * params.min_leaf_samples || sse <= kZeroVarianceEps)
            return make_leaf(idx, begin, end);

        int best_feature = -1, best_left_count = 0;
        double best_threshold = 0.0;
        double best_children_sse = std::numeric_limits<double>::infinity();

        for (int f : sample_feature_subset()) {
            sorted.clear();
            sorted.reserve(static_cast<std::size_t>(n));
            for (int i = begin; i < end; ++i) {
                const PixelSample& s = samples[static_cast<std::size_t>(idx[i])];
                sorted.emplace_back(s.features[static_cast<std::size_t>(f)], s.target);
            }
            std::sort(sorted.begin(), sorted.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            double left_sum = 0.0, left_sum2 = 0.0;
            for (int i = 0; i < n - 1; ++i) {
                left_sum += sorted[static_cast<std::size_t>(i)].second;
                left_sum2 += sorted[static_cast<std::size_t>(i)].second *
                             sorted[static_cast<std::size_t>(i)].second;
                // Candidate boundaries sit between distinct values only.
                if (sorted[static_cast<std::size_t>(i)].first ==
                    sorted[static_cast<std::size_t>(i) + 1].first)
                    continue;
                const int nl = i + 1, nr = n - nl;
                if (nl < params.min_leaf_samples || nr < params.min_leaf_samples) continue;
                const double right_sum = sum - left_sum;
                const double right_sum2 = sum2 - left_sum2;
                const double children_sse = (left_sum2 - left_sum * left_sum / nl) +
                                            (right_sum2 - right_sum * right_sum / nr);
                if (children_sse < best_children_sse) {
                    best_children_sse = children_sse;
                    best_feature = f;
                    best_threshold = 0.5 * (sorted[static_cast<std::size_t>(i)].first +
                                            sorted[static_cast<std::size_t>(i) + 1].first);
                    best_left_count = nl;
                }
            }
        }
        if (best_feature < 0) return make_leaf(idx, begin, end);

        const auto mid_it = std::partition(
            idx.begin() + begin, idx.begin() + end, [&](int i) {
                return samples[static_cast<std::size_t>(i)]
                           .features[static_cast<std::size_t>(best_feature)] <= best_threshold;
            });
        const int mid = static_cast<int>(mid_it - idx.begin());
        // partition must agree with the sorted scan
        if (mid - begin != best_left_count || mid == begin || mid == end)
            return make_leaf(idx, begin, end);

        RegressionTree::Node node;
        node.feature = best_feature;
        node.threshold = best_threshold;
        tree.nodes.push_back(node);
        const int self = static_cast<int>(tree.nodes.size()) - 1;
        tree.nodes[static_cast<std::size_t>(self)].left = build(idx, begin, mid);
        tree.nodes[static_cast<std::size_t>(self)].right = build(idx, mid, end);
        return self;
    }
};

/// Prediction on an out-of-bag row set, optionally with one feature's values
/// permuted among those rows.
double oob_mse(const RegressionTree& tree, const std::vector<PixelSample>& samples,
               const std::vector<int>& oob, int permuted_feature,
               const std::vector<int>& permutation) {
    double acc = 0.0;
    std::vector<double> features;
    for (std::size_t k = 0; k < oob.size(); ++k) {
        const PixelSample& s = samples[static_cast<std::size_t>(oob[k])];
        double pred;
        if (permuted_feature < 0) {
            pred = tree.predict(s.features.data());
        } else {
            features = s.features;
            features[static_cast<std::size_t>(permuted_feature)] =
                samples[static_cast<std::size_t>(oob[permutation[k]])]
                    .features[static_cast<std::size_t>(permuted_feature)];
            pred = tree.predict(features.data());
        }
        const double d = pred - s.target;
        acc += d * d;
    }
    return acc / static_cast<double>(oob.size());
}

std::vector<double> stack_features(const FeatureStack& stack, int num_features, int x, int y) {
    std::vector<double> f(static_cast<std::size_t>(num_features));
    for (int j = 0; j < kNumFeatures; ++j) f[static_cast<std::size_t>(j)] = stack.map(j).at(x, y);
    if (num_features > kNumFeatures) {
        const Field2D& m = stack.motion;
        f[kNumFeatures] = m.width > 1 ? static_cast<double>(x) / (m.width - 1) : 0.0;
        f[kNumFeatures + 1] = m.height > 1 ? static_cast<double>(y) / (m.height - 1) : 0.0;
    }
    return f;
}

}  // namespace

double RandomForestModel::predict_one(const double* features) const {
    double acc = 0.0;
    for (const RegressionTree& t : trees) acc += t.predict(features);
    return acc / static_cast<double>(trees.size());
}

RandomForestModel rf_train(const std::vector<PixelSample>& samples,
                           const RandomForestParams& params, int jobs) {
    if (params.num_trees < 1) throw DataError("rf_train: num_trees must be >= 1");
    if (params.min_leaf_samples < 1) throw DataError("rf_train: min_leaf_samples must be >= 1");
    if (!(params.bootstrap_ratio > 0.0 && params.bootstrap_ratio <= 1.0))
        throw DataError("rf_train: bootstrap_ratio must be in (0,1]");
    if (params.features_per_split < 1)
        throw DataError("rf_train: features_per_split must be >= 1");
    const std::size_t n = samples.size();
    if (n < static_cast<std::size_t>(10) * static_cast<std::size_t>(params.min_leaf_samples))
        throw DataError("rf_train: too few samples (" + std::to_string(n) + ", need >= " +
                        std::to_string(10 * params.min_leaf_samples) + ")");
    check_samples(samples, params.num_features);

    RandomForestModel model;
    model.params = params;
    model.trees.resize(static_cast<std::size_t>(params.num_trees));
    model.bag_counts.assign(static_cast<std::size_t>(params.num_trees),
                            std::vector<std::uint32_t>(n, 0));

    const auto bootstrap_size = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(params.bootstrap_ratio * static_cast<double>(n))));

    parallel_for(static_cast<std::size_t>(params.num_trees), jobs, [&](std::size_t t) {
        TreeBuilder builder(samples, params, derive_seed(params.seed, t));
        std::vector<int> idx(bootstrap_size);
        for (std::size_t i = 0; i < bootstrap_size; ++i) {
            const auto pick = static_cast<int>(builder.rng.next_below(n));
            idx[i] = pick;
            ++model.bag_counts[t][static_cast<std::size_t>(pick)];
        }
        builder.tree.nodes.reserve(2 * bootstrap_size / params.min_leaf_samples + 4);
        builder.build(idx, 0, static_cast<int>(bootstrap_size));
        model.trees[t] = std::move(builder.tree);
    });

    // OOB error: each sample scored by the trees whose bootstrap excluded it.
    double acc = 0.0;
    std::size_t scored = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double pred = 0.0;
        int voters = 0;
        for (std::size_t t = 0; t < model.trees.size(); ++t) {
            if (model.bag_counts[t][i] == 0) {
                pred += model.trees[t].predict(samples[i].features.data());
                ++voters;
            }
        }
        if (voters == 0) continue;
        const double d = pred / voters - samples[i].target;
        acc += d * d;
        ++scored;
    }
    model.oob_error = scored > 0 ? acc / static_cast<double>(scored) : 0.0;
    model.importances = rf_oob_importance(model, samples);
    return model;
}

std::vector<double> rf_oob_importance(const RandomForestModel& model,
                                      const std::vector<PixelSample>& samples) {
    if (!model.has_bag_counts())
        throw DataError("rf_oob_importance: bootstrap membership not available "
                        "(model was deserialized, not trained)");
    const int k = model.params.num_features;
    std::vector<double> raw(static_cast<std::size_t>(k), 0.0);
    int trees_with_oob = 0;

    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        std::vector<int> oob;
        for (std::size_t i = 0; i < samples.size(); ++i)
            if (model.bag_counts[t][i] == 0) oob.push_back(static_cast<int>(i));
        if (oob.empty()) continue;
        ++trees_with_oob;

        const double baseline = oob_mse(model.trees[t], samples, oob, -1, {});
        for (int j = 0; j < k; ++j) {
            Rng rng(derive_seed(model.params.seed,
                                0x1000000ULL + t * static_cast<std::uint64_t>(k) +
                                    static_cast<std::uint64_t>(j)));
            std::vector<int> perm(oob.size());
            std::iota(perm.begin(), perm.end(), 0);
            for (std::size_t i = perm.size(); i > 1; --i)
                std::swap(perm[i - 1], perm[rng.next_below(i)]);
            raw[static_cast<std::size_t>(j)] +=
                oob_mse(model.trees[t], samples, oob, j, perm) - baseline;
        }
    }
    if (trees_with_oob == 0)
        throw DataError("rf_oob_importance: no tree has out-of-bag samples");

    double max_raw = 0.0;
    for (double& r : raw) {
        r = std::max(0.0, r / trees_with_oob);
        max_raw = std::max(max_raw, r);
    }
    if (max_raw > 0.0)
        for (double& r : raw) r /= max_raw;
    return raw;
}

Field2D rf_predict_raw(const RandomForestModel& model, const FeatureStack& stack, int jobs) {
    if (model.trees.empty()) throw DataError("rf_predict: empty model");
    for (int j = 1; j < kNumFeatures; ++j)
        require_same_size(stack.map(0), stack.map(j), "rf_predict");
    const int w = stack.motion.width, h = stack.motion.height;
    Field2D out(w, h);
    parallel_for(static_cast<std::size_t>(h), jobs, [&](std::size_t row) {
        const int y = static_cast<int>(row);
        for (int x = 0; x < w; ++x) {
            const auto f = stack_features(stack, model.params.num_features, x, y);
            out.at(x, y) = model.predict_one(f.data());
        }
    });
    return out;
}

Field2D rf_predict(const RandomForestModel& model, const FeatureStack& stack, int jobs) {
    return normalize01(rf_predict_raw(model, stack, jobs));
}

std::string rf_to_json(const RandomForestModel& model) {
    ordered_json doc;
    doc["format"] = "lbvs-rf/1";
    doc["params"] = {{"num_trees", model.params.num_trees},
                     {"bootstrap_ratio", model.params.bootstrap_ratio},
                     {"min_leaf_samples", model.params.min_leaf_samples},
                     {"features_per_split", model.params.features_per_split},
                     {"seed", model.params.seed},
                     {"num_features", model.params.num_features}};
    doc["oob_error"] = model.oob_error;
    doc["importances"] = model.importances;
    ordered_json trees = ordered_json::array();
    for (const RegressionTree& t : model.trees) {
        ordered_json nodes = ordered_json::array();
        for (const auto& n : t.nodes) {
            if (n.feature < 0)
                nodes.push_back(ordered_json::array({-1, n.value}));
            else
                nodes.push_back(ordered_json::array({n.feature, n.threshold, n.left, n.right}));
        }
        trees.push_back(std::move(nodes));
    }
    doc["trees"] = std::move(trees);
    return doc.dump();
}

RandomForestModel rf_from_json(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw DataError(std::string("rf_from_json: invalid JSON: ") + e.what());
    }
    if (!doc.contains("format") || doc["format"] != "lbvs-rf/1")
        throw DataError("rf_from_json: unsupported model format");
    RandomForestModel model;
    const auto& p = doc.at("params");
    model.params.num_trees = p.at("num_trees").get<int>();
    model.params.bootstrap_ratio = p.at("bootstrap_ratio").get<double>();
    model.params.min_leaf_samples = p.at("min_leaf_samples").get<int>();
    model.params.features_per_split = p.at("features_per_split").get<int>();
    model.params.seed = p.at("seed").get<std::uint64_t>();
    model.params.num_features = p.at("num_features").get<int>();
    model.oob_error = doc.at("oob_error").get<double>();
    model.importances = doc.at("importances").get<std::vector<double>>();
    for (const auto& jt : doc.at("trees")) {
        RegressionTree tree;
        for (const auto& jn : jt) {
            RegressionTree::Node n;
            const int tag = jn.at(0).get<int>();
            if (tag < 0) {
                n.feature = -1;
                n.value = jn.at(1).get<double>();
            } else {
                n.feature = tag;
                n.threshold = jn.at(1).get<double>();
                n.left = jn.at(2).get<int>();
                n.right = jn.at(3).get<int>();
            }
            tree.nodes.push_back(n);
        }
        if (tree.nodes.empty()) throw DataError("rf_from_json: empty tree");
        model.trees.push_back(std::move(tree));
    }
    if (model.trees.empty()) throw DataError("rf_from_json: model has no trees");
    return model;
}

void rf_save(const RandomForestModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("rf_save: cannot open '" + path + "' for writing");
    out << rf_to_json(model) << "\n";
    if (!out) throw DataError("rf_save: write failed for '" + path + "'");
}

RandomForestModel rf_load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("rf_load: cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return rf_from_json(text);
}

}  // namespace lbvs
