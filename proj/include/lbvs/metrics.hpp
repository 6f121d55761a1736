#pragma once

#include <array>
#include <optional>
#include <vector>

#include "lbvs/fdm.hpp"
#include "lbvs/field2d.hpp"

namespace lbvs {

/// Per-frame metric values. sauc is absent when the frame's shuffle pool was
/// empty (unscorable, not zero).
struct FrameScore {
    int frame_index = 0;
    double auc = 0.0;
    std::optional<double> sauc;
    double emd = 0.0;
    double sim = 0.0;
    double pcc = 0.0;
    double kld = 0.0;
    double nss = 0.0;
};

struct EvaluationReport {
    std::vector<FrameScore> per_frame;
    /// Frame-averaged metric values over scored frames, in the order
    /// (auc, sauc, emd, sim, pcc, kld, nss). The sauc mean covers only the
    /// frames that carried a non-empty shuffle pool.
    std::array<double, 7> means{};
    int frames_skipped = 0;  // frames with zero fixations
    int frames_scored = 0;
    int emd_grid = 32;
    double epsilon = 1e-12;
};

extern const std::array<const char*, 7> kMetricNames;  // auc sauc emd sim pcc kld nss

/// ROC area with fixated pixels as positives and every other pixel as a
/// negative; equals P(pos > neg) + 0.5 P(pos = neg).
double auc_judd(const Field2D& sal, const std::vector<FixationPoint>& fix_points);

/// Same statistic, negatives drawn from the shuffle pool (duplicates kept).
/// An empty pool is unscorable and raises DataError.
double auc_shuffled(const Field2D& sal, const std::vector<FixationPoint>& fix_points,
                    const std::vector<FixationPoint>& negative_pool);

/// Mean z-scored saliency at the fixated pixels (population std; 0 for a
/// constant map).
double nss(const Field2D& sal, const std::vector<FixationPoint>& fix_points);

/// Pearson correlation over all pixels; 0 when either field is constant.
double pcc(const Field2D& sal, const Field2D& fdm);

/// KL(FDM || saliency): both shifted by epsilon, renormalized to sum 1,
/// natural log.
double kld(const Field2D& sal, const Field2D& fdm, double epsilon = 1e-12);

/// Histogram intersection of the two sum-1 distributions, in [0,1].
double sim(const Field2D& sal, const Field2D& fdm);

/// Earth mover's distance between the two fields after area-average
/// downsampling to at most grid x grid cells, masses renormalized to 1,
/// Euclidean ground distance in coarse-pixel units. Exact (network simplex).
/// An all-zero field is treated as a uniform distribution.
double emd(const Field2D& sal, const Field2D& fdm, int grid = 32);

/// Exact balanced-transportation solve (exposed for the metric internals and
/// property tests): minimize sum f_ij * cost(i,j) subject to the marginals.
/// `positions` give the 2D location of each cell of both distributions.
double emd_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                     const std::vector<std::pair<double, double>>& supply_pos,
                     const std::vector<std::pair<double, double>>& demand_pos);

/// Scores every frame that has at least one fixation; frames without
/// fixations are skipped and counted. negative_pools[k] is frame k's sAUC
/// shuffle pool (typically the union of all other frames' fixations).
EvaluationReport evaluate_frames(const std::vector<Field2D>& preds,
                                 const std::vector<FixationDensityMap>& fdms,
                                 const std::vector<std::vector<FixationPoint>>& negative_pools,
                                 int emd_grid = 32, double epsilon = 1e-12, int jobs = 1);

}  // namespace lbvs
