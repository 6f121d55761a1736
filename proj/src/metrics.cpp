#include "lbvs/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "lbvs/parallel.hpp"

namespace lbvs {

const std::array<const char*, 7> kMetricNames = {"auc", "sauc", "emd", "sim",
                                                 "pcc", "kld", "nss"};

namespace {

/// P(pos > neg) + 0.5 P(pos = neg) via sorted negatives and binary search.
double rank_auc(const std::vector<double>& positives, std::vector<double> negatives) {
    std::sort(negatives.begin(), negatives.end());
    double acc = 0.0;
    for (double p : positives) {
        const auto lo = std::lower_bound(negatives.begin(), negatives.end(), p);
        const auto hi = std::upper_bound(lo, negatives.end(), p);
        const double below = static_cast<double>(lo - negatives.begin());
        const double equal = static_cast<double>(hi - lo);
        acc += below + 0.5 * equal;
    }
    return acc / (static_cast<double>(positives.size()) * static_cast<double>(negatives.size()));
}

void check_fixations(const Field2D& sal, const std::vector<FixationPoint>& pts,
                     const char* what) {
    if (pts.empty()) throw DataError(std::string(what) + ": empty fixation list");
    for (const auto& p : pts)
        if (p.x < 0 || p.x >= sal.width || p.y < 0 || p.y >= sal.height)
            throw DataError(std::string(what) + ": fixation outside the map");
}

/// Sum-1 distribution; an all-zero field becomes uniform (the limit of an
/// epsilon-shifted normalization as epsilon -> 0).
std::vector<double> to_distribution(const Field2D& f, double epsilon = 0.0) {
    std::vector<double> p(f.v);
    double total = 0.0;
    for (double& x : p) {
        x += epsilon;
        total += x;
    }
    if (total <= 0.0) {
        std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
        return p;
    }
    for (double& x : p) x /= total;
    return p;
}

}  // namespace

double auc_judd(const Field2D& sal, const std::vector<FixationPoint>& fix_points) {
    check_fixations(sal, fix_points, "auc_judd");
    std::vector<bool> fixated(sal.size(), false);
    std::vector<double> positives;
    positives.reserve(fix_points.size());
    for (const auto& p : fix_points) {
        positives.push_back(sal.at(p.x, p.y));
        fixated[static_cast<std::size_t>(p.y) * sal.width + p.x] = true;
    }
    std::vector<double> negatives;
    negatives.reserve(sal.size());
    for (std::size_t i = 0; i < sal.size(); ++i)
        if (!fixated[i]) negatives.push_back(sal.v[i]);
    if (negatives.empty()) return 1.0;  // every pixel fixated: degenerate, perfect by convention
    return rank_auc(positives, std::move(negatives));
}

double auc_shuffled(const Field2D& sal, const std::vector<FixationPoint>& fix_points,
                    const std::vector<FixationPoint>& negative_pool) {
    check_fixations(sal, fix_points, "auc_shuffled");
    if (negative_pool.empty()) throw DataError("auc_shuffled: empty negative pool (unscorable)");
    std::vector<double> positives, negatives;
    positives.reserve(fix_points.size());
    for (const auto& p : fix_points) positives.push_back(sal.at(p.x, p.y));
    negatives.reserve(negative_pool.size());
    for (const auto& p : negative_pool) {
        if (p.x < 0 || p.x >= sal.width || p.y < 0 || p.y >= sal.height)
            throw DataError("auc_shuffled: pool fixation outside the map");
        negatives.push_back(sal.at(p.x, p.y));
    }
    return rank_auc(positives, std::move(negatives));
}

double nss(const Field2D& sal, const std::vector<FixationPoint>& fix_points) {
    check_fixations(sal, fix_points, "nss");
    const double mean = field_mean(sal);
    const double std_dev = field_stddev(sal);
    if (std_dev == 0.0) return 0.0;
    double acc = 0.0;
    for (const auto& p : fix_points) acc += (sal.at(p.x, p.y) - mean) / std_dev;
    return acc / static_cast<double>(fix_points.size());
}

double pcc(const Field2D& sal, const Field2D& fdm) {
    require_same_size(sal, fdm, "pcc");
    const double ma = field_mean(sal), mb = field_mean(fdm);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < sal.size(); ++i) {
        const double da = sal.v[i] - ma, db = fdm.v[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

double kld(const Field2D& sal, const Field2D& fdm, double epsilon) {
    require_same_size(sal, fdm, "kld");
    const auto q = to_distribution(sal, epsilon);
    const auto p = to_distribution(fdm, epsilon);
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) acc += p[i] * std::log(p[i] / q[i]);
    return std::max(0.0, acc);
}

double sim(const Field2D& sal, const Field2D& fdm) {
    require_same_size(sal, fdm, "sim");
    const double total_s = field_sum(sal), total_f = field_sum(fdm);
    if (total_s <= 0.0 || total_f <= 0.0) return 0.0;  // no overlap to measure
    double acc = 0.0;
    for (std::size_t i = 0; i < sal.size(); ++i)
        acc += std::min(sal.v[i] / total_s, fdm.v[i] / total_f);
    return acc;
}

double emd(const Field2D& sal, const Field2D& fdm, int grid) {
    require_same_size(sal, fdm, "emd");
    if (grid < 1) throw DataError("emd: grid must be >= 1");
    const int gw = std::min(grid, sal.width);
    const int gh = std::min(grid, sal.height);
    const Field2D a = downsample_area(sal, gw, gh);
    const Field2D b = downsample_area(fdm, gw, gh);

    const auto supply = to_distribution(a);
    const auto demand = to_distribution(b);
    std::vector<std::pair<double, double>> pos(static_cast<std::size_t>(gw) * gh);
    for (int y = 0; y < gh; ++y)
        for (int x = 0; x < gw; ++x)
            pos[static_cast<std::size_t>(y) * gw + x] = {static_cast<double>(x),
                                                         static_cast<double>(y)};
    return emd_transport(supply, demand, pos, pos);
}

EvaluationReport evaluate_frames(const std::vector<Field2D>& preds,
                                 const std::vector<FixationDensityMap>& fdms,
                                 const std::vector<std::vector<FixationPoint>>& negative_pools,
                                 int emd_grid, double epsilon, int jobs) {
    if (preds.size() != fdms.size())
        throw DataError("evaluate_frames: prediction count " + std::to_string(preds.size()) +
                        " != ground-truth count " + std::to_string(fdms.size()));
    if (!negative_pools.empty() && negative_pools.size() != preds.size())
        throw DataError("evaluate_frames: negative pool count mismatch");

    EvaluationReport report;
    report.emd_grid = emd_grid;
    report.epsilon = epsilon;

    std::vector<std::optional<FrameScore>> scores(preds.size());
    parallel_for(preds.size(), jobs, [&](std::size_t k) {
        const auto& fdm = fdms[k];
        if (fdm.fixation_points.empty()) return;
        const Field2D& sal = preds[k];
        require_same_size(sal, fdm.field, "evaluate_frames");
        FrameScore s;
        s.frame_index = static_cast<int>(k);
        s.auc = auc_judd(sal, fdm.fixation_points);
        if (!negative_pools.empty() && !negative_pools[k].empty())
            s.sauc = auc_shuffled(sal, fdm.fixation_points, negative_pools[k]);
        s.emd = emd(sal, fdm.field, emd_grid);
        s.sim = lbvs::sim(sal, fdm.field);
        s.pcc = lbvs::pcc(sal, fdm.field);
        s.kld = lbvs::kld(sal, fdm.field, epsilon);
        s.nss = lbvs::nss(sal, fdm.fixation_points);
        scores[k] = s;
    });

    int sauc_count = 0;
    for (auto& s : scores) {
        if (!s) {
            ++report.frames_skipped;
            continue;
        }
        report.means[0] += s->auc;
        if (s->sauc) {
            report.means[1] += *s->sauc;
            ++sauc_count;
        }
        report.means[2] += s->emd;
        report.means[3] += s->sim;
        report.means[4] += s->pcc;
        report.means[5] += s->kld;
        report.means[6] += s->nss;
        report.per_frame.push_back(std::move(*s));
    }
    report.frames_scored = static_cast<int>(report.per_frame.size());
    if (report.frames_scored > 0) {
        for (int m = 0; m < 7; ++m) {
            if (m == 1) continue;
            report.means[static_cast<std::size_t>(m)] /= report.frames_scored;
        }
    }
    report.means[1] = sauc_count > 0 ? report.means[1] / sauc_count : 0.0;
    return report;
}

}  // namespace lbvs
