#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lbvs/metrics.hpp"

namespace lbvs {

namespace {

/// Balanced-transportation simplex on the spanning-tree basis (u-v method).
/// Nodes 0..n-1 are supplies, n..n+m-1 demands. Masses carry a tiny Charnes
/// perturbation so the northwest-corner start is nondegenerate and pivots do
/// not cycle; the cost error this introduces is far below metric tolerances.
class TransportSimplex {
public:
    TransportSimplex(std::vector<double> supply, std::vector<double> demand,
                     std::vector<double> cost)
        : n_(static_cast<int>(supply.size())),
          m_(static_cast<int>(demand.size())),
          a_(std::move(supply)),
          b_(std::move(demand)),
          cost_(std::move(cost)) {}

    double solve() {
        perturb();
        northwest_corner();
        rebuild_tree();

        const long max_pivots = 400L * (n_ + m_) + 1000L;
        long pivots = 0;
        int cursor = 0;
        for (;;) {
            const int entering = price(cursor);
            if (entering < 0) break;
            pivot(entering);
            rebuild_tree();
            if (++pivots > max_pivots)
                throw DataError("emd: transportation solver failed to converge");
        }

        double total = 0.0;
        for (const BasicArc& arc : arcs_)
            if (arc.alive) total += arc.flow * cost_at(arc.supply, arc.demand);
        return total;
    }

private:
    struct BasicArc {
        int supply;
        int demand;
        double flow;
        bool alive;
    };

    double cost_at(int i, int j) const {
        return cost_[static_cast<std::size_t>(i) * m_ + j];
    }

    void perturb() {
        constexpr double kDelta = 1e-13;
        double added = 0.0;
        for (int i = 0; i < n_; ++i) {
            const double d = kDelta * (i + 1);
            a_[static_cast<std::size_t>(i)] += d;
            added += d;
        }
        for (int j = 0; j < m_; ++j) b_[static_cast<std::size_t>(j)] += added / m_;
    }

    void northwest_corner() {
        std::vector<double> a = a_, b = b_;
        int i = 0, j = 0;
        for (;;) {
            const double f = std::min(a[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(j)]);
            arcs_.push_back({i, j, f, true});
            a[static_cast<std::size_t>(i)] -= f;
            b[static_cast<std::size_t>(j)] -= f;
            if (i == n_ - 1 && j == m_ - 1) break;
            if (a[static_cast<std::size_t>(i)] <= b[static_cast<std::size_t>(j)] && i < n_ - 1)
                ++i;
            else
                ++j;
        }
    }

    /// Parents, depths and potentials of the basis tree, rooted at supply 0.
    void rebuild_tree() {
        const int v_count = n_ + m_;
        adjacency_.assign(static_cast<std::size_t>(v_count), {});
        for (std::size_t k = 0; k < arcs_.size(); ++k) {
            if (!arcs_[k].alive) continue;
            adjacency_[static_cast<std::size_t>(arcs_[k].supply)].push_back(static_cast<int>(k));
            adjacency_[static_cast<std::size_t>(n_ + arcs_[k].demand)].push_back(
                static_cast<int>(k));
        }
        parent_.assign(static_cast<std::size_t>(v_count), -1);
        parent_arc_.assign(static_cast<std::size_t>(v_count), -1);
        depth_.assign(static_cast<std::size_t>(v_count), 0);
        potential_.assign(static_cast<std::size_t>(v_count), 0.0);

        std::vector<int> stack = {0};
        std::vector<char> seen(static_cast<std::size_t>(v_count), 0);
        seen[0] = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int k : adjacency_[static_cast<std::size_t>(v)]) {
                const BasicArc& arc = arcs_[static_cast<std::size_t>(k)];
                const int other = v == arc.supply ? n_ + arc.demand : arc.supply;
                if (seen[static_cast<std::size_t>(other)]) continue;
                seen[static_cast<std::size_t>(other)] = 1;
                parent_[static_cast<std::size_t>(other)] = v;
                parent_arc_[static_cast<std::size_t>(other)] = k;
                depth_[static_cast<std::size_t>(other)] = depth_[static_cast<std::size_t>(v)] + 1;
                // u_i + v_j = c_ij on basic arcs.
                potential_[static_cast<std::size_t>(other)] =
                    cost_at(arc.supply, arc.demand) - potential_[static_cast<std::size_t>(v)];
                stack.push_back(other);
            }
        }
    }

    /// Block pricing: resume scanning at `cursor`, return the arc (encoded
    /// i*m+j) with the most negative reduced cost in the first block that
    /// contains any, or -1 if a full sweep finds none.
    int price(int& cursor) {
        constexpr double kTol = 1e-9;
        const long total = static_cast<long>(n_) * m_;
        const long block = std::max<long>(4096, total / 64);
        long scanned = 0;
        long pos = cursor;
        int best = -1;
        double best_rc = -kTol;
        while (scanned < total) {
            const long stop = std::min<long>(block, total - scanned);
            for (long s = 0; s < stop; ++s, ++pos, ++scanned) {
                if (pos >= total) pos = 0;
                const int i = static_cast<int>(pos / m_);
                const int j = static_cast<int>(pos % m_);
                const double rc = cost_at(i, j) - potential_[static_cast<std::size_t>(i)] -
                                  potential_[static_cast<std::size_t>(n_ + j)];
                if (rc < best_rc) {
                    best_rc = rc;
                    best = static_cast<int>(pos);
                }
            }
            if (best >= 0) break;
        }
        cursor = static_cast<int>(pos);
        return best;
    }

    void pivot(int entering) {
        const int ei = entering / m_;
        const int ej = entering % m_;
        int u = ei;           // supply-side node
        int w = n_ + ej;      // demand-side node

        // Arcs on the tree path between the entering arc's endpoints,
        // ordered walking from the demand end; signs alternate starting at -1.
        std::vector<int> from_demand, from_supply;
        while (u != w) {
            if (depth_[static_cast<std::size_t>(w)] >= depth_[static_cast<std::size_t>(u)]) {
                from_demand.push_back(parent_arc_[static_cast<std::size_t>(w)]);
                w = parent_[static_cast<std::size_t>(w)];
            } else {
                from_supply.push_back(parent_arc_[static_cast<std::size_t>(u)]);
                u = parent_[static_cast<std::size_t>(u)];
            }
        }
        std::vector<int> cycle = std::move(from_demand);
        cycle.insert(cycle.end(), from_supply.rbegin(), from_supply.rend());

        double theta = std::numeric_limits<double>::infinity();
        int leaving = -1;
        for (std::size_t k = 0; k < cycle.size(); ++k) {
            if (k % 2 != 0) continue;  // positions 1,3,... gain flow
            const double f = arcs_[static_cast<std::size_t>(cycle[k])].flow;
            if (f < theta) {
                theta = f;
                leaving = cycle[k];
            }
        }
        for (std::size_t k = 0; k < cycle.size(); ++k) {
            const double sign = k % 2 == 0 ? -1.0 : 1.0;
            arcs_[static_cast<std::size_t>(cycle[k])].flow += sign * theta;
        }
        arcs_[static_cast<std::size_t>(leaving)].alive = false;
        arcs_.push_back({ei, ej, theta, true});
    }

    int n_, m_;
    std::vector<double> a_, b_;
    std::vector<double> cost_;
    std::vector<BasicArc> arcs_;
    std::vector<std::vector<int>> adjacency_;
    std::vector<int> parent_, parent_arc_;
    std::vector<int> depth_;
    std::vector<double> potential_;
};

}  // namespace

double emd_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                     const std::vector<std::pair<double, double>>& supply_pos,
                     const std::vector<std::pair<double, double>>& demand_pos) {
    if (supply.size() != supply_pos.size() || demand.size() != demand_pos.size())
        throw DataError("emd_transport: positions must match masses");
    if (supply.empty() || demand.empty()) throw DataError("emd_transport: empty problem");

    // Zero-mass cells take no part in the transport.
    std::vector<double> a, b;
    std::vector<std::pair<double, double>> ap, bp;
    for (std::size_t i = 0; i < supply.size(); ++i) {
        if (supply[i] < 0.0) throw DataError("emd_transport: negative supply");
        if (supply[i] > 0.0) {
            a.push_back(supply[i]);
            ap.push_back(supply_pos[i]);
        }
    }
    for (std::size_t j = 0; j < demand.size(); ++j) {
        if (demand[j] < 0.0) throw DataError("emd_transport: negative demand");
        if (demand[j] > 0.0) {
            b.push_back(demand[j]);
            bp.push_back(demand_pos[j]);
        }
    }
    if (a.empty() || b.empty()) throw DataError("emd_transport: zero total mass");

    const std::size_t n = a.size(), m = b.size();
    std::vector<double> cost(n * m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            cost[i * m + j] = std::hypot(ap[i].first - bp[j].first, ap[i].second - bp[j].second);

    TransportSimplex solver(std::move(a), std::move(b), std::move(cost));
    return solver.solve();
}

}  // namespace lbvs
