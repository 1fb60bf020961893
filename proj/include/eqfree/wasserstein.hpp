#ifndef EQFREE_WASSERSTEIN_HPP
#define EQFREE_WASSERSTEIN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "eqfree/core.hpp"
#include "eqfree/grid.hpp"

namespace eqfree {

// ---------------------------------------------------------------------------
// Exact transportation problem solver (primal network simplex).
//
// Bipartite min-cost flow: sources with supplies a_i, sinks with demands b_j,
// sum(a) == sum(b), dense cost matrix. The basis is a spanning tree over
// sources + sinks + an artificial root; strong feasibility is maintained with
// the classic leaving-arc rule (last blocking arc when traversing the cycle
// from the apex), which guarantees termination under degeneracy.
//
// Two entry points:
//   solve()        prices every arc of the dense matrix.
//   solve_sparse() restricts pivoting to k-nearest-neighbor candidate arcs
//                  and then proves optimality with full pricing sweeps over
//                  the dense matrix, appending any violated arcs and
//                  re-optimizing. The result is exact, not approximate; the
//                  candidate set only shapes the search order.
// ---------------------------------------------------------------------------
class TransportSimplex {
public:
    std::size_t stat_pivots = 0;
    std::size_t stat_scanned = 0;
    std::size_t stat_verify_rounds = 0;

    // cost is row-major m x n; supplies/demands positive and balanced.
    double solve(std::span<const double> supplies, std::span<const double> demands,
                 std::span<const double> cost) {
        return run(supplies, demands, cost, /*knn=*/0);
    }

    double solve_sparse(std::span<const double> supplies,
                        std::span<const double> demands,
                        std::span<const double> cost, std::size_t knn) {
        return run(supplies, demands, cost, std::max<std::size_t>(knn, 2));
    }

    // optimal dual of the demand side, valid after a solve
    std::vector<double> sink_duals() const {
        return std::vector<double>(pi_.begin() + m_, pi_.begin() + m_ + n_);
    }

private:
    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    static constexpr std::size_t kArtBase = static_cast<std::size_t>(1) << 62;

    std::span<const double> cost_;
    std::size_t m_ = 0, n_ = 0, V_ = 0, root_ = 0;
    double big_ = 0.0, tol_ = 0.0;
    bool sparse_mode_ = false;

    // candidate arc storage (append-only, so ids stay stable)
    std::vector<std::uint32_t> arc_tail_, arc_head_;
    std::vector<double> arc_cost_;
    std::vector<char> arc_present_;

    // per-node basis state: arc to parent, its flow, orientation
    // (+1 when the arc is tail=v -> head=parent)
    std::vector<std::size_t> parent_, pred_arc_;
    std::vector<int> dir_;
    std::vector<double> flow_, pi_;
    std::vector<std::size_t> first_child_, next_sib_, prev_sib_;
    std::vector<std::uint32_t> mark_;
    std::uint32_t stamp_ = 0;
    std::vector<std::size_t> path_i_, path_j_, stack_;

    std::size_t source_node(std::size_t i) const { return i; }
    std::size_t sink_node(std::size_t j) const { return m_ + j; }

    double run(std::span<const double> supplies, std::span<const double> demands,
               std::span<const double> cost, std::size_t knn) {
        m_ = supplies.size();
        n_ = demands.size();
        if (m_ == 0 || n_ == 0) throw SizeError("transport: empty marginals");
        if (cost.size() != m_ * n_) throw SizeError("transport: cost shape mismatch");
        cost_ = cost;
        V_ = m_ + n_ + 1;
        root_ = m_ + n_;
        sparse_mode_ = knn > 0 && knn < n_;

        double max_c = 0.0;
        for (double c : cost) max_c = std::max(max_c, c);
        big_ = (max_c + 1.0) * static_cast<double>(V_ + 1);
        tol_ = 1e-10 * (max_c + 1.0);

        arc_tail_.clear();
        arc_head_.clear();
        arc_cost_.clear();
        if (sparse_mode_) {
            arc_present_.assign(m_ * n_, 0);
            build_knn_arcs(knn);
        } else {
            arc_present_.clear();
            arc_tail_.reserve(m_ * n_);
            arc_head_.reserve(m_ * n_);
            arc_cost_.reserve(m_ * n_);
            for (std::size_t i = 0; i < m_; ++i)
                for (std::size_t j = 0; j < n_; ++j) {
                    arc_tail_.push_back(static_cast<std::uint32_t>(i));
                    arc_head_.push_back(static_cast<std::uint32_t>(j));
                    arc_cost_.push_back(cost_[i * n_ + j]);
                }
        }

        init_tree(supplies, demands);

        const std::size_t pivot_cap = 400 * (V_ + 64) + 4 * arc_tail_.size();
        std::size_t pivots = 0;
        std::size_t cursor = 0;
        while (true) {
            std::size_t block = static_cast<std::size_t>(
                std::sqrt(static_cast<double>(arc_tail_.size())));
            block = std::max<std::size_t>(block, 64);
            std::size_t entering;
            if (!find_entering(block, cursor, entering)) {
                if (!sparse_mode_) break;
                ++stat_verify_rounds;
                if (!append_violated_arcs()) break;
                continue;
            }
            pivot(entering);
            if (++pivots > pivot_cap)
                throw NumericError("transport: pivot cap exceeded (possible cycling)");
            if (pivots % 4096 == 0) refresh_potentials();
        }
        stat_pivots = pivots;

        // objective = sum of flow * cost over tree arcs (non-tree flow is 0)
        KahanAccumulator obj;
        for (std::size_t v = 0; v < V_; ++v) {
            if (v == root_ || flow_[v] == 0.0) continue;
            if (pred_arc_[v] >= kArtBase) continue;
            obj.add(flow_[v] * arc_cost_[pred_arc_[v]]);
        }
        return obj.value();
    }

    std::size_t add_arc(std::size_t i, std::size_t j) {
        if (sparse_mode_) {
            char& seen = arc_present_[i * n_ + j];
            if (seen) return kNone;
            seen = 1;
        }
        arc_tail_.push_back(static_cast<std::uint32_t>(i));
        arc_head_.push_back(static_cast<std::uint32_t>(j));
        arc_cost_.push_back(cost_[i * n_ + j]);
        return arc_tail_.size() - 1;
    }

    std::size_t find_or_add_arc(std::size_t i, std::size_t j) {
        // only used for the few greedy-basis arcs; linear dedup via bitmap
        if (sparse_mode_ && arc_present_[i * n_ + j]) {
            // locate it (rare path: greedy arc already among knn candidates)
            for (std::size_t a = arc_tail_.size(); a-- > 0;)
                if (arc_tail_[a] == i && arc_head_[a] == j) return a;
        }
        return add_arc(i, j);
    }

    void build_knn_arcs(std::size_t k) {
        std::vector<std::uint32_t> idx(std::max(m_, n_));
        // k nearest sinks per source
        for (std::size_t i = 0; i < m_; ++i) {
            const double* row = cost_.data() + i * n_;
            idx.resize(n_);
            std::iota(idx.begin(), idx.end(), 0u);
            const std::size_t kk = std::min(k, n_);
            std::nth_element(idx.begin(), idx.begin() + (kk - 1), idx.end(),
                             [row](std::uint32_t a, std::uint32_t b) {
                                 return row[a] < row[b];
                             });
            for (std::size_t t = 0; t < kk; ++t) add_arc(i, idx[t]);
        }
        // k nearest sources per sink
        std::vector<double> col(m_);
        for (std::size_t j = 0; j < n_; ++j) {
            for (std::size_t i = 0; i < m_; ++i) col[i] = cost_[i * n_ + j];
            idx.resize(m_);
            std::iota(idx.begin(), idx.end(), 0u);
            const std::size_t kk = std::min(k, m_);
            std::nth_element(idx.begin(), idx.begin() + (kk - 1), idx.end(),
                             [&col](std::uint32_t a, std::uint32_t b) {
                                 return col[a] < col[b];
                             });
            for (std::size_t t = 0; t < kk; ++t) add_arc(idx[t], j);
        }
    }

    // Full dense pricing sweep; appends every violated arc. Returns false
    // when the current basis is optimal for the complete problem.
    bool append_violated_arcs() {
        const double* u = pi_.data();
        const double* v = pi_.data() + m_;
        bool added = false;
        for (std::size_t i = 0; i < m_; ++i) {
            const double ui = u[i];
            const double* row = cost_.data() + i * n_;
            for (std::size_t j = 0; j < n_; ++j) {
                if (row[j] - ui - v[j] < -tol_) {
                    if (add_arc(i, j) != kNone) added = true;
                }
            }
        }
        stat_scanned += m_ * n_;
        return added;
    }

    void link_child(std::size_t p, std::size_t c) {
        next_sib_[c] = first_child_[p];
        prev_sib_[c] = kNone;
        if (first_child_[p] != kNone) prev_sib_[first_child_[p]] = c;
        first_child_[p] = c;
    }

    void unlink_child(std::size_t p, std::size_t c) {
        if (prev_sib_[c] != kNone) next_sib_[prev_sib_[c]] = next_sib_[c];
        else first_child_[p] = next_sib_[c];
        if (next_sib_[c] != kNone) prev_sib_[next_sib_[c]] = prev_sib_[c];
        next_sib_[c] = prev_sib_[c] = kNone;
    }

    void reset_tree_arrays() {
        parent_.assign(V_, kNone);
        pred_arc_.assign(V_, kNone);
        dir_.assign(V_, 0);
        flow_.assign(V_, 0.0);
        pi_.assign(V_, 0.0);
        first_child_.assign(V_, kNone);
        next_sib_.assign(V_, kNone);
        prev_sib_.assign(V_, kNone);
        mark_.assign(V_, 0);
        stamp_ = 0;
    }

    void init_tree(std::span<const double> supplies, std::span<const double> demands) {
        reset_tree_arrays();

        // Row-minimum greedy start: allocate each supply to the cheapest
        // remaining demand. Any crossing-out rule yields an acyclic
        // allocation set, which we complete into a spanning tree by hanging
        // one source of each forest component off the artificial root.
        // Degenerate artificial arcs are source->root, i.e. toward the root,
        // so the initial tree is strongly feasible.
        std::vector<double> rem_b(demands.begin(), demands.end());
        std::vector<char> closed(n_, 0);
        std::size_t open_sinks = n_;
        struct Alloc { std::size_t arc; std::size_t i, j; double amount; };
        std::vector<Alloc> allocs;
        allocs.reserve(m_ + n_);
        for (std::size_t i = 0; i < m_; ++i) {
            double rem_a = supplies[i];
            const double* row = cost_.data() + i * n_;
            while (rem_a > 0.0 && open_sinks > 0) {
                std::size_t best_j = kNone;
                double best_c = std::numeric_limits<double>::infinity();
                for (std::size_t j = 0; j < n_; ++j) {
                    if (!closed[j] && row[j] < best_c) {
                        best_c = row[j];
                        best_j = j;
                    }
                }
                if (best_j == kNone) break;
                const double amount = std::min(rem_a, rem_b[best_j]);
                const std::size_t arc = find_or_add_arc(i, best_j);
                allocs.push_back({arc, i, best_j, amount});
                rem_a -= amount;
                rem_b[best_j] -= amount;
                if (rem_b[best_j] <= 0.0 || amount == 0.0) {
                    closed[best_j] = 1;
                    --open_sinks;
                }
            }
        }

        // adjacency of the allocation forest
        std::vector<std::vector<std::size_t>> adj(m_ + n_);
        for (std::size_t k = 0; k < allocs.size(); ++k) {
            adj[source_node(allocs[k].i)].push_back(k);
            adj[sink_node(allocs[k].j)].push_back(k);
        }

        pi_[root_] = 0.0;
        std::size_t components = 0;
        std::size_t forest_arcs_used = 0;
        std::vector<char> visited(m_ + n_, 0);
        std::vector<std::size_t> stack;
        for (std::size_t i0 = 0; i0 < m_; ++i0) {
            const std::size_t start = source_node(i0);
            if (visited[start]) continue;
            ++components;
            visited[start] = 1;
            parent_[start] = root_;
            pred_arc_[start] = kArtBase + start;
            dir_[start] = +1;
            flow_[start] = 0.0;
            pi_[start] = big_;
            link_child(root_, start);
            stack.assign(1, start);
            while (!stack.empty()) {
                const std::size_t v = stack.back();
                stack.pop_back();
                for (std::size_t k : adj[v]) {
                    const std::size_t src = source_node(allocs[k].i);
                    const std::size_t snk = sink_node(allocs[k].j);
                    const std::size_t w = (v == src) ? snk : src;
                    if (visited[w]) continue;
                    visited[w] = 1;
                    ++forest_arcs_used;
                    parent_[w] = v;
                    pred_arc_[w] = allocs[k].arc;
                    dir_[w] = (w == src) ? +1 : -1;  // arc always source -> sink
                    flow_[w] = allocs[k].amount;
                    pi_[w] = arc_cost_[allocs[k].arc] - pi_[v];
                    link_child(v, w);
                    stack.push_back(w);
                }
            }
        }
        for (std::size_t j = 0; j < n_; ++j)
            if (!visited[sink_node(j)])
                throw NumericError("transport: disconnected sink in initial basis");
        // crossing-out rules cannot produce cycles; if an allocation went
        // unused the invariant broke, so fall back to the plain star basis
        if (forest_arcs_used != allocs.size()) init_star_tree(supplies, demands);
    }

    void init_star_tree(std::span<const double> supplies, std::span<const double> demands) {
        reset_tree_arrays();
        pi_[root_] = 0.0;
        for (std::size_t v = 0; v < m_ + n_; ++v) {
            parent_[v] = root_;
            pred_arc_[v] = kArtBase + v;
            dir_[v] = v < m_ ? +1 : -1;
            flow_[v] = v < m_ ? supplies[v] : demands[v - m_];
            pi_[v] = big_;
            link_child(root_, v);
        }
    }

    // Reduced cost of arc a: c - pi[tail] - pi[head] with the bipartite sign
    // convention u_i + v_j = c_ij on basic arcs. Block search over the
    // candidate arcs, best within the first block that has any candidate.
    bool find_entering(std::size_t block, std::size_t& cursor, std::size_t& out) {
        const std::size_t arc_count = arc_tail_.size();
        if (cursor >= arc_count) cursor = 0;
        std::size_t scanned = 0;
        double best = -tol_;
        std::size_t best_arc = kNone;
        const double* u = pi_.data();
        const double* v = pi_.data() + m_;
        while (scanned < arc_count) {
            const std::size_t chunk = std::min(block, arc_count - scanned);
            for (std::size_t t = 0; t < chunk; ++t) {
                const double rc =
                    arc_cost_[cursor] - u[arc_tail_[cursor]] - v[arc_head_[cursor]];
                if (rc < best) {
                    best = rc;
                    best_arc = cursor;
                }
                if (++cursor == arc_count) cursor = 0;
            }
            scanned += chunk;
            stat_scanned += chunk;
            if (best_arc != kNone) { out = best_arc; return true; }
        }
        return false;
    }

    std::size_t lca(std::size_t a, std::size_t b) {
        ++stamp_;
        for (std::size_t v = a; v != kNone; v = parent_[v]) mark_[v] = stamp_;
        for (std::size_t v = b;; v = parent_[v]) {
            if (mark_[v] == stamp_) return v;
        }
    }

    void pivot(std::size_t arc) {
        const std::size_t si = source_node(arc_tail_[arc]);
        const std::size_t sj = sink_node(arc_head_[arc]);
        const std::size_t apex = lca(si, sj);

        // Cycle orientation: si -> sj through the entering arc, then sj up
        // to the apex, then apex down to si.
        path_i_.clear();
        for (std::size_t v = si; v != apex; v = parent_[v]) path_i_.push_back(v);
        path_j_.clear();
        for (std::size_t v = sj; v != apex; v = parent_[v]) path_j_.push_back(v);

        // On the i-side the cycle runs parent->child, so arcs oriented
        // child->parent (dir +1) are traversed backwards and block; on the
        // j-side the other way round.
        double delta = std::numeric_limits<double>::infinity();
        int leave_side = 0;
        std::size_t leave_node = kNone;
        // cycle order from the apex: apex->si segment first ...
        for (auto it = path_i_.rbegin(); it != path_i_.rend(); ++it) {
            const std::size_t v = *it;
            if (dir_[v] == +1 && flow_[v] <= delta) {
                delta = flow_[v];
                leave_side = 1;
                leave_node = v;
            }
        }
        // ... then the entering arc, then the sj->apex segment; taking the
        // LAST blocking arc in this order keeps the tree strongly feasible
        for (std::size_t v : path_j_) {
            if (dir_[v] == -1 && flow_[v] <= delta) {
                delta = flow_[v];
                leave_side = 2;
                leave_node = v;
            }
        }
        if (leave_node == kNone)
            throw NumericError("transport: unbounded pivot (should not happen)");

        for (std::size_t v : path_i_) flow_[v] -= static_cast<double>(dir_[v]) * delta;
        for (std::size_t v : path_j_) flow_[v] += static_cast<double>(dir_[v]) * delta;

        // Re-root the severed subtree at the entering arc's endpoint inside
        // it, reversing the parent chain from that endpoint up to the
        // leaving arc.
        std::size_t q, p;
        int q_dir;
        if (leave_side == 1) {
            q = si; p = sj; q_dir = +1;  // entering arc: q(source) -> p(sink)
        } else {
            q = sj; p = si; q_dir = -1;
        }

        std::size_t v = q;
        std::size_t prev_parent = parent_[v];
        std::size_t prev_arc = pred_arc_[v];
        int prev_dir = dir_[v];
        double prev_flow = flow_[v];

        unlink_child(prev_parent, v);
        parent_[v] = p;
        pred_arc_[v] = arc;
        dir_[v] = q_dir;
        flow_[v] = delta;
        link_child(p, v);

        while (v != leave_node) {
            const std::size_t w = prev_parent;
            const std::size_t w_parent = parent_[w];
            const std::size_t w_arc = pred_arc_[w];
            const int w_dir = dir_[w];
            const double w_flow = flow_[w];
            unlink_child(w_parent, w);
            parent_[w] = v;
            pred_arc_[w] = prev_arc;
            dir_[w] = -prev_dir;  // same arc, seen from the other endpoint
            flow_[w] = prev_flow;
            link_child(v, w);
            v = w;
            prev_parent = w_parent;
            prev_arc = w_arc;
            prev_dir = w_dir;
            prev_flow = w_flow;
        }

        update_potentials(q);
    }

    double arc_cost_between(std::size_t child) const {
        const std::size_t a = pred_arc_[child];
        return a < kArtBase ? arc_cost_[a] : big_;
    }

    void update_potentials(std::size_t sub_root) {
        // pi satisfies pi[child] = cost(arc) - pi[parent] on every tree arc
        stack_.clear();
        stack_.push_back(sub_root);
        while (!stack_.empty()) {
            const std::size_t v = stack_.back();
            stack_.pop_back();
            pi_[v] = arc_cost_between(v) - pi_[parent_[v]];
            for (std::size_t c = first_child_[v]; c != kNone; c = next_sib_[c])
                stack_.push_back(c);
        }
    }

    void refresh_potentials() {
        // full recompute from the root, clearing accumulated rounding
        pi_[root_] = 0.0;
        stack_.clear();
        for (std::size_t c = first_child_[root_]; c != kNone; c = next_sib_[c])
            stack_.push_back(c);
        while (!stack_.empty()) {
            const std::size_t v = stack_.back();
            stack_.pop_back();
            pi_[v] = arc_cost_between(v) - pi_[parent_[v]];
            for (std::size_t c = first_child_[v]; c != kNone; c = next_sib_[c])
                stack_.push_back(c);
        }
    }
};

// ---------------------------------------------------------------------------
// Wasserstein-1 between cell distributions on a grid.
// ---------------------------------------------------------------------------

struct W1Options {
    double prune_mass = 1e-14;       // drop support cells below this mass
    double support_cap = 1.0e7;      // max (support_p x support_q) arc count
    bool allow_coarsen = false;      // average-pool 2x2 when over the cap
    std::size_t knn = 24;            // candidate arcs per node in sparse mode
    std::size_t sparse_threshold = 1u << 16;  // arc count where sparse kicks in
};

struct W1Result {
    double distance = 0.0;    // meters
    bool coarsened = false;   // true when the 2x2 pooling fallback was used
    std::size_t support_p = 0;
    std::size_t support_q = 0;
};

namespace detail {

struct SupportPoint {
    double x, y, mass;
};

// Common-mass cancellation: W1 depends only on p - q for a metric ground
// cost, so transporting (p-q)+ onto (q-p)+ gives the same optimum with a
// much smaller problem.
inline void reduce_difference(std::span<const double> p, std::span<const double> q,
                              std::span<const double> xs, std::span<const double> ys,
                              double prune, std::vector<SupportPoint>& sp,
                              std::vector<SupportPoint>& sq) {
    sp.clear();
    sq.clear();
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double d = p[k] - q[k];
        if (d > prune) sp.push_back({xs[k], ys[k], d});
        else if (d < -prune) sq.push_back({xs[k], ys[k], -d});
    }
}

inline double solve_support(std::vector<SupportPoint>& sp,
                            std::vector<SupportPoint>& sq, const W1Options& opts) {
    if (sp.empty() || sq.empty()) return 0.0;
    // balance the marginals exactly (pruning loses a little mass on each side)
    double mp = 0.0, mq = 0.0;
    {
        KahanAccumulator ap, aq;
        for (const auto& s : sp) ap.add(s.mass);
        for (const auto& s : sq) aq.add(s.mass);
        mp = ap.value();
        mq = aq.value();
    }
    if (mp <= 0.0 || mq <= 0.0) return 0.0;
    const double scale = mp / mq;
    std::vector<double> a(sp.size()), b(sq.size());
    for (std::size_t i = 0; i < sp.size(); ++i) a[i] = sp[i].mass;
    for (std::size_t j = 0; j < sq.size(); ++j) b[j] = sq[j].mass * scale;

    std::vector<double> cost(sp.size() * sq.size());
    for (std::size_t i = 0; i < sp.size(); ++i) {
        const double xi = sp[i].x, yi = sp[i].y;
        double* row = cost.data() + i * sq.size();
        for (std::size_t j = 0; j < sq.size(); ++j) {
            const double dx = xi - sq[j].x;
            const double dy = yi - sq[j].y;
            row[j] = std::sqrt(dx * dx + dy * dy);
        }
    }
    TransportSimplex solver;
    if (cost.size() > opts.sparse_threshold)
        return solver.solve_sparse(a, b, cost, opts.knn);
    return solver.solve(a, b, cost);
}

}  // namespace detail

// p, q: per-cell masses aligned with grid cells (row-major), already
// restricted to fluid cells by the caller (obstacle entries must be 0).
// Both are renormalized to unit mass internally; negative entries are
// clipped to zero first (truncated linear decoders can undershoot).
inline W1Result wasserstein1_cells(const Grid& grid, std::span<const double> p,
                                   std::span<const double> q, const W1Options& opts = {}) {
    if (p.size() != grid.cell_count() || q.size() != grid.cell_count())
        throw SizeError("wasserstein1: field size does not match grid");

    const std::size_t n_cells = grid.cell_count();
    std::vector<double> pn(n_cells, 0.0), qn(n_cells, 0.0);
    KahanAccumulator sp_acc, sq_acc;
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            const std::size_t k = grid.index(i, j);
            if (!grid.is_fluid(i, j)) continue;
            pn[k] = std::max(p[k], 0.0);
            qn[k] = std::max(q[k], 0.0);
            sp_acc.add(pn[k]);
            sq_acc.add(qn[k]);
        }
    }
    const double mass_p = sp_acc.value(), mass_q = sq_acc.value();
    if (mass_p <= 0.0 || mass_q <= 0.0)
        throw DomainError("wasserstein1: zero-mass input");
    for (std::size_t k = 0; k < n_cells; ++k) {
        pn[k] /= mass_p;
        qn[k] /= mass_q;
    }

    std::vector<double> xs(n_cells), ys(n_cells);
    for (int j = 0; j < grid.ny(); ++j)
        for (int i = 0; i < grid.nx(); ++i) {
            xs[grid.index(i, j)] = grid.center_x(i);
            ys[grid.index(i, j)] = grid.center_y(j);
        }

    std::vector<detail::SupportPoint> sp, sq;
    detail::reduce_difference(pn, qn, xs, ys, opts.prune_mass, sp, sq);

    W1Result result;
    result.support_p = sp.size();
    result.support_q = sq.size();
    const double product =
        static_cast<double>(sp.size()) * static_cast<double>(sq.size());
    if (product > opts.support_cap) {
        if (!opts.allow_coarsen)
            throw ConfigError(
                "wasserstein1: support product exceeds the cap; enable the "
                "coarsen option or raise the cap");
        // 2x2 average pooling of the difference supports, labeled in the result
        auto pool = [&](std::vector<detail::SupportPoint>& s) {
            std::vector<detail::SupportPoint> pooled;
            const std::size_t cols = (grid.nx() + 1) / 2;
            std::vector<std::size_t> slot(cols * ((grid.ny() + 1) / 2),
                                          static_cast<std::size_t>(-1));
            for (const auto& pt : s) {
                const int i = std::min(grid.nx() - 1,
                                       static_cast<int>(pt.x / grid.dx()));
                const int j = std::min(grid.ny() - 1,
                                       static_cast<int>(pt.y / grid.dy()));
                const std::size_t cell =
                    static_cast<std::size_t>(j / 2) * cols + (i / 2);
                if (slot[cell] == static_cast<std::size_t>(-1)) {
                    slot[cell] = pooled.size();
                    pooled.push_back({0.0, 0.0, 0.0});
                }
                auto& dst = pooled[slot[cell]];
                dst.x += pt.x * pt.mass;
                dst.y += pt.y * pt.mass;
                dst.mass += pt.mass;
            }
            for (auto& pt : pooled) {
                pt.x /= pt.mass;
                pt.y /= pt.mass;
            }
            s = std::move(pooled);
        };
        pool(sp);
        pool(sq);
        result.coarsened = true;
    }
    result.distance = detail::solve_support(sp, sq, opts);
    return result;
}

inline W1Result wasserstein1(const Field& p, const Field& q, const W1Options& opts = {}) {
    if (!p.grid().same_geometry(q.grid()))
        throw SizeError("wasserstein1: fields live on different grids");
    if (p.quantity() != Quantity::Density || q.quantity() != Quantity::Density)
        throw DomainError("wasserstein1: expects density fields");
    return wasserstein1_cells(p.grid(), p.values(), q.values(), opts);
}

}  // namespace eqfree

#endif  // EQFREE_WASSERSTEIN_HPP
