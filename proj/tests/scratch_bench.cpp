// Throwaway benchmark/validation harness for the transport solver.
#include <chrono>
#include <cstdio>
#include <vector>

#include "eqfree/core.hpp"
#include "eqfree/grid.hpp"
#include "eqfree/wasserstein.hpp"
#include "oracles.hpp"

using namespace eqfree;

int main() {
    // 1) random small instances vs SSP oracle
    SplitMix64 rng(1234);
    int fails = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t m = 2 + rng.next_below(30);
        const std::size_t n = 2 + rng.next_below(30);
        std::vector<double> a(m), b(n), cost(m * n);
        double sa = 0, sb = 0;
        for (auto& v : a) { v = 0.05 + rng.next_double(); sa += v; }
        for (auto& v : b) { v = 0.05 + rng.next_double(); sb += v; }
        for (auto& v : b) v *= sa / sb;
        for (auto& c : cost) c = rng.next_double() * 10.0;
        TransportSimplex solver;
        const double mine = solver.solve(a, b, cost);
        const double ref = oracles::transport_ssp(a, b, cost);
        if (std::abs(mine - ref) > 1e-8 * (1.0 + std::abs(ref))) {
            std::printf("MISMATCH trial %d: mine=%.12f ref=%.12f\n", trial, mine, ref);
            ++fails;
        }
    }
    std::printf("random oracle trials: %s\n", fails ? "FAIL" : "ok");

    // 2) grid W1 sanity: two deltas distance apart
    auto grid = build_grid(20, 5, 20.0, 5.0);
    {
        std::vector<double> p(grid->cell_count(), 0.0), q(grid->cell_count(), 0.0);
        p[grid->index(2, 2)] = 1.0;
        q[grid->index(7, 2)] = 1.0;
        auto r = wasserstein1_cells(*grid, p, q);
        std::printf("delta pair: %.12f (expect 5)\n", r.distance);
    }

    // 3) benchmark at desk scale: two broad blobs on 100x25
    auto big = build_grid(100, 25, 20.0, 5.0, ObstacleSpec{10.0, 2.5, 1.0});
    auto blob = [&](double x0, double y0, double sx, double sy) {
        std::vector<double> v(big->cell_count(), 0.0);
        for (int j = 0; j < big->ny(); ++j)
            for (int i = 0; i < big->nx(); ++i) {
                if (!big->is_fluid(i, j)) continue;
                const double x = big->center_x(i), y = big->center_y(j);
                v[big->index(i, j)] =
                    std::exp(-((x - x0) * (x - x0)) / (2 * sx * sx) -
                             ((y - y0) * (y - y0)) / (2 * sy * sy)) +
                    0.02;  // background so the support covers the whole grid
            }
        return v;
    };
    const auto p = blob(6.0, 2.2, 2.0, 1.2);
    const auto q = blob(7.0, 2.7, 2.2, 1.1);
    W1Options opts;
    auto t0 = std::chrono::steady_clock::now();
    W1Result r{};
    const int reps = 5;
    for (int k = 0; k < reps; ++k) r = wasserstein1_cells(*big, p, q, opts);
    auto t1 = std::chrono::steady_clock::now();
    const double ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
    std::printf("desk-scale W1: %.9f  supports %zu x %zu  %.1f ms/solve\n",
                r.distance, r.support_p, r.support_q, ms);
    {
        // raw solver stats on the reduced problem
        std::vector<detail::SupportPoint> sp, sq;
        std::vector<double> xs2(big->cell_count()), ys2(big->cell_count());
        for (int j = 0; j < big->ny(); ++j)
            for (int i = 0; i < big->nx(); ++i) {
                xs2[big->index(i, j)] = big->center_x(i);
                ys2[big->index(i, j)] = big->center_y(j);
            }
        std::vector<double> pn(p), qn(q);
        double mp = 0, mq = 0;
        for (auto v : pn) mp += v;
        for (auto v : qn) mq += v;
        for (auto& v : pn) v /= mp;
        for (auto& v : qn) v /= mq;
        detail::reduce_difference(pn, qn, xs2, ys2, 1e-14, sp, sq);
        std::vector<double> a, b, cost;
        for (auto& s : sp) a.push_back(s.mass);
        for (auto& s : sq) b.push_back(s.mass);
        double sa = 0, sb = 0;
        for (auto v : a) sa += v;
        for (auto v : b) sb += v;
        for (auto& v : b) v *= sa / sb;
        cost.resize(a.size() * b.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) {
                double dx = sp[i].x - sq[j].x, dy = sp[i].y - sq[j].y;
                cost[i * b.size() + j] = std::sqrt(dx * dx + dy * dy);
            }
        TransportSimplex ts;
        auto tt0 = std::chrono::steady_clock::now();
        ts.solve_sparse(a, b, cost, 24);
        auto tt1 = std::chrono::steady_clock::now();
        std::printf("stats: pivots=%zu scanned=%.2fM arcs=%.2fM rounds=%zu raw=%.1f ms\n",
                    ts.stat_pivots, ts.stat_scanned / 1e6,
                    a.size() * b.size() / 1e6, ts.stat_verify_rounds,
                    std::chrono::duration<double, std::milli>(tt1 - tt0).count());

    }

    // 4) moderate-size oracle cross-check with realistic geometry (16x8)
    auto mid = build_grid(16, 8, 16.0, 8.0);
    std::vector<double> xs(mid->cell_count()), ys(mid->cell_count());
    for (int j = 0; j < mid->ny(); ++j)
        for (int i = 0; i < mid->nx(); ++i) {
            xs[mid->index(i, j)] = mid->center_x(i);
            ys[mid->index(i, j)] = mid->center_y(j);
        }
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> pp(mid->cell_count()), qq(mid->cell_count());
        for (auto& v : pp) v = rng.next_double();
        for (auto& v : qq) v = rng.next_double();
        auto mine = wasserstein1_cells(*mid, pp, qq).distance;
        auto ref = oracles::w1_ssp(pp, qq, xs, ys);
        if (std::abs(mine - ref) > 1e-8 * (1 + ref)) {
            std::printf("W1 MISMATCH: mine=%.12f ref=%.12f\n", mine, ref);
            ++fails;
        }
    }
    std::printf("grid W1 oracle trials: %s\n", fails ? "FAIL" : "ok");
    return fails ? 1 : 0;
}
// extra: pivot stats at desk scale
#include <cstdio>
