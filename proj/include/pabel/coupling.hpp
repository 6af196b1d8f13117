#pragma once

// Dyadic coupling of true area increments with their Gaussian substitutes,
// conditional on shared Brownian increments. The construction works per area
// coordinate: a dyadic tree over the blocks carries, at each node, the
// conditional law of the true-area sum (as a characteristic-function table)
// and the conditional variance of the Gaussian side. Going down the tree,
// one uniform per node drives both quantile maps - the numerical inverse of
// the conditional-given-parent law on the true side, the exact conditional
// Gaussian quantile on the substitute side - so partial sums over dyadic
// sets stay coupled at O(h) while both marginals keep their own laws.
//
// d = 2 has a single coordinate and the construction is exact. For d > 2
// the coordinates are coupled independently given W (exact per-coordinate
// marginals; cross-coordinate conditional correlations are dropped and
// reported by the diagnostics tests).

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pabel/area_cf.hpp"
#include "pabel/brownian.hpp"
#include "pabel/rng.hpp"

namespace pabel {

enum class CouplingMode { exact_2d, approx_nd };

inline std::string to_string(CouplingMode m) {
    return m == CouplingMode::exact_2d ? "exact-2d" : "approx-nd";
}

// ||gamma_E - lambda_E|| per dyadic set, Frobenius over area coordinates.
struct CouplingDiagnostics {
    int m = 0;
    // dev[n][k] for the set {k 2^n, ..., (k+1) 2^n - 1}
    std::vector<std::vector<double>> dev;

    double max_dev_at_scale(int n) const {
        double best = 0.0;
        for (double v : dev[n]) best = std::max(best, v);
        return best;
    }
};

struct CoupledDriver {
    BrownianBlocks w;
    AreaBlocks a;  // true areas (conditional law, to quadrature accuracy)
    AreaBlocks b;  // Gaussian substitutes (exactly conditionally Gaussian)
    int m = 0;
    CouplingMode mode = CouplingMode::exact_2d;
    CouplingDiagnostics diag;

    // max over j of || sum_{k<j} (A - B) || (Frobenius over coordinates)
    double max_prefix_deviation() const {
        const int np = pair_count(w.d);
        std::vector<double> acc(np, 0.0);
        double best = 0.0;
        for (int j = 0; j < w.n; ++j) {
            double s = 0.0;
            for (int p = 0; p < np; ++p) {
                acc[p] += a.at(j, p) - b.at(j, p);
                s += acc[p] * acc[p];
            }
            best = std::max(best, std::sqrt(s));
        }
        return best;
    }
};

namespace detail {

inline void fill_diagnostics(CoupledDriver& drv) {
    const int np = pair_count(drv.w.d);
    const int n_blocks = drv.w.n;
    drv.diag.m = drv.m;
    drv.diag.dev.assign(drv.m + 1, {});
    // bottom-up pairwise sums of the per-coordinate differences
    std::vector<double> cur(std::size_t(n_blocks) * np);
    for (int j = 0; j < n_blocks; ++j)
        for (int p = 0; p < np; ++p) cur[std::size_t(j) * np + p] = drv.a.at(j, p) - drv.b.at(j, p);
    int sets = n_blocks;
    for (int n = 0; n <= drv.m; ++n) {
        drv.diag.dev[n].resize(sets);
        for (int k = 0; k < sets; ++k) {
            double s = 0.0;
            for (int p = 0; p < np; ++p) {
                double v = cur[std::size_t(k) * np + p];
                s += v * v;
            }
            drv.diag.dev[n][k] = std::sqrt(s);
        }
        if (n == drv.m) break;
        for (int k = 0; k < sets / 2; ++k)
            for (int p = 0; p < np; ++p)
                cur[std::size_t(k) * np + p] =
                    cur[std::size_t(2 * k) * np + p] + cur[std::size_t(2 * k + 1) * np + p];
        sets /= 2;
    }
}

// One coordinate pair's dyadic tree. Uniform consumption order: root, then
// levels top-down, nodes left-to-right.
inline void couple_pair(const BrownianBlocks& w, int ck, int cl, CoupledDriver& out, int pair_idx,
                        RngStream& rng) {
    const int m = out.m;
    const int n_blocks = w.n;
    const double h = w.h;

    // bottom-up: CF tables and variances per level
    std::vector<std::vector<double>> phi(m + 1), var(m + 1);
    phi[0].resize(std::size_t(n_blocks) * areacf::kNTheta);
    var[0].resize(n_blocks);
    for (int j = 0; j < n_blocks; ++j) {
        const double wk = w.at(j, ck), wl = w.at(j, cl);
        const double c = (wk * wk + wl * wl) / (2.0 * h);
        var[0][j] = h * h * (1.0 + 2.0 * c) / 12.0;
        areacf::leaf_phi(c, std::span<double>(phi[0]).subspan(std::size_t(j) * areacf::kNTheta,
                                                              areacf::kNTheta));
    }
    for (int n = 1; n <= m; ++n) {
        const int sets = n_blocks >> n;
        phi[n].resize(std::size_t(sets) * areacf::kNTheta);
        var[n].resize(sets);
        for (int k = 0; k < sets; ++k) {
            const double vl = var[n - 1][2 * k], vr = var[n - 1][2 * k + 1];
            var[n][k] = vl + vr;
            const double sp = std::sqrt(var[n][k]);
            auto pl = std::span<const double>(phi[n - 1]).subspan(
                std::size_t(2 * k) * areacf::kNTheta, areacf::kNTheta);
            auto pr = std::span<const double>(phi[n - 1]).subspan(
                std::size_t(2 * k + 1) * areacf::kNTheta, areacf::kNTheta);
            areacf::combine_phi(pl, std::sqrt(vl) / sp, pr, std::sqrt(vr) / sp,
                                std::span<double>(phi[n]).subspan(std::size_t(k) * areacf::kNTheta,
                                                                  areacf::kNTheta));
        }
    }

    // top-down: gamma (true side) and lambda (Gaussian side) per level
    std::vector<double> f_root(areacf::kNX), f_l(areacf::kNX), f_r(areacf::kNX);
    std::vector<std::vector<double>> gamma(m + 1), lambda(m + 1);
    {
        const double u0 = rng.next_uniform();
        const double s_root = std::sqrt(var[m][0]);
        areacf::density_from_phi(phi[m], f_root);
        gamma[m] = {areacf::quantile_from_phi(phi[m], f_root, u0) * s_root};
        lambda[m] = {s_root * normal_quantile(u0)};
    }
    for (int n = m; n >= 1; --n) {
        const int sets = n_blocks >> n;
        gamma[n - 1].resize(std::size_t(sets) * 2);
        lambda[n - 1].resize(std::size_t(sets) * 2);
        for (int k = 0; k < sets; ++k) {
            const double u = rng.next_uniform();
            const double vl = var[n - 1][2 * k], vr = var[n - 1][2 * k + 1];
            const double sl = std::sqrt(vl), sr = std::sqrt(vr);
            areacf::density_from_phi(std::span<const double>(phi[n - 1]).subspan(
                                         std::size_t(2 * k) * areacf::kNTheta, areacf::kNTheta),
                                     f_l);
            areacf::density_from_phi(std::span<const double>(phi[n - 1]).subspan(
                                         std::size_t(2 * k + 1) * areacf::kNTheta, areacf::kNTheta),
                                     f_r);
            const double gsum = gamma[n][k];
            const double lsum = lambda[n][k];
            // true side: numerical quantile of gamma_L | gamma_E, scaled to units of gamma
            double gl = areacf::conditional_quantile(f_l, sl, f_r, sr, gsum, u);
            // substitute side: exact conditional Gaussian with the same uniform
            double ll = (vl / (vl + vr)) * lsum + std::sqrt(vl * vr / (vl + vr)) * normal_quantile(u);
            gamma[n - 1][2 * k] = gl;
            gamma[n - 1][2 * k + 1] = gsum - gl;
            lambda[n - 1][2 * k] = ll;
            lambda[n - 1][2 * k + 1] = lsum - ll;
        }
    }
    for (int j = 0; j < n_blocks; ++j) {
        out.a.at(j, pair_idx) = gamma[0][j];
        out.b.at(j, pair_idx) = lambda[0][j];
    }
}

}  // namespace detail

// Jointly samples (W, A, B) on N = 2^m blocks of length h = 2^-m; pure
// function of (seed, replication, m, d, mode).
inline CoupledDriver dyadic_coupling(int m, int d, std::uint64_t seed, std::uint64_t replication,
                                     CouplingMode mode) {
    if (m < 0 || m > 24) throw std::invalid_argument("dyadic_coupling: m out of range");
    if (d < 2) throw std::invalid_argument("dyadic_coupling: need d >= 2");
    if (mode == CouplingMode::exact_2d && d != 2)
        throw std::invalid_argument("dyadic_coupling: exact-2d mode requires d = 2");
    const int n_blocks = 1 << m;
    const double h = 1.0 / double(n_blocks);

    CoupledDriver drv;
    drv.m = m;
    drv.mode = mode;
    auto wrng = RngStream::derive(seed, replication, 0);
    drv.w = sample_brownian(n_blocks, d, h, wrng);
    drv.a.n = drv.b.n = n_blocks;
    drv.a.d = drv.b.d = d;
    drv.a.a.assign(std::size_t(n_blocks) * pair_count(d), 0.0);
    drv.b.a.assign(std::size_t(n_blocks) * pair_count(d), 0.0);

    auto arng = RngStream::derive(seed, replication, 1);
    int p = 0;
    for (int k = 0; k < d; ++k)
        for (int l = k + 1; l < d; ++l, ++p) detail::couple_pair(drv.w, k, l, drv, p, arng);
    detail::fill_diagnostics(drv);
    return drv;
}

// Independent-resampling baseline: same W stream, but A and B drawn with no
// shared randomness (A per-coordinate from the exact conditional law, B from
// the z/lambda formula).
inline CoupledDriver independent_driver(int m, int d, std::uint64_t seed, std::uint64_t replication) {
    if (m < 0 || m > 24) throw std::invalid_argument("independent_driver: m out of range");
    if (d < 2) throw std::invalid_argument("independent_driver: need d >= 2");
    const int n_blocks = 1 << m;
    const double h = 1.0 / double(n_blocks);

    CoupledDriver drv;
    drv.m = m;
    drv.mode = CouplingMode::approx_nd;
    auto wrng = RngStream::derive(seed, replication, 0);
    drv.w = sample_brownian(n_blocks, d, h, wrng);

    auto arng = RngStream::derive(seed, replication, 2);
    const auto& table = Area2dTable::instance();
    drv.a.n = n_blocks;
    drv.a.d = d;
    drv.a.a.resize(std::size_t(n_blocks) * pair_count(d));
    for (int j = 0; j < n_blocks; ++j) {
        int p = 0;
        for (int k = 0; k < d; ++k)
            for (int l = k + 1; l < d; ++l, ++p) {
                const double wk = drv.w.at(j, k), wl = drv.w.at(j, l);
                drv.a.at(j, p) = table.sample((wk * wk + wl * wl) / h, h, arng.next_uniform());
            }
    }
    drv.b = sample_gaussian_area(drv.w, arng);
    detail::fill_diagnostics(drv);
    return drv;
}

// --- block covariance machinery (diagnostics and bounds) -------------------

struct BlockCovariance {
    int d = 0;
    int npairs = 0;
    std::vector<double> h_matrix;             // npairs x npairs, row-major
    std::vector<std::vector<double>> g_rows;  // per block r in E: npairs x (d + npairs)

    double h_at(int i, int j) const { return h_matrix[std::size_t(i) * npairs + j]; }
};

// H_E = 2^-n sum_{r in E} G_r G_r^t with G_r = 12^{-1/2} [M_r | I]; E is the
// dyadic set {start, ..., start + size - 1}.
inline BlockCovariance build_block_covariance(const BrownianBlocks& w, int start, int size) {
    if (size < 1 || (size & (size - 1)) != 0 || start % size != 0 || start + size > w.n)
        throw std::invalid_argument("build_block_covariance: E must be a dyadic set");
    const int d = w.d;
    const int np = pair_count(d);
    BlockCovariance out;
    out.d = d;
    out.npairs = np;
    out.h_matrix.assign(std::size_t(np) * np, 0.0);
    const double sh = 1.0 / std::sqrt(w.h);
    for (int r = start; r < start + size; ++r) {
        std::vector<double> g(std::size_t(np) * (d + np), 0.0);
        int p = 0;
        for (int k = 0; k < d; ++k)
            for (int l = k + 1; l < d; ++l, ++p) {
                g[std::size_t(p) * (d + np) + k] = sh * w.at(r, l) / std::sqrt(12.0);
                g[std::size_t(p) * (d + np) + l] = -sh * w.at(r, k) / std::sqrt(12.0);
                g[std::size_t(p) * (d + np) + d + p] = 1.0 / std::sqrt(12.0);
            }
        for (int i = 0; i < np; ++i)
            for (int j = 0; j < np; ++j) {
                double s = 0.0;
                for (int c = 0; c < d + np; ++c)
                    s += g[std::size_t(i) * (d + np) + c] * g[std::size_t(j) * (d + np) + c];
                out.h_matrix[std::size_t(i) * np + j] += s / double(size);
            }
        out.g_rows.push_back(std::move(g));
    }
    return out;
}

// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
inline std::vector<double> sym_eigenvalues(std::vector<double> a, int n) {
    auto at = [&](int i, int j) -> double& { return a[std::size_t(i) * n + j]; };
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
        if (off < 1e-28) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(at(p, q)) < 1e-300) continue;
                const double theta = (at(q, q) - at(p, p)) / (2.0 * at(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int i = 0; i < n; ++i) {
                    const double aip = at(i, p), aiq = at(i, q);
                    at(i, p) = c * aip - s * aiq;
                    at(i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    const double api = at(p, i), aqi = at(q, i);
                    at(p, i) = c * api - s * aqi;
                    at(q, i) = s * api + c * aqi;
                }
            }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = at(i, i);
    return ev;
}

}  // namespace pabel
