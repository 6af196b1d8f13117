#pragma once

// Brownian block increments and the two families of area increments: the
// bridge-subsampled reference draw of the true second iterated integral, and
// the Gaussian moment-matched substitute z_k W_l - z_l W_k + lambda_kl.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pabel/rng.hpp"

namespace pabel {

// Lexicographic index of the ordered pair (k,l), 0 <= k < l < d.
inline int pair_index(int d, int k, int l) {
    if (!(0 <= k && k < l && l < d)) throw std::invalid_argument("pair_index: need 0 <= k < l < d");
    int idx = 0;
    for (int a = 0; a < k; ++a) idx += d - 1 - a;
    return idx + (l - k - 1);
}

inline int pair_count(int d) { return d * (d - 1) / 2; }

struct BrownianBlocks {
    int n = 0;
    int d = 0;
    double h = 0.0;
    std::vector<double> w;  // n x d, block-major

    double& at(int j, int k) { return w[std::size_t(j) * d + k]; }
    double at(int j, int k) const { return w[std::size_t(j) * d + k]; }
};

struct AreaBlocks {
    int n = 0;
    int d = 0;
    std::vector<double> a;  // n x pair_count(d), block-major, (k<l) lexicographic

    double& at(int j, int p) { return a[std::size_t(j) * pair_count(d) + p]; }
    double at(int j, int p) const { return a[std::size_t(j) * pair_count(d) + p]; }
};

inline BrownianBlocks sample_brownian(int n, int d, double h, RngStream& rng) {
    if (n < 1 || d < 1 || h <= 0.0) throw std::invalid_argument("sample_brownian: need n,d >= 1 and h > 0");
    BrownianBlocks b;
    b.n = n;
    b.d = d;
    b.h = h;
    b.w.resize(std::size_t(n) * d);
    const double s = std::sqrt(h);
    for (auto& v : b.w) v = s * rng.next_gaussian();
    return b;
}

// B_kl = z_k W_l - z_l W_k + lambda_kl with z ~ N(0, h/12 I_d) and
// lambda_kl ~ N(0, h^2/12), all freshly drawn and independent of W.
struct GaussianAreaSample {
    AreaBlocks areas;
    std::vector<double> z;       // n x d
    std::vector<double> lambda;  // n x pair_count(d)

    double z_at(int j, int k) const { return z[std::size_t(j) * areas.d + k]; }
    double lambda_at(int j, int p) const { return lambda[std::size_t(j) * pair_count(areas.d) + p]; }
};

inline GaussianAreaSample sample_gaussian_area_parts(const BrownianBlocks& w, RngStream& rng) {
    GaussianAreaSample out;
    out.areas.n = w.n;
    out.areas.d = w.d;
    out.areas.a.resize(std::size_t(w.n) * pair_count(w.d));
    out.z.resize(std::size_t(w.n) * w.d);
    out.lambda.resize(std::size_t(w.n) * pair_count(w.d));
    const double sz = std::sqrt(w.h / 12.0);
    const double sl = w.h / std::sqrt(12.0);
    for (int j = 0; j < w.n; ++j) {
        for (int k = 0; k < w.d; ++k) out.z[std::size_t(j) * w.d + k] = sz * rng.next_gaussian();
        int p = 0;
        for (int k = 0; k < w.d; ++k)
            for (int l = k + 1; l < w.d; ++l, ++p) {
                const double lam = sl * rng.next_gaussian();
                out.lambda[std::size_t(j) * pair_count(w.d) + p] = lam;
                out.areas.at(j, p) = out.z_at(j, k) * w.at(j, l) - out.z_at(j, l) * w.at(j, k) + lam;
            }
    }
    return out;
}

inline AreaBlocks sample_gaussian_area(const BrownianBlocks& w, RngStream& rng) {
    return sample_gaussian_area_parts(w, rng).areas;
}

// Reference draw of the true areas conditional on the block increments, via
// an M-point Brownian-bridge discretization of each block. The draw is the
// exact area of the sampled polygon, so its conditional law converges to the
// true one as M grows; the zeta / K decomposition parts are returned for the
// moment identities. Exact discretization variances:
//   Var(A)    = (1 - 1/M)        h^2/4
//   Var(zeta) = (1 - 1/M^2)      h/12
//   Var(K)    = (1 - 3/M + 2/M^2) h^2/12
struct BridgeAreaSample {
    AreaBlocks areas;
    std::vector<double> zeta;    // n x d
    std::vector<double> kresid;  // n x pair_count(d)

    double zeta_at(int j, int k) const { return zeta[std::size_t(j) * areas.d + k]; }
    double k_at(int j, int p) const { return kresid[std::size_t(j) * pair_count(areas.d) + p]; }
};

inline BridgeAreaSample sample_area_reference(const BrownianBlocks& w, int m_sub, RngStream& rng) {
    if (m_sub < 2) throw std::invalid_argument("sample_area_reference: need M >= 2 sub-steps");
    const int d = w.d;
    const int np = pair_count(d);
    BridgeAreaSample out;
    out.areas.n = w.n;
    out.areas.d = d;
    out.areas.a.assign(std::size_t(w.n) * np, 0.0);
    out.zeta.assign(std::size_t(w.n) * d, 0.0);
    out.kresid.assign(std::size_t(w.n) * np, 0.0);

    const double sq = std::sqrt(1.0 / m_sub);
    const double sh = std::sqrt(w.h);
    std::vector<double> bridge(std::size_t(d) * (m_sub + 1));  // standard bridges, coord-major
    auto bref = [&](int k, int i) -> double& { return bridge[std::size_t(k) * (m_sub + 1) + i]; };
    std::vector<double> path(std::size_t(d) * (m_sub + 1));
    auto pref = [&](int k, int i) -> double& { return path[std::size_t(k) * (m_sub + 1) + i]; };

    for (int j = 0; j < w.n; ++j) {
        for (int k = 0; k < d; ++k) {
            bref(k, 0) = 0.0;
            for (int i = 1; i <= m_sub; ++i) bref(k, i) = bref(k, i - 1) + sq * rng.next_gaussian();
            const double endv = bref(k, m_sub);
            for (int i = 0; i <= m_sub; ++i) {
                bref(k, i) -= (double(i) / m_sub) * endv;
                pref(k, i) = sh * bref(k, i) + (double(i) / m_sub) * w.at(j, k);
            }
            // zeta_k = sqrt(h) * int_0^1 B_k dt, exact for the polygon
            double integral = 0.0;
            for (int i = 1; i < m_sub; ++i) integral += bref(k, i);
            out.zeta[std::size_t(j) * d + k] = sh * integral / m_sub;
        }
        int p = 0;
        for (int k = 0; k < d; ++k)
            for (int l = k + 1; l < d; ++l, ++p) {
                double area = 0.0;
                for (int i = 0; i < m_sub; ++i) {
                    const double dk = pref(k, i + 1) - pref(k, i);
                    const double dl = pref(l, i + 1) - pref(l, i);
                    area += pref(k, i) * dl - pref(l, i) * dk;
                }
                area *= 0.5;
                out.areas.at(j, p) = area;
                out.kresid[std::size_t(j) * np + p] = area -
                    out.zeta_at(j, k) * w.at(j, l) + out.zeta_at(j, l) * w.at(j, k);
            }
    }
    return out;
}

}  // namespace pabel
