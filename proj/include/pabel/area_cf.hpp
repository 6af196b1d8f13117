#pragma once

// Conditional law of a single-block area increment given the block's
// Brownian increment, and Fourier-side machinery for sums of such blocks.
//
// For a 2-plane increment w over a block of length h, the conditional
// characteristic function is the classical
//     phi(theta) = (b/sinh b) * exp(-c (b coth b - 1)),  b = theta h / 2,
// with c = |w|^2 / (2h). All tables are kept in standardized coordinates
// omega = theta * s (s = conditional standard deviation), so one cosine
// matrix serves every node of a dyadic tree. Densities come from the cosine
// transform f(u) = (1/pi) int phi * cos(omega u) domega on a half grid
// (every law here is symmetric), conditional-on-sum quantiles from a scan of
// f_L(y) f_R(s - y).

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "pabel/rng.hpp"
#include "pabel/stats.hpp"

namespace pabel {
namespace areacf {

inline constexpr int kNTheta = 164;
inline constexpr double kDOmega = 0.16;   // omega_max ~ 26
inline constexpr int kNX = 176;
inline constexpr double kDU = 0.08;       // u_max = 14

// Shared cos(k d_omega * j d_u) matrix, row-major over x.
inline const std::vector<double>& cos_matrix() {
    static const std::vector<double> m = [] {
        std::vector<double> v(std::size_t(kNX) * kNTheta);
        for (int j = 0; j < kNX; ++j)
            for (int k = 0; k < kNTheta; ++k)
                v[std::size_t(j) * kNTheta + k] = std::cos(k * kDOmega * j * kDU);
        return v;
    }();
    return m;
}

// Standardized leaf log-CF on the omega grid; c = |w|^2 / (2h). The leaf's
// standard deviation is s^2 = h^2 (1 + 2c) / 12, so b = omega h / (2s).
// Every law in this family has a strictly positive CF, and working with
// log phi keeps interpolation errors relative: cubic resampling is exact on
// Gaussian log-CFs (they are quadratic), so density tails stay clean however
// deep the tree is.
inline void leaf_phi(double c, std::span<double> out) {
    const double bfac = std::sqrt(3.0 / (1.0 + 2.0 * c));
    out[0] = 0.0;
    for (int k = 1; k < kNTheta; ++k) {
        const double b = k * kDOmega * bfac;
        // log(b / sinh b) computed via log1p for stability at large b
        const double log_base = std::log(b) - (b + std::log1p(-std::exp(-2.0 * b)) - std::log(2.0));
        const double coth = (1.0 + std::exp(-2.0 * b)) / (1.0 - std::exp(-2.0 * b));
        const double g = b * coth - 1.0;
        out[k] = log_base - c * g;
        if (out[k] < -120.0) {
            // fully decayed: extend the asymptotically linear tail analytically
            const double slope = out[k] - out[k - 1];
            for (int j = k + 1; j < kNTheta; ++j) out[j] = out[j - 1] + slope;
            return;
        }
    }
}

// Even 6-point Lagrange interpolation of a half-grid table at fractional
// index x >= 0 (even reflection across 0). Quintic order keeps the
// interpolation error of near-Gaussian log-CFs far below the density tails;
// out-of-range queries extrapolate linearly (log-CF tails are irrelevant by
// then).
inline double interp_even(std::span<const double> tab, double x) {
    const int n = int(tab.size());
    if (x >= double(n - 3)) {
        double t = x - double(n - 2);
        return tab[n - 2] * (1.0 - t) + tab[n - 1] * t;
    }
    const int i = int(x);
    const double t = x - i;
    auto at = [&](int idx) { return tab[idx < 0 ? -idx : idx]; };
    // nodes i-2 .. i+3, offsets u = t + 2 - j for node j
    const double y[6] = {at(i - 2), at(i - 1), at(i), at(i + 1), at(i + 2), at(i + 3)};
    static const double denom[6] = {-120.0, 24.0, -12.0, 12.0, -24.0, 120.0};
    double prod[6];
    double full = 1.0;
    for (int j = 0; j < 6; ++j) {
        double uj = t + 2.0 - j;
        prod[j] = uj;
        full *= uj;
    }
    if (full == 0.0) return y[int(t) + 2];  // t == 0 lands exactly on node i
    double acc = 0.0;
    for (int j = 0; j < 6; ++j) acc += y[j] * (full / prod[j]) / denom[j];
    return acc;
}

// log-CF of a sum of two independent symmetric laws, on the parent's grid.
// ratio_* = s_child / s_parent (< 1).
inline void combine_phi(std::span<const double> logphi_l, double ratio_l,
                        std::span<const double> logphi_r, double ratio_r, std::span<double> out) {
    out[0] = 0.0;
    for (int k = 1; k < kNTheta; ++k)
        out[k] = interp_even(logphi_l, k * ratio_l) + interp_even(logphi_r, k * ratio_r);
}

// Density on the standardized half grid from a log-CF table; trapezoid in
// omega, clamped at zero (far-tail cosine ringing). The dot product runs in
// four fixed-association lanes so it vectorizes while staying deterministic.
inline void density_from_phi(std::span<const double> logphi, std::span<double> out_f) {
    const auto& cm = cos_matrix();
    double phi[kNTheta];
    int keff = kNTheta;
    for (int k = 0; k < kNTheta; ++k) {
        if (logphi[k] < -50.0) {
            keff = k;  // below 2e-22: nothing left to integrate
            break;
        }
        phi[k] = std::exp(logphi[k]);
    }
    phi[0] *= 0.5;  // trapezoid end weight
    for (int k = keff; k < kNTheta; ++k) phi[k] = 0.0;
    const int kpad = (keff + 3) & ~3;
    for (int j = 0; j < kNX; ++j) {
        const double* row = cm.data() + std::size_t(j) * kNTheta;
        double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
        for (int k = 0; k < kpad; k += 4) {
            a0 += phi[k] * row[k];
            a1 += phi[k + 1] * row[k + 1];
            a2 += phi[k + 2] * row[k + 2];
            a3 += phi[k + 3] * row[k + 3];
        }
        const double acc = (a0 + a1) + (a2 + a3);
        out_f[j] = std::max(0.0, acc * kDOmega / (3.14159265358979323846));
    }
}

// 4-point interpolation of a half-grid density at |u| (standardized), with
// even reflection at zero; clamped at 0 to keep tail ringing out of the
// conditional scans.
inline double density_at(std::span<const double> f, double u) {
    double x = std::abs(u) / kDU;
    if (x >= double(kNX - 2)) {
        if (x >= double(kNX - 1)) return 0.0;
        double t = x - double(kNX - 2);
        return f[kNX - 2] * (1.0 - t) + f[kNX - 1] * t;
    }
    const int i = int(x);
    const double t = x - i;
    const double ym1 = (i == 0) ? f[1] : f[i - 1];
    const double y0 = f[i];
    const double y1 = f[i + 1];
    const double y2 = f[i + 2];
    const double a = -ym1 / 6.0 + y0 / 2.0 - y1 / 2.0 + y2 / 6.0;
    const double b = ym1 / 2.0 - y0 + y1 / 2.0;
    const double c = -ym1 / 3.0 - y0 / 2.0 + y1 - y2 / 6.0;
    return std::max(0.0, ((a * t + b) * t + c) * t + y0);
}

// Inverts one trapezoid cell: find t in [0,1] with
// f0 t + (f1 - f0) t^2 / 2 = target/width (the cell cdf is exactly quadratic).
inline double invert_cell(double f0, double f1, double cell_mass, double target) {
    if (cell_mass <= 0.0) return 0.5;
    double r = target / cell_mass;  // in [0,1]
    const double a = 0.5 * (f1 - f0);
    if (std::abs(a) < 1e-14 * (std::abs(f0) + 1e-300)) return r;
    // solve a t^2 + f0 t - r (f0 + a) = 0 for t in [0,1]
    const double c = -r * (f0 + a);
    const double disc = f0 * f0 - 4.0 * a * c;
    if (disc < 0.0) return r;
    const double sq = std::sqrt(disc);
    double t = (-f0 + sq) / (2.0 * a);
    if (t < 0.0 || t > 1.0) t = (-f0 - sq) / (2.0 * a);
    if (!(t >= 0.0 && t <= 1.0)) t = r;
    return t;
}

// Quantile of the symmetric density (standardized units).
inline double symmetric_quantile(std::span<const double> f, double u) {
    // prefix trapezoid over [0, u_max]
    double total_half = 0.0;
    for (int j = 0; j + 1 < kNX; ++j) total_half += 0.5 * (f[j] + f[j + 1]) * kDU;
    if (total_half <= 0.0) throw std::runtime_error("symmetric_quantile: degenerate density");
    double target = (u - 0.5) * 2.0 * total_half;
    const double sign = (target < 0.0) ? -1.0 : 1.0;
    target = std::abs(target);
    double acc = 0.0;
    for (int j = 0; j + 1 < kNX; ++j) {
        double cell = 0.5 * (f[j] + f[j + 1]) * kDU;
        if (acc + cell >= target) {
            double t = invert_cell(f[j], f[j + 1], cell, target - acc);
            return sign * (j + t) * kDU;
        }
        acc += cell;
    }
    return sign * (kNX - 1) * kDU;
}

// Index past which a density table holds no mass worth scanning.
inline int density_support(std::span<const double> f) {
    int last = kNX - 1;
    while (last > 1 && f[last] < 1e-16) --last;
    return last + 1;
}

// Quantile of the law of Y_L given Y_L + Y_R = s, where Y_L, Y_R are
// independent with standardized half-grid densities f_l, f_r and standard
// deviations s_l, s_r. Returns the value of Y_L in absolute units. The scan
// runs at half the table step over the joint support; both factors are
// interpolated at quartic order, the cell inversion is quadratic.
inline double conditional_quantile(std::span<const double> f_l, double s_l, std::span<const double> f_r,
                                   double s_r, double s, double u) {
    constexpr int kHalfSteps = 2 * (2 * kNX - 1) - 1;
    constexpr int kCenter = kHalfSteps / 2;
    constexpr double kStep = kDU / 2.0;
    // restrict the scan to where both factors carry mass
    const double sup_l = density_support(f_l) * kDU;
    const double sup_r = density_support(f_r) * kDU;
    double lo = std::max(-sup_l, (s - sup_r * s_r) / s_l);
    double hi = std::min(sup_l, (s + sup_r * s_r) / s_l);
    int ilo = std::max(0, kCenter + int(std::floor(lo / kStep)) - 1);
    int ihi = std::min(kHalfSteps - 1, kCenter + int(std::ceil(hi / kStep)) + 1);
    double g[kHalfSteps];
    for (int i = ilo; i <= ihi; ++i) {
        const double ustd = (i - kCenter) * kStep;
        const double y = ustd * s_l;
        g[i] = density_at(f_l, ustd) * density_at(f_r, (s - y) / s_r);
    }
    double total = 0.0;
    for (int i = ilo; i < ihi; ++i) total += 0.5 * (g[i] + g[i + 1]);
    if (total <= 0.0) {
        // numerically empty overlap (far-tail s): fall back to the Gaussian map
        const double vl = s_l * s_l, vr = s_r * s_r;
        return (vl / (vl + vr)) * s + std::sqrt(vl * vr / (vl + vr)) * normal_quantile(u);
    }
    double target = u * total;
    double acc = 0.0;
    for (int i = ilo; i < ihi; ++i) {
        double cell = 0.5 * (g[i] + g[i + 1]);
        if (acc + cell >= target) {
            double t = invert_cell(g[i], g[i + 1], cell, target - acc);
            return ((i + t) - kCenter) * kStep * s_l;
        }
        acc += cell;
    }
    return (ihi - kCenter) * kStep * s_l;
}

// Quantile of the symmetric law itself, from its log-CF: a grid inversion
// polished by Newton steps on the spectrally evaluated cdf
//   F(u) = 1/2 + (1/pi) int phi(w) sin(w u) / w dw.
inline double quantile_from_phi(std::span<const double> logphi, std::span<const double> f, double u) {
    double x = symmetric_quantile(f, u);
    double phi[kNTheta];
    int keff = kNTheta;
    for (int k = 0; k < kNTheta; ++k) {
        if (logphi[k] < -50.0) {
            keff = k;
            break;
        }
        phi[k] = std::exp(logphi[k]);
    }
    for (int iter = 0; iter < 3; ++iter) {
        double cdf = 0.5 + (kDOmega / 3.14159265358979323846) * 0.5 * x;  // k = 0 limit term
        double pdf = 0.5 * kDOmega / 3.14159265358979323846;
        for (int k = 1; k < keff; ++k) {
            const double w = k * kDOmega;
            cdf += (kDOmega / 3.14159265358979323846) * phi[k] * std::sin(w * x) / w;
            pdf += (kDOmega / 3.14159265358979323846) * phi[k] * std::cos(w * x);
        }
        if (pdf <= 1e-12) break;
        double step = (cdf - u) / pdf;
        step = std::clamp(step, -4.0 * kDU, 4.0 * kDU);
        x -= step;
        if (std::abs(step) < 1e-12) break;
    }
    return x;
}

}  // namespace areacf

// Exact single-block area sampler for a 2-plane increment: quantiles of the
// conditional law, tabulated over r = |w|^2/h and a Gaussian-score axis, and
// interpolated. Values are in units of h and normalized by the conditional
// standard deviation, which removes the dominant r-dependence.
class Area2dTable {
  public:
    static const Area2dTable& instance() {
        static Area2dTable t;
        return t;
    }

    // One uniform in, one conditional area draw (in absolute units) out.
    double sample(double w_sq_over_h, double h, double u) const {
        double v = normal_quantile(u);
        v = std::clamp(v, -kVMax, kVMax);
        double r = std::clamp(w_sq_over_h, 0.0, kRMax);
        double xr = r / kDR;
        int ir = std::min(int(xr), kNR - 2);
        double tr = xr - ir;
        double xv = (v + kVMax) / kDV;
        int iv = std::min(int(xv), kNV - 2);
        double tv = xv - iv;
        double q = (1.0 - tr) * ((1.0 - tv) * q_[idx(ir, iv)] + tv * q_[idx(ir, iv + 1)]) +
                   tr * ((1.0 - tv) * q_[idx(ir + 1, iv)] + tv * q_[idx(ir + 1, iv + 1)]);
        return q * std::sqrt((1.0 + w_sq_over_h) / 12.0) * h;
    }

  private:
    static constexpr int kNR = 129;
    static constexpr double kRMax = 64.0;
    static constexpr double kDR = kRMax / (kNR - 1);
    static constexpr int kNV = 241;
    static constexpr double kVMax = 6.0;
    static constexpr double kDV = 2.0 * kVMax / (kNV - 1);

    static std::size_t idx(int ir, int iv) { return std::size_t(ir) * kNV + iv; }

    Area2dTable() : q_(std::size_t(kNR) * kNV) {
        std::vector<double> phi(areacf::kNTheta), f(areacf::kNX);
        for (int ir = 0; ir < kNR; ++ir) {
            const double r = ir * kDR;
            areacf::leaf_phi(r / 2.0, phi);
            areacf::density_from_phi(phi, f);
            for (int iv = 0; iv < kNV; ++iv) {
                const double u = normal_cdf(-kVMax + iv * kDV);
                q_[idx(ir, iv)] = areacf::symmetric_quantile(f, u);
            }
        }
    }

    std::vector<double> q_;
};

}  // namespace pabel
