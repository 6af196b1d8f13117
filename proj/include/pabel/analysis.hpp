#pragma once

// Error estimators over paired Monte Carlo path samples, the exact empirical
// 1-D Wasserstein distance, and log-log slope fitting. Estimators reduce
// with compensated sums in replication order, so values are independent of
// how the samples were produced in parallel.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "pabel/schemes.hpp"
#include "pabel/stats.hpp"

namespace pabel {

struct ErrorSummary {
    double h = 0.0;
    std::string pair;       // "scheme-a vs scheme-b"
    std::string estimator;  // strong-max | fixed-time
    double value = 0.0;
    double std_error = 0.0;
    int n = 0;
};

namespace detail {

inline void check_paired(const std::vector<SchemePath>& a, const std::vector<SchemePath>& b) {
    if (a.empty() || a.size() != b.size()) throw std::invalid_argument("estimator: unpaired inputs");
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].n != b[i].n || a[i].q != b[i].q || a[i].h != b[i].h)
            throw std::invalid_argument("estimator: unpaired inputs (grid mismatch)");
}

inline double sq_dist(const SchemePath& a, const SchemePath& b, int j) {
    double s = 0.0;
    for (int i = 0; i < a.q; ++i) {
        double d = a.at(j, i) - b.at(j, i);
        s += d * d;
    }
    return s;
}

}  // namespace detail

// E[ max_j ||a_j - b_j||^2 ]^{1/2} over paired replications.
inline ErrorSummary strong_error_max(const std::vector<SchemePath>& a, const std::vector<SchemePath>& b) {
    detail::check_paired(a, b);
    std::vector<double> maxsq(a.size());
    for (std::size_t r = 0; r < a.size(); ++r) {
        double m = 0.0;
        for (int j = 1; j <= a[r].n; ++j) m = std::max(m, detail::sq_dist(a[r], b[r], j));
        maxsq[r] = m;
    }
    auto mo = moments(maxsq);
    ErrorSummary e;
    e.h = a[0].h;
    e.pair = a[0].scheme + " vs " + b[0].scheme;
    e.estimator = "strong-max";
    e.value = std::sqrt(std::max(0.0, mo.mean));
    e.std_error = (e.value > 0.0) ? mo.se_mean / (2.0 * e.value) : mo.se_mean;
    e.n = int(a.size());
    return e;
}

// max_j E[ ||a_j - b_j||^2 ]^{1/2}: the weaker fixed-time variant.
inline ErrorSummary fixed_time_error(const std::vector<SchemePath>& a, const std::vector<SchemePath>& b) {
    detail::check_paired(a, b);
    const int n = a[0].n;
    double best = -1.0;
    int best_j = 1;
    for (int j = 1; j <= n; ++j) {
        KahanSum s;
        for (std::size_t r = 0; r < a.size(); ++r) s.add(detail::sq_dist(a[r], b[r], j));
        double m = s.value() / double(a.size());
        if (m > best) {
            best = m;
            best_j = j;
        }
    }
    std::vector<double> sq(a.size());
    for (std::size_t r = 0; r < a.size(); ++r) sq[r] = detail::sq_dist(a[r], b[r], best_j);
    auto mo = moments(sq);
    ErrorSummary e;
    e.h = a[0].h;
    e.pair = a[0].scheme + " vs " + b[0].scheme;
    e.estimator = "fixed-time";
    e.value = std::sqrt(std::max(0.0, best));
    e.std_error = (e.value > 0.0) ? mo.se_mean / (2.0 * e.value) : mo.se_mean;
    e.n = int(a.size());
    return e;
}

// Exact empirical W_2 between two equally sized 1-D samples (sorted pairing).
inline double quantile_w2_1d(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || a.size() != b.size()) throw std::invalid_argument("quantile_w2_1d: need equal nonempty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    KahanSum s;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s.add(d * d);
    }
    return std::sqrt(s.value() / double(a.size()));
}

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // rms residual in log space
};

// Least squares of log(err) on log(h).
inline SlopeFit fit_slope(const std::vector<double>& hs, const std::vector<double>& errs) {
    if (hs.size() != errs.size() || hs.size() < 2) throw std::invalid_argument("fit_slope: need >= 2 points");
    const std::size_t n = hs.size();
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (hs[i] <= 0.0 || errs[i] <= 0.0) throw std::invalid_argument("fit_slope: inputs must be positive");
        xs[i] = std::log(hs[i]);
        ys[i] = std::log(errs[i]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    SlopeFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = ys[i] - (f.intercept + f.slope * xs[i]);
        ss += r * r;
    }
    f.residual = std::sqrt(ss / double(n));
    return f;
}

}  // namespace pabel
