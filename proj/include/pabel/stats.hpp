#pragma once

// Small statistics toolbox: compensated summation, moment estimates with
// standard errors, the standard normal cdf/quantile pair, and
// Kolmogorov-Smirnov tests. Everything is deterministic given its inputs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace pabel {

// Neumaier-compensated accumulator; reduction error stays O(eps) regardless
// of length, which keeps estimator output stable to ~1e-10 across refactors.
class KahanSum {
  public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
    KahanSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

struct MomentSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double var = 0.0;       // unbiased
    double se_mean = 0.0;   // standard error of the mean
    double se_var = 0.0;    // standard error of the variance estimate (4th-moment based)
};

inline MomentSummary moments(std::span<const double> xs) {
    MomentSummary m;
    m.n = xs.size();
    if (m.n == 0) return m;
    m.mean = compensated_sum(xs) / double(m.n);
    KahanSum s2, s4;
    for (double x : xs) {
        double d = x - m.mean;
        s2.add(d * d);
        s4.add(d * d * d * d);
    }
    if (m.n > 1) m.var = s2.value() / double(m.n - 1);
    double m2 = s2.value() / double(m.n);
    double m4 = s4.value() / double(m.n);
    m.se_mean = std::sqrt(m.var / double(m.n));
    // Var(hat sigma^2) ~ (m4 - m2^2)/n
    m.se_var = std::sqrt(std::max(0.0, m4 - m2 * m2) / double(m.n));
    return m;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Wichura's PPND16 rational approximation of the standard normal quantile,
// accurate to ~1e-15 over (0,1).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p outside (0,1)");
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num = q * (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r + 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r + 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r + 1.3314166789178437745e2) * r + 3.3871328727963666080e0);
        const double den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r + 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r + 5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r + 4.2313330701600911252e1) * r + 1.0);
        return num / den;
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        const double num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r + 4.63033784615654529590e0) * r + 1.42343711074968357734e0);
        const double den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r + 2.05319162663775882187e0) * r + 1.0);
        val = num / den;
    } else {
        r -= 5.0;
        const double num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r + 5.46378491116411436990e0) * r + 6.65790464350110377720e0);
        const double den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r + 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r + 5.99832206555887937690e-1) * r + 1.0);
        val = num / den;
    }
    return (q < 0.0) ? -val : val;
}

// Complementary cdf of the Kolmogorov distribution, Q(lambda) = 2 sum (-1)^{k-1} e^{-2k^2 lambda^2}.
inline double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        sign = -sign;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

// One-sample KS against a cdf callable. Sorts a copy of the sample.
template <typename Cdf>
KsResult ks_test(std::vector<double> xs, Cdf&& cdf) {
    if (xs.empty()) throw std::invalid_argument("ks_test: empty sample");
    std::sort(xs.begin(), xs.end());
    const double n = double(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double f = cdf(xs[i]);
        d = std::max(d, std::abs(f - double(i + 1) / n));
        d = std::max(d, std::abs(f - double(i) / n));
    }
    double en = std::sqrt(n);
    return {d, kolmogorov_q((en + 0.12 + 0.11 / en) * d)};
}

inline KsResult ks_test_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_test_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    double en = std::sqrt(double(a.size()) * double(b.size()) / double(a.size() + b.size()));
    return {d, kolmogorov_q((en + 0.12 + 0.11 / en) * d)};
}

}  // namespace pabel
