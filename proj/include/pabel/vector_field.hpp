#pragma once

// Vector field systems for SDE schemes: a drift, d diffusion fields, and the
// pairwise Lie brackets, either supplied analytically or synthesized by
// central finite differences. Fields are plain callables on raw buffers so
// scheme inner loops stay allocation-free.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "pabel/brownian.hpp"

namespace pabel {

inline constexpr int kMaxStateDim = 8;

using FieldFn = std::function<void(const double* x, double* out)>;

struct VectorFieldSystem {
    int q = 0;  // state dimension
    int d = 0;  // driving dimension
    FieldFn drift;                  // may be empty (zero drift)
    std::vector<FieldFn> fields;    // V_1..V_d
    std::vector<FieldFn> brackets;  // [V_k,V_l], (k<l) lexicographic; may be empty before synth

    bool has_drift() const { return bool(drift); }

    void validate() const {
        if (q < 1 || q > kMaxStateDim) throw std::invalid_argument("VectorFieldSystem: state dim out of range");
        if (int(fields.size()) != d) throw std::invalid_argument("VectorFieldSystem: need d fields");
        if (!brackets.empty() && int(brackets.size()) != pair_count(d))
            throw std::invalid_argument("VectorFieldSystem: bracket count mismatch");
    }
};

namespace detail {

inline double fd_step(const double* x, int q) {
    double nrm = 0.0;
    for (int i = 0; i < q; ++i) nrm += x[i] * x[i];
    return 1e-5 * (1.0 + std::sqrt(nrm));
}

}  // namespace detail

// Directional derivative (V_k . grad) V_l at x by a central difference along
// V_k; this is all Milstein and bracket synthesis need, no full Jacobian.
inline void directional_derivative(const FieldFn& vk, const FieldFn& vl, const double* x, int q,
                                   double* out) {
    double vkx[kMaxStateDim], xp[kMaxStateDim], xm[kMaxStateDim];
    double fp[kMaxStateDim], fm[kMaxStateDim];
    vk(x, vkx);
    const double eps = detail::fd_step(x, q);
    for (int i = 0; i < q; ++i) {
        xp[i] = x[i] + eps * vkx[i];
        xm[i] = x[i] - eps * vkx[i];
    }
    vl(xp, fp);
    vl(xm, fm);
    for (int i = 0; i < q; ++i) out[i] = (fp[i] - fm[i]) / (2.0 * eps);
}

// Fills in finite-difference brackets [V_k,V_l] for every pair that the
// system does not already carry analytically.
inline VectorFieldSystem synth_brackets(VectorFieldSystem sys) {
    sys.validate();
    if (!sys.brackets.empty()) return sys;
    const int q = sys.q;
    for (int k = 0; k < sys.d; ++k)
        for (int l = k + 1; l < sys.d; ++l) {
            FieldFn vk = sys.fields[k], vl = sys.fields[l];
            sys.brackets.push_back([vk, vl, q](const double* x, double* out) {
                double a[kMaxStateDim], b[kMaxStateDim];
                directional_derivative(vk, vl, x, q, a);
                directional_derivative(vl, vk, x, q, b);
                for (int i = 0; i < q; ++i) out[i] = a[i] - b[i];
            });
        }
    return sys;
}

// Max disagreement between the stored brackets and finite-difference ones
// over a point cloud; analytic brackets should sit within 1e-5.
inline double bracket_consistency(const VectorFieldSystem& sys, const std::vector<std::vector<double>>& pts) {
    sys.validate();
    if (sys.brackets.empty()) throw std::invalid_argument("bracket_consistency: no brackets synthesized");
    double worst = 0.0;
    int p = 0;
    for (int k = 0; k < sys.d; ++k)
        for (int l = k + 1; l < sys.d; ++l, ++p)
            for (const auto& x : pts) {
                double got[kMaxStateDim], a[kMaxStateDim], b[kMaxStateDim];
                sys.brackets[p](x.data(), got);
                directional_derivative(sys.fields[k], sys.fields[l], x.data(), sys.q, a);
                directional_derivative(sys.fields[l], sys.fields[k], x.data(), sys.q, b);
                for (int i = 0; i < sys.q; ++i) worst = std::max(worst, std::abs(got[i] - (a[i] - b[i])));
            }
    return worst;
}

}  // namespace pabel
