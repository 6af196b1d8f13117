#pragma once

// The four discretizations over a vector field system. Euler and the
// Milstein/substitute pair are the classical Ito-calibrated updates; the
// log-ODE scheme advances by the exact flow of
//   h V_0 + sum_k W_k V_k + sum_{k<l} Area_kl [V_k, V_l]
// per block. Feeding the log-ODE true areas gives the level-2 log-ODE
// method; feeding the Gaussian substitutes gives the coupled scheme.

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "pabel/brownian.hpp"
#include "pabel/flow.hpp"
#include "pabel/vector_field.hpp"

namespace pabel {

struct SchemePath {
    int q = 0;
    int n = 0;
    double h = 0.0;
    std::string scheme;
    std::string area_family;  // none | true | substitute
    std::vector<double> x;    // (n+1) x q

    double at(int j, int i) const { return x[std::size_t(j) * q + i]; }
    double* row(int j) { return x.data() + std::size_t(j) * q; }
    const double* row(int j) const { return x.data() + std::size_t(j) * q; }
};

namespace detail {

inline SchemePath make_path(const VectorFieldSystem& sys, const std::vector<double>& x0, int n, double h,
                            std::string scheme, std::string areas) {
    sys.validate();
    if (int(x0.size()) != sys.q) throw std::invalid_argument("scheme: initial condition dimension mismatch");
    SchemePath p;
    p.q = sys.q;
    p.n = n;
    p.h = h;
    p.scheme = std::move(scheme);
    p.area_family = std::move(areas);
    p.x.assign(std::size_t(n + 1) * sys.q, 0.0);
    for (int i = 0; i < sys.q; ++i) p.x[i] = x0[i];
    return p;
}

inline void check_driver(const VectorFieldSystem& sys, const BrownianBlocks& w) {
    if (w.d != sys.d) throw std::invalid_argument("scheme: driving dimension mismatch");
}

}  // namespace detail

// x_{j+1} = x_j + sum_k V_k(x_j) W_k + V_0(x_j) h
inline SchemePath euler_path(const VectorFieldSystem& sys, const std::vector<double>& x0,
                             const BrownianBlocks& w) {
    detail::check_driver(sys, w);
    auto p = detail::make_path(sys, x0, w.n, w.h, "euler", "none");
    const int q = sys.q;
    double f[kMaxStateDim];
    for (int j = 0; j < w.n; ++j) {
        const double* xj = p.row(j);
        double* xn = p.row(j + 1);
        for (int i = 0; i < q; ++i) xn[i] = xj[i];
        for (int k = 0; k < sys.d; ++k) {
            sys.fields[k](xj, f);
            const double wk = w.at(j, k);
            for (int i = 0; i < q; ++i) xn[i] += wk * f[i];
        }
        if (sys.has_drift()) {
            sys.drift(xj, f);
            for (int i = 0; i < q; ++i) xn[i] += w.h * f[i];
        }
    }
    return p;
}

// Milstein update with explicit area increments:
//   x + sum_k V_k W_k + sum_{k<l} A_kl [V_k,V_l]
//     + 1/2 sum_{k,l} (W_k W_l - delta_kl h) (V_k . grad) V_l  (+ V_0 h)
inline SchemePath milstein_path(const VectorFieldSystem& sys, const std::vector<double>& x0,
                                const BrownianBlocks& w, const AreaBlocks& areas,
                                const std::string& scheme_name = "milstein",
                                const std::string& area_family = "true") {
    detail::check_driver(sys, w);
    if (areas.n != w.n || areas.d != w.d) throw std::invalid_argument("scheme: area blocks mismatch");
    VectorFieldSystem s = synth_brackets(sys);
    auto p = detail::make_path(s, x0, w.n, w.h, scheme_name, area_family);
    const int q = s.q;
    double f[kMaxStateDim];
    for (int j = 0; j < w.n; ++j) {
        const double* xj = p.row(j);
        double* xn = p.row(j + 1);
        for (int i = 0; i < q; ++i) xn[i] = xj[i];
        for (int k = 0; k < s.d; ++k) {
            s.fields[k](xj, f);
            const double wk = w.at(j, k);
            for (int i = 0; i < q; ++i) xn[i] += wk * f[i];
        }
        int pr = 0;
        for (int k = 0; k < s.d; ++k)
            for (int l = k + 1; l < s.d; ++l, ++pr) {
                s.brackets[pr](xj, f);
                const double a = areas.at(j, pr);
                for (int i = 0; i < q; ++i) xn[i] += a * f[i];
            }
        for (int k = 0; k < s.d; ++k)
            for (int l = 0; l < s.d; ++l) {
                directional_derivative(s.fields[k], s.fields[l], xj, q, f);
                const double c = 0.5 * (w.at(j, k) * w.at(j, l) - (k == l ? w.h : 0.0));
                for (int i = 0; i < q; ++i) xn[i] += c * f[i];
            }
        if (s.has_drift()) {
            s.drift(xj, f);
            for (int i = 0; i < q; ++i) xn[i] += w.h * f[i];
        }
    }
    return p;
}

// Identical update with the Gaussian substitutes in place of the true areas.
inline SchemePath davie_path(const VectorFieldSystem& sys, const std::vector<double>& x0,
                             const BrownianBlocks& w, const AreaBlocks& substitutes) {
    return milstein_path(sys, x0, w, substitutes, "davie", "substitute");
}

// Level-2 log-ODE step: flow along h V_0 + sum W_k V_k + sum Area_kl [V_k,V_l].
inline SchemePath logode_path(const VectorFieldSystem& sys, const std::vector<double>& x0,
                              const BrownianBlocks& w, const AreaBlocks& areas, const FlowConfig& cfg,
                              const std::string& area_family = "true") {
    detail::check_driver(sys, w);
    if (areas.n != w.n || areas.d != w.d) throw std::invalid_argument("scheme: area blocks mismatch");
    VectorFieldSystem s = synth_brackets(sys);
    auto p = detail::make_path(s, x0, w.n, w.h, "logode", area_family);
    const int q = s.q;
    const int np = pair_count(s.d);
    for (int j = 0; j < w.n; ++j) {
        const double* wj = &w.w[std::size_t(j) * s.d];
        const double* aj = &areas.a[std::size_t(j) * np];
        const double h = w.h;
        auto field = [&s, wj, aj, h, q](const double* y, double* out) {
            double f[kMaxStateDim];
            for (int i = 0; i < q; ++i) out[i] = 0.0;
            for (int k = 0; k < s.d; ++k) {
                s.fields[k](y, f);
                for (int i = 0; i < q; ++i) out[i] += wj[k] * f[i];
            }
            for (int pr = 0; pr < pair_count(s.d); ++pr) {
                if (aj[pr] == 0.0) continue;
                s.brackets[pr](y, f);
                for (int i = 0; i < q; ++i) out[i] += aj[pr] * f[i];
            }
            if (s.has_drift()) {
                s.drift(y, f);
                for (int i = 0; i < q; ++i) out[i] += h * f[i];
            }
        };
        const double* xj = p.row(j);
        double* xn = p.row(j + 1);
        for (int i = 0; i < q; ++i) xn[i] = xj[i];
        try {
            ode_flow_inplace(field, xn, q, cfg);
        } catch (const FlowError& e) {
            throw FlowError(std::string(e.what()) + " at block " + std::to_string(j));
        }
    }
    return p;
}

// Level-1 log-ODE: flow along h V_0 + sum W_k V_k only. Kept as its own
// loop so coincidence with the zero-area level-2 call is a real check.
inline SchemePath logode1_path(const VectorFieldSystem& sys, const std::vector<double>& x0,
                               const BrownianBlocks& w, const FlowConfig& cfg) {
    detail::check_driver(sys, w);
    auto p = detail::make_path(sys, x0, w.n, w.h, "logode1", "none");
    const int q = sys.q;
    for (int j = 0; j < w.n; ++j) {
        const double* wj = &w.w[std::size_t(j) * sys.d];
        const double h = w.h;
        auto field = [&sys, wj, h, q](const double* y, double* out) {
            double f[kMaxStateDim];
            for (int i = 0; i < q; ++i) out[i] = 0.0;
            for (int k = 0; k < sys.d; ++k) {
                sys.fields[k](y, f);
                for (int i = 0; i < q; ++i) out[i] += wj[k] * f[i];
            }
            if (sys.has_drift()) {
                sys.drift(y, f);
                for (int i = 0; i < q; ++i) out[i] += h * f[i];
            }
        };
        const double* xj = p.row(j);
        double* xn = p.row(j + 1);
        for (int i = 0; i < q; ++i) xn[i] = xj[i];
        try {
            ode_flow_inplace(field, xn, q, cfg);
        } catch (const FlowError& e) {
            throw FlowError(std::string(e.what()) + " at block " + std::to_string(j));
        }
    }
    return p;
}

inline void write_scheme_csv(const SchemePath& p, std::ostream& os) {
    os << "# pabel-scheme v1 scheme=" << p.scheme << " areas=" << p.area_family << " q=" << p.q
       << " n=" << p.n << "\n";
    os.precision(17);
    for (int j = 0; j <= p.n; ++j) {
        os << j << "," << j * p.h;
        for (int i = 0; i < p.q; ++i) os << "," << p.at(j, i);
        os << "\n";
    }
}

}  // namespace pabel
