#pragma once

// Named benchmark systems. Each carries two drift views of the same SDE:
// `strat` (Stratonovich drift, used by the flow-based schemes) and `euler`
// (Ito drift, used by the Euler-Maruyama update), so every scheme targets
// the same solution. Systems whose fields satisfy (V_k . grad) V_k = 0 have
// identical views.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pabel/schemes.hpp"
#include "pabel/vector_field.hpp"

namespace pabel {

struct KnownFact {
    std::string name;
    double tol = 0.0;  // 0 = informational
    std::function<double(const SchemePath&)> violation;
};

struct BenchmarkSystem {
    std::string name;
    VectorFieldSystem strat;
    VectorFieldSystem euler;
    std::vector<double> x0;
    bool logode_exact_with_true_areas = false;
    std::vector<KnownFact> facts;

    int q() const { return strat.q; }
    int d() const { return strat.d; }
};

namespace detail {

inline double path_norm(const SchemePath& p, int j) {
    double s = 0.0;
    for (int i = 0; i < p.q; ++i) s += p.at(j, i) * p.at(j, i);
    return std::sqrt(s);
}

}  // namespace detail

inline BenchmarkSystem benchmark(const std::string& name) {
    BenchmarkSystem b;
    b.name = name;
    if (name == "levy_area") {
        VectorFieldSystem s;
        s.q = 3;
        s.d = 2;
        s.fields = {[](const double* x, double* o) {
                        o[0] = 1.0;
                        o[1] = 0.0;
                        o[2] = -0.5 * x[1];
                    },
                    [](const double* x, double* o) {
                        o[0] = 0.0;
                        o[1] = 1.0;
                        o[2] = 0.5 * x[0];
                    }};
        s.brackets = {[](const double*, double* o) {
            o[0] = 0.0;
            o[1] = 0.0;
            o[2] = 1.0;
        }};
        b.strat = s;
        b.euler = s;  // (V_k.grad)V_k = 0
        b.x0 = {0.0, 0.0, 0.0};
        b.logode_exact_with_true_areas = true;
    } else if (name == "rotation") {
        VectorFieldSystem s;
        s.q = 2;
        s.d = 1;
        s.fields = {[](const double* x, double* o) {
            o[0] = x[1];
            o[1] = -x[0];
        }};
        s.brackets = {};
        VectorFieldSystem e = s;
        s.drift = [](const double* x, double* o) {
            o[0] = 0.5 * x[0];
            o[1] = 0.5 * x[1];
        };
        b.strat = s;
        b.euler = e;  // Ito drift vanishes: the classical update needs none
        b.x0 = {1.0, 0.0};
        const double want = std::exp(1.0);
        b.facts.push_back(
            {"terminal_norm_sq_is_e", 1e-7, [want](const SchemePath& p) {
                 double v = detail::path_norm(p, p.n);
                 return std::abs(v * v - want);
             }});
    } else if (name == "circle") {
        VectorFieldSystem s;
        s.q = 2;
        s.d = 1;
        s.fields = {[](const double* x, double* o) {
            o[0] = -x[1];
            o[1] = x[0];
        }};
        VectorFieldSystem e = s;
        e.drift = [](const double* x, double* o) {
            o[0] = -0.5 * x[0];
            o[1] = -0.5 * x[1];
        };
        b.strat = s;
        b.euler = e;
        b.x0 = {1.0, 0.0};
        b.facts.push_back({"unit_radius", 1e-8, [](const SchemePath& p) {
                               double worst = 0.0;
                               for (int j = 0; j <= p.n; ++j)
                                   worst = std::max(worst, std::abs(detail::path_norm(p, j) - 1.0));
                               return worst;
                           }});
    } else if (name == "cubic_drift") {
        VectorFieldSystem s;
        s.q = 1;
        s.d = 1;
        s.fields = {[](const double*, double* o) { o[0] = 1.0; }};
        s.drift = [](const double* x, double* o) { o[0] = -x[0] * x[0] * x[0]; };
        b.strat = s;
        b.euler = s;  // additive noise
        b.x0 = {0.0};
    } else if (name == "linear_1d") {
        VectorFieldSystem s;
        s.q = 1;
        s.d = 1;
        s.fields = {[](const double* x, double* o) { o[0] = x[0]; }};
        VectorFieldSystem e = s;
        e.drift = [](const double* x, double* o) { o[0] = 0.5 * x[0]; };
        b.strat = s;
        b.euler = e;
        b.x0 = {1.0};
        b.logode_exact_with_true_areas = true;  // single driver, no area at all
    } else if (name == "commuting") {
        VectorFieldSystem s;
        s.q = 2;
        s.d = 2;
        s.fields = {[](const double* x, double* o) {
                        o[0] = x[0];
                        o[1] = 0.0;
                    },
                    [](const double* x, double* o) {
                        o[0] = 0.0;
                        o[1] = x[1];
                    }};
        s.brackets = {[](const double*, double* o) {
            o[0] = 0.0;
            o[1] = 0.0;
        }};
        VectorFieldSystem e = s;
        e.drift = [](const double* x, double* o) {
            o[0] = 0.5 * x[0];
            o[1] = 0.5 * x[1];
        };
        b.strat = s;
        b.euler = e;
        b.x0 = {1.0, 1.0};
        b.logode_exact_with_true_areas = true;  // 2-nilpotent: brackets vanish
    } else if (name == "trig") {
        VectorFieldSystem s;
        s.q = 2;
        s.d = 2;
        s.fields = {[](const double* x, double* o) {
                        o[0] = std::sin(x[1]);
                        o[1] = 0.0;
                    },
                    [](const double* x, double* o) {
                        o[0] = 0.0;
                        o[1] = std::sin(x[0]);
                    }};
        s.brackets = {[](const double* x, double* o) {
            o[0] = -std::cos(x[1]) * std::sin(x[0]);
            o[1] = std::cos(x[0]) * std::sin(x[1]);
        }};
        b.strat = s;
        b.euler = s;  // (V_k.grad)V_k = 0
        b.x0 = {0.9, 0.4};
    } else {
        throw std::invalid_argument("benchmark: unknown name '" + name + "'");
    }
    return b;
}

inline const std::vector<std::string>& benchmark_names() {
    static const std::vector<std::string> names = {"levy_area", "rotation",  "circle", "cubic_drift",
                                                   "linear_1d", "commuting", "trig"};
    return names;
}

// Exact grid solution of the levy_area system for given drivers:
// x3 accumulates the block areas plus the Chen cross terms.
inline SchemePath levy_true_path(const BrownianBlocks& w, const AreaBlocks& a) {
    if (w.d != 2 || a.d != 2 || a.n != w.n) throw std::invalid_argument("levy_true_path: need d=2 drivers");
    SchemePath p;
    p.q = 3;
    p.n = w.n;
    p.h = w.h;
    p.scheme = "exact";
    p.area_family = "true";
    p.x.assign(std::size_t(w.n + 1) * 3, 0.0);
    for (int j = 0; j < w.n; ++j) {
        const double* xj = p.row(j);
        double* xn = p.row(j + 1);
        xn[0] = xj[0] + w.at(j, 0);
        xn[1] = xj[1] + w.at(j, 1);
        xn[2] = xj[2] + a.at(j, 0) + 0.5 * (xj[0] * w.at(j, 1) - xj[1] * w.at(j, 0));
    }
    return p;
}

}  // namespace pabel
