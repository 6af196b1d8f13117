#pragma once

// Time-1 flow map of an autonomous field, by S fixed steps of the classical
// fourth-order Runge-Kutta scheme. Doubling S cuts the error by ~16x on
// smooth fields, which is the accuracy contract the schemes rely on.

#include <cmath>
#include <stdexcept>
#include <string>

#include "pabel/vector_field.hpp"

namespace pabel {

struct FlowConfig {
    int substeps = 8;       // S >= 1
    double abs_tol = 1e-9;  // target used by accuracy checks, not adaptivity
};

struct FlowError : std::runtime_error {
    explicit FlowError(const std::string& what) : std::runtime_error(what) {}
};

// y <- flow of dy = F(y) dt over [0,1] started at y.
inline void ode_flow_inplace(const FieldFn& field, double* y, int q, const FlowConfig& cfg) {
    if (cfg.substeps < 1) throw std::invalid_argument("ode_flow: substeps must be >= 1");
    const double dt = 1.0 / cfg.substeps;
    double k1[kMaxStateDim], k2[kMaxStateDim], k3[kMaxStateDim], k4[kMaxStateDim], tmp[kMaxStateDim];
    for (int s = 0; s < cfg.substeps; ++s) {
        field(y, k1);
        for (int i = 0; i < q; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
        field(tmp, k2);
        for (int i = 0; i < q; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
        field(tmp, k3);
        for (int i = 0; i < q; ++i) tmp[i] = y[i] + dt * k3[i];
        field(tmp, k4);
        for (int i = 0; i < q; ++i) y[i] += dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
    }
    for (int i = 0; i < q; ++i)
        if (!std::isfinite(y[i])) throw FlowError("ode_flow: state became non-finite");
}

inline std::vector<double> ode_flow(const FieldFn& field, const std::vector<double>& y0,
                                    const FlowConfig& cfg) {
    std::vector<double> y = y0;
    ode_flow_inplace(field, y.data(), int(y.size()), cfg);
    return y;
}

}  // namespace pabel
