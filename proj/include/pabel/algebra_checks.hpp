#pragma once

// Randomized dual-route identity suite over the algebra layer: tabulated BCH
// against log of the iterated product, Chen multiplicativity, in-block
// commutation, and the telescoping product identity. Shared by the CLI
// checker and the acceptance gate. An optional coefficient perturbation
// turns the BCH family into a negative control.

#include <cstdint>
#include <string>
#include <vector>

#include "pabel/bch.hpp"
#include "pabel/pa_path.hpp"
#include "pabel/rng.hpp"
#include "pabel/tensor.hpp"

namespace pabel {

struct IdentityCheckResult {
    std::string name;
    int cases = 0;
    double max_rel_err = 0.0;
    bool pass = false;
    std::string detail;
};

struct AlgebraSuiteConfig {
    int max_dim = 3;
    int max_level = 5;
    int cases_per_check = 200;
    double tol = 1e-12;
    std::uint64_t seed = 1;
    double inject_eps = 0.0;  // nonzero: perturb one tabulated BCH coefficient
    int inject_term = 2;
};

namespace detail {

inline LieElement suite_random_lie(int dim, int level, RngStream& rng) {
    std::vector<LieElement> pool;
    for (int k = 1; k <= dim; ++k) pool.push_back(LieElement::generator(dim, level, k));
    LieElement acc(dim, level);
    for (const auto& g : pool) acc += (2.0 * rng.next_uniform() - 1.0) * g;
    for (int t = 0; t < 3; ++t) {
        int i = int(rng.next_u64() % pool.size());
        int j = int(rng.next_u64() % pool.size());
        LieElement b = lie_bracket(pool[i], pool[j]);
        acc += (2.0 * rng.next_uniform() - 1.0) * b;
        if (pool.size() < 10) pool.push_back(b);
    }
    acc *= 0.7;
    return acc;
}

inline TruncatedTensor suite_random_tensor(int dim, int level, RngStream& rng) {
    TruncatedTensor a(dim, level);
    a.set_scalar(2.0 * rng.next_uniform() - 1.0);
    for (int k = 1; k <= level; ++k)
        for (double& v : a.lev(k)) v = 2.0 * rng.next_uniform() - 1.0;
    return a;
}

}  // namespace detail

inline std::vector<IdentityCheckResult> run_algebra_suite(const AlgebraSuiteConfig& cfg) {
    std::vector<IdentityCheckResult> out;
    auto rng = RngStream::derive(cfg.seed, 0, 5);

    {
        IdentityCheckResult r;
        r.name = "bch-tabulated-vs-product-log";
        double perturb = cfg.inject_eps;
        for (int cas = 0; cas < cfg.cases_per_check; ++cas) {
            int dim = 1 + int(rng.next_u64() % cfg.max_dim);
            int level = 2 + int(rng.next_u64() % (cfg.max_level - 1));
            int nfac = 2 + int(rng.next_u64() % 5);
            std::vector<LieElement> xs;
            for (int i = 0; i < nfac; ++i) xs.push_back(detail::suite_random_lie(dim, level, rng));
            LieElement tab = xs[0];
            for (int i = 1; i < nfac; ++i)
                tab = detail::bch_pair_tabulated(tab, xs[i],
                                                 cfg.inject_eps != 0.0 ? &perturb : nullptr,
                                                 cfg.inject_term);
            auto ora = bch(std::span<const LieElement>(xs), level, BchMethod::product_log);
            r.max_rel_err = std::max(r.max_rel_err, rel_error(tab.t, ora.t));
            ++r.cases;
        }
        r.pass = r.max_rel_err <= cfg.tol;
        if (cfg.inject_eps != 0.0)
            r.detail = "injected perturbation on term " +
                       std::string(detail::bch_table()[cfg.inject_term].name);
        out.push_back(r);
    }

    {
        IdentityCheckResult r;
        r.name = "chen-identity";
        for (int cas = 0; cas < cfg.cases_per_check; ++cas) {
            int dim = 1 + int(rng.next_u64() % cfg.max_dim);
            int level = 2 + int(rng.next_u64() % (cfg.max_level - 1));
            int n = 2 + int(rng.next_u64() % 5);
            std::vector<LieElement> logs;
            for (int j = 0; j < n; ++j) logs.push_back(detail::suite_random_lie(dim, level, rng));
            auto p = PiecewiseAbelianPath::build(std::move(logs), 1.0 / n);
            double s = rng.next_uniform(), u = rng.next_uniform(), t = rng.next_uniform();
            if (s > u) std::swap(s, u);
            if (u > t) std::swap(u, t);
            if (s > u) std::swap(s, u);
            auto chen = group_mul(p.increment(s, u), p.increment(u, t));
            r.max_rel_err = std::max(r.max_rel_err, rel_error(chen.t, p.increment(s, t).t));
            ++r.cases;
        }
        r.pass = r.max_rel_err <= cfg.tol;
        out.push_back(r);
    }

    {
        IdentityCheckResult r;
        r.name = "in-block-commutation";
        for (int cas = 0; cas < cfg.cases_per_check; ++cas) {
            int dim = 1 + int(rng.next_u64() % cfg.max_dim);
            int level = 2 + int(rng.next_u64() % (cfg.max_level - 1));
            int n = 1 + int(rng.next_u64() % 4);
            std::vector<LieElement> logs;
            for (int j = 0; j < n; ++j) logs.push_back(detail::suite_random_lie(dim, level, rng));
            auto p = PiecewiseAbelianPath::build(std::move(logs), 1.0 / n);
            int j = int(rng.next_u64() % n);
            double h = p.step();
            double s1 = (j + 0.3 * rng.next_uniform()) * h;
            double t1 = (j + 0.35 + 0.3 * rng.next_uniform()) * h;
            double s2 = (j + 0.25 * rng.next_uniform()) * h;
            double t2 = (j + 0.6 + 0.35 * rng.next_uniform()) * h;
            auto ab = group_mul(p.increment(s1, t1), p.increment(s2, t2));
            auto ba = group_mul(p.increment(s2, t2), p.increment(s1, t1));
            r.max_rel_err = std::max(r.max_rel_err, rel_error(ab.t, ba.t));
            ++r.cases;
        }
        r.pass = r.max_rel_err <= cfg.tol;
        out.push_back(r);
    }

    {
        IdentityCheckResult r;
        r.name = "telescoping-product";
        for (int cas = 0; cas < cfg.cases_per_check; ++cas) {
            int dim = 1 + int(rng.next_u64() % cfg.max_dim);
            int level = 1 + int(rng.next_u64() % cfg.max_level);
            int m = 2 + int(rng.next_u64() % 4);
            std::vector<TruncatedTensor> as, bs;
            for (int i = 0; i < m; ++i) {
                as.push_back(detail::suite_random_tensor(dim, level, rng));
                bs.push_back(detail::suite_random_tensor(dim, level, rng));
            }
            auto prod = [&](const std::vector<TruncatedTensor>& v, int lo, int hi) {
                TruncatedTensor acc = tensor_unit(dim, level);
                for (int i = lo; i < hi; ++i) acc = tensor_mul(acc, v[i]);
                return acc;
            };
            TruncatedTensor lhs = prod(as, 0, m) - prod(bs, 0, m);
            TruncatedTensor rhs(dim, level);
            for (int j = 0; j < m; ++j) {
                TruncatedTensor mid = as[j] - bs[j];
                rhs += tensor_mul(tensor_mul(prod(as, 0, j), mid), prod(bs, j + 1, m));
            }
            r.max_rel_err = std::max(r.max_rel_err, rel_error(lhs, rhs));
            ++r.cases;
        }
        r.pass = r.max_rel_err <= cfg.tol;
        out.push_back(r);
    }

    return out;
}

}  // namespace pabel
