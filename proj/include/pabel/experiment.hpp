#pragma once

// Convergence experiment machinery: driver generation at a fine scale,
// exact level-2 coarsening (Chen), scheme dispatch over a benchmark, and
// paired strong/fixed-time error estimation against a reference solution.
// Everything is replication-parallel with slot-array reductions, so output
// is a pure function of (config, seed).

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pabel/analysis.hpp"
#include "pabel/area_cf.hpp"
#include "pabel/benchmarks.hpp"
#include "pabel/coupling.hpp"
#include "pabel/parallel.hpp"
#include "pabel/schemes.hpp"

namespace pabel {

enum class AreaMode { true_oracle, gaussian, coupled };

inline std::string to_string(AreaMode m) {
    switch (m) {
        case AreaMode::true_oracle: return "true-oracle";
        case AreaMode::gaussian: return "gaussian";
        default: return "coupled";
    }
}

inline AreaMode parse_area_mode(const std::string& s) {
    if (s == "true-oracle") return AreaMode::true_oracle;
    if (s == "gaussian") return AreaMode::gaussian;
    if (s == "coupled") return AreaMode::coupled;
    throw std::invalid_argument("area-mode must be one of true-oracle|gaussian|coupled");
}

inline CouplingMode parse_coupling_mode(const std::string& s) {
    if (s == "exact-2d") return CouplingMode::exact_2d;
    if (s == "approx-nd") return CouplingMode::approx_nd;
    throw std::invalid_argument("coupling-mode must be one of exact-2d|approx-nd");
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    return detail::mix64(seed ^ detail::mix64(salt + 0x632BE59BD9B4E019ull));
}

struct DriverSet {
    BrownianBlocks w;
    AreaBlocks a;
};

// W plus true areas at 2^exp blocks (d=2: conditional-law table draws;
// d>2: bridge sub-sampling; d=1: no area coordinates).
inline DriverSet sample_true_driver(int d, int exp2, std::uint64_t seed, std::uint64_t rep) {
    const int n = 1 << exp2;
    const double h = 1.0 / n;
    DriverSet ds;
    auto wrng = RngStream::derive(seed, rep, 0);
    ds.w = sample_brownian(n, d, h, wrng);
    ds.a.n = n;
    ds.a.d = d;
    ds.a.a.assign(std::size_t(n) * pair_count(d), 0.0);
    if (d == 2) {
        auto arng = RngStream::derive(seed, rep, 3);
        const auto& table = Area2dTable::instance();
        for (int j = 0; j < n; ++j) {
            const double wk = ds.w.at(j, 0), wl = ds.w.at(j, 1);
            ds.a.at(j, 0) = table.sample((wk * wk + wl * wl) / h, h, arng.next_uniform());
        }
    } else if (d > 2) {
        auto arng = RngStream::derive(seed, rep, 3);
        ds.a = sample_area_reference(ds.w, 64, arng).areas;
    }
    return ds;
}

// Merges adjacent blocks pairwise `halvings` times; areas pick up the Chen
// cross term a = a1 + a2 + (w1 (x) w2 - w2 (x) w1)/2.
inline DriverSet coarsen_driver(const DriverSet& fine, int halvings) {
    DriverSet cur = fine;
    const int d = fine.w.d;
    const int np = pair_count(d);
    for (int step = 0; step < halvings; ++step) {
        DriverSet nxt;
        nxt.w.n = cur.w.n / 2;
        nxt.w.d = d;
        nxt.w.h = cur.w.h * 2.0;
        nxt.w.w.resize(std::size_t(nxt.w.n) * d);
        nxt.a.n = nxt.w.n;
        nxt.a.d = d;
        nxt.a.a.resize(std::size_t(nxt.w.n) * np);
        for (int j = 0; j < nxt.w.n; ++j) {
            for (int k = 0; k < d; ++k) nxt.w.at(j, k) = cur.w.at(2 * j, k) + cur.w.at(2 * j + 1, k);
            int p = 0;
            for (int k = 0; k < d; ++k)
                for (int l = k + 1; l < d; ++l, ++p)
                    nxt.a.at(j, p) = cur.a.at(2 * j, p) + cur.a.at(2 * j + 1, p) +
                                     0.5 * (cur.w.at(2 * j, k) * cur.w.at(2 * j + 1, l) -
                                            cur.w.at(2 * j, l) * cur.w.at(2 * j + 1, k));
        }
        cur = std::move(nxt);
    }
    return cur;
}

// Keeps every `factor`-th grid point of a path.
inline SchemePath subsample_path(const SchemePath& fine, int factor) {
    SchemePath p;
    p.q = fine.q;
    p.n = fine.n / factor;
    p.h = fine.h * factor;
    p.scheme = fine.scheme;
    p.area_family = fine.area_family;
    p.x.resize(std::size_t(p.n + 1) * p.q);
    for (int j = 0; j <= p.n; ++j)
        for (int i = 0; i < p.q; ++i) p.x[std::size_t(j) * p.q + i] = fine.at(j * factor, i);
    return p;
}

struct ConvergeConfig {
    std::string benchmark = "trig";
    std::vector<std::string> schemes = {"euler", "milstein", "logode"};
    std::vector<int> h_exps = {4, 5, 6, 7, 8, 9};
    int samples = 1000;
    std::uint64_t seed = 42;
    AreaMode area_mode = AreaMode::true_oracle;
    CouplingMode coupling_mode = CouplingMode::exact_2d;
    int substeps = 8;
    int ref_exp = 0;  // 0: max h_exp + 4
    int threads = 1;
};

struct ConvergePoint {
    std::string scheme;
    int h_exp = 0;
    ErrorSummary strong;
    ErrorSummary fixed;
};

namespace detail {

inline SchemePath run_named_scheme(const std::string& name, const BenchmarkSystem& bench,
                                   const DriverSet& ds, const AreaBlocks& subs, const FlowConfig& cfg) {
    if (name == "euler") return euler_path(bench.euler, bench.x0, ds.w);
    if (name == "milstein") return milstein_path(bench.strat, bench.x0, ds.w, ds.a);
    if (name == "davie") return davie_path(bench.strat, bench.x0, ds.w, subs);
    if (name == "logode") return logode_path(bench.strat, bench.x0, ds.w, ds.a, cfg);
    if (name == "logode1") return logode1_path(bench.strat, bench.x0, ds.w, cfg);
    throw std::invalid_argument("unknown scheme '" + name + "'");
}

struct EstimatorAccum {
    // per replication: max over grid of squared distance, and the squared
    // distance at every grid time (slot arrays; reduced sequentially)
    std::vector<double> maxsq;
    std::vector<std::vector<double>> timesq;
};

inline void accumulate_distances(const SchemePath& a, const SchemePath& b, EstimatorAccum& acc, int rep) {
    double m = 0.0;
    auto& row = acc.timesq[rep];
    row.resize(a.n);
    for (int j = 1; j <= a.n; ++j) {
        double s = 0.0;
        for (int i = 0; i < a.q; ++i) {
            double d = a.at(j, i) - b.at(j, i);
            s += d * d;
        }
        row[j - 1] = s;
        m = std::max(m, s);
    }
    acc.maxsq[rep] = m;
}

inline std::pair<ErrorSummary, ErrorSummary> summarize(const EstimatorAccum& acc, double h,
                                                       const std::string& pair) {
    const int reps = int(acc.maxsq.size());
    ErrorSummary strong;
    auto mo = moments(acc.maxsq);
    strong.h = h;
    strong.pair = pair;
    strong.estimator = "strong-max";
    strong.value = std::sqrt(std::max(0.0, mo.mean));
    strong.std_error = strong.value > 0.0 ? mo.se_mean / (2.0 * strong.value) : mo.se_mean;
    strong.n = reps;

    const int ntimes = int(acc.timesq[0].size());
    int best_j = 0;
    double best = -1.0;
    for (int j = 0; j < ntimes; ++j) {
        KahanSum s;
        for (int r = 0; r < reps; ++r) s.add(acc.timesq[r][j]);
        double m = s.value() / reps;
        if (m > best) {
            best = m;
            best_j = j;
        }
    }
    std::vector<double> col(reps);
    for (int r = 0; r < reps; ++r) col[r] = acc.timesq[r][best_j];
    auto mo2 = moments(col);
    ErrorSummary fixed;
    fixed.h = h;
    fixed.pair = pair;
    fixed.estimator = "fixed-time";
    fixed.value = std::sqrt(std::max(0.0, best));
    fixed.std_error = fixed.value > 0.0 ? mo2.se_mean / (2.0 * fixed.value) : mo2.se_mean;
    fixed.n = reps;
    return {strong, fixed};
}

}  // namespace detail

inline std::vector<ConvergePoint> run_converge(const ConvergeConfig& cfg) {
    const auto bench = benchmark(cfg.benchmark);
    const int d = bench.d();
    FlowConfig fc;
    fc.substeps = cfg.substeps;
    FlowConfig fine_fc;
    fine_fc.substeps = 2;  // flow error at the reference scale is far below h_ref

    int max_exp = 0;
    for (int e : cfg.h_exps) max_exp = std::max(max_exp, e);
    const int ref_exp = (cfg.ref_exp > 0) ? cfg.ref_exp : max_exp + 4;
    if (cfg.area_mode == AreaMode::coupled && cfg.coupling_mode == CouplingMode::exact_2d && d != 2)
        throw std::invalid_argument("coupled area mode with exact-2d coupling requires a d=2 benchmark");
    const bool exact_ref = (cfg.benchmark == "levy_area");
    if (!exact_ref && ref_exp <= max_exp)
        throw std::invalid_argument("reference exponent must exceed the finest h exponent");

    std::vector<ConvergePoint> points;
    for (int e : cfg.h_exps) {
        std::map<std::string, detail::EstimatorAccum> accs;
        for (const auto& s : cfg.schemes) {
            accs[s].maxsq.assign(cfg.samples, 0.0);
            accs[s].timesq.assign(cfg.samples, {});
        }
        const std::uint64_t seed_e = mix_seed(cfg.seed, std::uint64_t(e));
        parallel_for(cfg.samples, cfg.threads, [&](std::int64_t rep) {
            DriverSet ds;          // drivers at scale h with the "true" family
            AreaBlocks subs;       // substitute family at scale h
            SchemePath reference;  // on the scale-h grid
            if (cfg.area_mode == AreaMode::coupled) {
                auto drv = dyadic_coupling(e, d, seed_e, std::uint64_t(rep), cfg.coupling_mode);
                ds.w = drv.w;
                reference = exact_ref ? levy_true_path(ds.w, drv.a)
                                      : logode_path(bench.strat, bench.x0, ds.w, drv.a, fc);
                // schemes consume the substitutes; the truth keeps the areas
                ds.a = drv.b;
                subs = drv.b;
            } else {
                auto srng = RngStream::derive(seed_e, std::uint64_t(rep), 4);
                if (exact_ref) {
                    ds = sample_true_driver(d, e, seed_e, std::uint64_t(rep));
                    reference = levy_true_path(ds.w, ds.a);
                } else {
                    auto fine = sample_true_driver(d, ref_exp, seed_e, std::uint64_t(rep));
                    auto ref_fine = logode_path(bench.strat, bench.x0, fine.w, fine.a, fine_fc);
                    reference = subsample_path(ref_fine, 1 << (ref_exp - e));
                    ds = coarsen_driver(fine, ref_exp - e);
                }
                subs = sample_gaussian_area(ds.w, srng);
                if (cfg.area_mode == AreaMode::gaussian) ds.a = subs;
            }
            for (const auto& s : cfg.schemes) {
                auto path = detail::run_named_scheme(s, bench, ds, subs, fc);
                detail::accumulate_distances(path, reference, accs[s], int(rep));
            }
        });
        for (const auto& s : cfg.schemes) {
            auto [strong, fixed] = detail::summarize(accs[s], std::pow(2.0, -e), s + " vs reference");
            ConvergePoint p;
            p.scheme = s;
            p.h_exp = e;
            p.strong = strong;
            p.fixed = fixed;
            points.push_back(std::move(p));
        }
    }
    return points;
}

}  // namespace pabel
