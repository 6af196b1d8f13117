#include <catch2/catch.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include "pabel/benchmarks.hpp"
#include "pabel/brownian.hpp"
#include "pabel/flow.hpp"
#include "pabel/rng.hpp"
#include "pabel/schemes.hpp"
#include "pabel/stats.hpp"
#include "pabel/vector_field.hpp"

using namespace pabel;

namespace {

double max_abs_diff(const SchemePath& a, const SchemePath& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.x.size(); ++i) worst = std::max(worst, std::abs(a.x[i] - b.x[i]));
    return worst;
}

}  // namespace

TEST_CASE("ode_flow: zero field, linear field, order four", "[schemes]") {
    FlowConfig cfg;
    auto zero = [](const double*, double* o) {
        o[0] = 0.0;
        o[1] = 0.0;
    };
    auto y = ode_flow(zero, {1.0, -2.0}, cfg);
    REQUIRE(y[0] == 1.0);
    REQUIRE(y[1] == -2.0);

    // linear field F(y) = A y against a scaling-and-squaring series exponential
    const double A[4] = {0.3, -1.1, 0.7, 0.2};
    auto lin = [&A](const double* x, double* o) {
        o[0] = A[0] * x[0] + A[1] * x[1];
        o[1] = A[2] * x[0] + A[3] * x[1];
    };
    // expm(A) via series on A/2^6, squared back up
    double m[4] = {A[0] / 64.0, A[1] / 64.0, A[2] / 64.0, A[3] / 64.0};
    double e[4] = {1.0, 0.0, 0.0, 1.0};
    double term[4] = {1.0, 0.0, 0.0, 1.0};
    for (int k = 1; k <= 20; ++k) {
        double t2[4];
        t2[0] = (term[0] * m[0] + term[1] * m[2]) / k;
        t2[1] = (term[0] * m[1] + term[1] * m[3]) / k;
        t2[2] = (term[2] * m[0] + term[3] * m[2]) / k;
        t2[3] = (term[2] * m[1] + term[3] * m[3]) / k;
        for (int i = 0; i < 4; ++i) {
            term[i] = t2[i];
            e[i] += t2[i];
        }
    }
    for (int s = 0; s < 6; ++s) {
        double sq[4];
        sq[0] = e[0] * e[0] + e[1] * e[2];
        sq[1] = e[0] * e[1] + e[1] * e[3];
        sq[2] = e[2] * e[0] + e[3] * e[2];
        sq[3] = e[2] * e[1] + e[3] * e[3];
        for (int i = 0; i < 4; ++i) e[i] = sq[i];
    }
    std::vector<double> y0 = {0.8, -0.5};
    FlowConfig fine;
    fine.substeps = 64;
    auto got = ode_flow(lin, y0, fine);
    REQUIRE(got[0] == Approx(e[0] * y0[0] + e[1] * y0[1]).margin(1e-10));
    REQUIRE(got[1] == Approx(e[2] * y0[0] + e[3] * y0[1]).margin(1e-10));

    // Richardson order check on a smooth nonlinear field
    auto smooth = [](const double* x, double* o) {
        o[0] = std::sin(x[1]) + 0.3 * x[0];
        o[1] = std::cos(x[0]) - 0.2 * x[1];
    };
    FlowConfig ref;
    ref.substeps = 1024;
    auto yref = ode_flow(smooth, y0, ref);
    auto err = [&](int s) {
        FlowConfig c;
        c.substeps = s;
        auto ys = ode_flow(smooth, y0, c);
        return std::hypot(ys[0] - yref[0], ys[1] - yref[1]);
    };
    double ratio = err(4) / err(8);
    REQUIRE(ratio > 12.0);
    REQUIRE(ratio < 20.0);

    // non-finite fields raise a flow failure
    auto blow = [](const double* x, double* o) { o[0] = x[0] * x[0] * 1e200; };
    std::vector<double> one = {1.0};
    REQUIRE_THROWS_AS(ode_flow(blow, one, cfg), FlowError);

    // and a scheme propagates the failure with the block index attached
    VectorFieldSystem bad;
    bad.q = 1;
    bad.d = 1;
    bad.fields = {[](const double* x, double* o) { o[0] = 1e200 * (1.0 + x[0] * x[0]); }};
    BrownianBlocks w1;
    w1.n = 2;
    w1.d = 1;
    w1.h = 0.5;
    w1.w = {1.0, 1.0};
    AreaBlocks none;
    none.n = 2;
    none.d = 1;
    try {
        logode_path(bad, {0.0}, w1, none, cfg);
        FAIL("expected a flow failure");
    } catch (const FlowError& e) {
        REQUIRE(std::string(e.what()).find("block") != std::string::npos);
    }
}

TEST_CASE("euler: formula checks", "[schemes]") {
    auto rng = RngStream::derive(401, 0);
    const int n = 64;
    const double h = 1.0 / n;

    // zero fields: constant path
    VectorFieldSystem nul;
    nul.q = 2;
    nul.d = 1;
    nul.fields = {[](const double*, double* o) { o[0] = o[1] = 0.0; }};
    auto w1 = sample_brownian(n, 1, h, rng);
    auto cp = euler_path(nul, {0.4, -0.7}, w1);
    REQUIRE(cp.at(n, 0) == 0.4);
    REQUIRE(cp.at(n, 1) == -0.7);

    // d = q = 1, V(x) = x: x_{j+1} = x_j (1 + W_j)
    auto lin = benchmark("linear_1d");
    auto ep = euler_path(lin.strat, lin.x0, w1);
    double x = 1.0;
    for (int j = 0; j < n; ++j) x *= 1.0 + w1.at(j, 0);
    REQUIRE(ep.at(n, 0) == Approx(x).epsilon(1e-12));

    // rotation: S_N = prod(1 + W_j^2) reproduced exactly by the Euler view
    auto rot = benchmark("rotation");
    auto rp = euler_path(rot.euler, rot.x0, w1);
    double s = 1.0;
    for (int j = 0; j < n; ++j) s *= 1.0 + w1.at(j, 0) * w1.at(j, 0);
    double sn = rp.at(n, 0) * rp.at(n, 0) + rp.at(n, 1) * rp.at(n, 1);
    REQUIRE(sn == Approx(s).epsilon(1e-12));

    // drift-free circle: radius recursion prod sqrt(1 + W_j^2)
    auto cir = benchmark("circle");
    auto cpth = euler_path(cir.strat, cir.x0, w1);
    double r = 1.0;
    for (int j = 0; j < n; ++j) r *= std::sqrt(1.0 + w1.at(j, 0) * w1.at(j, 0));
    REQUIRE(std::hypot(cpth.at(n, 0), cpth.at(n, 1)) == Approx(r).epsilon(1e-12));

    // dimension mismatch
    auto w2 = sample_brownian(n, 2, h, rng);
    REQUIRE_THROWS_AS(euler_path(lin.strat, lin.x0, w2), std::invalid_argument);
}

TEST_CASE("milstein: 1-d reduction and exactness on the area system", "[schemes]") {
    auto rng = RngStream::derive(402, 0);
    const int n = 32;
    const double h = 1.0 / n;
    auto w = sample_brownian(n, 1, h, rng);
    AreaBlocks empty;
    empty.n = n;
    empty.d = 1;

    auto lin = benchmark("linear_1d");
    auto mp = milstein_path(lin.strat, lin.x0, w, empty);
    double x = 1.0;
    for (int j = 0; j < n; ++j) {
        double wj = w.at(j, 0);
        x = x + x * wj + 0.5 * x * (wj * wj - h);
    }
    REQUIRE(mp.at(n, 0) == Approx(x).epsilon(1e-9));

    // exact at grid points on the area system, for any area draws
    auto levy = benchmark("levy_area");
    auto w2 = sample_brownian(64, 2, 1.0 / 64, rng);
    auto areas = sample_area_reference(w2, 16, rng).areas;
    auto got = milstein_path(levy.strat, levy.x0, w2, areas);
    auto truth = levy_true_path(w2, areas);
    REQUIRE(max_abs_diff(got, truth) < 1e-9);
}

TEST_CASE("davie: substitution equals milstein with swapped areas", "[schemes]") {
    auto rng = RngStream::derive(403, 0);
    auto trig = benchmark("trig");
    const int n = 32;
    auto w = sample_brownian(n, 2, 1.0 / n, rng);
    auto a = sample_area_reference(w, 16, rng).areas;
    auto m = milstein_path(trig.strat, trig.x0, w, a);
    auto d = davie_path(trig.strat, trig.x0, w, a);
    REQUIRE(max_abs_diff(m, d) == 0.0);
    REQUIRE(d.scheme == "davie");

    // area-system partial sums: substitute minus true output differs by
    // exactly the accumulated area differences in the third coordinate
    auto levy = benchmark("levy_area");
    auto w2 = sample_brownian(64, 2, 1.0 / 64, rng);
    auto at = sample_area_reference(w2, 16, rng).areas;
    auto bs = sample_gaussian_area(w2, rng);
    auto pa = milstein_path(levy.strat, levy.x0, w2, at);
    auto pb = davie_path(levy.strat, levy.x0, w2, bs);
    double acc = 0.0;
    for (int j = 0; j < 64; ++j) {
        acc += bs.at(j, 0) - at.at(j, 0);
        REQUIRE(pb.at(j + 1, 2) - pa.at(j + 1, 2) == Approx(acc).margin(1e-12));
        REQUIRE(pb.at(j + 1, 0) == pa.at(j + 1, 0));
        REQUIRE(pb.at(j + 1, 1) == pa.at(j + 1, 1));
    }
}

TEST_CASE("davie: discrete martingale property at one step", "[schemes]") {
    // commuting system, V_0 = 0: E[x_1 | x_0] = x_0 exactly thanks to the
    // compensated W^2 - h term
    auto sys = benchmark("commuting").strat;
    const double h = 1.0 / 128.0;
    const int reps = 200000;
    std::vector<double> dx0(reps), dx1(reps);
    auto rng = RngStream::derive(404, 0);
    std::vector<double> x0 = {1.3, 0.8};
    for (int r = 0; r < reps; ++r) {
        auto w = sample_brownian(1, 2, h, rng);
        auto b = sample_gaussian_area(w, rng);
        auto p = davie_path(sys, x0, w, b);
        dx0[r] = p.at(1, 0) - x0[0];
        dx1[r] = p.at(1, 1) - x0[1];
    }
    auto m0 = moments(dx0), m1 = moments(dx1);
    REQUIRE(std::abs(m0.mean) < 4.0 * m0.se_mean);
    REQUIRE(std::abs(m1.mean) < 4.0 * m1.se_mean);
}

TEST_CASE("logode: exactness catalogue", "[schemes]") {
    auto rng = RngStream::derive(405, 0);
    FlowConfig cfg;

    // d = q = 1, V(x) = x: each step multiplies by exp(W_j)
    auto lin = benchmark("linear_1d");
    const int n = 32;
    auto w = sample_brownian(n, 1, 1.0 / n, rng);
    AreaBlocks empty;
    empty.n = n;
    empty.d = 1;
    FlowConfig fine;
    fine.substeps = 64;
    auto lp = logode_path(lin.strat, lin.x0, w, empty, fine);
    double x = 1.0;
    for (int j = 0; j < n; ++j) x *= std::exp(w.at(j, 0));
    REQUIRE(lp.at(n, 0) == Approx(x).epsilon(1e-11));

    // area system with true areas: exact at grid points to flow tolerance
    auto levy = benchmark("levy_area");
    auto w2 = sample_brownian(128, 2, 1.0 / 128, rng);
    auto at = sample_area_reference(w2, 16, rng).areas;
    auto gp = logode_path(levy.strat, levy.x0, w2, at, cfg);
    auto truth = levy_true_path(w2, at);
    REQUIRE(max_abs_diff(gp, truth) < 1e-9);

    // circle: output stays on the unit circle
    auto cir = benchmark("circle");
    const int nc = 128;
    auto wc = sample_brownian(nc, 1, 1.0 / nc, rng);
    AreaBlocks e1;
    e1.n = nc;
    e1.d = 1;
    auto cp = logode_path(cir.strat, cir.x0, wc, e1, cfg);
    for (const auto& fact : cir.facts)
        if (fact.name == "unit_radius") REQUIRE(fact.violation(cp) < 1e-8);

    // rotation with the Stratonovich drift view conserves |x|^2 = e at t=1
    auto rot = benchmark("rotation");
    auto rp = logode_path(rot.strat, rot.x0, wc, e1, cfg);
    for (const auto& fact : rot.facts) REQUIRE(fact.violation(rp) < 1e-7);
}

TEST_CASE("commuting fields: zero-area level-2 equals level-1 bitwise and is exact", "[schemes]") {
    auto rng = RngStream::derive(406, 0);
    auto com = benchmark("commuting");
    const int n = 64;
    auto w = sample_brownian(n, 2, 1.0 / n, rng);
    AreaBlocks zero;
    zero.n = n;
    zero.d = 2;
    zero.a.assign(std::size_t(n) * 1, 0.0);
    FlowConfig cfg;
    cfg.substeps = 32;
    auto l2 = logode_path(com.strat, com.x0, w, zero, cfg, "none");
    auto l1 = logode1_path(com.strat, com.x0, w, cfg);
    REQUIRE(l2.x == l1.x);  // bitwise coincidence

    // and both equal the exact solution x_i exp(W_i(t))
    double w0 = 0.0, w1 = 0.0;
    for (int j = 0; j < n; ++j) {
        w0 += w.at(j, 0);
        w1 += w.at(j, 1);
    }
    REQUIRE(l2.at(n, 0) == Approx(std::exp(w0)).epsilon(1e-10));
    REQUIRE(l2.at(n, 1) == Approx(std::exp(w1)).epsilon(1e-10));

    // milstein agrees with logode exactly on constant commuting fields
    VectorFieldSystem cons;
    cons.q = 2;
    cons.d = 2;
    cons.fields = {[](const double*, double* o) {
                       o[0] = 1.0;
                       o[1] = 0.0;
                   },
                   [](const double*, double* o) {
                       o[0] = 0.0;
                       o[1] = 1.0;
                   }};
    auto zb = sample_gaussian_area(w, rng);
    auto mc = milstein_path(cons, {0.0, 0.0}, w, zb);
    auto lc = logode_path(cons, {0.0, 0.0}, w, zb, cfg);
    REQUIRE(max_abs_diff(mc, lc) < 1e-12);
}

TEST_CASE("one-step L2 gap between logode and the Taylor scheme is O(h^{3/2})", "[schemes]") {
    auto sys = benchmark("trig").strat;
    FlowConfig cfg;
    auto gap_sq = [&](double h, int reps, int seed) {
        auto rng = RngStream::derive(seed, 0);
        std::vector<double> g(reps);
        std::vector<double> x0 = {0.9, 0.4};
        for (int r = 0; r < reps; ++r) {
            BrownianBlocks w;
            w.n = 1;
            w.d = 2;
            w.h = h;
            w.w = {std::sqrt(h) * rng.next_gaussian(), std::sqrt(h) * rng.next_gaussian()};
            auto b = sample_gaussian_area(w, rng);
            auto lo = logode_path(sys, x0, w, b, cfg, "substitute");
            auto da = davie_path(sys, x0, w, b);
            double s = 0.0;
            for (int i = 0; i < 2; ++i) {
                double d = lo.at(1, i) - da.at(1, i);
                s += d * d;
            }
            g[r] = s;
        }
        return moments(g).mean;
    };
    const double h = 1.0 / 1024.0;
    double r = gap_sq(h, 40000, 407) / gap_sq(h / 2.0, 40000, 408);
    // squared gap scales like h^3: halving h divides it by ~8
    REQUIRE(r > 5.0);
    REQUIRE(r < 12.0);
}

TEST_CASE("bracket synthesis: constants, linear fields, polynomial oracle", "[schemes]") {
    // constant fields have zero brackets
    VectorFieldSystem cons;
    cons.q = 2;
    cons.d = 2;
    cons.fields = {[](const double*, double* o) {
                       o[0] = 1.0;
                       o[1] = 2.0;
                   },
                   [](const double*, double* o) {
                       o[0] = -0.5;
                       o[1] = 0.3;
                   }};
    auto synth = synth_brackets(cons);
    double out[2];
    double pt[2] = {0.7, -0.3};
    synth.brackets[0](pt, out);
    REQUIRE(std::abs(out[0]) < 1e-9);
    REQUIRE(std::abs(out[1]) < 1e-9);

    // linear fields V_k = A_k x: bracket is (A_l A_k - A_k A_l) x
    const double A1[4] = {0.2, -0.9, 0.4, 0.1};
    const double A2[4] = {-0.3, 0.5, 0.8, -0.6};
    VectorFieldSystem linsys;
    linsys.q = 2;
    linsys.d = 2;
    linsys.fields = {[&A1](const double* x, double* o) {
                         o[0] = A1[0] * x[0] + A1[1] * x[1];
                         o[1] = A1[2] * x[0] + A1[3] * x[1];
                     },
                     [&A2](const double* x, double* o) {
                         o[0] = A2[0] * x[0] + A2[1] * x[1];
                         o[1] = A2[2] * x[0] + A2[3] * x[1];
                     }};
    auto lsyn = synth_brackets(linsys);
    auto rng = RngStream::derive(409, 0);
    for (int cas = 0; cas < 20; ++cas) {
        double x[2] = {4.0 * rng.next_uniform() - 2.0, 4.0 * rng.next_uniform() - 2.0};
        double got[2];
        lsyn.brackets[0](x, got);
        // commutator matrix C = A2 A1 - A1 A2
        double c0 = A2[0] * A1[0] + A2[1] * A1[2] - (A1[0] * A2[0] + A1[1] * A2[2]);
        double c1 = A2[0] * A1[1] + A2[1] * A1[3] - (A1[0] * A2[1] + A1[1] * A2[3]);
        double c2 = A2[2] * A1[0] + A2[3] * A1[2] - (A1[2] * A2[0] + A1[3] * A2[2]);
        double c3 = A2[2] * A1[1] + A2[3] * A1[3] - (A1[2] * A2[1] + A1[3] * A2[3]);
        REQUIRE(got[0] == Approx(c0 * x[0] + c1 * x[1]).margin(1e-8));
        REQUIRE(got[1] == Approx(c2 * x[0] + c3 * x[1]).margin(1e-8));
    }

    // analytic brackets of the named systems agree with finite differences
    for (const std::string name : {"levy_area", "trig", "commuting"}) {
        auto sys = benchmark(name).strat;
        std::vector<std::vector<double>> pts;
        for (int cas = 0; cas < 100; ++cas) {
            std::vector<double> x(sys.q);
            for (auto& v : x) v = 2.0 * rng.next_uniform() - 1.0;
            pts.push_back(x);
        }
        REQUIRE(bracket_consistency(sys, pts) < 1e-6);
    }
}

TEST_CASE("scheme paths: shape, initial condition, csv", "[schemes]") {
    auto rng = RngStream::derive(410, 0);
    auto trig = benchmark("trig");
    auto w = sample_brownian(16, 2, 1.0 / 16, rng);
    auto b = sample_gaussian_area(w, rng);
    for (const auto& p : {euler_path(trig.euler, trig.x0, w), davie_path(trig.strat, trig.x0, w, b)}) {
        REQUIRE(p.n == 16);
        REQUIRE(p.at(0, 0) == trig.x0[0]);
        REQUIRE(p.at(0, 1) == trig.x0[1]);
    }
    std::ostringstream os;
    write_scheme_csv(euler_path(trig.euler, trig.x0, w), os);
    REQUIRE(os.str().find("# pabel-scheme v1 scheme=euler") == 0);

    REQUIRE_THROWS_AS(benchmark("nope"), std::invalid_argument);
    REQUIRE_THROWS_AS(euler_path(trig.euler, {0.0}, w), std::invalid_argument);
}
