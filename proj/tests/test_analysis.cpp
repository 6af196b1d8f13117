#include <catch2/catch.hpp>

#include <cmath>
#include <vector>

#include "pabel/analysis.hpp"
#include "pabel/rng.hpp"

using namespace pabel;

namespace {

SchemePath blank_path(int q, int n, double h, const std::string& name) {
    SchemePath p;
    p.q = q;
    p.n = n;
    p.h = h;
    p.scheme = name;
    p.x.assign(std::size_t(n + 1) * q, 0.0);
    return p;
}

}  // namespace

TEST_CASE("strong-max and fixed-time estimators: exact cases", "[analysis]") {
    auto rng = RngStream::derive(501, 0);
    const int q = 2, n = 8, reps = 50;
    std::vector<SchemePath> a, b, shifted;
    for (int r = 0; r < reps; ++r) {
        auto p = blank_path(q, n, 0.125, "a");
        for (auto& v : p.x) v = rng.next_gaussian();
        a.push_back(p);
        b.push_back(p);
        auto s = p;
        for (int j = 0; j <= n; ++j) {
            s.row(j)[0] += 3.0;
            s.row(j)[1] += 4.0;
        }
        s.scheme = "b";
        shifted.push_back(s);
    }
    REQUIRE(strong_error_max(a, b).value == 0.0);
    REQUIRE(fixed_time_error(a, b).value == 0.0);
    REQUIRE(strong_error_max(a, shifted).value == Approx(5.0).epsilon(1e-12));
    REQUIRE(fixed_time_error(a, shifted).value == Approx(5.0).epsilon(1e-12));

    auto c = blank_path(q, n + 1, 0.125, "c");
    std::vector<SchemePath> cs(reps, c);
    REQUIRE_THROWS_AS(strong_error_max(a, cs), std::invalid_argument);
    REQUIRE_THROWS_AS(strong_error_max(a, std::vector<SchemePath>{}), std::invalid_argument);
}

TEST_CASE("estimator ordering and Gaussian oracle", "[analysis]") {
    // difference paths are Gaussian random walks: compare against a plain
    // brute-force oracle computed with an independent loop
    const int n = 4, reps = 100000;
    auto make = [&](int seed) {
        std::vector<SchemePath> a, b;
        auto rng = RngStream::derive(seed, 0);
        for (int r = 0; r < reps; ++r) {
            auto pa = blank_path(1, n, 0.25, "a");
            auto pb = pa;
            pb.scheme = "b";
            double s = 0.0;
            for (int j = 1; j <= n; ++j) {
                s += 0.5 * rng.next_gaussian();
                pb.row(j)[0] = pa.at(j, 0) + s;
            }
            a.push_back(std::move(pa));
            b.push_back(std::move(pb));
        }
        return std::make_pair(a, b);
    };
    auto [a, b] = make(502);
    auto strong = strong_error_max(a, b);
    auto fixed = fixed_time_error(a, b);
    REQUIRE(fixed.value <= strong.value);

    // oracle: 10^6 fresh walks, direct computation
    auto orng = RngStream::derive(977, 0);
    double acc_max = 0.0, acc_end = 0.0;
    const int big = 1000000;
    for (int r = 0; r < big; ++r) {
        double s = 0.0, m = 0.0;
        for (int j = 0; j < n; ++j) {
            s += 0.5 * orng.next_gaussian();
            m = std::max(m, s * s);
        }
        acc_max += m;
        acc_end += s * s;
    }
    double oracle_strong = std::sqrt(acc_max / big);
    double oracle_fixed = std::sqrt(acc_end / big);  // variance is largest at the terminal time
    REQUIRE(std::abs(strong.value - oracle_strong) < 3.0 * strong.std_error + 0.003);
    REQUIRE(std::abs(fixed.value - oracle_fixed) < 3.0 * fixed.std_error + 0.003);
    // closed form: terminal variance of the walk is 4 * 0.5^2 = 1
    REQUIRE(fixed.value == Approx(1.0).margin(0.02));
}

TEST_CASE("quantile W2: exact cases, Gaussian closed form, metric axioms", "[analysis]") {
    auto rng = RngStream::derive(503, 0);
    std::vector<double> xs(20000), shift(20000), wide(20000);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xs[i] = rng.next_gaussian();
        shift[i] = xs[i] + 2.5;
        wide[i] = 1.7 * rng.next_gaussian();
    }
    REQUIRE(quantile_w2_1d(xs, xs) == 0.0);
    REQUIRE(quantile_w2_1d(xs, shift) == Approx(2.5).epsilon(1e-12));
    // W2(N(0,1), N(0,sigma^2)) = |sigma - 1|
    REQUIRE(quantile_w2_1d(xs, wide) == Approx(0.7).margin(0.02));

    // symmetry and a triangle-inequality spot check
    REQUIRE(quantile_w2_1d(xs, wide) == Approx(quantile_w2_1d(wide, xs)).epsilon(1e-12));
    double ab = quantile_w2_1d(xs, shift);
    double bc = quantile_w2_1d(shift, wide);
    double ac = quantile_w2_1d(xs, wide);
    REQUIRE(ac <= ab + bc + 1e-12);

    REQUIRE_THROWS_AS(quantile_w2_1d({}, {}), std::invalid_argument);
    REQUIRE_THROWS_AS(quantile_w2_1d(xs, {1.0}), std::invalid_argument);
}

TEST_CASE("slope fitting", "[analysis]") {
    std::vector<double> hs;
    for (int e = 4; e <= 9; ++e) hs.push_back(std::pow(2.0, -e));
    std::vector<double> lin = hs;
    auto f1 = fit_slope(hs, lin);
    REQUIRE(f1.slope == Approx(1.0).epsilon(1e-12));
    REQUIRE(f1.residual < 1e-12);

    std::vector<double> rt(hs.size());
    for (std::size_t i = 0; i < hs.size(); ++i) rt[i] = std::sqrt(hs[i]);
    REQUIRE(fit_slope(hs, rt).slope == Approx(0.5).epsilon(1e-12));

    // 5% multiplicative noise on h^0.75 keeps the slope within +-0.05
    auto rng = RngStream::derive(504, 0);
    for (int cas = 0; cas < 20; ++cas) {
        std::vector<double> noisy(hs.size());
        for (std::size_t i = 0; i < hs.size(); ++i)
            noisy[i] = std::pow(hs[i], 0.75) * (1.0 + 0.05 * (2.0 * rng.next_uniform() - 1.0));
        REQUIRE(std::abs(fit_slope(hs, noisy).slope - 0.75) < 0.05);
    }

    REQUIRE_THROWS_AS(fit_slope({0.1}, {0.1}), std::invalid_argument);
    REQUIRE_THROWS_AS(fit_slope({0.1, -0.2}, {0.1, 0.2}), std::invalid_argument);
}

TEST_CASE("estimators are deterministic functions of their inputs", "[analysis]") {
    auto rng = RngStream::derive(505, 0);
    std::vector<SchemePath> a, b;
    for (int r = 0; r < 64; ++r) {
        auto pa = blank_path(2, 6, 1.0 / 6, "a");
        auto pb = pa;
        for (auto& v : pb.x) v += 0.1 * rng.next_gaussian();
        a.push_back(pa);
        b.push_back(pb);
    }
    auto e1 = strong_error_max(a, b);
    auto e2 = strong_error_max(a, b);
    REQUIRE(e1.value == e2.value);
    REQUIRE(e1.std_error == e2.std_error);
}
