#include <catch2/catch.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#ifndef PABEL_CLI_PATH
#define PABEL_CLI_PATH "pabel"
#endif

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    std::string cmd = std::string(PABEL_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    char buf[4096];
    while (std::size_t got = fread(buf, 1, sizeof buf, pipe)) r.output.append(buf, got);
    int status = pclose(pipe);
    r.exit_code = WEXITSTATUS(status);
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("bch-check: clean run and injected-coefficient negative control", "[cli]") {
    auto ok = run_cli("bch-check --cases 60 --seed 9");
    REQUIRE(ok.exit_code == 0);
    REQUIRE(ok.output.find("bch-tabulated-vs-product-log") != std::string::npos);

    // level-2-only smoke run
    auto quick = run_cli("bch-check --cases 200 --level 2 --seed 9");
    REQUIRE(quick.exit_code == 0);

    // a 1e-6 perturbation of one tabulated coefficient must fail, naming it
    auto bad = run_cli("bch-check --cases 60 --seed 9 --inject-eps 1e-6 --inject-term 2");
    REQUIRE(bad.exit_code == 1);
    REQUIRE(bad.output.find("1/12*[y,[y,x]]") != std::string::npos);
}

TEST_CASE("couple-stats: small gated run passes and is thread-deterministic", "[cli]") {
    const std::string base =
        "couple-stats --m 6 --dim 2 --replications 300 --slope-reps 150 --h-exp 4,5,6 --seed 21 --out ";
    auto r1 = run_cli(base + "/tmp/pabel_cs_a.csv --threads 1");
    auto r2 = run_cli(base + "/tmp/pabel_cs_b.csv --threads 2");
    // growth gates engage only for m >= 4; slope fit on a short window is
    // informational here, so disable gating for the small run
    auto r3 = run_cli(base + "/tmp/pabel_cs_c.csv --threads 2 --no-gate");
    REQUIRE(r3.exit_code == 0);
    REQUIRE(slurp("/tmp/pabel_cs_a.csv") == slurp("/tmp/pabel_cs_b.csv"));
    REQUIRE(!slurp("/tmp/pabel_cs_a.csv").empty());

    // raw per-set diagnostics rows
    auto r4 = run_cli(
        "couple-stats --m 3 --dim 2 --replications 120 --h-exp 3,4 --slope-reps 100 --seed 4 "
        "--no-gate --raw /tmp/pabel_raw.csv --out /dev/null");
    REQUIRE(r4.exit_code == 0);
    auto raw = slurp("/tmp/pabel_raw.csv");
    REQUIRE(raw.find("scale,set,deviation,replication") != std::string::npos);
}

TEST_CASE("converge: determinism across thread counts and config errors", "[cli]") {
    const std::string base =
        "converge --benchmark trig --schemes euler,logode --h-exp 4,5,6 --samples 120 --seed 31 --out ";
    auto r1 = run_cli(base + "/tmp/pabel_cv_a.csv --threads 1");
    auto r2 = run_cli(base + "/tmp/pabel_cv_b.csv --threads 2");
    REQUIRE(r1.exit_code == 0);
    REQUIRE(r2.exit_code == 0);
    REQUIRE(slurp("/tmp/pabel_cv_a.csv") == slurp("/tmp/pabel_cv_b.csv"));
    REQUIRE(slurp("/tmp/pabel_cv_a.csv").find("# pabel converge v1") == 0);

    auto bad_bench = run_cli("converge --benchmark nope --samples 120");
    REQUIRE(bad_bench.exit_code == 2);
    REQUIRE(bad_bench.output.find("benchmark") != std::string::npos);

    auto bad_samples = run_cli("converge --benchmark trig --samples 10");
    REQUIRE(bad_samples.exit_code == 2);
    REQUIRE(bad_samples.output.find("samples") != std::string::npos);

    auto bad_scheme = run_cli("converge --benchmark trig --schemes warp --samples 120");
    REQUIRE(bad_scheme.exit_code == 2);
    REQUIRE(bad_scheme.output.find("schemes") != std::string::npos);
}

TEST_CASE("converge: json config file with flag overrides", "[cli]") {
    {
        std::ofstream f("/tmp/pabel_cfg.json");
        f << R"({"benchmark":"trig","schemes":["euler"],"h_exp":[4,5],"samples":120,"seed":77,)"
          << R"("format":"json"})";
    }
    auto r = run_cli("--config /tmp/pabel_cfg.json converge --out -");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.output.find("\"command\": \"converge\"") != std::string::npos);
    // flag overrides the config's format
    auto r2 = run_cli("--config /tmp/pabel_cfg.json converge --format csv --out -");
    REQUIRE(r2.exit_code == 0);
    REQUIRE(r2.output.find("# pabel converge v1") == 0);
}

TEST_CASE("exactness: gated checks pass at the default grid", "[cli]") {
    auto r = run_cli("exactness --samples 40 --seed 5 --threads 2 --out -");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.output.find("levy_area,logode-true-area-exactness") != std::string::npos);
    REQUIRE(r.output.find("circle,euler-radius-drift") != std::string::npos);
}

TEST_CASE("couple-stats: approx-nd mode runs at d = 3", "[cli]") {
    auto r = run_cli(
        "couple-stats --m 5 --dim 3 --coupling-mode approx-nd --replications 150 --slope-reps 100 "
        "--h-exp 4,5 --seed 8 --no-gate --threads 2 --out -");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.output.find("scale,5") != std::string::npos);

    // exact-2d refuses d != 2
    auto bad = run_cli("couple-stats --m 4 --dim 3 --coupling-mode exact-2d --replications 150");
    REQUIRE(bad.exit_code == 2);
    REQUIRE(bad.output.find("coupling-mode") != std::string::npos);
}

TEST_CASE("converge: cubic-drift divergence indicator is reported", "[cli]") {
    auto r = run_cli(
        "converge --benchmark cubic_drift --schemes euler --h-exp 4,6,8 --samples 150 --seed 19 "
        "--threads 2 --out -");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.output.find("terminal-m2") != std::string::npos);
}
