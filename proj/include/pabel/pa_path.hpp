#pragma once

// Piecewise abelian rough paths: group-valued paths on a uniform grid whose
// log-increment is interpolated linearly inside each block, X_{0,t} =
// X_{0,jh} (x) exp((t-jh)/h * xi_j). Increments inside one block commute, and
// Chen's identity holds across blocks by construction.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "pabel/tensor.hpp"

namespace pabel {

class PiecewiseAbelianPath {
  public:
    // log_increments are the xi_j; h*N must equal 1 within 1e-12.
    static PiecewiseAbelianPath build(std::vector<LieElement> log_increments, double h) {
        if (log_increments.empty()) throw std::invalid_argument("PiecewiseAbelianPath: no increments");
        const int dim = log_increments[0].dim();
        const int level = log_increments[0].level();
        for (const auto& x : log_increments)
            if (x.dim() != dim || x.level() != level)
                throw std::invalid_argument("PiecewiseAbelianPath: inconsistent increments");
        if (std::abs(h * double(log_increments.size()) - 1.0) > 1e-12)
            throw std::invalid_argument("PiecewiseAbelianPath: h*N must equal 1");
        return PiecewiseAbelianPath(std::move(log_increments), h, dim, level);
    }

    int dim() const { return dim_; }
    int level() const { return level_; }
    int blocks() const { return int(logs_.size()); }
    double step() const { return h_; }
    const LieElement& log_increment(int j) const { return logs_[j]; }
    const GroupElement& endpoint(int j) const { return prefix_[j]; }  // X_{0,jh}

    // X_{0,t} for t in [0,1].
    GroupElement value(double t) const {
        auto [j, frac] = locate(t);
        if (frac == 0.0) return prefix_[j];
        return group_mul(prefix_[j], exp_trunc(frac * logs_[j]));
    }

    // Group increment X_{s,t} = X_{0,s}^{-1} (x) X_{0,t}.
    GroupElement increment(double s, double t) const {
        if (s < -1e-12 || t > 1.0 + 1e-12 || s > t + 1e-12)
            throw std::invalid_argument("increment: need 0 <= s <= t <= 1");
        auto [js, fs] = locate(s);
        auto [jt, ft] = locate(t);
        if (js == jt) {
            // same block: exp((ft-fs) xi_j), exactly commuting
            if (ft == fs) return GroupElement::identity(dim_, level_);
            return exp_trunc((ft - fs) * logs_[js]);
        }
        GroupElement left = (fs == 0.0) ? prefix_[js] : group_mul(prefix_[js], exp_trunc(fs * logs_[js]));
        GroupElement right = (ft == 0.0) ? prefix_[jt] : group_mul(prefix_[jt], exp_trunc(ft * logs_[jt]));
        return group_mul(group_inverse(left), right);
    }

    // Re-interprets the log-increments in the level-kappa algebra (zero
    // content above the stored bracket lengths) and rebuilds the path.
    PiecewiseAbelianPath lift(int kappa) const {
        if (kappa < level_ || kappa > kMaxLevel)
            throw std::invalid_argument("lift: target level out of supported range");
        if (kappa == level_) return *this;
        std::vector<LieElement> logs;
        logs.reserve(logs_.size());
        for (const auto& x : logs_) logs.push_back(extend_level(x, kappa));
        return build(std::move(logs), h_);
    }

    PiecewiseAbelianPath project(int level) const {
        std::vector<LieElement> logs;
        logs.reserve(logs_.size());
        for (const auto& x : logs_) logs.push_back(project_level(x, level));
        return build(std::move(logs), h_);
    }

  private:
    PiecewiseAbelianPath(std::vector<LieElement> logs, double h, int dim, int level)
        : logs_(std::move(logs)), h_(h), dim_(dim), level_(level) {
        prefix_.reserve(logs_.size() + 1);
        prefix_.push_back(GroupElement::identity(dim_, level_));
        for (const auto& x : logs_) prefix_.push_back(group_mul(prefix_.back(), exp_trunc(x)));
    }

    // Block index and intra-block fraction; grid times snap exactly.
    std::pair<int, double> locate(double t) const {
        const int n = blocks();
        if (t <= 0.0) return {0, 0.0};
        if (t >= 1.0) return {n, 0.0};
        double u = t / h_;
        int j = int(u);
        double frac = u - double(j);
        if (frac < 1e-12) return {j, 0.0};
        if (frac > 1.0 - 1e-12) return {j + 1, 0.0};
        return {j, frac};
    }

    std::vector<LieElement> logs_;
    std::vector<GroupElement> prefix_;
    double h_;
    int dim_;
    int level_;
};

using PAPath = PiecewiseAbelianPath;

// --- level-2 serialization --------------------------------------------------
// CSV layout, one row per block: j, W_1..W_d, A_{kl} for 1<=k<l<=d in
// lexicographic order. Header row carries dim and block count.

inline int area_pair_count(int d) { return d * (d - 1) / 2; }

inline int area_pair_index(int d, int k, int l) {
    // 1-based k < l -> lexicographic position
    if (!(1 <= k && k < l && l <= d)) throw std::invalid_argument("area_pair_index: need 1 <= k < l <= d");
    int idx = 0;
    for (int a = 1; a < k; ++a) idx += d - a;
    return idx + (l - k - 1);
}

inline LieElement make_level2_increment(int d, std::span<const double> w, std::span<const double> a) {
    LieElement xi(d, 2);
    for (int k = 0; k < d; ++k) xi.t.lev(1)[k] = w[k];
    auto l2 = xi.t.lev(2);
    int idx = 0;
    for (int k = 1; k <= d; ++k)
        for (int l = k + 1; l <= d; ++l, ++idx) {
            l2[(k - 1) * d + (l - 1)] = a[idx];
            l2[(l - 1) * d + (k - 1)] = -a[idx];
        }
    return xi;
}

inline void write_path_csv(const PiecewiseAbelianPath& p, std::ostream& os) {
    if (p.level() != 2) throw std::invalid_argument("write_path_csv: level-2 paths only");
    os << "# pabel-path v1 dim=" << p.dim() << " blocks=" << p.blocks() << "\n";
    os.precision(17);
    for (int j = 0; j < p.blocks(); ++j) {
        os << j;
        const auto& xi = p.log_increment(j);
        for (int k = 0; k < p.dim(); ++k) os << "," << xi.t.lev(1)[k];
        for (int k = 1; k <= p.dim(); ++k)
            for (int l = k + 1; l <= p.dim(); ++l) os << "," << xi.t.lev(2)[(k - 1) * p.dim() + (l - 1)];
        os << "\n";
    }
}

inline PiecewiseAbelianPath read_path_csv(std::istream& is) {
    std::string header;
    std::getline(is, header);
    int dim = 0, blocks = 0;
    if (std::sscanf(header.c_str(), "# pabel-path v1 dim=%d blocks=%d", &dim, &blocks) != 2)
        throw std::invalid_argument("read_path_csv: bad header");
    std::vector<LieElement> logs;
    logs.reserve(blocks);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        std::vector<double> vals;
        while (std::getline(ls, tok, ',')) vals.push_back(std::stod(tok));
        if (int(vals.size()) != 1 + dim + area_pair_count(dim))
            throw std::invalid_argument("read_path_csv: bad row width");
        logs.push_back(make_level2_increment(dim, std::span<const double>(vals).subspan(1, dim),
                                             std::span<const double>(vals).subspan(1 + dim)));
    }
    if (int(logs.size()) != blocks) throw std::invalid_argument("read_path_csv: row count mismatch");
    return PiecewiseAbelianPath::build(std::move(logs), 1.0 / double(blocks));
}

// Independent route to the level-kappa lift: partition-limit of products of
// exp_kappa(log_2 increment) over a refined grid. Used as the oracle against
// the direct re-exponentiation.
inline GroupElement lift_increment_via_products(const PiecewiseAbelianPath& base, int kappa, double s,
                                                double t, int refine) {
    if (base.level() != 2) throw std::invalid_argument("lift oracle expects a level-2 base path");
    GroupElement acc = GroupElement::identity(base.dim(), kappa);
    for (int i = 0; i < refine; ++i) {
        double u0 = s + (t - s) * double(i) / double(refine);
        double u1 = s + (t - s) * double(i + 1) / double(refine);
        LieElement xi2 = log_trunc(base.increment(u0, u1));
        acc = group_mul(acc, exp_trunc(extend_level(xi2, kappa)));
    }
    return acc;
}

}  // namespace pabel
