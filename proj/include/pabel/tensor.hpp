#pragma once

// Truncated tensor algebra T^(n)(R^d) with the free nilpotent group/algebra
// living inside it. Coefficients are stored densely per level; the word
// (i_1,...,i_k) over letters 1..d sits at index sum (i_j - 1) d^{k-j} of the
// level-k array. Levels up to 5 and dimensions up to 4 are supported, which
// keeps every level array at or below 4^5 doubles.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pabel {

inline constexpr int kMaxLevel = 5;
inline constexpr int kMaxDim = 4;

class TruncatedTensor {
  public:
    TruncatedTensor(int dim, int level) : dim_(dim), level_(level) {
        if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("TruncatedTensor: dim must be in 1..4");
        if (level < 1 || level > kMaxLevel) throw std::invalid_argument("TruncatedTensor: level must be in 1..5");
        off_[0] = 0;
        int size = 1;
        int pw = 1;
        for (int k = 1; k <= level; ++k) {
            off_[k] = size;
            pw *= dim;
            size += pw;
        }
        off_[level + 1] = size;
        c_.assign(size, 0.0);
    }

    int dim() const { return dim_; }
    int level() const { return level_; }
    int level_size(int k) const { return off_[k + 1] - off_[k]; }

    std::span<double> lev(int k) { return {c_.data() + off_[k], std::size_t(level_size(k))}; }
    std::span<const double> lev(int k) const { return {c_.data() + off_[k], std::size_t(level_size(k))}; }

    double scalar() const { return c_[0]; }
    void set_scalar(double v) { c_[0] = v; }

    TruncatedTensor& operator+=(const TruncatedTensor& o) {
        check_same(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    TruncatedTensor& operator-=(const TruncatedTensor& o) {
        check_same(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    TruncatedTensor& operator*=(double s) {
        for (double& v : c_) v *= s;
        return *this;
    }
    friend TruncatedTensor operator+(TruncatedTensor a, const TruncatedTensor& b) { return a += b; }
    friend TruncatedTensor operator-(TruncatedTensor a, const TruncatedTensor& b) { return a -= b; }
    friend TruncatedTensor operator*(double s, TruncatedTensor a) { return a *= s; }

    void check_same(const TruncatedTensor& o) const {
        if (dim_ != o.dim_ || level_ != o.level_)
            throw std::invalid_argument("tensor dimension/level mismatch");
    }

  private:
    int dim_;
    int level_;
    std::array<int, kMaxLevel + 2> off_{};
    std::vector<double> c_;
};

// Truncated product: level k of the result collects pi_i(a) (x) pi_j(b) over i+j=k.
inline TruncatedTensor tensor_mul(const TruncatedTensor& a, const TruncatedTensor& b) {
    a.check_same(b);
    const int n = a.level();
    TruncatedTensor out(a.dim(), n);
    for (int j = 0; j <= n; ++j) {
        auto bj = b.lev(j);
        bool bz = true;
        for (double v : bj)
            if (v != 0.0) {
                bz = false;
                break;
            }
        if (bz) continue;
        for (int i = 0; i + j <= n; ++i) {
            auto ai = a.lev(i);
            auto ck = out.lev(i + j);
            const int szj = int(bj.size());
            for (int u = 0; u < int(ai.size()); ++u) {
                const double au = ai[u];
                if (au == 0.0) continue;
                double* cw = ck.data() + std::size_t(u) * szj;
                for (int v = 0; v < szj; ++v) cw[v] += au * bj[v];
            }
        }
    }
    return out;
}

inline TruncatedTensor tensor_unit(int dim, int level) {
    TruncatedTensor t(dim, level);
    t.set_scalar(1.0);
    return t;
}

// exp of a tensor with zero scalar slot (power series, exact under truncation).
inline TruncatedTensor tensor_exp(const TruncatedTensor& x) {
    if (x.scalar() != 0.0) throw std::domain_error("tensor_exp: scalar slot must be 0");
    TruncatedTensor acc = tensor_unit(x.dim(), x.level());
    TruncatedTensor pw = tensor_unit(x.dim(), x.level());
    double fact = 1.0;
    for (int k = 1; k <= x.level(); ++k) {
        pw = tensor_mul(pw, x);
        fact /= double(k);
        TruncatedTensor term = pw;
        term *= fact;
        acc += term;
    }
    return acc;
}

// log of a tensor with unit scalar slot.
inline TruncatedTensor tensor_log(const TruncatedTensor& g) {
    if (g.scalar() != 1.0) throw std::domain_error("tensor_log: scalar slot must be 1");
    TruncatedTensor u = g;
    u.set_scalar(0.0);
    TruncatedTensor acc(g.dim(), g.level());
    TruncatedTensor pw = u;
    double sign = 1.0;
    for (int k = 1; k <= g.level(); ++k) {
        TruncatedTensor term = pw;
        term *= sign / double(k);
        acc += term;
        if (k < g.level()) pw = tensor_mul(pw, u);
        sign = -sign;
    }
    return acc;
}

// (1 + u)^{-1} as a geometric series; input must have unit scalar slot.
inline TruncatedTensor tensor_inverse(const TruncatedTensor& g) {
    if (g.scalar() != 1.0) throw std::domain_error("tensor_inverse: scalar slot must be 1");
    TruncatedTensor u = g;
    u.set_scalar(0.0);
    TruncatedTensor acc = tensor_unit(g.dim(), g.level());
    TruncatedTensor pw = tensor_unit(g.dim(), g.level());
    double sign = 1.0;
    for (int k = 1; k <= g.level(); ++k) {
        pw = tensor_mul(pw, u);
        sign = -sign;
        TruncatedTensor term = pw;
        term *= sign;
        acc += term;
    }
    return acc;
}

inline double level_norm(const TruncatedTensor& a, int k) {
    double s = 0.0;
    for (double v : a.lev(k)) s += v * v;
    return std::sqrt(s);
}

inline double frobenius_norm(const TruncatedTensor& a) {
    double s = a.scalar() * a.scalar();
    for (int k = 1; k <= a.level(); ++k) {
        double nk = level_norm(a, k);
        s += nk * nk;
    }
    return std::sqrt(s);
}

// Dilation delta_t: multiplies level k by t^k.
inline TruncatedTensor dilate(const TruncatedTensor& a, double t) {
    TruncatedTensor out = a;
    double tk = 1.0;
    for (int k = 1; k <= a.level(); ++k) {
        tk *= t;
        for (double& v : out.lev(k)) v *= tk;
    }
    return out;
}

// Relative closeness in the Frobenius norm; used for the 1e-12 identities.
inline double rel_error(const TruncatedTensor& a, const TruncatedTensor& b) {
    TruncatedTensor d = a;
    d -= b;
    double scale = std::max(1.0, std::max(frobenius_norm(a), frobenius_norm(b)));
    return frobenius_norm(d) / scale;
}

// --- Lie algebra / group wrappers -----------------------------------------
//
// LieElement is only ever produced by generator embedding, brackets, linear
// combinations, bch, or log of a group element, so membership in the free
// Lie algebra is a construction invariant rather than a runtime check.

struct LieElement {
    TruncatedTensor t;

    explicit LieElement(TruncatedTensor tt) : t(std::move(tt)) {
        if (t.scalar() != 0.0) throw std::domain_error("LieElement: scalar slot must be 0");
    }
    LieElement(int dim, int level) : t(dim, level) {}

    int dim() const { return t.dim(); }
    int level() const { return t.level(); }

    // Generator e_k, 1-based.
    static LieElement generator(int dim, int level, int k) {
        if (k < 1 || k > dim) throw std::invalid_argument("generator index out of range");
        LieElement x(dim, level);
        x.t.lev(1)[k - 1] = 1.0;
        return x;
    }

    LieElement& operator+=(const LieElement& o) {
        t += o.t;
        return *this;
    }
    LieElement& operator-=(const LieElement& o) {
        t -= o.t;
        return *this;
    }
    LieElement& operator*=(double s) {
        t *= s;
        return *this;
    }
    friend LieElement operator+(LieElement a, const LieElement& b) { return a += b; }
    friend LieElement operator-(LieElement a, const LieElement& b) { return a -= b; }
    friend LieElement operator*(double s, LieElement a) { return a *= s; }
};

struct GroupElement {
    TruncatedTensor t;

    explicit GroupElement(TruncatedTensor tt) : t(std::move(tt)) {
        if (t.scalar() != 1.0) throw std::domain_error("GroupElement: scalar slot must be 1");
    }

    int dim() const { return t.dim(); }
    int level() const { return t.level(); }

    static GroupElement identity(int dim, int level) { return GroupElement(tensor_unit(dim, level)); }
};

inline GroupElement group_mul(const GroupElement& a, const GroupElement& b) {
    return GroupElement(tensor_mul(a.t, b.t));
}

inline GroupElement group_inverse(const GroupElement& g) { return GroupElement(tensor_inverse(g.t)); }

inline GroupElement exp_trunc(const LieElement& x) { return GroupElement(tensor_exp(x.t)); }

inline LieElement log_trunc(const GroupElement& g) { return LieElement(tensor_log(g.t)); }

inline LieElement lie_bracket(const LieElement& x, const LieElement& y) {
    TruncatedTensor xy = tensor_mul(x.t, y.t);
    xy -= tensor_mul(y.t, x.t);
    return LieElement(std::move(xy));
}

// max_k ||pi_k(log g)||^{1/k}: a homogeneous norm on the group (zero iff g=1,
// scales linearly under dilation).
inline double homogeneous_norm(const GroupElement& g) {
    TruncatedTensor x = tensor_log(g.t);
    double best = 0.0;
    for (int k = 1; k <= g.level(); ++k) {
        double nk = level_norm(x, k);
        if (nk > 0.0) best = std::max(best, std::pow(nk, 1.0 / double(k)));
    }
    return best;
}

// Re-embeds a Lie element in a (possibly) higher truncation level; tensor
// coordinates of bracket-length <= level(x) content are unchanged, new levels
// are zero.
inline LieElement extend_level(const LieElement& x, int level) {
    if (level < x.level()) throw std::invalid_argument("extend_level: target below current level");
    LieElement y(x.dim(), level);
    for (int k = 1; k <= x.level(); ++k) {
        auto src = x.t.lev(k);
        auto dst = y.t.lev(k);
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i];
    }
    return y;
}

inline LieElement project_level(const LieElement& x, int level) {
    if (level > x.level()) throw std::invalid_argument("project_level: target above current level");
    LieElement y(x.dim(), level);
    for (int k = 1; k <= level; ++k) {
        auto src = x.t.lev(k);
        auto dst = y.t.lev(k);
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i];
    }
    return y;
}

// Word -> coefficient text rendering for golden tests and debugging.
// One line per coefficient with |c| > eps, format "k:i1,i2,...: value".
inline std::string to_debug_string(const TruncatedTensor& a, double eps = 1e-14) {
    std::ostringstream os;
    os.precision(12);
    if (std::abs(a.scalar()) > eps) os << "0:: " << a.scalar() << "\n";
    for (int k = 1; k <= a.level(); ++k) {
        auto c = a.lev(k);
        for (int idx = 0; idx < int(c.size()); ++idx) {
            if (std::abs(c[idx]) <= eps) continue;
            // decode base-d word, most significant letter first
            std::array<int, kMaxLevel> w{};
            int rem = idx;
            for (int p = k - 1; p >= 0; --p) {
                w[p] = rem % a.dim() + 1;
                rem /= a.dim();
            }
            os << k << ":";
            for (int p = 0; p < k; ++p) os << (p ? "," : "") << w[p];
            os << ": " << c[idx] << "\n";
        }
    }
    return os.str();
}

}  // namespace pabel
