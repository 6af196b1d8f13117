#pragma once

// Baker-Campbell-Hausdorff machinery on the free nilpotent Lie algebra.
// Two routes are provided and must agree: a tabulated two-argument expansion
// folded over the inputs, and log of the iterated group product. For elements
// with zero scalar slot every bracket of more than `level` letters vanishes
// under truncation, so the order-5 table is exact for levels up to 5.

#include <cctype>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pabel/tensor.hpp"

namespace pabel {

namespace detail {

// Right-nested bracket [g0,[g1,[...,[g_{m-1},g_m]]]] of Lie elements.
inline LieElement nested_bracket(std::span<const LieElement* const> xs) {
    LieElement acc = *xs.back();
    for (int i = int(xs.size()) - 2; i >= 0; --i) acc = lie_bracket(*xs[i], acc);
    return acc;
}

struct BchTerm {
    double coeff;
    // 0 = first argument, 1 = second; right-nested reading order.
    std::vector<int> word;
    const char* name;
};

// Classical expansion of log(e^x e^y) through order 5 in right-nested form.
inline const std::vector<BchTerm>& bch_table() {
    static const std::vector<BchTerm> table = {
        {1.0 / 2.0, {0, 1}, "1/2*[x,y]"},
        {1.0 / 12.0, {0, 0, 1}, "1/12*[x,[x,y]]"},
        {1.0 / 12.0, {1, 1, 0}, "1/12*[y,[y,x]]"},
        {-1.0 / 24.0, {1, 0, 0, 1}, "-1/24*[y,[x,[x,y]]]"},
        {-1.0 / 720.0, {1, 1, 1, 1, 0}, "-1/720*[y,[y,[y,[y,x]]]]"},
        {-1.0 / 720.0, {0, 0, 0, 0, 1}, "-1/720*[x,[x,[x,[x,y]]]]"},
        {1.0 / 360.0, {0, 1, 1, 1, 0}, "1/360*[x,[y,[y,[y,x]]]]"},
        {1.0 / 360.0, {1, 0, 0, 0, 1}, "1/360*[y,[x,[x,[x,y]]]]"},
        {1.0 / 120.0, {1, 0, 1, 0, 1}, "1/120*[y,[x,[y,[x,y]]]]"},
        {1.0 / 120.0, {0, 1, 0, 1, 0}, "1/120*[x,[y,[x,[y,x]]]]"},
    };
    return table;
}

inline LieElement bch_pair_tabulated(const LieElement& x, const LieElement& y, double* perturb = nullptr,
                                     int perturb_index = -1) {
    x.t.check_same(y.t);
    const int n = x.level();
    LieElement acc = x + y;
    const auto& table = bch_table();
    std::vector<const LieElement*> ptrs;
    for (int ti = 0; ti < int(table.size()); ++ti) {
        const auto& term = table[ti];
        if (int(term.word.size()) > n) continue;
        ptrs.clear();
        for (int b : term.word) ptrs.push_back(b == 0 ? &x : &y);
        double c = term.coeff;
        if (perturb && ti == perturb_index) c += *perturb;
        acc += c * nested_bracket(ptrs);
    }
    return acc;
}

}  // namespace detail

enum class BchMethod { tabulated, product_log };

// H(x_1,...,x_m) = log(exp(x_1) (x) ... (x) exp(x_m)) at the given level.
inline LieElement bch(std::span<const LieElement> xs, int level, BchMethod method = BchMethod::tabulated) {
    if (xs.empty()) throw std::domain_error("bch: empty input");
    LieElement acc = extend_level(xs[0], level);
    if (method == BchMethod::tabulated) {
        for (std::size_t i = 1; i < xs.size(); ++i)
            acc = detail::bch_pair_tabulated(acc, extend_level(xs[i], level));
        return acc;
    }
    GroupElement g = exp_trunc(acc);
    for (std::size_t i = 1; i < xs.size(); ++i) g = group_mul(g, exp_trunc(extend_level(xs[i], level)));
    return log_trunc(g);
}

inline LieElement bch(std::initializer_list<LieElement> xs, int level,
                      BchMethod method = BchMethod::tabulated) {
    return bch(std::span<const LieElement>(xs.begin(), xs.size()), level, method);
}

// --- Rearrangement into right-nested commutators ---------------------------

// A bracket expression over generators x1, x2, ...; leaves hold 1-based ids.
struct BracketExpr {
    int leaf = -1;
    std::unique_ptr<BracketExpr> left, right;

    static BracketExpr make_leaf(int id) {
        BracketExpr e;
        e.leaf = id;
        return e;
    }
    static BracketExpr make_node(BracketExpr l, BracketExpr r) {
        BracketExpr e;
        e.left = std::make_unique<BracketExpr>(std::move(l));
        e.right = std::make_unique<BracketExpr>(std::move(r));
        return e;
    }
    bool is_leaf() const { return leaf >= 0; }
};

// One +-1 summand [x_{i1},[x_{i2},[...]]], indices 1-based.
struct NestedTerm {
    int sign = 1;
    std::vector<int> gens;
};

namespace detail {

// [p, q] for right-nested p and q, via Jacobi: with p = [h, t],
// [p,q] = [h,[t,q]] - [t,[h,q]]. Signs stay +-1 throughout.
inline void nest_product(int sign, std::span<const int> p, std::vector<int> q, std::vector<NestedTerm>& out) {
    if (p.size() == 1) {
        NestedTerm t;
        t.sign = sign;
        t.gens.reserve(1 + q.size());
        t.gens.push_back(p[0]);
        t.gens.insert(t.gens.end(), q.begin(), q.end());
        out.push_back(std::move(t));
        return;
    }
    const int h = p[0];
    auto tail = p.subspan(1);
    // [h, [t, q]]
    std::size_t first = out.size();
    nest_product(sign, tail, q, out);
    for (std::size_t i = first; i < out.size(); ++i) out[i].gens.insert(out[i].gens.begin(), h);
    // - [t, [h, q]]
    std::vector<int> hq;
    hq.reserve(1 + q.size());
    hq.push_back(h);
    hq.insert(hq.end(), q.begin(), q.end());
    nest_product(-sign, tail, std::move(hq), out);
}

inline std::vector<NestedTerm> rearrange_rec(const BracketExpr& e) {
    if (e.is_leaf()) return {NestedTerm{1, {e.leaf}}};
    auto ls = rearrange_rec(*e.left);
    auto rs = rearrange_rec(*e.right);
    std::vector<NestedTerm> out;
    for (const auto& l : ls)
        for (const auto& r : rs) nest_product(l.sign * r.sign, l.gens, r.gens, out);
    return out;
}

}  // namespace detail

// Rewrites any bracket expression as a +-1 combination of right-nested
// commutators; both sides evaluate to the same tensor.
inline std::vector<NestedTerm> nested_rearrange(const BracketExpr& e) { return detail::rearrange_rec(e); }

// Parses expressions like "[[x1,x2],x3]" (also accepts bare integers for
// generators). Throws std::invalid_argument on malformed input.
inline BracketExpr parse_bracket_expr(const std::string& s) {
    std::size_t pos = 0;
    auto skip_ws = [&] {
        while (pos < s.size() && s[pos] == ' ') ++pos;
    };
    auto fail = [&]() -> BracketExpr { throw std::invalid_argument("malformed bracket expression: " + s); };
    std::function<BracketExpr()> parse = [&]() -> BracketExpr {
        skip_ws();
        if (pos >= s.size()) return fail();
        if (s[pos] == '[') {
            ++pos;
            BracketExpr l = parse();
            skip_ws();
            if (pos >= s.size() || s[pos] != ',') return fail();
            ++pos;
            BracketExpr r = parse();
            skip_ws();
            if (pos >= s.size() || s[pos] != ']') return fail();
            ++pos;
            return BracketExpr::make_node(std::move(l), std::move(r));
        }
        if (s[pos] == 'x' || s[pos] == 'e') ++pos;
        std::size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos == start) return fail();
        return BracketExpr::make_leaf(std::stoi(s.substr(start, pos - start)));
    };
    BracketExpr e = parse();
    skip_ws();
    if (pos != s.size()) throw std::invalid_argument("malformed bracket expression: " + s);
    return e;
}

// Evaluates either representation in the tensor algebra over the supplied
// generator assignments (1-based ids index into `gens`).
inline LieElement evaluate_expr(const BracketExpr& e, std::span<const LieElement> gens) {
    if (e.is_leaf()) {
        if (e.leaf < 1 || e.leaf > int(gens.size())) throw std::invalid_argument("generator id out of range");
        return gens[e.leaf - 1];
    }
    return lie_bracket(evaluate_expr(*e.left, gens), evaluate_expr(*e.right, gens));
}

inline LieElement evaluate_terms(std::span<const NestedTerm> terms, std::span<const LieElement> gens) {
    if (gens.empty()) throw std::invalid_argument("evaluate_terms: no generators");
    LieElement acc(gens[0].dim(), gens[0].level());
    std::vector<const LieElement*> ptrs;
    for (const auto& t : terms) {
        ptrs.clear();
        for (int id : t.gens) {
            if (id < 1 || id > int(gens.size())) throw std::invalid_argument("generator id out of range");
            ptrs.push_back(&gens[id - 1]);
        }
        acc += double(t.sign) * detail::nested_bracket(ptrs);
    }
    return acc;
}

}  // namespace pabel
