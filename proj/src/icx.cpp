#include "treepark/icx.hpp"

namespace treepark {

namespace {

// E (X - t)^+ for every t in 0..t_max in one suffix pass: with
// s1 = sum_{k>t} w_k and s2 = sum_{k>t} k w_k, the tail is s2 - t s1.
std::vector<Rational> tail_table(const IntDist<Rational>& d, long long t_max) {
    std::vector<Rational> out(static_cast<std::size_t>(t_max) + 1);
    Rational s1(0), s2(0);
    for (long long t = t_max; t >= 0; t--) {
        long long k = t + 1;
        if (k >= d.offset && k <= d.max_value() && !d.w.empty()) {
            const Rational& w = d.w[static_cast<std::size_t>(k - d.offset)];
            s1 += w;
            s2 += w * mpz_class(static_cast<long>(k));
        }
        out[static_cast<std::size_t>(t)] = s2 - s1 * mpz_class(static_cast<long>(t));
    }
    return out;
}

}  // namespace

IcxReport icx_compare_laws(const IntDist<Rational>& a, const IntDist<Rational>& b) {
    if (a.deficit != 0 || b.deficit != 0)
        throw ConfigError("increasing-convex comparison needs complete finite-support laws");
    IcxReport r;
    long long t_max = 0;
    if (!a.w.empty()) t_max = std::max(t_max, a.max_value());
    if (!b.w.empty()) t_max = std::max(t_max, b.max_value());
    std::vector<Rational> ta = tail_table(a, t_max), tb = tail_table(b, t_max);
    r.dominated = true;
    for (long long t = 0; t <= t_max; t++) {
        Rational m = tb[static_cast<std::size_t>(t)] - ta[static_cast<std::size_t>(t)];
        if (m < 0 && r.dominated) {
            r.dominated = false;
            r.violated_at = t;
        }
        r.margins.push_back(std::move(m));
    }
    return r;
}

std::vector<IcxReport> icx_compare_parking(const ModelConfig& a, const ModelConfig& b,
                                           int depth) {
    if (a.d != b.d) throw ConfigError("comparison needs matching d");
    if (a.backend != Backend::rational || b.backend != Backend::rational)
        throw ConfigError("comparison runs in the exact backend");
    ModelConfig ca = a, cb = b;
    ca.depth = cb.depth = depth;
    ca.q_only = cb.q_only = false;

    std::vector<IcxReport> out;
    RecursionState<Rational> sa = init_state<Rational>(ca);
    RecursionState<Rational> sb = init_state<Rational>(cb);
    out.push_back(icx_compare_laws(sa.law_x, sb.law_x));
    for (int n = 1; n <= depth; n++) {
        step(sa, ca);
        step(sb, cb);
        out.push_back(icx_compare_laws(sa.law_x, sb.law_x));
    }
    return out;
}

}  // namespace treepark
