#include "treepark/recursion.hpp"

#include <limits>

namespace treepark {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t begin = 0;
    while (begin <= s.size()) {
        std::size_t end = s.find(sep, begin);
        if (end == std::string::npos) end = s.size();
        out.push_back(s.substr(begin, end - begin));
        begin = end + 1;
    }
    return out;
}

mpz_class pow_z(long base, unsigned e) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(base), e);
    return r;
}

template <class Num>
Num mass_at_zero(const IntDist<Num>& d) {
    return mass_at(d, 0);
}

}  // namespace

ArrivalSpec parse_arrival(const std::string& spec) {
    ArrivalSpec a;
    a.spec = spec;
    auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw ParseError("arrival spec needs the form name:args, got \"" + spec + "\"");
    std::string name = spec.substr(0, colon), args = spec.substr(colon + 1);
    if (name == "two") {
        a.pmf = bernoulli2_pmf(parse_decimal(args));
    } else if (name == "three") {
        a.pmf = threes_pmf(parse_decimal(args));
    } else if (name == "pmf") {
        std::vector<std::pair<long long, Rational>> atoms;
        for (const std::string& item : split(args, ',')) {
            auto kv = split(item, ':');
            if (kv.size() != 2) throw ParseError("pmf entry must be k:w, got \"" + item + "\"");
            atoms.emplace_back(std::stoll(kv[0]), parse_decimal(kv[1]));
        }
        a.pmf = custom_pmf(std::move(atoms), spec);
    } else if (name == "poisson") {
        a.poisson = true;
        a.poisson_mean = parse_decimal(args);
        a.pmf.mean = a.poisson_mean;
        a.pmf.tag = spec;
    } else {
        throw ParseError("unknown arrival kind \"" + name + "\"");
    }
    a.pmf.tag = spec;
    return a;
}

namespace {

template <class Num>
ArrivalLaw<Num> arrival_for(const ModelConfig& cfg) {
    if (cfg.arrival.poisson)
        throw ConfigError("poisson arrivals are Monte Carlo only; the exact engine needs a finite pmf");
    return make_arrival<Num>(cfg.arrival.pmf, cfg.scale);
}

void validate(const ModelConfig& cfg) {
    if (cfg.d < 1) throw ConfigError("d must be >= 1");
    if (cfg.depth < 0) throw ConfigError("depth must be >= 0");
    if (cfg.backend == Backend::rational && !cfg.q_only && cfg.depth > cfg.exact_depth_cap)
        throw ConfigError("exact backend at depth " + std::to_string(cfg.depth) +
                          " exceeds exact-depth-cap " + std::to_string(cfg.exact_depth_cap) +
                          "; raise the cap explicitly if this size is intended");
}

template <class Num>
Num lambda_inv_pow(const ModelConfig& cfg, unsigned i) {
    if constexpr (std::is_same_v<Num, Rational>) {
        Rational r(1, pow_z(cfg.d, i));
        r.canonicalize();
        return r;
    } else {
        return FixedDec::inv_pow(static_cast<unsigned long>(cfg.d), i, cfg.scale);
    }
}

}  // namespace

template <class Num>
RecursionState<Num> init_state(const ModelConfig& cfg) {
    validate(cfg);
    RecursionState<Num> st;
    ArrivalLaw<Num> arrival = arrival_for<Num>(cfg);
    st.law_x = arrival.law;
    if (cfg.q_only) st.law_x = truncate_above(std::move(st.law_x), cfg.depth);
    st.q.push_back(mass_at_zero(st.law_x));
    st.g_n = st.q.back();
    if (!cfg.q_only) st.ex_n = mean(st.law_x);
    return st;
}

template <class Num>
void step(RecursionState<Num>& st, const ModelConfig& cfg) {
    ArrivalLaw<Num> arrival = arrival_for<Num>(cfg);
    ConvOptions opt;
    opt.support_guard = cfg.support_guard;
    if (cfg.q_only) {
        long long remaining = cfg.depth - (st.n + 1);
        opt.value_cap = remaining < 0 ? 0 : remaining;
    }
    IntDist<Num> v = pushdown_minus_one(st.law_x);
    IntDist<Num> child_sum = convolve_power(v, static_cast<unsigned>(cfg.d), opt);
    st.law_x = convolve(arrival.law, child_sum, opt);
    st.n++;
    st.q.push_back(mass_at_zero(st.law_x));
    st.g_n = st.g_n + lambda_inv_pow<Num>(cfg, static_cast<unsigned>(st.n)) * st.q.back();
    if (!cfg.q_only) st.ex_n = mean(st.law_x);
}

template <class Num>
RecursionState<Num> run(const ModelConfig& cfg) {
    RecursionState<Num> st = init_state<Num>(cfg);
    while (st.n < cfg.depth) step(st, cfg);
    return st;
}

std::vector<Rational> q_sequence(const ModelConfig& cfg) {
    ModelConfig c = cfg;
    c.q_only = true;
    std::vector<Rational> out;
    if (c.backend == Backend::rational) {
        auto st = run<Rational>(c);
        out = st.q;
    } else {
        auto st = run<FixedDec>(c);
        out.reserve(st.q.size());
        for (const auto& q : st.q) out.push_back(q.to_rational());
    }
    return out;
}

Rational big_f(const Rational& alpha, long lambda) {
    if (lambda < 2) throw ConfigError("closed form requires lambda >= 2");
    Rational r = Rational(lambda) * (1 - alpha) / Rational(lambda - 1);
    return r;
}

Rational big_c_printed(const Rational& alpha, long lambda) {
    if (lambda < 2) throw ConfigError("closed form requires lambda >= 2");
    return (1 - alpha) / Rational(lambda - 1);
}

Rational big_c(const Rational& alpha, long lambda) {
    if (lambda < 2) throw ConfigError("closed form requires lambda >= 2");
    return (Rational(lambda) - alpha) / Rational(lambda - 1);
}

Rational ex_closed_form(const Rational& g_nm1, const Rational& alpha, long lambda, int n) {
    if (n < 1) throw ConfigError("closed form applies from depth 1 on");
    return (g_nm1 - big_f(alpha, lambda)) * pow_z(lambda, static_cast<unsigned>(n)) +
           big_c(alpha, lambda);
}

std::vector<Rational> ex_from_q(const std::vector<Rational>& q, const Rational& alpha,
                                long lambda) {
    std::vector<Rational> ex;
    ex.reserve(q.size());
    ex.push_back(alpha);
    for (std::size_t m = 0; m + 1 < q.size(); m++)
        ex.push_back(alpha + Rational(lambda) * (ex.back() - (1 - q[m])));
    return ex;
}

Rational g_from_q(const std::vector<Rational>& q, long lambda) {
    Rational g(0);
    for (std::size_t i = 0; i < q.size(); i++) {
        Rational w(1, pow_z(lambda, static_cast<unsigned>(i)));
        w.canonicalize();
        g += w * q[i];
    }
    return g;
}

TauTransform tau_transform(const std::vector<Rational>& q, long lambda) {
    if (q.empty()) throw ConfigError("tau transform needs at least q_0");
    TauTransform t;
    t.truncated = 1 - q[0];
    for (std::size_t m = 1; m < q.size(); m++) {
        Rational w(1, pow_z(lambda, static_cast<unsigned>(m)));
        w.canonicalize();
        t.truncated += w * (q[m - 1] - q[m]);
    }
    Rational tail(1, pow_z(lambda, static_cast<unsigned>(q.size())));
    tail.canonicalize();
    t.remainder_bound = tail * q.back();
    return t;
}

Rational stationary_ex_residual(const Rational& ex_n, const Rational& q_n,
                                const Rational& alpha, long lambda) {
    Rational target = (Rational(lambda) - alpha - Rational(lambda) * q_n) / Rational(lambda - 1);
    Rational r = ex_n - target;
    return r < 0 ? Rational(-r) : r;
}

IntDist<Rational> deconvolve_arrival(const IntDist<Rational>& law_x, const ArrivalPmf& pmf) {
    if (pmf.atoms.empty() || pmf.atoms.front().first != 0 || pmf.atoms.front().second == 0)
        throw ConfigError("deconvolution requires P(eta = 0) > 0");
    const Rational& p0 = pmf.atoms.front().second;
    if (law_x.offset != 0 && !law_x.w.empty())
        throw ConfigError("law must include value 0");
    std::size_t len = law_x.w.size();
    IntDist<Rational> v;
    v.w.assign(len, Rational(0));
    for (std::size_t j = 0; j < len; j++) {
        Rational acc = law_x.w[j];
        for (std::size_t a = 1; a < pmf.atoms.size(); a++) {
            long long k = pmf.atoms[a].first;
            if (k > static_cast<long long>(j)) break;
            acc -= pmf.atoms[a].second * v.w[j - static_cast<std::size_t>(k)];
        }
        v.w[j] = acc / p0;
    }
    v = canonicalize(std::move(v));
    Rational total(0);
    for (const auto& x : v.w) total += x;
    v.deficit = 1 - total;
    return v;
}

template RecursionState<Rational> init_state(const ModelConfig&);
template RecursionState<FixedDec> init_state(const ModelConfig&);
template void step(RecursionState<Rational>&, const ModelConfig&);
template void step(RecursionState<FixedDec>&, const ModelConfig&);
template RecursionState<Rational> run(const ModelConfig&);
template RecursionState<FixedDec> run(const ModelConfig&);

}  // namespace treepark
