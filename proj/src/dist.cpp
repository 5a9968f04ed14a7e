#include "treepark/dist.hpp"

#include <algorithm>
#include <array>

namespace treepark {

namespace {

std::size_t max_bits(const std::vector<mpz_class>& v) {
    std::size_t b = 1;
    for (const auto& x : v)
        if (x != 0) b = std::max(b, mpz_sizeinbase(x.get_mpz_t(), 2));
    return b;
}

std::vector<mpz_class> conv_schoolbook(const std::vector<mpz_class>& a,
                                       const std::vector<mpz_class>& b, std::size_t out_len) {
    std::vector<mpz_class> c(out_len, mpz_class(0));
    for (std::size_t i = 0; i < a.size() && i < out_len; i++) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < b.size() && i + j < out_len; j++) {
            if (b[j] == 0) continue;
            mpz_addmul(c[i + j].get_mpz_t(), a[i].get_mpz_t(), b[j].get_mpz_t());
        }
    }
    return c;
}

// Kronecker substitution: pack each sequence into one big integer with
// limb-aligned slots wide enough that cross products cannot carry between
// slots, multiply once, slice the product back out.
std::vector<mpz_class> conv_kronecker(const std::vector<mpz_class>& a,
                                      const std::vector<mpz_class>& b, std::size_t out_len) {
    const std::size_t ab = max_bits(a), bb = max_bits(b);
    std::size_t lg = 1;
    while ((1ull << lg) < std::min(a.size(), b.size())) lg++;
    const std::size_t slot_bits = ab + bb + lg + 1;
    const std::size_t slot_limbs = (slot_bits + GMP_NUMB_BITS - 1) / GMP_NUMB_BITS;

    auto pack = [&](const std::vector<mpz_class>& v) {
        std::vector<mp_limb_t> buf(v.size() * slot_limbs, 0);
        for (std::size_t i = 0; i < v.size(); i++) {
            if (v[i] == 0) continue;
            std::size_t cnt = 0;
            mpz_export(&buf[i * slot_limbs], &cnt, -1, sizeof(mp_limb_t), 0, 0, v[i].get_mpz_t());
        }
        mpz_class big;
        mpz_import(big.get_mpz_t(), buf.size(), -1, sizeof(mp_limb_t), 0, 0, buf.data());
        return big;
    };

    mpz_class prod = pack(a) * pack(b);

    const std::size_t slots = a.size() + b.size();
    std::vector<mp_limb_t> buf(slots * slot_limbs, 0);
    std::size_t cnt = 0;
    if (prod != 0) mpz_export(buf.data(), &cnt, -1, sizeof(mp_limb_t), 0, 0, prod.get_mpz_t());

    std::vector<mpz_class> c(out_len);
    for (std::size_t k = 0; k < out_len; k++)
        mpz_import(c[k].get_mpz_t(), slot_limbs, -1, sizeof(mp_limb_t), 0, 0,
                   &buf[k * slot_limbs]);
    return c;
}

// Common-denominator view of a Rational weight vector.
struct ScaledVec {
    mpz_class den{1};
    std::vector<mpz_class> num;
};

ScaledVec to_scaled(const std::vector<Rational>& w) {
    ScaledVec s;
    for (const auto& q : w) {
        const mpz_class& d = q.get_den();
        if (!mpz_divisible_p(s.den.get_mpz_t(), d.get_mpz_t())) {
            mpz_class l;
            mpz_lcm(l.get_mpz_t(), s.den.get_mpz_t(), d.get_mpz_t());
            s.den = std::move(l);
        }
    }
    s.num.reserve(w.size());
    for (const auto& q : w) {
        mpz_class f;
        mpz_divexact(f.get_mpz_t(), s.den.get_mpz_t(), q.get_den().get_mpz_t());
        s.num.push_back(q.get_num() * f);
    }
    return s;
}

const std::vector<unsigned long>& small_primes() {
    static const std::vector<unsigned long> primes = [] {
        std::vector<unsigned long> ps;
        std::vector<bool> sieve(65536, true);
        for (unsigned long p = 2; p < sieve.size(); p++) {
            if (!sieve[p]) continue;
            ps.push_back(p);
            for (unsigned long q = p * p; q < sieve.size(); q += p) sieve[q] = false;
        }
        return ps;
    }();
    return primes;
}

// Small-prime factorization of a denominator. Engine denominators are built
// from powers of decimal arrival probabilities, so 2 and 5 almost always
// finish the job; `complete` is false if a large factor remains.
struct DenFactors {
    std::vector<std::pair<unsigned long, unsigned long>> pv;
    bool complete = true;
};

DenFactors factor_den(const mpz_class& den) {
    DenFactors f;
    mpz_class d = den;
    for (unsigned long p : small_primes()) {
        if (d == 1) break;
        if (mpz_divisible_ui_p(d.get_mpz_t(), p)) {
            mpz_class pz(static_cast<unsigned long>(p));
            unsigned long v = mpz_remove(d.get_mpz_t(), d.get_mpz_t(), pz.get_mpz_t());
            f.pv.emplace_back(p, v);
        }
    }
    f.complete = (d == 1);
    return f;
}

// Builds the reduced fraction c/den given den's factorization, avoiding the
// full gcd of two huge integers when den factors over small primes.
Rational make_reduced(const mpz_class& c, const mpz_class& den, const DenFactors& f) {
    if (c == 0) return Rational(0);
    mpz_class num = c, d = den;
    for (const auto& [p, vd] : f.pv) {
        if (!mpz_divisible_ui_p(num.get_mpz_t(), p)) continue;
        mpz_class pz(p), reduced;
        unsigned long vn = mpz_remove(reduced.get_mpz_t(), num.get_mpz_t(), pz.get_mpz_t());
        unsigned long k = std::min(vn, vd);
        if (k == 0) continue;
        mpz_class pk;
        mpz_ui_pow_ui(pk.get_mpz_t(), p, k);
        mpz_divexact(num.get_mpz_t(), num.get_mpz_t(), pk.get_mpz_t());
        mpz_divexact(d.get_mpz_t(), d.get_mpz_t(), pk.get_mpz_t());
    }
    if (!f.complete) {
        mpz_class g;
        mpz_gcd(g.get_mpz_t(), num.get_mpz_t(), d.get_mpz_t());
        if (g != 1) {
            mpz_divexact(num.get_mpz_t(), num.get_mpz_t(), g.get_mpz_t());
            mpz_divexact(d.get_mpz_t(), d.get_mpz_t(), g.get_mpz_t());
        }
    }
    return Rational(std::move(num), std::move(d));
}

Rational one_minus_total_exact(const std::vector<Rational>& w) {
    ScaledVec s = to_scaled(w);
    mpz_class tot(0);
    for (const auto& n : s.num) tot += n;
    mpz_class rest = s.den - tot;
    if (rest < 0) throw Error("distribution mass exceeds 1");
    return make_reduced(rest, s.den, factor_den(s.den));
}

std::size_t capped_out_len(long long out_offset, std::size_t full_len, const ConvOptions& opt) {
    if (opt.value_cap < out_offset) return 0;
    unsigned long long allowed =
        static_cast<unsigned long long>(opt.value_cap - out_offset) + 1ull;
    std::size_t out_len = full_len;
    if (allowed < out_len) out_len = static_cast<std::size_t>(allowed);
    if (out_len > opt.support_guard)
        throw GuardError("convolution support " + std::to_string(out_len) +
                         " exceeds guard " + std::to_string(opt.support_guard));
    return out_len;
}

}  // namespace

std::vector<mpz_class> convolve_mpz(const std::vector<mpz_class>& a,
                                    const std::vector<mpz_class>& b, std::size_t out_len) {
    if (a.empty() || b.empty() || out_len == 0) return {};
    out_len = std::min(out_len, a.size() + b.size() - 1);
    const std::size_t ab = max_bits(a), bb = max_bits(b);
    if (std::min(a.size(), b.size()) >= 16 && ab + bb >= 192)
        return conv_kronecker(a, b, out_len);
    return conv_schoolbook(a, b, out_len);
}

template <class Num>
IntDist<Num> canonicalize(IntDist<Num> d) {
    std::size_t lead = 0;
    while (lead < d.w.size() && backend::is_zero(d.w[lead])) lead++;
    std::size_t tail = d.w.size();
    while (tail > lead && backend::is_zero(d.w[tail - 1])) tail--;
    if (lead == tail) {
        d.offset = 0;
        d.w.clear();
        return d;
    }
    if (lead > 0 || tail < d.w.size()) {
        std::vector<Num> trimmed(d.w.begin() + lead, d.w.begin() + tail);
        d.w = std::move(trimmed);
        d.offset += static_cast<long long>(lead);
    }
    return d;
}

template <class Num>
IntDist<Num> point_mass(long long k, const Num& one) {
    IntDist<Num> d;
    d.offset = k;
    d.w = {one};
    d.deficit = one - one;
    return d;
}

template <class Num>
IntDist<Num> pushdown_minus_one(const IntDist<Num>& d) {
    if (d.w.empty()) return d;
    IntDist<Num> out;
    out.deficit = d.deficit;
    if (d.offset >= 1) {
        out.offset = d.offset - 1;
        out.w = d.w;
        return canonicalize(std::move(out));
    }
    out.offset = 0;
    out.w.reserve(std::max<std::size_t>(d.w.size() - 1, 1));
    Num at_zero = d.w[0];
    if (d.w.size() > 1) at_zero = at_zero + d.w[1];
    out.w.push_back(at_zero);
    for (std::size_t j = 2; j < d.w.size(); j++) out.w.push_back(d.w[j]);
    return canonicalize(std::move(out));
}

template <class Num>
IntDist<Num> truncate_above(IntDist<Num> d, long long value_cap) {
    if (d.w.empty() || d.max_value() <= value_cap) return d;
    if (value_cap < d.offset) {
        d.w.clear();
        d.offset = 0;
    } else {
        d.w.resize(static_cast<std::size_t>(value_cap - d.offset) + 1);
    }
    d = canonicalize(std::move(d));
    if constexpr (std::is_same_v<Num, Rational>) {
        d.deficit = one_minus_total_exact(d.w);
    } else {
        mpz_class tot(0);
        for (const auto& x : d.w) tot += x.mantissa();
        unsigned s = d.deficit.scale();
        mpz_class rest = pow10(s) - tot;
        if (rest < 0) throw Error("distribution mass exceeds 1");
        d.deficit = FixedDec(std::move(rest), s);
    }
    return d;
}

template <>
IntDist<Rational> convolve(const IntDist<Rational>& a, const IntDist<Rational>& b,
                           const ConvOptions& opt) {
    IntDist<Rational> out;
    out.deficit = Rational(1);
    if (a.w.empty() || b.w.empty()) return out;
    out.offset = a.offset + b.offset;
    std::size_t out_len = capped_out_len(out.offset, a.w.size() + b.w.size() - 1, opt);
    if (out_len == 0) {
        out.offset = 0;
        return out;
    }
    ScaledVec sa = to_scaled(a.w), sb = to_scaled(b.w);
    std::vector<mpz_class> c = convolve_mpz(sa.num, sb.num, out_len);
    mpz_class den = sa.den * sb.den;
    DenFactors f = factor_den(den);
    out.w.reserve(c.size());
    mpz_class tot(0);
    for (const auto& ck : c) tot += ck;
    for (const auto& ck : c) out.w.push_back(make_reduced(ck, den, f));
    mpz_class rest = den - tot;
    if (rest < 0) throw Error("distribution mass exceeds 1");
    out.deficit = make_reduced(rest, den, f);
    return canonicalize(std::move(out));
}

template <>
IntDist<FixedDec> convolve(const IntDist<FixedDec>& a, const IntDist<FixedDec>& b,
                           const ConvOptions& opt) {
    const unsigned s = a.deficit.scale();
    if (b.deficit.scale() != s)
        throw ScaleMismatchError("convolve: operands carry different scales");
    IntDist<FixedDec> out;
    out.deficit = FixedDec::one(s);
    if (a.w.empty() || b.w.empty()) return out;
    out.offset = a.offset + b.offset;
    std::size_t out_len = capped_out_len(out.offset, a.w.size() + b.w.size() - 1, opt);
    if (out_len == 0) {
        out.offset = 0;
        return out;
    }
    std::vector<mpz_class> ma, mb;
    ma.reserve(a.w.size());
    mb.reserve(b.w.size());
    for (const auto& x : a.w) ma.push_back(x.mantissa());
    for (const auto& x : b.w) mb.push_back(x.mantissa());
    std::vector<mpz_class> c = convolve_mpz(ma, mb, out_len);
    const mpz_class& p10 = pow10(s);
    out.w.reserve(c.size());
    mpz_class tot(0);
    for (auto& ck : c) {
        mpz_class q;
        mpz_fdiv_q(q.get_mpz_t(), ck.get_mpz_t(), p10.get_mpz_t());
        tot += q;
        out.w.emplace_back(std::move(q), s);
    }
    mpz_class rest = p10 - tot;
    if (rest < 0) throw Error("distribution mass exceeds 1");
    out.deficit = FixedDec(std::move(rest), s);
    return canonicalize(std::move(out));
}

template <class Num>
IntDist<Num> convolve_power(const IntDist<Num>& d, unsigned k, const ConvOptions& opt) {
    if (k == 0) throw ConfigError("convolve_power requires k >= 1");
    IntDist<Num> result = point_mass<Num>(0, backend::one_like(d));
    IntDist<Num> base = d;
    bool result_is_identity = true;
    while (k > 0) {
        if (k & 1u) {
            result = result_is_identity ? base : convolve(result, base, opt);
            result_is_identity = false;
        }
        k >>= 1u;
        if (k > 0) base = convolve(base, base, opt);
    }
    return result;
}

template <>
Rational mean(const IntDist<Rational>& d) {
    if (d.w.empty()) return Rational(0);
    ScaledVec s = to_scaled(d.w);
    mpz_class acc(0);
    for (std::size_t i = 0; i < s.num.size(); i++) {
        long long k = d.offset + static_cast<long long>(i);
        if (k != 0 && s.num[i] != 0) acc += s.num[i] * mpz_class(static_cast<long>(k));
    }
    return make_reduced(acc, s.den, factor_den(s.den));
}

template <>
FixedDec mean(const IntDist<FixedDec>& d) {
    const unsigned s = d.deficit.scale();
    mpz_class acc(0);
    for (std::size_t i = 0; i < d.w.size(); i++) {
        long long k = d.offset + static_cast<long long>(i);
        if (k != 0) acc += d.w[i].mantissa() * mpz_class(static_cast<long>(k));
    }
    return FixedDec(std::move(acc), s);
}

template <>
Rational tail_expectation(const IntDist<Rational>& d, long long t) {
    if (d.w.empty()) return Rational(0);
    ScaledVec s = to_scaled(d.w);
    mpz_class acc(0);
    for (std::size_t i = 0; i < s.num.size(); i++) {
        long long k = d.offset + static_cast<long long>(i);
        if (k > t && s.num[i] != 0) acc += s.num[i] * mpz_class(static_cast<long>(k - t));
    }
    return make_reduced(acc, s.den, factor_den(s.den));
}

template <>
FixedDec tail_expectation(const IntDist<FixedDec>& d, long long t) {
    const unsigned s = d.deficit.scale();
    mpz_class acc(0);
    for (std::size_t i = 0; i < d.w.size(); i++) {
        long long k = d.offset + static_cast<long long>(i);
        if (k > t) acc += d.w[i].mantissa() * mpz_class(static_cast<long>(k - t));
    }
    return FixedDec(std::move(acc), s);
}

ArrivalPmf bernoulli2_pmf(const Rational& alpha) {
    if (alpha < 0 || alpha > 2) throw ConfigError("bernoulli2 arrival requires alpha in [0,2]");
    ArrivalPmf p;
    p.atoms = {{0, 1 - alpha / 2}, {2, alpha / 2}};
    p.mean = alpha;
    p.tag = "two:" + rational_to_string(alpha);
    return p;
}

ArrivalPmf threes_pmf(const Rational& alpha) {
    if (alpha < 0 || alpha > 3) throw ConfigError("threes arrival requires alpha in [0,3]");
    ArrivalPmf p;
    p.atoms = {{0, 1 - alpha / 3}, {3, alpha / 3}};
    p.mean = alpha;
    p.tag = "three:" + rational_to_string(alpha);
    return p;
}

ArrivalPmf custom_pmf(std::vector<std::pair<long long, Rational>> atoms, std::string tag) {
    ArrivalPmf p;
    Rational total(0), mean(0);
    long long prev = -1;
    for (const auto& [k, v] : atoms) {
        if (k <= prev) throw ConfigError("pmf atoms must have strictly increasing support");
        if (k < 0) throw ConfigError("pmf support must be nonnegative");
        if (v < 0 || v > 1) throw ConfigError("pmf weights must lie in [0,1]");
        total += v;
        mean += v * mpz_class(static_cast<long>(k));
        prev = k;
    }
    if (total > 1) throw ConfigError("pmf weights sum to more than 1");
    p.atoms = std::move(atoms);
    p.mean = mean;
    p.tag = std::move(tag);
    return p;
}

template <class Num>
ArrivalLaw<Num> make_arrival(const ArrivalPmf& pmf, unsigned scale) {
    ArrivalLaw<Num> a;
    a.mean = pmf.mean;
    a.tag = pmf.tag;
    IntDist<Num>& d = a.law;
    if constexpr (std::is_same_v<Num, Rational>) {
        (void)scale;
        d.deficit = Rational(0);
    } else {
        d.deficit = FixedDec::zero(scale);
    }
    if (pmf.atoms.empty()) {
        d.deficit = backend::one_like(d);
        return a;
    }
    long long lo = pmf.atoms.front().first, hi = pmf.atoms.back().first;
    d.offset = lo;
    d.w.assign(static_cast<std::size_t>(hi - lo) + 1, backend::zero(d));
    for (const auto& [k, v] : pmf.atoms) {
        if constexpr (std::is_same_v<Num, Rational>) {
            d.w[static_cast<std::size_t>(k - lo)] = v;
        } else {
            d.w[static_cast<std::size_t>(k - lo)] = FixedDec::from_rational_floor(v, scale);
        }
    }
    d = canonicalize(std::move(d));
    if constexpr (std::is_same_v<Num, Rational>) {
        d.deficit = one_minus_total_exact(d.w);
    } else {
        mpz_class tot(0);
        for (const auto& x : d.w) tot += x.mantissa();
        d.deficit = FixedDec(pow10(scale) - tot, scale);
    }
    return a;
}

std::string csv_of_dist(const IntDist<Rational>& d) {
    std::string out = "k,weight\n";
    for (std::size_t i = 0; i < d.w.size(); i++)
        out += std::to_string(d.offset + static_cast<long long>(i)) + "," +
               rational_to_string(d.w[i]) + "\n";
    return out;
}

std::string csv_of_dist(const IntDist<FixedDec>& d) {
    std::string out = "k,weight\n";
    for (std::size_t i = 0; i < d.w.size(); i++)
        out += std::to_string(d.offset + static_cast<long long>(i)) + "," + d.w[i].to_string() +
               "\n";
    return out;
}

template IntDist<Rational> canonicalize(IntDist<Rational>);
template IntDist<FixedDec> canonicalize(IntDist<FixedDec>);
template IntDist<Rational> point_mass(long long, const Rational&);
template IntDist<FixedDec> point_mass(long long, const FixedDec&);
template IntDist<Rational> pushdown_minus_one(const IntDist<Rational>&);
template IntDist<FixedDec> pushdown_minus_one(const IntDist<FixedDec>&);
template IntDist<Rational> truncate_above(IntDist<Rational>, long long);
template IntDist<FixedDec> truncate_above(IntDist<FixedDec>, long long);
template IntDist<Rational> convolve_power(const IntDist<Rational>&, unsigned, const ConvOptions&);
template IntDist<FixedDec> convolve_power(const IntDist<FixedDec>&, unsigned, const ConvOptions&);
template ArrivalLaw<Rational> make_arrival(const ArrivalPmf&, unsigned);
template ArrivalLaw<FixedDec> make_arrival(const ArrivalPmf&, unsigned);

}  // namespace treepark
