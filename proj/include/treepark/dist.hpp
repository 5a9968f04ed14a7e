#pragma once

#include "treepark/numeric.hpp"

#include <limits>
#include <optional>
#include <utility>

namespace treepark {

/// Probability mass function on nonnegative integers: dense weights starting
/// at `offset`, plus the mass `deficit` lost to truncation (exactly
/// 1 - sum(weights) in both backends).
///
/// Canonical form keeps the first and last weight nonzero; the empty vector
/// is the all-mass-lost distribution.
template <class Num>
struct IntDist {
    long long offset = 0;
    std::vector<Num> w;
    Num deficit;

    long long max_value() const { return offset + static_cast<long long>(w.size()) - 1; }
};

struct ConvOptions {
    std::size_t support_guard = 1'000'000;
    // Drop all mass at values > value_cap (into the deficit). Values <=
    // value_cap are unaffected: a Cauchy-product entry depends only on
    // entries at or below it.
    long long value_cap = std::numeric_limits<long long>::max();
};

namespace backend {

inline Rational zero(const IntDist<Rational>&) { return Rational(0); }
inline FixedDec zero(const IntDist<FixedDec>& d) { return FixedDec::zero(d.deficit.scale()); }
inline Rational one_like(const IntDist<Rational>&) { return Rational(1); }
inline FixedDec one_like(const IntDist<FixedDec>& d) { return FixedDec::one(d.deficit.scale()); }
inline bool is_zero(const Rational& v) { return v == 0; }
inline bool is_zero(const FixedDec& v) { return v.is_zero(); }
inline Rational to_rational(const Rational& v) { return v; }
inline Rational to_rational(const FixedDec& v) { return v.to_rational(); }

}  // namespace backend

/// Integer convolution of nonnegative big-integer sequences, truncated to
/// out_len entries. Uses Kronecker substitution (one big GMP product) once
/// the operands are large enough for schoolbook to lose.
std::vector<mpz_class> convolve_mpz(const std::vector<mpz_class>& a,
                                    const std::vector<mpz_class>& b, std::size_t out_len);

template <class Num>
Num total_mass(const IntDist<Num>& d) {
    Num t = backend::zero(d);
    for (const Num& x : d.w) t = t + x;
    return t;
}

/// Drops leading/trailing zero weights and recomputes the deficit.
template <class Num>
IntDist<Num> canonicalize(IntDist<Num> d);

template <class Num>
IntDist<Num> point_mass(long long k, const Num& one);

/// Law of (Y-1)^+ for Y ~ d: mass at 0 becomes P(Y=0)+P(Y=1), support above
/// shifts down one.
template <class Num>
IntDist<Num> pushdown_minus_one(const IntDist<Num>& d);

/// Law of the independent sum. Exact in Rational mode; entrywise certified
/// lower bounds in FixedDec mode (exact integer cross products, one
/// truncation per output entry).
template <class Num>
IntDist<Num> convolve(const IntDist<Num>& a, const IntDist<Num>& b, const ConvOptions& opt = {});

template <>
IntDist<Rational> convolve(const IntDist<Rational>& a, const IntDist<Rational>& b,
                           const ConvOptions& opt);
template <>
IntDist<FixedDec> convolve(const IntDist<FixedDec>& a, const IntDist<FixedDec>& b,
                           const ConvOptions& opt);

/// k-fold self-convolution by binary exponentiation.
template <class Num>
IntDist<Num> convolve_power(const IntDist<Num>& d, unsigned k, const ConvOptions& opt = {});

/// sum k * w_k; the deficit contributes nothing, so this is a certified
/// lower bound in FixedDec mode.
template <class Num>
Num mean(const IntDist<Num>& d);

template <>
Rational mean(const IntDist<Rational>& d);
template <>
FixedDec mean(const IntDist<FixedDec>& d);

/// sum_{k>t} (k-t) w_k.
template <class Num>
Num tail_expectation(const IntDist<Num>& d, long long t);

template <>
Rational tail_expectation(const IntDist<Rational>& d, long long t);
template <>
FixedDec tail_expectation(const IntDist<FixedDec>& d, long long t);

/// P(value = k).
template <class Num>
Num mass_at(const IntDist<Num>& d, long long k) {
    if (k < d.offset || k > d.max_value() || d.w.empty()) return backend::zero(d);
    return d.w[static_cast<std::size_t>(k - d.offset)];
}

/// Drop all mass above value_cap into the deficit.
template <class Num>
IntDist<Num> truncate_above(IntDist<Num> d, long long value_cap);

/// Arrival law: finite-support IntDist plus its exact mean (= alpha,
/// independent of the backend) and the arrival string it was built from.
template <class Num>
struct ArrivalLaw {
    IntDist<Num> law;
    Rational mean;
    std::string tag;
};

/// Exact pmf underlying an arrival law, shared by both backends.
struct ArrivalPmf {
    std::vector<std::pair<long long, Rational>> atoms;  // strictly increasing k
    Rational mean;
    std::string tag;
};

/// eta = 2 with probability alpha/2, else 0.
ArrivalPmf bernoulli2_pmf(const Rational& alpha);
/// eta = 3 with probability alpha/3, else 0.
ArrivalPmf threes_pmf(const Rational& alpha);
/// Arbitrary finite pmf; weights must lie in [0,1] and sum to at most 1.
ArrivalPmf custom_pmf(std::vector<std::pair<long long, Rational>> atoms, std::string tag);

template <class Num>
ArrivalLaw<Num> make_arrival(const ArrivalPmf& pmf, unsigned scale = 0);

std::string csv_of_dist(const IntDist<Rational>& d);
std::string csv_of_dist(const IntDist<FixedDec>& d);

}  // namespace treepark
