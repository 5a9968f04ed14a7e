#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace treepark {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct ParseError : ConfigError {
    using ConfigError::ConfigError;
};
struct ScaleMismatchError : Error {
    using Error::Error;
};
struct GuardError : Error {
    using Error::Error;
};

/// Exact rational arithmetic. mpq_class keeps numerator/denominator reduced
/// with a positive denominator, which is exactly the contract we need.
using Rational = mpq_class;

const mpz_class& pow10(unsigned s);

/// Parses a nonnegative decimal string ("0", "2", "0.08698", ".5") into an
/// exact Rational. Throws ParseError on anything else.
Rational parse_decimal(std::string_view s);

/// Exact decimal expansion when the reduced denominator is of the form
/// 2^a 5^b, otherwise the exact fraction "num/den".
std::string rational_to_string(const Rational& q);

/// Decimal string that never overstates the value: exact when the expansion
/// fits within `digits` places, otherwise truncated toward zero.
std::string decimal_floor_string(const Rational& q, unsigned digits = 120);

/// floor(q * 10^scale), q >= 0.
mpz_class floor_scaled(const Rational& q, unsigned scale);

/// Largest integer r with r^2 <= v.
mpz_class isqrt_floor(const mpz_class& v);

/// Smallest s = m/10^digits with s >= sqrt(r); r >= 0.
Rational sqrt_upper(const Rational& r, unsigned digits);

/// Largest s = m/10^digits with s <= sqrt(r); r >= 0.
Rational sqrt_lower(const Rational& r, unsigned digits);

/// Nonnegative fixed-point decimal: value = mantissa * 10^(-scale), with
/// every inexact operation truncated toward zero. Sums and products of
/// values computed this way never exceed their exact counterparts, which is
/// what makes a positive certified margin a proof.
class FixedDec {
  public:
    FixedDec() = default;
    FixedDec(mpz_class mantissa, unsigned scale);

    static FixedDec zero(unsigned scale) { return FixedDec(0, scale); }
    static FixedDec one(unsigned scale) { return FixedDec(pow10(scale), scale); }

    /// Exact parse; throws ParseError if s needs more than `scale`
    /// fractional digits or is malformed/negative.
    static FixedDec parse(std::string_view s, unsigned scale);

    /// floor(q * 10^scale) / 10^scale for q >= 0.
    static FixedDec from_rational_floor(const Rational& q, unsigned scale);

    /// Certified lower bound on base^(-i): floor(10^scale / base^i).
    /// Exact whenever base^(-i) has a terminating expansion of <= scale digits.
    static FixedDec inv_pow(unsigned long base, unsigned i, unsigned scale);

    const mpz_class& mantissa() const { return m_; }
    unsigned scale() const { return scale_; }
    bool is_zero() const { return m_ == 0; }

    Rational to_rational() const;

    /// Full fixed-width expansion, trailing zeros kept: "0.12500...0".
    std::string to_string() const;

    /// Exact sum.
    FixedDec operator+(const FixedDec& o) const;
    /// floor(a * b / 10^scale): truncated toward zero, monotone in each operand.
    FixedDec operator*(const FixedDec& o) const;
    /// Exact difference; requires *this >= o (bookkeeping of complements only).
    FixedDec operator-(const FixedDec& o) const;
    /// Exact product with a nonnegative integer.
    FixedDec mul_uint(unsigned long k) const;

    bool operator==(const FixedDec& o) const;
    bool operator!=(const FixedDec& o) const { return !(*this == o); }
    bool operator<(const FixedDec& o) const;
    bool operator<=(const FixedDec& o) const;
    bool operator>(const FixedDec& o) const { return o < *this; }
    bool operator>=(const FixedDec& o) const { return o <= *this; }

  private:
    void check_scale(const FixedDec& o) const;

    mpz_class m_{0};
    unsigned scale_ = 0;
};

}  // namespace treepark
