#include "treepark/numeric.hpp"

#include <map>
#include <mutex>

namespace treepark {

const mpz_class& pow10(unsigned s) {
    static std::map<unsigned, mpz_class> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(s);
    if (it == cache.end()) {
        mpz_class v;
        mpz_ui_pow_ui(v.get_mpz_t(), 10, s);
        it = cache.emplace(s, std::move(v)).first;
    }
    return it->second;
}

namespace {

struct DecimalParts {
    std::string digits;  // integer digits followed by fractional digits
    size_t frac = 0;     // number of fractional digits
};

DecimalParts split_decimal(std::string_view s) {
    if (s.empty()) throw ParseError("empty decimal string");
    if (s[0] == '-') throw ParseError("negative value not allowed: " + std::string(s));
    if (s[0] == '+') s.remove_prefix(1);
    DecimalParts out;
    bool seen_dot = false, seen_digit = false;
    for (char c : s) {
        if (c == '.') {
            if (seen_dot) throw ParseError("malformed decimal: " + std::string(s));
            seen_dot = true;
        } else if (c >= '0' && c <= '9') {
            out.digits.push_back(c);
            if (seen_dot) out.frac++;
            seen_digit = true;
        } else {
            throw ParseError("malformed decimal: " + std::string(s));
        }
    }
    if (!seen_digit) throw ParseError("malformed decimal: " + std::string(s));
    return out;
}

}  // namespace

Rational parse_decimal(std::string_view s) {
    DecimalParts p = split_decimal(s);
    mpz_class num(p.digits.empty() ? "0" : p.digits, 10);
    Rational q(num, pow10(static_cast<unsigned>(p.frac)));
    q.canonicalize();
    return q;
}

std::string rational_to_string(const Rational& q) {
    mpz_class den = q.get_den();
    unsigned long v2 = mpz_remove(den.get_mpz_t(), den.get_mpz_t(), mpz_class(2).get_mpz_t());
    unsigned long v5 = mpz_remove(den.get_mpz_t(), den.get_mpz_t(), mpz_class(5).get_mpz_t());
    if (den != 1) {
        return q.get_num().get_str() + "/" + q.get_den().get_str();
    }
    unsigned digits = static_cast<unsigned>(std::max(v2, v5));
    mpz_class scaled = q.get_num() * (pow10(digits) / q.get_den());
    std::string raw = scaled.get_str();
    bool neg = false;
    if (!raw.empty() && raw[0] == '-') {
        neg = true;
        raw.erase(raw.begin());
    }
    if (raw.size() <= digits) raw.insert(0, digits + 1 - raw.size(), '0');
    std::string out = raw.substr(0, raw.size() - digits);
    if (digits > 0) out += "." + raw.substr(raw.size() - digits);
    return neg ? "-" + out : out;
}

std::string decimal_floor_string(const Rational& q, unsigned digits) {
    std::string exact = rational_to_string(q);
    if (exact.find('/') == std::string::npos) {
        auto dot = exact.find('.');
        if (dot == std::string::npos || exact.size() - dot - 1 <= digits) return exact;
    }
    bool neg = q < 0;
    Rational a = neg ? Rational(-q) : q;
    mpz_class scaled = floor_scaled(a, digits);
    std::string raw = scaled.get_str();
    if (raw.size() <= digits) raw.insert(0, digits + 1 - raw.size(), '0');
    std::string out = raw.substr(0, raw.size() - digits) + "." + raw.substr(raw.size() - digits);
    return (neg ? "-" : "") + out;
}

mpz_class floor_scaled(const Rational& q, unsigned scale) {
    mpz_class r;
    mpz_class num = q.get_num() * pow10(scale);
    mpz_fdiv_q(r.get_mpz_t(), num.get_mpz_t(), q.get_den().get_mpz_t());
    return r;
}

mpz_class isqrt_floor(const mpz_class& v) {
    mpz_class r;
    mpz_sqrt(r.get_mpz_t(), v.get_mpz_t());
    return r;
}

Rational sqrt_upper(const Rational& r, unsigned digits) {
    if (r < 0) throw Error("sqrt of negative rational");
    // smallest m with (m/10^d)^2 >= r, i.e. m^2 >= r*10^(2d)
    Rational t = r * pow10(digits) * pow10(digits);
    mpz_class fl;
    mpz_fdiv_q(fl.get_mpz_t(), t.get_num().get_mpz_t(), t.get_den().get_mpz_t());
    mpz_class m = isqrt_floor(fl);
    if (Rational(m * m) < t) m += 1;
    Rational out(m, pow10(digits));
    out.canonicalize();
    return out;
}

Rational sqrt_lower(const Rational& r, unsigned digits) {
    if (r < 0) throw Error("sqrt of negative rational");
    // largest m with (m/10^d)^2 <= r
    Rational t = r * pow10(digits) * pow10(digits);
    mpz_class fl;
    mpz_fdiv_q(fl.get_mpz_t(), t.get_num().get_mpz_t(), t.get_den().get_mpz_t());
    mpz_class m = isqrt_floor(fl);
    while (Rational(m * m) > t) m -= 1;
    Rational out(m, pow10(digits));
    out.canonicalize();
    return out;
}

FixedDec::FixedDec(mpz_class mantissa, unsigned scale) : m_(std::move(mantissa)), scale_(scale) {
    if (m_ < 0) throw Error("FixedDec mantissa must be nonnegative");
}

FixedDec FixedDec::parse(std::string_view s, unsigned scale) {
    DecimalParts p = split_decimal(s);
    if (p.frac > scale)
        throw ParseError("decimal \"" + std::string(s) + "\" needs more than " +
                         std::to_string(scale) + " fractional digits");
    mpz_class digits(p.digits, 10);
    return FixedDec(digits * pow10(scale - static_cast<unsigned>(p.frac)), scale);
}

FixedDec FixedDec::from_rational_floor(const Rational& q, unsigned scale) {
    if (q < 0) throw Error("FixedDec value must be nonnegative");
    return FixedDec(floor_scaled(q, scale), scale);
}

FixedDec FixedDec::inv_pow(unsigned long base, unsigned i, unsigned scale) {
    if (base < 2) throw Error("inv_pow requires base >= 2");
    mpz_class p;
    mpz_ui_pow_ui(p.get_mpz_t(), base, i);
    mpz_class r;
    mpz_fdiv_q(r.get_mpz_t(), pow10(scale).get_mpz_t(), p.get_mpz_t());
    return FixedDec(std::move(r), scale);
}

Rational FixedDec::to_rational() const {
    Rational q(m_, pow10(scale_));
    q.canonicalize();
    return q;
}

std::string FixedDec::to_string() const {
    std::string raw = m_.get_str();
    if (raw.size() <= scale_) raw.insert(0, scale_ + 1 - raw.size(), '0');
    if (scale_ == 0) return raw;
    return raw.substr(0, raw.size() - scale_) + "." + raw.substr(raw.size() - scale_);
}

void FixedDec::check_scale(const FixedDec& o) const {
    if (scale_ != o.scale_)
        throw ScaleMismatchError("FixedDec scale mismatch: " + std::to_string(scale_) + " vs " +
                                 std::to_string(o.scale_));
}

FixedDec FixedDec::operator+(const FixedDec& o) const {
    check_scale(o);
    return FixedDec(m_ + o.m_, scale_);
}

FixedDec FixedDec::operator*(const FixedDec& o) const {
    check_scale(o);
    mpz_class prod = m_ * o.m_;
    mpz_class r;
    mpz_fdiv_q(r.get_mpz_t(), prod.get_mpz_t(), pow10(scale_).get_mpz_t());
    return FixedDec(std::move(r), scale_);
}

FixedDec FixedDec::operator-(const FixedDec& o) const {
    check_scale(o);
    if (m_ < o.m_) throw Error("FixedDec subtraction would be negative");
    return FixedDec(m_ - o.m_, scale_);
}

FixedDec FixedDec::mul_uint(unsigned long k) const { return FixedDec(m_ * k, scale_); }

bool FixedDec::operator==(const FixedDec& o) const {
    check_scale(o);
    return m_ == o.m_;
}

bool FixedDec::operator<(const FixedDec& o) const {
    check_scale(o);
    return m_ < o.m_;
}

bool FixedDec::operator<=(const FixedDec& o) const {
    check_scale(o);
    return m_ <= o.m_;
}

}  // namespace treepark
