#include <doctest.h>

#include "treepark/dist.hpp"

using namespace treepark;

namespace {

IntDist<Rational> make_exact(long long offset, std::vector<Rational> w) {
    IntDist<Rational> d;
    d.offset = offset;
    d.w = std::move(w);
    d = canonicalize(std::move(d));
    Rational total(0);
    for (const auto& x : d.w) total += x;
    d.deficit = 1 - total;
    return d;
}

// test-side oracle: plain nested-loop convolution over mpq, no shortcuts
IntDist<Rational> conv_naive(const IntDist<Rational>& a, const IntDist<Rational>& b) {
    IntDist<Rational> out;
    out.offset = a.offset + b.offset;
    out.w.assign(a.w.size() + b.w.size() - 1, Rational(0));
    for (std::size_t i = 0; i < a.w.size(); i++)
        for (std::size_t j = 0; j < b.w.size(); j++) out.w[i + j] += a.w[i] * b.w[j];
    Rational total(0);
    for (const auto& x : out.w) total += x;
    out.deficit = 1 - total;
    return canonicalize(std::move(out));
}

IntDist<Rational> conv_power_naive(const IntDist<Rational>& d, unsigned k) {
    IntDist<Rational> acc = d;
    for (unsigned i = 1; i < k; i++) acc = conv_naive(acc, d);
    return acc;
}

Rational random_prob(unsigned& state) {
    state = state * 1664525u + 1013904223u;
    Rational r(state % 1000, 1000);
    r.canonicalize();
    return r;
}

IntDist<Rational> random_dist(unsigned& state) {
    state = state * 1664525u + 1013904223u;
    std::size_t len = 1 + state % 5;
    std::vector<Rational> w(len);
    Rational total(0);
    for (auto& x : w) {
        x = random_prob(state);
        total += x;
    }
    Rational norm = total > 1 ? total : Rational(1);
    for (auto& x : w) x /= norm;
    state = state * 1664525u + 1013904223u;
    return make_exact(state % 3, std::move(w));
}

}  // namespace

TEST_SUITE_BEGIN("dist");

TEST_CASE("pushdown of (x-1)+") {
    IntDist<Rational> delta0 = point_mass<Rational>(0, Rational(1));
    CHECK(pushdown_minus_one(delta0).w == delta0.w);
    CHECK(pushdown_minus_one(delta0).offset == 0);

    Rational p(1, 5);
    IntDist<Rational> two = make_exact(0, {1 - p, Rational(0), p});
    IntDist<Rational> pd = pushdown_minus_one(two);
    CHECK(pd.offset == 0);
    CHECK(pd.w == std::vector<Rational>{1 - p, p});

    IntDist<Rational> abc = make_exact(0, {Rational(1, 2), Rational(1, 3), Rational(1, 6)});
    IntDist<Rational> pd2 = pushdown_minus_one(abc);
    CHECK(pd2.w == std::vector<Rational>{Rational(5, 6), Rational(1, 6)});

    // offset shift keeps mass and mean bookkeeping
    IntDist<Rational> shifted = make_exact(3, {Rational(1)});
    CHECK(pushdown_minus_one(shifted).offset == 2);
    CHECK(mean(pushdown_minus_one(abc)) == mean(abc) - (1 - mass_at(abc, 0)));
}

TEST_CASE("convolution identities and closed forms") {
    IntDist<Rational> delta0 = point_mass<Rational>(0, Rational(1));
    Rational p(3, 10);
    IntDist<Rational> bern = make_exact(0, {1 - p, p});
    CHECK(convolve(delta0, bern).w == bern.w);

    IntDist<Rational> sq = convolve(bern, bern);
    CHECK(sq.w == std::vector<Rational>{(1 - p) * (1 - p), 2 * p * (1 - p), p * p});

    IntDist<Rational> uni = make_exact(0, {Rational(1, 2), Rational(1, 2)});
    CHECK(convolve(uni, uni).w ==
          std::vector<Rational>{Rational(1, 4), Rational(1, 2), Rational(1, 4)});
}

TEST_CASE("convolution power by binary exponentiation") {
    Rational p(3, 10);
    IntDist<Rational> bern = make_exact(0, {1 - p, p});
    CHECK(convolve_power(bern, 1).w == bern.w);
    CHECK(convolve_power(bern, 2).w == convolve(bern, bern).w);

    IntDist<Rational> uni = make_exact(0, {Rational(1, 2), Rational(1, 2)});
    IntDist<Rational> four = convolve_power(uni, 4);
    CHECK(four.w == std::vector<Rational>{Rational(1, 16), Rational(1, 4), Rational(3, 8),
                                          Rational(1, 4), Rational(1, 16)});
    CHECK_THROWS_AS(convolve_power(uni, 0), ConfigError);
}

TEST_CASE("convolution power matches the repeated-convolve oracle") {
    unsigned state = 41;
    for (int rep = 0; rep < 20; rep++) {
        IntDist<Rational> d = random_dist(state);
        for (unsigned k : {2u, 3u, 5u, 8u, 64u}) {
            IntDist<Rational> fast = convolve_power(d, k);
            IntDist<Rational> slow = conv_power_naive(d, k);
            REQUIRE(fast.offset == slow.offset);
            REQUIRE(fast.w == slow.w);
            REQUIRE(fast.deficit == slow.deficit);
        }
    }
}

TEST_CASE("mean and tail expectation") {
    CHECK(mean(point_mass<Rational>(0, Rational(1))) == 0);
    Rational alpha(1, 10);
    IntDist<Rational> bern2 = make_exact(0, {1 - alpha / 2, Rational(0), alpha / 2});
    CHECK(mean(bern2) == alpha);
    Rational p(2, 7);
    IntDist<Rational> binom = convolve_power(make_exact(0, {1 - p, p}), 2);
    CHECK(mean(binom) == 2 * p);

    CHECK(tail_expectation(point_mass<Rational>(2, Rational(1)), 1) == 1);
    CHECK(tail_expectation(bern2, 1) == alpha / 2);
    IntDist<Rational> threes = make_exact(0, {1 - alpha / 3, Rational(0), Rational(0), alpha / 3});
    CHECK(tail_expectation(threes, 1) == 2 * alpha / 3);
    CHECK(tail_expectation(threes, 1) >= tail_expectation(bern2, 1));
}

TEST_CASE("exact mode conserves mass through every operation") {
    unsigned state = 17;
    for (int rep = 0; rep < 40; rep++) {
        IntDist<Rational> a = random_dist(state), b = random_dist(state);
        IntDist<Rational> c = convolve(a, b);
        Rational total = total_mass(c) + c.deficit;
        REQUIRE(total == 1);
        IntDist<Rational> pd = pushdown_minus_one(c);
        REQUIRE(total_mass(pd) + pd.deficit == 1);
        IntDist<Rational> tr = truncate_above(c, c.offset + 1);
        REQUIRE(total_mass(tr) + tr.deficit == 1);
    }
}

TEST_CASE("convolution is commutative and associative in exact mode") {
    unsigned state = 23;
    for (int rep = 0; rep < 25; rep++) {
        IntDist<Rational> a = random_dist(state), b = random_dist(state), c = random_dist(state);
        IntDist<Rational> ab = convolve(a, b), ba = convolve(b, a);
        REQUIRE(ab.w == ba.w);
        REQUIRE(ab.offset == ba.offset);
        IntDist<Rational> abc1 = convolve(convolve(a, b), c);
        IntDist<Rational> abc2 = convolve(a, convolve(b, c));
        REQUIRE(abc1.w == abc2.w);
        REQUIRE(abc1.offset == abc2.offset);
    }
}

TEST_CASE("fixed weights never exceed their exact counterparts") {
    unsigned scale = 12;
    unsigned state = 31;
    for (int rep = 0; rep < 25; rep++) {
        IntDist<Rational> a = random_dist(state), b = random_dist(state);
        auto lower = [&](const IntDist<Rational>& d) {
            IntDist<FixedDec> f;
            f.offset = d.offset;
            f.deficit = FixedDec::zero(scale);
            for (const auto& x : d.w) f.w.push_back(FixedDec::from_rational_floor(x, scale));
            f = canonicalize(std::move(f));
            mpz_class tot(0);
            for (const auto& x : f.w) tot += x.mantissa();
            f.deficit = FixedDec(pow10(scale) - tot, scale);
            return f;
        };
        IntDist<FixedDec> fc = convolve(lower(a), lower(b));
        IntDist<Rational> rc = convolve(a, b);
        REQUIRE(total_mass(fc).to_rational() <= 1);
        for (std::size_t i = 0; i < fc.w.size(); i++) {
            long long k = fc.offset + static_cast<long long>(i);
            REQUIRE(fc.w[i].to_rational() <= mass_at(rc, k));
        }
        REQUIRE(mean(fc).to_rational() <= mean(rc));
    }
}

TEST_CASE("integer convolution helper agrees with schoolbook on large operands") {
    // crosses the packed-multiplication threshold
    unsigned state = 77;
    for (int rep = 0; rep < 6; rep++) {
        std::vector<mpz_class> a(20 + state % 13), b(16 + state % 9);
        for (auto& x : a) {
            state = state * 1664525u + 1013904223u;
            mpz_class base(state);
            x = base * base * base * base * base;  // ~160 bits
        }
        for (auto& x : b) {
            state = state * 1664525u + 1013904223u;
            mpz_class base(state);
            x = base * base * base * base;
        }
        std::vector<mpz_class> fast = convolve_mpz(a, b, a.size() + b.size() - 1);
        std::vector<mpz_class> slow(a.size() + b.size() - 1, mpz_class(0));
        for (std::size_t i = 0; i < a.size(); i++)
            for (std::size_t j = 0; j < b.size(); j++) slow[i + j] += a[i] * b[j];
        REQUIRE(fast == slow);
    }
}

TEST_CASE("support guard fails loud") {
    std::vector<Rational> w(600, Rational(1, 1000));
    IntDist<Rational> wide = make_exact(0, std::move(w));
    ConvOptions opt;
    opt.support_guard = 1000;
    CHECK_THROWS_AS(convolve(wide, wide, opt), GuardError);
}

TEST_CASE("value cap drops mass into the deficit but keeps low entries exact") {
    unsigned state = 55;
    for (int rep = 0; rep < 25; rep++) {
        IntDist<Rational> a = random_dist(state), b = random_dist(state);
        IntDist<Rational> full = convolve(a, b);
        ConvOptions opt;
        opt.value_cap = full.offset + 1;
        IntDist<Rational> capped = convolve(a, b, opt);
        REQUIRE(total_mass(capped) + capped.deficit == 1);
        for (long long k = capped.offset; k <= capped.max_value(); k++)
            REQUIRE(mass_at(capped, k) == mass_at(full, k));
        REQUIRE(capped.max_value() <= opt.value_cap);
    }
}

TEST_CASE("arrival constructors") {
    Rational alpha(1, 10);
    ArrivalLaw<Rational> two = make_arrival<Rational>(bernoulli2_pmf(alpha));
    CHECK(two.mean == alpha);
    CHECK(mass_at(two.law, 0) == 1 - alpha / 2);
    CHECK(mass_at(two.law, 2) == alpha / 2);
    CHECK(mean(two.law) == alpha);

    ArrivalLaw<Rational> three = make_arrival<Rational>(threes_pmf(alpha));
    CHECK(mass_at(three.law, 3) == alpha / 3);
    CHECK(mean(three.law) == alpha);

    // fixed backend floors each weight separately; mass may fall short but
    // never over
    ArrivalLaw<FixedDec> ft = make_arrival<FixedDec>(threes_pmf(alpha), 20);
    CHECK(mass_at(ft.law, 0).to_rational() <= 1 - alpha / 3);
    CHECK(mass_at(ft.law, 3).to_rational() <= alpha / 3);
    CHECK(total_mass(ft.law).to_rational() + ft.law.deficit.to_rational() == 1);

    CHECK_THROWS_AS(bernoulli2_pmf(Rational(3)), ConfigError);
    CHECK_THROWS_AS(custom_pmf({{0, Rational(1, 2)}, {0, Rational(1, 2)}}, "x"), ConfigError);
    CHECK_THROWS_AS(custom_pmf({{0, Rational(2)}}, "x"), ConfigError);
}

TEST_CASE("csv serialization") {
    Rational alpha(1, 10);
    ArrivalLaw<Rational> two = make_arrival<Rational>(bernoulli2_pmf(alpha));
    CHECK(csv_of_dist(two.law) == "k,weight\n0,0.95\n1,0\n2,0.05\n");
    ArrivalLaw<FixedDec> ftwo = make_arrival<FixedDec>(bernoulli2_pmf(alpha), 4);
    CHECK(csv_of_dist(ftwo.law) == "k,weight\n0,0.9500\n1,0.0000\n2,0.0500\n");
}

TEST_SUITE_END();
