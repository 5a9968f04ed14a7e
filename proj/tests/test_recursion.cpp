#include <doctest.h>

#include "treepark/recursion.hpp"

using namespace treepark;

namespace {

ModelConfig exact_config(const std::string& arrival, int depth, int d = 2) {
    ModelConfig cfg;
    cfg.d = d;
    cfg.arrival = parse_arrival(arrival);
    cfg.depth = depth;
    cfg.backend = Backend::rational;
    return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("recursion");

TEST_CASE("arrival spec parsing") {
    ArrivalSpec two = parse_arrival("two:0.08698");
    CHECK(two.pmf.mean == Rational(4349, 50000));
    CHECK(two.pmf.atoms.size() == 2);
    ArrivalSpec three = parse_arrival("three:0.3");
    CHECK(three.pmf.atoms.back().first == 3);
    CHECK(three.pmf.atoms.back().second == Rational(1, 10));
    ArrivalSpec pmf = parse_arrival("pmf:0:0.5,1:0.25,3:0.25");
    CHECK(pmf.pmf.mean == Rational(1));
    ArrivalSpec poisson = parse_arrival("poisson:1.5");
    CHECK(poisson.poisson);
    CHECK_THROWS_AS(parse_arrival("nope:1"), ParseError);
    CHECK_THROWS_AS(parse_arrival("two"), ParseError);
}

TEST_CASE("no arrivals means the recursion is frozen") {
    auto st = run<Rational>(exact_config("two:0", 6));
    for (const Rational& q : st.q) CHECK(q == 1);
    CHECK(st.law_x.w == std::vector<Rational>{Rational(1)});
    CHECK(*st.ex_n == 0);
}

TEST_CASE("first depths match the hand closed forms") {
    // p = alpha/2; q_1 = (1-p)^3, q_2 = (1-p)^3 ((1-p)^2 + 2p(1-p))^2
    auto st = run<Rational>(exact_config("two:0.1", 2));
    Rational p(1, 20), s = 1 - p;
    CHECK(st.q[0] == s);
    CHECK(st.q[1] == s * s * s);
    Rational inner = s * s + 2 * p * s;
    CHECK(st.q[2] == s * s * s * inner * inner);
}

TEST_CASE("q_0 is the arrival mass at zero") {
    auto st = init_state<Rational>(exact_config("two:0.08698", 0));
    CHECK(st.q[0] == Rational(95651, 100000));  // 1 - alpha/2
}

TEST_CASE("child-sum law at depth one is the two-child binomial") {
    auto st = run<Rational>(exact_config("two:0.1", 1));
    Rational p(1, 20), s = 1 - p;
    IntDist<Rational> v = deconvolve_arrival(st.law_x, bernoulli2_pmf(Rational(1, 10)));
    CHECK(mass_at(v, 0) == s * s);
    CHECK(mass_at(v, 1) == 2 * p * s);
    CHECK(mass_at(v, 2) == p * p);
}

TEST_CASE("child-sum mass at zero follows the squared-sum recursion") {
    // r_{n+1,0} = (1-p)^2 (r_{n,0} + r_{n,1})^2 on the binary tree
    ModelConfig cfg = exact_config("two:0.12", 6);
    Rational p = cfg.arrival.pmf.mean / 2, s = 1 - p;
    RecursionState<Rational> st = init_state<Rational>(cfg);
    ArrivalPmf pmf = cfg.arrival.pmf;
    IntDist<Rational> v_prev;
    for (int n = 1; n <= cfg.depth; n++) {
        step(st, cfg);
        IntDist<Rational> v = deconvolve_arrival(st.law_x, pmf);
        if (n > 1) {
            Rational expect = s * s * (mass_at(v_prev, 0) + mass_at(v_prev, 1)) *
                              (mass_at(v_prev, 0) + mass_at(v_prev, 1));
            REQUIRE(mass_at(v, 0) == expect);
        }
        v_prev = v;
        REQUIRE(st.q[static_cast<std::size_t>(n)] == s * mass_at(v, 0));
    }
}

TEST_CASE("q is nonincreasing in depth and in alpha") {
    for (const char* a : {"0.05", "0.1", "0.15"}) {
        auto st = run<Rational>(exact_config(std::string("two:") + a, 8));
        for (std::size_t n = 1; n < st.q.size(); n++) REQUIRE(st.q[n] <= st.q[n - 1]);
    }
    std::vector<Rational> prev;
    for (const char* a : {"0", "0.04", "0.08", "0.12", "0.16"}) {
        ModelConfig cfg = exact_config(std::string("two:") + a, 7);
        cfg.q_only = true;
        auto q = q_sequence(cfg);
        if (!prev.empty())
            for (std::size_t n = 0; n < q.size(); n++) REQUIRE(q[n] <= prev[n]);
        prev = q;
    }
}

TEST_CASE("q_{n+1} equals P(eta=0) times P(X_n <= 1)^d") {
    for (int d : {2, 3}) {
        ModelConfig cfg = exact_config("two:0.1", 5, d);
        RecursionState<Rational> st = init_state<Rational>(cfg);
        Rational p_eta0 = 1 - cfg.arrival.pmf.mean / 2;
        for (int n = 0; n < cfg.depth; n++) {
            Rational le1 = mass_at(st.law_x, 0) + mass_at(st.law_x, 1);
            Rational expect = p_eta0;
            for (int i = 0; i < d; i++) expect *= le1;
            step(st, cfg);
            REQUIRE(st.q.back() == expect);
        }
    }
}

TEST_CASE("one-step expectation recursion holds exactly") {
    for (const char* a : {"0.02", "0.1"}) {
        ModelConfig cfg = exact_config(std::string("two:") + a, 8);
        RecursionState<Rational> st = init_state<Rational>(cfg);
        Rational alpha = cfg.arrival.pmf.mean;
        CHECK(*st.ex_n == alpha);
        Rational prev_ex = *st.ex_n;
        for (int n = 0; n < cfg.depth; n++) {
            Rational prev_q = st.q.back();
            step(st, cfg);
            REQUIRE(*st.ex_n == alpha + Rational(2) * (prev_ex - (1 - prev_q)));
            prev_ex = *st.ex_n;
        }
        // EX_1 = 2 alpha on the binary tree
        auto ex = ex_from_q(st.q, alpha, 2);
        CHECK(ex[0] == alpha);
        CHECK(ex[1] == 2 * alpha);
    }
}

TEST_CASE("closed form holds with the validated constant only") {
    ModelConfig cfg = exact_config("two:0.05", 6);
    RecursionState<Rational> st = run<Rational>(cfg);
    Rational alpha = cfg.arrival.pmf.mean;
    for (int n = 1; n <= cfg.depth; n++) {
        std::vector<Rational> prefix(st.q.begin(), st.q.begin() + n);
        Rational g = g_from_q(prefix, 2);
        Rational closed = ex_closed_form(g, alpha, 2, n);
        REQUIRE(closed == ex_from_q(st.q, alpha, 2)[static_cast<std::size_t>(n)]);
        Rational with_printed = (g - big_f(alpha, 2)) * Rational(1 << n) + big_c_printed(alpha, 2);
        REQUIRE(closed != with_printed);  // the printed constant misses by exactly 1
        REQUIRE(closed - with_printed == 1);
    }
}

TEST_CASE("coefficient functions") {
    CHECK(big_f(Rational(0), 2) == 2);
    CHECK(big_f(Rational(4349, 50000), 2) == Rational(45651, 25000));
    CHECK(big_c_printed(Rational(1, 2), 2) == Rational(1, 2));
    CHECK(big_c(Rational(1, 2), 2) == Rational(3, 2));
    CHECK_THROWS_AS(big_f(Rational(1, 2), 1), ConfigError);
}

TEST_CASE("tau transform") {
    // q identically 1: no car ever shows up, the transform carries no mass
    std::vector<Rational> ones(6, Rational(1));
    TauTransform t = tau_transform(ones, 2);
    CHECK(t.truncated == 0);
    CHECK(t.remainder_bound == Rational(1, 64));

    // q_0 = 1 - p and constant after: all mass at tau = 0
    Rational p(1, 8);
    std::vector<Rational> flat = {1 - p, 1 - p, 1 - p};
    CHECK(tau_transform(flat, 2).truncated == p);

    CHECK_THROWS_AS(tau_transform({}, 2), ConfigError);
}

TEST_CASE("finite-depth tau identity against the partial sum") {
    ModelConfig cfg = exact_config("two:0.12", 9);
    cfg.q_only = true;
    std::vector<Rational> q = q_sequence(cfg);
    TauTransform t = tau_transform(q, 2);
    Rational lam_tail(1, 1 << 10);
    Rational rhs = Rational(2) * (1 - t.truncated - lam_tail * q.back());
    CHECK(g_from_q(q, 2) == rhs);
}

TEST_CASE("stationary residual vanishes with no arrivals") {
    CHECK(stationary_ex_residual(Rational(0), Rational(1), Rational(0), 2) == 0);
}

TEST_CASE("stationary residual decays at subcritical densities") {
    auto residual_at = [](const char* a, int depth) {
        ModelConfig cfg;
        cfg.d = 2;
        cfg.arrival = parse_arrival(std::string("two:") + a);
        cfg.depth = depth;
        cfg.backend = Backend::fixed;
        cfg.scale = 200;
        RecursionState<FixedDec> st = run<FixedDec>(cfg);
        return stationary_ex_residual(st.ex_n->to_rational(), st.q.back().to_rational(),
                                      parse_decimal(a), 2);
    };
    CHECK(residual_at("0.02", 60) < Rational(1, pow10(6)));
    CHECK(residual_at("0.05", 60) < Rational(1, pow10(4)));
}

TEST_CASE("cone-truncated runs reproduce full q values bit for bit") {
    for (const char* a : {"0.05", "0.15"}) {
        ModelConfig full = exact_config(std::string("two:") + a, 9);
        ModelConfig cone = full;
        cone.q_only = true;
        auto sf = run<Rational>(full);
        auto sw = run<Rational>(cone);
        REQUIRE(sf.q == sw.q);
        REQUIRE(sf.g_n == sw.g_n);

        ModelConfig ffull = full;
        ffull.backend = Backend::fixed;
        ffull.scale = 40;
        ModelConfig fcone = ffull;
        fcone.q_only = true;
        auto xf = run<FixedDec>(ffull);
        auto xw = run<FixedDec>(fcone);
        REQUIRE(xf.q.size() == xw.q.size());
        for (std::size_t i = 0; i < xf.q.size(); i++) REQUIRE(xf.q[i] == xw.q[i]);
        REQUIRE(xf.g_n == xw.g_n);
    }
}

TEST_CASE("fixed q values never exceed the exact ones") {
    for (const char* a : {"0.05", "0.12"}) {
        ModelConfig exact = exact_config(std::string("two:") + a, 8);
        ModelConfig fixed = exact;
        fixed.backend = Backend::fixed;
        fixed.scale = 25;
        auto qe = run<Rational>(exact).q;
        auto qf = run<FixedDec>(fixed).q;
        for (std::size_t n = 0; n < qe.size(); n++) {
            REQUIRE(qf[n].to_rational() <= qe[n]);
            REQUIRE(qe[n] - qf[n].to_rational() <= Rational(n + 1, 1) / pow10(20));
        }
    }
}

TEST_CASE("engine guards") {
    ModelConfig deep = exact_config("two:0.1", 15);
    CHECK_THROWS_AS(run<Rational>(deep), ConfigError);
    deep.exact_depth_cap = 15;
    deep.depth = 3;
    CHECK_NOTHROW(run<Rational>(deep));

    ModelConfig poisson;
    poisson.arrival = parse_arrival("poisson:0.5");
    poisson.depth = 2;
    poisson.backend = Backend::rational;
    CHECK_THROWS_AS(run<Rational>(poisson), ConfigError);

    ModelConfig bad = exact_config("two:0.1", 2, 0);
    CHECK_THROWS_AS(run<Rational>(bad), ConfigError);
}

TEST_SUITE_END();
