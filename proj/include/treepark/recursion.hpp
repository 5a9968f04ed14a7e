#pragma once

#include "treepark/dist.hpp"

#include <optional>

namespace treepark {

enum class Backend { rational, fixed };

/// Parsed arrival specification. Exact atoms for the recursion engine;
/// poisson arrivals are Monte Carlo only.
struct ArrivalSpec {
    std::string spec;
    ArrivalPmf pmf;
    bool poisson = false;
    Rational poisson_mean{0};
};

/// Accepts "two:<alpha>", "three:<alpha>", "pmf:<k:w,k:w,...>", "poisson:<alpha>".
ArrivalSpec parse_arrival(const std::string& spec);

struct ModelConfig {
    int d = 2;
    ArrivalSpec arrival;
    int depth = 0;
    Backend backend = Backend::fixed;
    unsigned scale = 200;
    std::size_t support_guard = 1'000'000;
    /// Full exact laws get expensive fast; runs deeper than this in the
    /// rational backend must raise the cap explicitly.
    int exact_depth_cap = 14;
    /// Keep only the part of each law that can still influence the q-values
    /// up to `depth` (the value-(depth-n) cone). q and g are bit-identical
    /// to a full run; means are not available.
    bool q_only = false;
};

template <class Num>
struct RecursionState {
    int n = 0;
    IntDist<Num> law_x;
    std::vector<Num> q;       // q_0 .. q_n
    Num g_n;                  // sum_{i<=n} lambda^{-i} q_i, lambda = d
    std::optional<Num> ex_n;  // mean of law_x; absent in q_only mode
};

template <class Num>
RecursionState<Num> init_state(const ModelConfig& cfg);

/// One application of X_{n+1} = eta + sum_{i<=d} (X_n - 1)^+.
template <class Num>
void step(RecursionState<Num>& st, const ModelConfig& cfg);

template <class Num>
RecursionState<Num> run(const ModelConfig& cfg);

/// q_0..q_depth as exact rationals (FixedDec values convert exactly).
std::vector<Rational> q_sequence(const ModelConfig& cfg);

/// lambda (1 - alpha) / (lambda - 1).
Rational big_f(const Rational& alpha, long lambda);
/// (1 - alpha) / (lambda - 1), the constant as printed in the source the
/// closed form was taken from. Does not match the recursion; kept so the
/// resolution is testable.
Rational big_c_printed(const Rational& alpha, long lambda);
/// (lambda - alpha) / (lambda - 1), the constant the iterated one-step
/// recursion actually produces. Validated against EX_1 in the tests.
Rational big_c(const Rational& alpha, long lambda);

/// (G_{n-1} - F) lambda^n + C for n >= 1.
Rational ex_closed_form(const Rational& g_nm1, const Rational& alpha, long lambda, int n);

/// EX_0..EX_n from the one-step recursion EX_{m+1} = alpha + lambda (EX_m - (1 - q_m)).
std::vector<Rational> ex_from_q(const std::vector<Rational>& q, const Rational& alpha,
                                long lambda);

/// sum_{i<=n} lambda^{-i} q_i.
Rational g_from_q(const std::vector<Rational>& q, long lambda);

struct TauTransform {
    Rational truncated;  // E lambda^{-tau} restricted to tau <= n
    Rational remainder_bound;  // lambda^{-(n+1)} q_n bounds the missing part
};

/// Treats q_m as P(tau > m): truncated = (1 - q_0) + sum lambda^{-m} (q_{m-1} - q_m).
TauTransform tau_transform(const std::vector<Rational>& q, long lambda);

/// | EX_n - (lambda - alpha - lambda q_n) / (lambda - 1) |. Vanishes as n
/// grows whenever the arrival density is subcritical.
Rational stationary_ex_residual(const Rational& ex_n, const Rational& q_n,
                                const Rational& alpha, long lambda);

/// Recovers the child-sum law V from law(X) = arrival * V by triangular
/// deconvolution; requires P(eta = 0) > 0. Exact backend only.
IntDist<Rational> deconvolve_arrival(const IntDist<Rational>& law_x, const ArrivalPmf& pmf);

}  // namespace treepark
