#pragma once

#include "treepark/recursion.hpp"

namespace treepark {

/// Margins of the increasing-convex comparison A vs B at the generating test
/// functions (x - t)^+: margin_t = E(B - t)^+ - E(A - t)^+ for integer t.
/// All margins nonnegative over the joint support range means B dominates A.
struct IcxReport {
    std::vector<Rational> margins;  // t = 0 .. t_max
    bool dominated = false;
    long long violated_at = -1;  // first t with a negative margin
};

/// Exact comparison of two finite-support laws (deficits must be zero).
IcxReport icx_compare_laws(const IntDist<Rational>& a, const IntDist<Rational>& b);

/// Runs the exact engine for both configs and compares the laws of X_n at
/// every depth 0..depth. Configs must share d and use the rational backend.
std::vector<IcxReport> icx_compare_parking(const ModelConfig& a, const ModelConfig& b,
                                           int depth);

}  // namespace treepark
