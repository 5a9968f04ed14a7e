#pragma once

#include "treepark/recursion.hpp"

#include <optional>

namespace treepark {

/// Self-contained, replayable witness for a one-sided bound on the critical
/// arrival density.
struct BoundCertificate {
    std::string kind;     // "upper" | "lower"
    std::string method;   // "gf-criterion" | "catalan-count" | "percolation"
    int d = 0;
    std::string arrival;  // arrival spec string
    Rational alpha;
    int depth = -1;       // gf-criterion only
    int scale = -1;       // gf-criterion only; -1 means the exact backend
    Rational margin;
};

struct CertifyOutcome {
    bool certified = false;
    Rational margin;  // g_depth(alpha) - F(alpha); certified iff > 0
    std::optional<BoundCertificate> cert;
};

/// Runs the recursion to `depth`, forms the certified lower bound g on the
/// partial sum G, and compares it exactly against F(alpha). A positive
/// margin proves alpha > alpha_c; a refusal is inconclusive, never a
/// disproof. alpha is read from the arrival spec and must be exactly
/// representable at `scale` in the fixed backend.
CertifyOutcome certify_upper(int d, const ArrivalSpec& arrival, int depth, Backend backend,
                             unsigned scale, std::size_t support_guard = 1'000'000);

/// Re-runs certify_upper from the certificate's own fields; the margin must
/// reproduce bit-exactly.
CertifyOutcome replay(const BoundCertificate& cert);

struct SearchRow {
    Rational alpha;
    bool certified = false;
    Rational margin;
};

struct SearchResult {
    std::vector<SearchRow> rows;  // ascending alpha
    std::optional<BoundCertificate> best;  // smallest certified alpha
};

/// Scans an ascending alpha grid, certifying each point at `depth`
/// independently (grid points fan out over threads; the result does not
/// depend on the schedule). arrival_kind is "two" or "three".
SearchResult search_upper(int d, const std::string& arrival_kind, int depth, Backend backend,
                          unsigned scale, const Rational& grid_start, const Rational& grid_stop,
                          const Rational& grid_step, int workers = 0);

/// Subgraph-counting lower bound: the largest alpha = 2p at which
/// (2 growth)^n (p(1-p))^(n/2) is summable, evaluated with the square root
/// rounded so the returned value never exceeds the true threshold.
Rational lower_bound_count(int d, const Rational& growth, unsigned digits = 40);

/// Per-n count of rooted connected subgraphs: 4 for the binary tree, e*d
/// (rounded up) in general.
Rational default_growth(int d);

/// Sharper opt-in growth d^d / (d-1)^(d-1) (entropy bound on C(dn, n)).
Rational generalized_catalan_growth(int d);

/// k d^{-k}: above this density, depth-k site percolation is supercritical
/// for the arrival law "k cars with probability alpha/k, else 0".
Rational upper_bound_percolation(int d, int k);

BoundCertificate lower_bound_certificate(int d, const Rational& growth, unsigned digits = 40);
BoundCertificate percolation_certificate(int d, int k);

std::string certificate_to_json(const BoundCertificate& cert);
BoundCertificate certificate_from_json(const std::string& text);

}  // namespace treepark
