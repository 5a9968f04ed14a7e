#pragma once

#include "treepark/recursion.hpp"

#include <cstdint>

namespace treepark {

/// Deterministic 64-bit generator (splitmix64). Sampling never touches the
/// standard library distributions, so identical seeds give identical runs on
/// any platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in {0, .., n-1} by rejection (exact, unbiased).
    std::uint64_t below(std::uint64_t n);

  private:
    std::uint64_t state_;
};

/// Counter-based per-trial seed derivation: trial i gets an independent
/// stream no matter how trials are split across workers.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

struct OffspringLaw {
    enum class Kind { deterministic, poisson, pmf };
    Kind kind = Kind::deterministic;
    int d = 2;
    double poisson_mean = 0.0;
    std::vector<std::pair<int, double>> atoms;

    static OffspringLaw deterministic(int d);
    static OffspringLaw poisson(double mean);
    static OffspringLaw from_pmf(std::vector<std::pair<int, double>> atoms);

    double mean() const;
    int sample(Rng& rng) const;
};

/// "det:2" (or a bare integer), "poisson:1.5", "pmf:0:0.25,2:0.75".
OffspringLaw parse_offspring(const std::string& spec);

/// Samples arrival counts for Monte Carlo trials from an ArrivalSpec.
class ArrivalSampler {
  public:
    explicit ArrivalSampler(const ArrivalSpec& spec);
    int sample(Rng& rng) const;

  private:
    bool poisson_ = false;
    double poisson_mean_ = 0.0;
    std::vector<std::pair<int, double>> cdf_;  // (k, cumulative)
};

struct SampledTree {
    struct Node {
        std::int64_t parent;       // -1 for the root
        std::int64_t first_child;  // children occupy [first_child, first_child + n_children)
        std::int32_t n_children;
        std::uint32_t eta;
    };
    std::vector<Node> nodes;             // level order
    std::vector<std::size_t> level_begin;  // level_begin[m] = first index at depth m
    int depth = 0;
};

/// Galton-Watson tree truncated at `depth`, with arrival counts attached,
/// reproducible from the seed. Throws GuardError past node_guard nodes.
SampledTree sample_tree(const OffspringLaw& offspring, const ArrivalSampler& arrival, int depth,
                        std::uint64_t seed, std::size_t node_guard = 100'000'000);

/// A_m(root) for m = 0..n, where A_0 = eta and
/// A_m(v) = eta_v + sum_children (A_{m-1}(child) - 1)^+.
std::vector<std::int64_t> eval_trajectory(const SampledTree& tree, int n);

/// Cars that arrive to the root by time n.
std::int64_t eval_parking(const SampledTree& tree, int n);

/// Literal car-movement simulation: each car parks in the first free spot it
/// arrives to (uniform tie-break), otherwise steps toward the root. Returns
/// the number of cars that reach the root within n steps; cars starting at
/// the root count at step 0. Agrees with eval_parking for every tie seed.
std::int64_t simulate_stepwise(const SampledTree& tree, int n, std::uint64_t tie_seed);

struct EstimateReport {
    std::uint64_t trials = 0;
    int depth = 0;
    double lambda = 0.0;
    // integer aggregates; order-insensitive, so reports are byte-identical
    // for any worker count
    std::vector<std::uint64_t> zero_count;       // index n: #{trials with A_n = 0}
    std::vector<std::uint64_t> sum_x;            // sum of A_n
    std::vector<std::uint64_t> sum_x2;           // sum of A_n^2
    std::vector<std::uint64_t> tau_hist;         // tau = 0..depth
    std::uint64_t tau_censored = 0;

    double q_hat(int n) const;
    double q_se(int n) const;
    double ex_hat(int n) const;
    double ex_se(int n) const;
    /// Truncated E lambda^{-tau} (censored trials contribute 0) and the
    /// bound lambda^{-(depth+1)} P(censored) on what the truncation drops.
    double e_lambda_tau() const;
    double e_lambda_tau_remainder() const;
};

EstimateReport estimate(const OffspringLaw& offspring, const ArrivalSpec& arrival, int depth,
                        std::uint64_t trials, std::uint64_t seed, int workers = 1,
                        std::size_t node_guard = 100'000'000);

}  // namespace treepark
