#include "treepark/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace treepark {

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw Error("below(0)");
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    for (;;) {
        std::uint64_t v = next();
        if (v < limit) return v % n;
    }
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    Rng mix(base ^ (0xD1B54A32D192ED03ull * (index + 1)));
    mix.next();
    return mix.next();
}

OffspringLaw OffspringLaw::deterministic(int d) {
    if (d < 0) throw ConfigError("offspring count must be nonnegative");
    OffspringLaw o;
    o.kind = Kind::deterministic;
    o.d = d;
    return o;
}

OffspringLaw OffspringLaw::poisson(double mean) {
    if (!(mean >= 0) || mean > 700) throw ConfigError("poisson offspring mean out of range");
    OffspringLaw o;
    o.kind = Kind::poisson;
    o.poisson_mean = mean;
    return o;
}

OffspringLaw OffspringLaw::from_pmf(std::vector<std::pair<int, double>> atoms) {
    OffspringLaw o;
    o.kind = Kind::pmf;
    double total = 0;
    int prev = -1;
    for (auto& [k, w] : atoms) {
        if (k <= prev || k < 0 || w < 0) throw ConfigError("bad offspring pmf");
        total += w;
        prev = k;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ConfigError("offspring pmf must sum to 1");
    o.atoms = std::move(atoms);
    return o;
}

double OffspringLaw::mean() const {
    switch (kind) {
        case Kind::deterministic: return d;
        case Kind::poisson: return poisson_mean;
        case Kind::pmf: {
            double m = 0;
            for (auto& [k, w] : atoms) m += k * w;
            return m;
        }
    }
    return 0;
}

namespace {

int sample_poisson(Rng& rng, double mean) {
    // inversion; fine for the means this tool runs at
    double u = rng.u01();
    double p = std::exp(-mean), acc = p;
    int k = 0;
    while (u > acc) {
        k++;
        p *= mean / k;
        if (p <= 0) break;
        acc += p;
    }
    return k;
}

}  // namespace

int OffspringLaw::sample(Rng& rng) const {
    switch (kind) {
        case Kind::deterministic: return d;
        case Kind::poisson: return sample_poisson(rng, poisson_mean);
        case Kind::pmf: {
            double u = rng.u01(), acc = 0;
            for (auto& [k, w] : atoms) {
                acc += w;
                if (u < acc) return k;
            }
            return atoms.back().first;
        }
    }
    return 0;
}

OffspringLaw parse_offspring(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon == std::string::npos) return OffspringLaw::deterministic(std::stoi(spec));
    std::string name = spec.substr(0, colon), args = spec.substr(colon + 1);
    if (name == "det") return OffspringLaw::deterministic(std::stoi(args));
    if (name == "poisson") return OffspringLaw::poisson(std::stod(args));
    if (name == "pmf") {
        std::vector<std::pair<int, double>> atoms;
        std::size_t begin = 0;
        while (begin < args.size()) {
            std::size_t end = args.find(',', begin);
            if (end == std::string::npos) end = args.size();
            std::string item = args.substr(begin, end - begin);
            auto c = item.find(':');
            if (c == std::string::npos) throw ParseError("pmf entry must be k:w");
            atoms.emplace_back(std::stoi(item.substr(0, c)), std::stod(item.substr(c + 1)));
            begin = end + 1;
        }
        return OffspringLaw::from_pmf(std::move(atoms));
    }
    throw ParseError("unknown offspring kind \"" + name + "\"");
}

ArrivalSampler::ArrivalSampler(const ArrivalSpec& spec) {
    if (spec.poisson) {
        poisson_ = true;
        poisson_mean_ = spec.poisson_mean.get_d();
        if (poisson_mean_ > 700) throw ConfigError("poisson arrival mean out of range");
        return;
    }
    double acc = 0;
    for (const auto& [k, w] : spec.pmf.atoms) {
        acc += w.get_d();
        cdf_.emplace_back(static_cast<int>(k), acc);
    }
    if (acc > 1.0 + 1e-12) throw ConfigError("arrival pmf mass exceeds 1");
    if (acc < 1.0 - 1e-12)
        throw ConfigError("Monte Carlo needs the arrival pmf to carry its full mass");
}

int ArrivalSampler::sample(Rng& rng) const {
    if (poisson_) return sample_poisson(rng, poisson_mean_);
    double u = rng.u01();
    for (const auto& [k, acc] : cdf_)
        if (u < acc) return k;
    return cdf_.empty() ? 0 : cdf_.back().first;
}

SampledTree sample_tree(const OffspringLaw& offspring, const ArrivalSampler& arrival, int depth,
                        std::uint64_t seed, std::size_t node_guard) {
    if (depth < 0) throw ConfigError("depth must be >= 0");
    Rng rng(seed);
    SampledTree t;
    t.depth = depth;
    t.nodes.push_back({-1, -1, 0, static_cast<std::uint32_t>(arrival.sample(rng))});
    t.level_begin = {0, 1};
    for (int level = 0; level < depth; level++) {
        std::size_t begin = t.level_begin[level], end = t.level_begin[level + 1];
        for (std::size_t v = begin; v < end; v++) {
            int z = offspring.sample(rng);
            t.nodes[v].first_child = static_cast<std::int64_t>(t.nodes.size());
            t.nodes[v].n_children = z;
            for (int c = 0; c < z; c++) {
                if (t.nodes.size() >= node_guard)
                    throw GuardError("sampled tree exceeds the node guard of " +
                                     std::to_string(node_guard) + " nodes");
                t.nodes.push_back({static_cast<std::int64_t>(v), -1, 0,
                                   static_cast<std::uint32_t>(arrival.sample(rng))});
            }
        }
        t.level_begin.push_back(t.nodes.size());
    }
    return t;
}

std::vector<std::int64_t> eval_trajectory(const SampledTree& tree, int n) {
    if (n > tree.depth) throw ConfigError("evaluation horizon exceeds the sampled depth");
    std::vector<std::int64_t> a(tree.nodes.size());
    for (std::size_t v = 0; v < tree.nodes.size(); v++) a[v] = tree.nodes[v].eta;
    std::vector<std::int64_t> root_counts = {a[0]};
    for (int m = 1; m <= n; m++) {
        // level order: a parent is updated before its children, so child
        // reads below still see step m-1
        for (std::size_t v = 0; v < tree.nodes.size(); v++) {
            const auto& node = tree.nodes[v];
            std::int64_t sum = node.eta;
            for (std::int32_t c = 0; c < node.n_children; c++) {
                std::int64_t child = a[static_cast<std::size_t>(node.first_child) + c];
                if (child > 1) sum += child - 1;
            }
            a[v] = sum;
        }
        root_counts.push_back(a[0]);
    }
    return root_counts;
}

std::int64_t eval_parking(const SampledTree& tree, int n) {
    return eval_trajectory(tree, n).back();
}

std::int64_t simulate_stepwise(const SampledTree& tree, int n, std::uint64_t tie_seed) {
    if (n > tree.depth) throw ConfigError("evaluation horizon exceeds the sampled depth");
    Rng rng(tie_seed);
    std::vector<char> spot_taken(tree.nodes.size(), 0);
    // cars[v] = number of unparked cars currently at v; identities only
    // matter for the tie-break draw, which counts never depend on
    std::vector<std::int64_t> cars(tree.nodes.size(), 0);
    for (std::size_t v = 0; v < tree.nodes.size(); v++) cars[v] = tree.nodes[v].eta;
    std::int64_t arrived = 0;
    for (int t = 0;; t++) {
        arrived += cars[0];
        if (cars[0] > 0 && !spot_taken[0]) {
            rng.below(static_cast<std::uint64_t>(cars[0]));  // who parks; count unaffected
            spot_taken[0] = 1;
        }
        cars[0] = 0;
        for (std::size_t v = 1; v < tree.nodes.size(); v++) {
            if (cars[v] > 0 && !spot_taken[v]) {
                rng.below(static_cast<std::uint64_t>(cars[v]));
                spot_taken[v] = 1;
                cars[v]--;
            }
        }
        if (t == n) break;
        // everyone still unparked steps to the parent; parents sit at lower
        // indices, so an ascending sweep never moves a car twice
        for (std::size_t v = 1; v < tree.nodes.size(); v++) {
            if (cars[v] > 0) {
                cars[static_cast<std::size_t>(tree.nodes[v].parent)] += cars[v];
                cars[v] = 0;
            }
        }
    }
    return arrived;
}

double EstimateReport::q_hat(int n) const {
    return static_cast<double>(zero_count[static_cast<std::size_t>(n)]) /
           static_cast<double>(trials);
}

double EstimateReport::q_se(int n) const {
    double q = q_hat(n);
    return std::sqrt(q * (1 - q) / static_cast<double>(trials));
}

double EstimateReport::ex_hat(int n) const {
    return static_cast<double>(sum_x[static_cast<std::size_t>(n)]) / static_cast<double>(trials);
}

double EstimateReport::ex_se(int n) const {
    if (trials < 2) return 0;
    double t = static_cast<double>(trials);
    double m = ex_hat(n);
    double var = (static_cast<double>(sum_x2[static_cast<std::size_t>(n)]) - t * m * m) / (t - 1);
    if (var < 0) var = 0;
    return std::sqrt(var / t);
}

double EstimateReport::e_lambda_tau() const {
    double acc = 0;
    for (std::size_t m = 0; m < tau_hist.size(); m++)
        acc += static_cast<double>(tau_hist[m]) * std::pow(lambda, -static_cast<double>(m));
    return acc / static_cast<double>(trials);
}

double EstimateReport::e_lambda_tau_remainder() const {
    return std::pow(lambda, -static_cast<double>(depth + 1)) *
           (static_cast<double>(tau_censored) / static_cast<double>(trials));
}

EstimateReport estimate(const OffspringLaw& offspring, const ArrivalSpec& arrival, int depth,
                        std::uint64_t trials, std::uint64_t seed, int workers,
                        std::size_t node_guard) {
    if (trials == 0) throw ConfigError("estimate needs at least one trial");
    ArrivalSampler sampler(arrival);
    EstimateReport total;
    total.trials = trials;
    total.depth = depth;
    total.lambda = offspring.mean();
    std::size_t len = static_cast<std::size_t>(depth) + 1;
    total.zero_count.assign(len, 0);
    total.sum_x.assign(len, 0);
    total.sum_x2.assign(len, 0);
    total.tau_hist.assign(len, 0);

    if (workers <= 0) workers = 1;
    std::vector<EstimateReport> parts(static_cast<std::size_t>(workers), total);
    auto run_range = [&](EstimateReport& part, std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t i = begin; i < end; i++) {
            SampledTree tree =
                sample_tree(offspring, sampler, depth, derive_seed(seed, i), node_guard);
            std::vector<std::int64_t> a = eval_trajectory(tree, depth);
            int tau = -1;
            for (std::size_t m = 0; m < len; m++) {
                std::uint64_t x = static_cast<std::uint64_t>(a[m]);
                part.zero_count[m] += (x == 0);
                part.sum_x[m] += x;
                part.sum_x2[m] += x * x;
                if (tau < 0 && x > 0) tau = static_cast<int>(m);
            }
            if (tau >= 0)
                part.tau_hist[static_cast<std::size_t>(tau)]++;
            else
                part.tau_censored++;
        }
    };

    if (workers == 1) {
        run_range(parts[0], 0, trials);
    } else {
        std::vector<std::thread> pool;
        std::uint64_t chunk = trials / static_cast<std::uint64_t>(workers);
        for (int w = 0; w < workers; w++) {
            std::uint64_t begin = chunk * static_cast<std::uint64_t>(w);
            std::uint64_t end = (w == workers - 1) ? trials : begin + chunk;
            pool.emplace_back(run_range, std::ref(parts[static_cast<std::size_t>(w)]), begin,
                              end);
        }
        for (auto& th : pool) th.join();
    }

    for (const EstimateReport& part : parts) {
        for (std::size_t m = 0; m < len; m++) {
            total.zero_count[m] += part.zero_count[m];
            total.sum_x[m] += part.sum_x[m];
            total.sum_x2[m] += part.sum_x2[m];
            total.tau_hist[m] += part.tau_hist[m];
        }
        total.tau_censored += part.tau_censored;
    }
    return total;
}

}  // namespace treepark
