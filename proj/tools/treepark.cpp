#include "treepark/bounds.hpp"
#include "treepark/icx.hpp"
#include "treepark/montecarlo.hpp"
#include "treepark/recursion.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <algorithm>
#include <map>
#include <set>

using namespace treepark;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRefusal = 3;
constexpr int kExitIcxViolation = 4;
constexpr int kExitGuard = 5;

struct Ctx {
    std::string out = ".";
};

std::string out_path(const Ctx& ctx, const std::string& name) {
    std::filesystem::create_directories(ctx.out);
    return (std::filesystem::path(ctx.out) / name).string();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path);
    f << content;
}

void write_manifest(const Ctx& ctx, const std::string& command,
                    const std::map<std::string, std::string>& config) {
    json j;
    j["command"] = command;
    j["config"] = config;
    j["versions"] = {{"treepark", kVersion}, {"gmp", gmp_version}};
    write_file(out_path(ctx, command + ".manifest.json"), j.dump(2) + "\n");
}

std::string sci(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

/// Short human-readable magnitude for console lines; artifacts carry the
/// exact value.
std::string magnitude(const Rational& q) {
    double v = q.get_d();
    if (v != 0.0 || q == 0) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6e", v);
        return buf;
    }
    return (q > 0 ? std::string("+10^") : std::string("-10^")) +
           std::to_string(static_cast<long long>(
               mpz_sizeinbase(q.get_num().get_mpz_t(), 10)) -
           static_cast<long long>(mpz_sizeinbase(q.get_den().get_mpz_t(), 10)));
}

/// Flat `key = value` lines (quotes around the value optional, # comments).
std::vector<std::pair<std::string, std::string>> read_flat_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file " + path);
    std::vector<std::pair<std::string, std::string>> kv;
    std::string line;
    auto trim = [](std::string s) {
        std::size_t b = s.find_first_not_of(" \t\r");
        std::size_t e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(f, line)) {
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == '[') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line is not key = value: \"" + t + "\"");
        std::string key = trim(t.substr(0, eq)), value = trim(t.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        kv.emplace_back(key, value);
    }
    return kv;
}

/// Splices --config FILE into ordinary flags; flags given explicitly win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    auto it = std::find(args.begin(), args.end(), "--config");
    if (it == args.end()) return args;
    if (it + 1 == args.end()) throw ConfigError("--config needs a file path");
    std::string path = *(it + 1);
    args.erase(it, it + 2);
    std::set<std::string> given;
    for (const std::string& a : args)
        if (a.rfind("--", 0) == 0) given.insert(a);
    std::vector<std::string> extra;
    for (const auto& [key, value] : read_flat_config(path)) {
        if (given.count("--" + key)) continue;
        extra.push_back("--" + key);
        extra.push_back(value);
    }
    if (args.empty() || args[0].rfind("--", 0) == 0) {
        args.insert(args.end(), extra.begin(), extra.end());
    } else {
        args.insert(args.begin() + 1, extra.begin(), extra.end());
    }
    return args;
}

Backend parse_backend(const std::string& s) {
    if (s == "fixed") return Backend::fixed;
    if (s == "rational") return Backend::rational;
    throw ConfigError("backend must be fixed or rational, got \"" + s + "\"");
}

std::vector<Rational> alpha_grid(const std::string& start, const std::string& stop,
                                 const std::string& step) {
    Rational a = parse_decimal(start), b = parse_decimal(stop), s = parse_decimal(step);
    if (s <= 0) throw ConfigError("alpha-step must be positive");
    std::vector<Rational> grid;
    for (Rational x = a; x <= b; x += s) grid.push_back(x);
    return grid;
}

struct ModelFlags {
    int d = 2;
    std::string arrival;
    int depth = 20;
    std::string backend = "fixed";
    unsigned scale = 200;
    std::size_t guard = 1'000'000;
    int exact_cap = 14;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f, bool arrival_required) {
    cmd->add_option("--d", f.d, "children per vertex (deterministic tree)");
    auto* arr = cmd->add_option("--arrival", f.arrival,
                                "arrival law: two:<a> | three:<a> | pmf:<k:w,...>");
    if (arrival_required) arr->required();
    cmd->add_option("--depth", f.depth, "recursion depth n");
    cmd->add_option("--backend", f.backend, "fixed | rational");
    cmd->add_option("--scale", f.scale, "fixed-point decimal digits");
    cmd->add_option("--support-guard", f.guard, "hard cap on distribution support");
    cmd->add_option("--exact-depth-cap", f.exact_cap,
                    "full exact laws beyond this depth must be asked for explicitly");
}

ModelConfig to_config(const ModelFlags& f) {
    ModelConfig cfg;
    cfg.d = f.d;
    if (!f.arrival.empty()) cfg.arrival = parse_arrival(f.arrival);
    cfg.depth = f.depth;
    cfg.backend = parse_backend(f.backend);
    cfg.scale = f.scale;
    cfg.support_guard = f.guard;
    cfg.exact_depth_cap = f.exact_cap;
    return cfg;
}

std::map<std::string, std::string> model_config_map(const ModelFlags& f) {
    return {{"d", std::to_string(f.d)},
            {"arrival", f.arrival},
            {"depth", std::to_string(f.depth)},
            {"backend", f.backend},
            {"scale", std::to_string(f.scale)},
            {"support-guard", std::to_string(f.guard)},
            {"exact-depth-cap", std::to_string(f.exact_cap)}};
}

struct GridFlags {
    std::string kind;
    std::string start = "0", stop = "0", step = "0.005";
};

void add_grid_flags(CLI::App* cmd, GridFlags& g) {
    cmd->add_option("--arrival-kind", g.kind, "two | three (grid mode)");
    cmd->add_option("--alpha-start", g.start, "");
    cmd->add_option("--alpha-stop", g.stop, "");
    cmd->add_option("--alpha-step", g.step, "");
}

std::vector<std::string> arrival_specs(const ModelFlags& flags, const GridFlags& grid) {
    std::vector<std::string> specs;
    if (!flags.arrival.empty()) specs.push_back(flags.arrival);
    if (!grid.kind.empty())
        for (const Rational& a : alpha_grid(grid.start, grid.stop, grid.step))
            specs.push_back(grid.kind + ":" + rational_to_string(a));
    if (specs.empty()) throw ConfigError("need --arrival or an --arrival-kind alpha grid");
    return specs;
}

std::map<std::string, std::string> grid_config_map(const ModelFlags& f, const GridFlags& g) {
    auto m = model_config_map(f);
    m["arrival-kind"] = g.kind;
    m["alpha-start"] = g.start;
    m["alpha-stop"] = g.stop;
    m["alpha-step"] = g.step;
    return m;
}

std::string q_value_string(const ModelConfig& cfg, const Rational& q) {
    if (cfg.backend == Backend::fixed)
        return FixedDec::from_rational_floor(q, cfg.scale).to_string();
    return rational_to_string(q);
}

int cmd_qn_table(const Ctx& ctx, const ModelFlags& flags, const GridFlags& grid) {
    std::string csv = "alpha,n,q_n\n";
    for (const std::string& spec : arrival_specs(flags, grid)) {
        ModelFlags f = flags;
        f.arrival = spec;
        ModelConfig cfg = to_config(f);
        std::string alpha = rational_to_string(cfg.arrival.pmf.mean);
        std::vector<Rational> q = q_sequence(cfg);
        for (std::size_t n = 0; n < q.size(); n++)
            csv += alpha + "," + std::to_string(n) + "," + q_value_string(cfg, q[n]) + "\n";
    }
    write_file(out_path(ctx, "qn_table.csv"), csv);
    write_manifest(ctx, "qn-table", grid_config_map(flags, grid));
    return kExitOk;
}

int cmd_ex_table(const Ctx& ctx, const ModelFlags& flags, const GridFlags& grid) {
    std::string csv = "alpha,n,ex_n,ratio_lambda_n\n";
    for (const std::string& spec : arrival_specs(flags, grid)) {
        ModelFlags f = flags;
        f.arrival = spec;
        ModelConfig cfg = to_config(f);
        std::string alpha = rational_to_string(cfg.arrival.pmf.mean);
        std::vector<Rational> q = q_sequence(cfg);
        std::vector<Rational> ex = ex_from_q(q, cfg.arrival.pmf.mean, cfg.d);
        Rational lam_pow(1);
        for (std::size_t n = 0; n < ex.size(); n++) {
            csv += alpha + "," + std::to_string(n) + "," + rational_to_string(ex[n]) + "," +
                   rational_to_string(ex[n] / lam_pow) + "\n";
            lam_pow *= cfg.d;
        }
    }
    write_file(out_path(ctx, "ex_table.csv"), csv);
    write_manifest(ctx, "ex-table", grid_config_map(flags, grid));
    return kExitOk;
}

json certificate_json(const BoundCertificate& c) {
    json j;
    j["kind"] = c.kind;
    j["method"] = c.method;
    j["d"] = c.d;
    j["arrival"] = c.arrival;
    j["alpha"] = rational_to_string(c.alpha);
    if (c.depth >= 0) j["n"] = c.depth;
    if (c.scale >= 0) j["scale"] = c.scale;
    j["margin"] = decimal_floor_string(c.margin, 400);
    return j;
}

int cmd_bound_upper(const Ctx& ctx, const ModelFlags& flags) {
    ModelConfig cfg = to_config(flags);
    CertifyOutcome out =
        certify_upper(cfg.d, cfg.arrival, cfg.depth, cfg.backend, cfg.scale, cfg.support_guard);
    write_manifest(ctx, "bound-upper", model_config_map(flags));
    if (!out.certified) {
        json j;
        j["kind"] = "refusal";
        j["method"] = "gf-criterion";
        j["d"] = cfg.d;
        j["arrival"] = flags.arrival;
        j["alpha"] = rational_to_string(cfg.arrival.pmf.mean);
        j["n"] = cfg.depth;
        if (cfg.backend == Backend::fixed) j["scale"] = cfg.scale;
        j["margin"] = decimal_floor_string(out.margin);
        j["note"] = "inconclusive at this depth; not a disproof";
        write_file(out_path(ctx, "refusal.json"), j.dump(2) + "\n");
        std::cerr << "refusal: margin " << magnitude(out.margin) << " <= 0 at n="
                  << cfg.depth << "\n";
        return kExitRefusal;
    }
    write_file(out_path(ctx, "certificate.json"), certificate_json(*out.cert).dump(2) + "\n");
    std::cout << "certified alpha_c(" << cfg.d << ") < " << rational_to_string(out.cert->alpha)
              << " (margin " << magnitude(out.margin) << ")\n";
    return kExitOk;
}

int cmd_bound_search(const Ctx& ctx, const ModelFlags& flags, const GridFlags& grid,
                     int workers) {
    ModelConfig cfg = to_config(flags);
    SearchResult res = search_upper(cfg.d, grid.kind, cfg.depth, cfg.backend, cfg.scale,
                                    parse_decimal(grid.start), parse_decimal(grid.stop),
                                    parse_decimal(grid.step), workers);
    std::string csv = "alpha,certified,margin\n";
    for (const SearchRow& row : res.rows)
        csv += rational_to_string(row.alpha) + "," + (row.certified ? "1" : "0") + "," +
               decimal_floor_string(row.margin) + "\n";
    write_file(out_path(ctx, "search.csv"), csv);
    auto m = grid_config_map(flags, grid);
    m["workers"] = std::to_string(workers);
    write_manifest(ctx, "bound-search", m);
    if (res.best) {
        write_file(out_path(ctx, "best_certificate.json"),
                   certificate_json(*res.best).dump(2) + "\n");
        std::cout << "best certified alpha: " << rational_to_string(res.best->alpha) << "\n";
        return kExitOk;
    }
    std::cerr << "no grid point certified\n";
    return kExitRefusal;
}

int cmd_bound_lower(const Ctx& ctx, int d, const std::string& growth_str, bool catalan,
                    unsigned digits) {
    Rational growth = growth_str.empty()
                          ? (catalan ? generalized_catalan_growth(d) : default_growth(d))
                          : parse_decimal(growth_str);
    BoundCertificate c = lower_bound_certificate(d, growth, digits);
    json j = certificate_json(c);
    j["growth"] = rational_to_string(growth);
    j["alpha"] = decimal_floor_string(c.alpha, digits);
    write_file(out_path(ctx, "bound_lower.json"), j.dump(2) + "\n");
    write_manifest(ctx, "bound-lower",
                   {{"d", std::to_string(d)},
                    {"growth", growth_str},
                    {"catalan", catalan ? "1" : ""},
                    {"digits", std::to_string(digits)}});
    std::cout << "alpha_c(" << d << ") > " << decimal_floor_string(c.alpha, 12) << "\n";
    return kExitOk;
}

int cmd_bound_percolation(const Ctx& ctx, int d, int k) {
    BoundCertificate c = percolation_certificate(d, k);
    write_file(out_path(ctx, "bound_percolation.json"), certificate_json(c).dump(2) + "\n");
    write_manifest(ctx, "bound-percolation",
                   {{"d", std::to_string(d)}, {"k", std::to_string(k)}});
    std::cout << "alpha_c(" << d << ") <= " << rational_to_string(c.alpha) << " for the " << k
              << "-atom arrival family\n";
    return kExitOk;
}

int cmd_simulate(const Ctx& ctx, const std::string& offspring_str,
                 const std::string& arrival_str, int depth, std::uint64_t trials,
                 std::uint64_t seed, int workers) {
    OffspringLaw offspring = parse_offspring(offspring_str);
    ArrivalSpec arrival = parse_arrival(arrival_str);
    EstimateReport rep = estimate(offspring, arrival, depth, trials, seed, workers);
    std::string csv = "n,trials,q_hat,q_se,ex_hat,ex_se\n";
    for (int n = 0; n <= depth; n++)
        csv += std::to_string(n) + "," + std::to_string(trials) + "," + sci(rep.q_hat(n)) + "," +
               sci(rep.q_se(n)) + "," + sci(rep.ex_hat(n)) + "," + sci(rep.ex_se(n)) + "\n";
    write_file(out_path(ctx, "simulate.csv"), csv);
    std::string tau = "m,count\n";
    for (std::size_t m = 0; m < rep.tau_hist.size(); m++)
        tau += std::to_string(m) + "," + std::to_string(rep.tau_hist[m]) + "\n";
    tau += "censored," + std::to_string(rep.tau_censored) + "\n";
    write_file(out_path(ctx, "tau_hist.csv"), tau);
    json extra;
    extra["lambda"] = sci(rep.lambda);
    extra["e_lambda_tau_truncated"] = sci(rep.e_lambda_tau());
    extra["e_lambda_tau_remainder_bound"] = sci(rep.e_lambda_tau_remainder());
    write_file(out_path(ctx, "tau_transform.json"), extra.dump(2) + "\n");
    write_manifest(ctx, "simulate",
                   {{"offspring", offspring_str},
                    {"arrival", arrival_str},
                    {"depth", std::to_string(depth)},
                    {"trials", std::to_string(trials)},
                    {"seed", std::to_string(seed)},
                    {"workers", std::to_string(workers)}});
    return kExitOk;
}

int cmd_oracle_check(const Ctx& ctx, std::uint64_t instances, std::uint64_t seed, int max_depth,
                     int tie_seeds) {
    std::uint64_t mismatches = 0;
    Rng meta(derive_seed(seed, 0xACEull));
    for (std::uint64_t i = 0; i < instances; i++) {
        int depth = 1 + static_cast<int>(meta.below(static_cast<std::uint64_t>(max_depth)));
        int z_max = 1 + static_cast<int>(meta.below(3));
        double pz = 0.3 + 0.4 * meta.u01();
        OffspringLaw off = OffspringLaw::from_pmf({{0, 1.0 - pz}, {z_max, pz}});
        ArrivalSpec arr = parse_arrival("pmf:0:0.4,1:0.3,2:0.2,3:0.1");
        SampledTree tree = sample_tree(off, ArrivalSampler(arr), depth, derive_seed(seed, i));
        for (int n = 0; n <= depth; n++) {
            std::int64_t ref = eval_parking(tree, n);
            for (int s = 0; s < tie_seeds; s++)
                if (simulate_stepwise(tree, n, derive_seed(seed ^ 0xBEEF, i * 131 + s)) != ref)
                    mismatches++;
        }
    }
    std::string csv = "instances,mismatches\n" + std::to_string(instances) + "," +
                      std::to_string(mismatches) + "\n";
    write_file(out_path(ctx, "oracle_check.csv"), csv);
    write_manifest(ctx, "oracle-check",
                   {{"instances", std::to_string(instances)},
                    {"seed", std::to_string(seed)},
                    {"max-depth", std::to_string(max_depth)},
                    {"tie-seeds", std::to_string(tie_seeds)}});
    if (mismatches > 0) {
        std::cerr << mismatches << " mismatches between the stepwise simulation and the "
                  << "bottom-up evaluation\n";
        return 1;
    }
    std::cout << "stepwise simulation matches bottom-up evaluation on " << instances
              << " instances\n";
    return kExitOk;
}

int cmd_icx_check(const Ctx& ctx, int d, const std::string& arrival_a,
                  const std::string& arrival_b, int depth, int exact_cap) {
    ModelConfig a, b;
    a.d = b.d = d;
    a.backend = b.backend = Backend::rational;
    a.exact_depth_cap = b.exact_depth_cap = exact_cap;
    a.arrival = parse_arrival(arrival_a);
    b.arrival = parse_arrival(arrival_b);
    std::vector<IcxReport> reports = icx_compare_parking(a, b, depth);
    std::string csv = "depth,t,margin\n";
    for (std::size_t n = 0; n < reports.size(); n++)
        for (std::size_t t = 0; t < reports[n].margins.size(); t++)
            csv += std::to_string(n) + "," + std::to_string(t) + "," +
                   rational_to_string(reports[n].margins[t]) + "\n";
    write_file(out_path(ctx, "icx_check.csv"), csv);
    write_manifest(ctx, "icx-check",
                   {{"d", std::to_string(d)},
                    {"arrival-a", arrival_a},
                    {"arrival-b", arrival_b},
                    {"depth", std::to_string(depth)},
                    {"exact-depth-cap", std::to_string(exact_cap)}});
    for (std::size_t n = 0; n < reports.size(); n++) {
        if (!reports[n].dominated) {
            std::cerr << "increasing-convex order violated at depth " << n
                      << ", t=" << reports[n].violated_at << "\n";
            return kExitIcxViolation;
        }
    }
    std::cout << "dominated at every depth 0.." << depth << "\n";
    return kExitOk;
}

int cmd_verify_identities(const Ctx& ctx, const ModelFlags& flags) {
    ModelFlags f = flags;
    f.backend = "rational";
    ModelConfig cfg = to_config(f);
    const Rational alpha = cfg.arrival.pmf.mean;
    Rational p_eta0(0);
    for (const auto& [k, v] : cfg.arrival.pmf.atoms)
        if (k == 0) p_eta0 = v;

    RecursionState<Rational> st = init_state<Rational>(cfg);
    std::vector<Rational> ex_law = {*st.ex_n};
    std::vector<Rational> le1 = {mass_at(st.law_x, 0) + mass_at(st.law_x, 1)};
    for (int n = 1; n <= cfg.depth; n++) {
        step(st, cfg);
        ex_law.push_back(*st.ex_n);
        le1.push_back(mass_at(st.law_x, 0) + mass_at(st.law_x, 1));
    }
    std::vector<Rational> ex_rec = ex_from_q(st.q, alpha, cfg.d);

    bool all_ok = true;
    std::string csv = "check,n,residual,pass\n";
    auto row = [&](const std::string& name, int n, const Rational& residual) {
        bool ok = residual == 0;
        all_ok = all_ok && ok;
        csv += name + "," + std::to_string(n) + "," + decimal_floor_string(residual, 40) + "," +
               (ok ? "1" : "0") + "\n";
    };
    for (int n = 1; n <= cfg.depth; n++) {
        std::size_t un = static_cast<std::size_t>(n);
        row("one-step-recursion", n, ex_law[un] - ex_rec[un]);
        std::vector<Rational> q_prefix(st.q.begin(), st.q.begin() + n);
        row("closed-form", n,
            ex_law[un] - ex_closed_form(g_from_q(q_prefix, cfg.d), alpha, cfg.d, n));
        Rational pw = 1;
        for (int i = 0; i < cfg.d; i++) pw *= le1[un - 1];
        row("q-product-form", n, st.q[un] - p_eta0 * pw);
    }
    TauTransform tt = tau_transform(st.q, cfg.d);
    Rational lam_ratio = Rational(cfg.d) / Rational(cfg.d - 1);
    mpz_class lam_pow;
    mpz_ui_pow_ui(lam_pow.get_mpz_t(), static_cast<unsigned long>(cfg.d),
                  static_cast<unsigned>(cfg.depth + 1));
    Rational tail(1, lam_pow);
    tail.canonicalize();
    row("g-tau-identity", cfg.depth,
        g_from_q(st.q, cfg.d) - lam_ratio * (1 - tt.truncated - tail * st.q.back()));
    Rational resid = stationary_ex_residual(ex_law.back(), st.q.back(), alpha, cfg.d);
    csv += "stationary-ex-residual," + std::to_string(cfg.depth) + "," +
           decimal_floor_string(resid, 40) + ",\n";

    write_file(out_path(ctx, "identities.csv"), csv);
    write_manifest(ctx, "verify-identities", model_config_map(f));
    if (!all_ok) {
        std::cerr << "an exact identity failed; see identities.csv\n";
        return 1;
    }
    std::cout << "exact identities hold through depth " << cfg.depth << "\n";
    return kExitOk;
}

int run_command(const std::vector<std::string>& args);

int cmd_replay(const std::string& manifest_path, const std::string& out_override) {
    std::ifstream f(manifest_path);
    if (!f) throw ConfigError("cannot read manifest " + manifest_path);
    json j = json::parse(f);
    std::vector<std::string> args;
    args.push_back(j.at("command").get<std::string>());
    for (const auto& [key, value] : j.at("config").items()) {
        std::string v = value.get<std::string>();
        if (v.empty()) continue;
        args.push_back("--" + key);
        args.push_back(v);
    }
    if (!out_override.empty()) {
        args.push_back("--out");
        args.push_back(out_override);
    }
    return run_command(args);
}

int run_command(const std::vector<std::string>& raw_args) {
    std::vector<std::string> args = expand_config(raw_args);
    CLI::App app{"parking process on d-ary and Galton-Watson trees: exact and certified "
                 "arrival distributions, threshold certificates, Monte Carlo"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Ctx ctx;
    const char* env_out = std::getenv("TREEPARK_OUT");
    if (env_out != nullptr && *env_out != '\0') ctx.out = env_out;
    app.add_option("--out", ctx.out, "output directory (default $TREEPARK_OUT or .)");
    app.footer("Every command also accepts --config FILE with flat key = value lines\n"
               "mirroring its flags; flags given on the command line win.");

    ModelFlags qn_flags;
    GridFlags qn_grid;
    auto* qn = app.add_subcommand("qn-table", "q_n = P(X_n = 0) per alpha and depth");
    add_model_flags(qn, qn_flags, false);
    add_grid_flags(qn, qn_grid);
    qn->add_option("--out", ctx.out, "output directory");

    ModelFlags ex_flags;
    GridFlags ex_grid;
    auto* ex = app.add_subcommand("ex-table", "EX_n and EX_n/lambda^n per alpha and depth");
    add_model_flags(ex, ex_flags, false);
    add_grid_flags(ex, ex_grid);
    ex->add_option("--out", ctx.out, "output directory");

    ModelFlags bu_flags;
    auto* bu = app.add_subcommand("bound-upper", "certify alpha > alpha_c via the g-F margin");
    add_model_flags(bu, bu_flags, true);
    bu->add_option("--out", ctx.out, "output directory");

    ModelFlags bs_flags;
    GridFlags bs_grid;
    bs_grid.kind = "two";
    bs_grid.start = "0.05";
    bs_grid.stop = "0.2";
    int bs_workers = 0;
    auto* bs = app.add_subcommand("bound-search", "smallest grid alpha that certifies");
    add_model_flags(bs, bs_flags, false);
    add_grid_flags(bs, bs_grid);
    bs->add_option("--workers", bs_workers, "0 = hardware concurrency");
    bs->add_option("--out", ctx.out, "output directory");

    int bl_d = 2;
    std::string bl_growth;
    bool bl_catalan = false;
    unsigned bl_digits = 40;
    auto* bl = app.add_subcommand("bound-lower", "subgraph-counting lower bound on alpha_c");
    bl->add_option("--d", bl_d, "");
    bl->add_option("--growth", bl_growth, "per-n subgraph growth (default 4 at d=2, e*d else)");
    bl->add_flag("--catalan", bl_catalan, "use the sharper d^d/(d-1)^(d-1) growth");
    bl->add_option("--digits", bl_digits, "precision of the root extraction");
    bl->add_option("--out", ctx.out, "output directory");

    int bp_d = 2, bp_k = 2;
    auto* bp = app.add_subcommand("bound-percolation",
                                  "upper bound k d^-k for the k-atom arrival family");
    bp->add_option("--d", bp_d, "");
    bp->add_option("--k", bp_k, "arrival atom (2 or 3 in the named families)");
    bp->add_option("--out", ctx.out, "output directory");

    std::string sim_off = "det:2", sim_arr;
    int sim_depth = 10, sim_workers = 1;
    std::uint64_t sim_trials = 10000, sim_seed = 1;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo estimates of q_n, EX_n, tau");
    sim->add_option("--offspring", sim_off, "det:<d> | poisson:<mean> | pmf:<k:w,...>");
    sim->add_option("--arrival", sim_arr, "")->required();
    sim->add_option("--depth", sim_depth, "");
    sim->add_option("--trials", sim_trials, "");
    sim->add_option("--seed", sim_seed, "");
    sim->add_option("--workers", sim_workers, "");
    sim->add_option("--out", ctx.out, "output directory");

    std::uint64_t oc_instances = 1000, oc_seed = 1;
    int oc_depth = 5, oc_ties = 3;
    auto* oc =
        app.add_subcommand("oracle-check", "stepwise car simulation vs bottom-up evaluation");
    oc->add_option("--instances", oc_instances, "");
    oc->add_option("--seed", oc_seed, "");
    oc->add_option("--max-depth", oc_depth, "");
    oc->add_option("--tie-seeds", oc_ties, "");
    oc->add_option("--out", ctx.out, "output directory");

    int icx_d = 2, icx_depth = 10, icx_cap = 14;
    std::string icx_a, icx_b;
    auto* icx =
        app.add_subcommand("icx-check", "increasing-convex dominance of the X_n laws, exact");
    icx->add_option("--d", icx_d, "");
    icx->add_option("--arrival-a", icx_a, "")->required();
    icx->add_option("--arrival-b", icx_b, "")->required();
    icx->add_option("--depth", icx_depth, "");
    icx->add_option("--exact-depth-cap", icx_cap, "");
    icx->add_option("--out", ctx.out, "output directory");

    ModelFlags vi_flags;
    vi_flags.depth = 10;
    auto* vi = app.add_subcommand("verify-identities",
                                  "exact expectation and q identities along the recursion");
    add_model_flags(vi, vi_flags, true);
    vi->add_option("--out", ctx.out, "output directory");

    std::string rp_manifest, rp_out;
    auto* rp = app.add_subcommand("replay", "re-run a command from its manifest");
    rp->add_option("manifest", rp_manifest, "manifest json path")->required();
    rp->add_option("--out", rp_out, "override output directory");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << e.what() << "\n";
        return kExitConfig;
    }

    if (qn->parsed()) return cmd_qn_table(ctx, qn_flags, qn_grid);
    if (ex->parsed()) return cmd_ex_table(ctx, ex_flags, ex_grid);
    if (bu->parsed()) return cmd_bound_upper(ctx, bu_flags);
    if (bs->parsed()) return cmd_bound_search(ctx, bs_flags, bs_grid, bs_workers);
    if (bl->parsed()) return cmd_bound_lower(ctx, bl_d, bl_growth, bl_catalan, bl_digits);
    if (bp->parsed()) return cmd_bound_percolation(ctx, bp_d, bp_k);
    if (sim->parsed())
        return cmd_simulate(ctx, sim_off, sim_arr, sim_depth, sim_trials, sim_seed, sim_workers);
    if (oc->parsed()) return cmd_oracle_check(ctx, oc_instances, oc_seed, oc_depth, oc_ties);
    if (icx->parsed()) return cmd_icx_check(ctx, icx_d, icx_a, icx_b, icx_depth, icx_cap);
    if (vi->parsed()) return cmd_verify_identities(ctx, vi_flags);
    if (rp->parsed()) return cmd_replay(rp_manifest, rp_out);
    return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return run_command(args);
    } catch (const GuardError& e) {
        std::cerr << "resource guard: " << e.what() << "\n";
        return kExitGuard;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
