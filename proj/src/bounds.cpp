#include "treepark/bounds.hpp"

#include <json.hpp>

#include <atomic>
#include <thread>

namespace treepark {

namespace {

mpz_class pow_z(long base, unsigned e) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(base), e);
    return r;
}

}  // namespace

CertifyOutcome certify_upper(int d, const ArrivalSpec& arrival, int depth, Backend backend,
                             unsigned scale, std::size_t support_guard) {
    if (d < 2) throw ConfigError("certification needs d >= 2");
    if (arrival.poisson) throw ConfigError("certification needs a finite arrival pmf");
    const Rational alpha = arrival.pmf.mean;
    ModelConfig cfg;
    cfg.d = d;
    cfg.arrival = arrival;
    cfg.depth = depth;
    cfg.backend = backend;
    cfg.scale = scale;
    cfg.support_guard = support_guard;
    cfg.exact_depth_cap = depth;
    cfg.q_only = true;

    Rational g;
    if (backend == Backend::fixed) {
        Rational back = FixedDec::from_rational_floor(alpha, scale).to_rational();
        if (back != alpha)
            throw ConfigError("alpha " + rational_to_string(alpha) +
                              " is not exactly representable at scale " + std::to_string(scale));
        g = run<FixedDec>(cfg).g_n.to_rational();
    } else {
        g = run<Rational>(cfg).g_n;
    }

    CertifyOutcome out;
    out.margin = g - big_f(alpha, d);
    out.certified = out.margin > 0;
    if (out.certified) {
        BoundCertificate c;
        c.kind = "upper";
        c.method = "gf-criterion";
        c.d = d;
        c.arrival = arrival.spec;
        c.alpha = alpha;
        c.depth = depth;
        c.scale = backend == Backend::fixed ? static_cast<int>(scale) : -1;
        c.margin = out.margin;
        out.cert = std::move(c);
    }
    return out;
}

CertifyOutcome replay(const BoundCertificate& cert) {
    if (cert.method != "gf-criterion")
        throw ConfigError("only gf-criterion certificates are replayed through the engine");
    ArrivalSpec arrival = parse_arrival(cert.arrival);
    Backend backend = cert.scale >= 0 ? Backend::fixed : Backend::rational;
    unsigned scale = cert.scale >= 0 ? static_cast<unsigned>(cert.scale) : 0u;
    return certify_upper(cert.d, arrival, cert.depth, backend, scale);
}

SearchResult search_upper(int d, const std::string& arrival_kind, int depth, Backend backend,
                          unsigned scale, const Rational& grid_start, const Rational& grid_stop,
                          const Rational& grid_step, int workers) {
    if (grid_step <= 0) throw ConfigError("grid step must be positive");
    if (arrival_kind != "two" && arrival_kind != "three")
        throw ConfigError("search varies alpha over the named families two/three only");
    std::vector<Rational> grid;
    for (Rational a = grid_start; a <= grid_stop; a += grid_step) grid.push_back(a);

    SearchResult result;
    result.rows.resize(grid.size());
    if (grid.empty()) return result;

    if (workers <= 0)
        workers = static_cast<int>(std::min<std::size_t>(
            grid.size(), std::max(1u, std::thread::hardware_concurrency())));

    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = cursor.fetch_add(1);
            if (i >= grid.size()) return;
            ArrivalSpec spec =
                parse_arrival(arrival_kind + ":" + rational_to_string(grid[i]));
            CertifyOutcome o = certify_upper(d, spec, depth, backend, scale);
            result.rows[i] = SearchRow{grid[i], o.certified, o.margin};
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < workers; t++) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    for (const SearchRow& row : result.rows) {
        if (row.certified) {
            BoundCertificate c;
            c.kind = "upper";
            c.method = "gf-criterion";
            c.d = d;
            c.arrival = arrival_kind + ":" + rational_to_string(row.alpha);
            c.alpha = row.alpha;
            c.depth = depth;
            c.scale = backend == Backend::fixed ? static_cast<int>(scale) : -1;
            c.margin = row.margin;
            result.best = std::move(c);
            break;
        }
    }
    return result;
}

Rational lower_bound_count(int d, const Rational& growth, unsigned digits) {
    if (d < 2) throw ConfigError("lower bound needs d >= 2");
    if (growth <= 0) throw ConfigError("growth constant must be positive");
    // Terms (2 growth)^n (p(1-p))^(n/2) are summable when p(1-p) < 1/(4 g^2),
    // i.e. p below 1/2 - sqrt(g^2 - 1)/(2 g). Rounding the root upward keeps
    // the returned alpha = 2p on the safe side.
    Rational g2 = growth * growth;
    if (g2 <= 1) throw ConfigError("growth constant must exceed 1");
    Rational root = sqrt_upper(g2 - 1, digits);
    Rational alpha = 1 - root / growth;
    if (alpha < 0) alpha = 0;
    return alpha;
}

Rational default_growth(int d) {
    if (d < 2) throw ConfigError("growth defaults need d >= 2");
    if (d == 2) return Rational(4);
    // e < 2.7182818284590452354
    Rational e_up(mpz_class("27182818284590452354"), pow_z(10, 19));
    e_up.canonicalize();
    return e_up * d;
}

Rational generalized_catalan_growth(int d) {
    if (d < 2) throw ConfigError("growth defaults need d >= 2");
    Rational g(pow_z(d, static_cast<unsigned>(d)), pow_z(d - 1, static_cast<unsigned>(d - 1)));
    g.canonicalize();
    return g;
}

Rational upper_bound_percolation(int d, int k) {
    if (d < 2) throw ConfigError("percolation bound needs d >= 2");
    if (k < 2) throw ConfigError("percolation bound needs an arrival atom k >= 2");
    Rational r(mpz_class(k), pow_z(d, static_cast<unsigned>(k)));
    r.canonicalize();
    return r;
}

BoundCertificate lower_bound_certificate(int d, const Rational& growth, unsigned digits) {
    BoundCertificate c;
    c.kind = "lower";
    c.method = "catalan-count";
    c.d = d;
    c.arrival = "two:alpha";
    c.alpha = lower_bound_count(d, growth, digits);
    c.margin = Rational(1) - (growth * growth) * 4 * (c.alpha / 2) * (1 - c.alpha / 2);
    return c;
}

BoundCertificate percolation_certificate(int d, int k) {
    BoundCertificate c;
    c.kind = "upper";
    c.method = "percolation";
    c.d = d;
    c.arrival = std::to_string(k) + ":alpha/" + std::to_string(k);
    c.alpha = upper_bound_percolation(d, k);
    c.margin = 0;
    return c;
}

std::string certificate_to_json(const BoundCertificate& cert) {
    nlohmann::json j;
    j["kind"] = cert.kind;
    j["method"] = cert.method;
    j["d"] = cert.d;
    j["arrival"] = cert.arrival;
    j["alpha"] = rational_to_string(cert.alpha);
    if (cert.depth >= 0) j["n"] = cert.depth;
    if (cert.scale >= 0) j["scale"] = cert.scale;
    j["margin"] = decimal_floor_string(cert.margin, 400);
    return j.dump(2) + "\n";
}

namespace {

Rational parse_number_field(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return parse_decimal(s);
    Rational r(mpz_class(s.substr(0, slash)), mpz_class(s.substr(slash + 1)));
    r.canonicalize();
    return r;
}

}  // namespace

BoundCertificate certificate_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    BoundCertificate c;
    c.kind = j.at("kind").get<std::string>();
    c.method = j.at("method").get<std::string>();
    c.d = j.at("d").get<int>();
    c.arrival = j.at("arrival").get<std::string>();
    c.alpha = parse_number_field(j.at("alpha").get<std::string>());
    c.depth = j.value("n", -1);
    c.scale = j.value("scale", -1);
    c.margin = parse_number_field(j.at("margin").get<std::string>());
    return c;
}

}  // namespace treepark
