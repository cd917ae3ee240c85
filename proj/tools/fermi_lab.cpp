// fermi_lab: experiment runner for the fermionic weak-coupling toolkit.
#include "checks.hpp"

#include "fermi/dyson.hpp"
#include "fermi/limit.hpp"
#include "fermi/wick.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <regex>

using namespace fermi;

namespace {

constexpr int kPass = 0, kInvariant = 1, kConfig = 2;

struct Globals {
    std::string config_path, out_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> tolerance;
    int threads = 0;
    bool append = false;
};

/// Output sink: --out file (optionally appended to) or stdout.
class Sink {
public:
    explicit Sink(const Globals& g) {
        if (g.out_path.empty()) return;
        fresh_ = !(g.append && std::filesystem::exists(g.out_path) && std::filesystem::file_size(g.out_path) > 0);
        file_.open(g.out_path, g.append ? std::ios::app : std::ios::trunc);
        if (!file_) throw ConfigError("cannot write '" + g.out_path + "'");
    }
    std::ostream& os() { return file_.is_open() ? file_ : std::cout; }
    void header(const std::string& h) {
        if (fresh_) os() << h << "\n";
    }

private:
    std::ofstream file_;
    bool fresh_ = true;
};

ExperimentConfig load(const Globals& g) {
    if (g.config_path.empty()) throw ConfigError("--config is required for this subcommand");
    auto cfg = load_config(g.config_path);
    if (g.seed) cfg.run.seed = *g.seed;
    if (g.tolerance) {
        if (!(*g.tolerance > 0)) throw ConfigError("--tolerance must be positive");
        cfg.run.tolerance = *g.tolerance;
    }
    return cfg;
}

std::string csv_quote(const std::string& s) {
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

/// Multi-line normal form joined into one CSV cell.
std::string one_line(const std::string& s) {
    std::string out, line;
    std::istringstream in(s);
    while (std::getline(in, line))
        if (!line.empty()) out += (out.empty() ? "" : " + ") + line;
    return out;
}

std::string num(double x) {
    std::ostringstream os;
    os << std::setprecision(12) << x;
    return os.str();
}

IntegratorOptions integrator(const ExperimentConfig& cfg, const Globals& g) {
    IntegratorOptions o;
    o.scheme = cfg.run.scheme;
    o.rel_tol = cfg.run.tolerance;
    o.samples = cfg.run.samples;
    o.seed = cfg.run.seed;
    o.threads = g.threads;
    return o;
}

/// Bound of the order-n term, or NaN when the constants are unavailable (box profiles).
double bound_or_nan(const DysonTermSpec& s, int n) {
    try {
        return truncation_bound(s, n);
    } catch (const GuardError&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

cplx minus_i_pow(int n) {
    static const cplx p[4] = {1.0, -I, -1.0, I};
    return p[n % 4];
}

int cmd_verify_car(const Globals& g, const std::vector<int>& modes, int trials) {
    Sink out(g);
    out.header("modes,trials,anti_err,create_err,pass,config_hash");
    bool ok = true;
    const std::uint64_t seed = g.seed.value_or(1);
    for (int m : modes) {
        auto r = lab::car_check(m, trials, seed + m);
        const bool pass = r.anti_err <= 1e-12 && r.create_err == 0.0;
        ok = ok && pass;
        out.os() << m << "," << trials << "," << num(r.anti_err) << "," << num(r.create_err) << "," << pass << ",none\n";
    }
    return ok ? kPass : kInvariant;
}

int cmd_wick_check(const Globals& g, const std::string& expr, int modes) {
    std::map<std::string, CVec> vectors;
    std::string hash = "none";
    if (!g.config_path.empty()) {
        auto cfg = load(g);
        vectors = cfg.vectors;
        hash = hash_hex(cfg.hash);
    }
    if (!vectors.empty()) modes = int(vectors.begin()->second.size());
    if (modes < 1 || modes > 12) throw ConfigError("wick-check needs 1 <= modes <= 12");
    // names missing from the table get seeded random vectors
    std::mt19937_64 rng(g.seed.value_or(1));
    static const std::regex name_re(R"(a[+-]\(\s*([A-Za-z_][A-Za-z0-9_]*)\s*\))");
    for (auto it = std::sregex_iterator(expr.begin(), expr.end(), name_re); it != std::sregex_iterator(); ++it)
        if (!vectors.count((*it)[1])) vectors[(*it)[1]] = lab::random_vector(rng, modes);

    const auto w = parse_word(expr, vectors);
    const auto nf = normal_order_word(w);
    ModeSpace space(modes);
    const double err = (dense_normal_form(space, w, nf).entries - dense_word(space, w).entries).cwiseAbs().maxCoeff();
    Sink out(g);
    out.header("expression,normal_form,terms,max_err,pass,config_hash");
    const bool pass = err <= 1e-10;
    out.os() << csv_quote(expr) << "," << csv_quote(one_line(nf.to_string())) << "," << nf.terms.size() << "," << num(err) << ","
             << pass << "," << hash << "\n";
    return pass ? kPass : kInvariant;
}

int cmd_dyson_term(const Globals& g, std::optional<int> order, std::optional<double> lambda) {
    const auto cfg = load(g);
    const int n = order.value_or(cfg.run.order);
    const double lam = lambda.value_or(cfg.run.lambdas.front());
    auto spec = cfg.dyson_spec(n, lam);
    spec.validate();
    const auto r = dyson_term(spec, integrator(cfg, g));
    const cplx v = minus_i_pow(n) * r.value;
    const double b = bound_or_nan(spec, n);
    Sink out(g);
    out.header("n,real,imag,std_err,bound,config_hash");
    out.os() << n << "," << num(v.real()) << "," << num(v.imag()) << "," << num(r.std_err) << "," << num(b) << ","
             << hash_hex(cfg.hash) << "\n";
    return std::isnan(b) || std::abs(v) <= b + 3 * r.std_err ? kPass : kInvariant;
}

int cmd_dyson_sum(const Globals& g, std::optional<double> lambda) {
    const auto cfg = load(g);
    const double lam = lambda.value_or(cfg.run.lambdas.front());
    auto spec = cfg.dyson_spec(0, lam);
    spec.validate();
    const auto r = dyson_partial_sum(spec, cfg.run.N_max, integrator(cfg, g));
    Sink out(g);
    out.header("n,real,imag,std_err,bound,config_hash");
    bool ok = true;
    for (int n = 0; n <= cfg.run.N_max; ++n) {
        const double b = bound_or_nan(spec, n);
        const cplx v = r.per_order[n];
        ok = ok && (std::isnan(b) || std::abs(v) <= b + 3 * r.std_err);
        out.os() << n << "," << num(v.real()) << "," << num(v.imag()) << ",," << num(b) << "," << hash_hex(cfg.hash) << "\n";
    }
    out.os() << "sum," << num(r.value.real()) << "," << num(r.value.imag()) << "," << num(r.std_err) << ","
             << num(r.tail_bound) << "," << hash_hex(cfg.hash) << "\n";
    return ok ? kPass : kInvariant;
}

int cmd_qsde_eval(const Globals& g) {
    const auto cfg = load(g);
    const auto c = build_limit_coefficients(cfg.sys);
    const int d = int(c.W.rows());
    const bool unitary = (c.W.adjoint() * c.W - CMat::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-12;
    QsdeOptions opt;
    opt.tail_tol = std::min(1e-13, cfg.run.tolerance);
    const auto r = qsde_matrix_element(cfg.sys, cfg.bath, cfg.left, cfg.right, cfg.phi1, cfg.phi2, cfg.run.t, opt);
    Sink out(g);
    out.header("n,real,imag,bound,config_hash");
    for (std::size_t n = 0; n < r.per_order.size(); ++n) {
        const double b = qsde_order_bound(cfg.sys, cfg.bath, cfg.left, cfg.right, cfg.phi1, cfg.phi2, cfg.run.t, int(n));
        out.os() << n << "," << num(r.per_order[n].real()) << "," << num(r.per_order[n].imag()) << "," << num(b) << ","
                 << hash_hex(cfg.hash) << "\n";
    }
    out.os() << "sum," << num(r.value.real()) << "," << num(r.value.imag()) << "," << num(r.tail_bound + r.roundoff)
             << "," << hash_hex(cfg.hash) << "\n";
    return unitary ? kPass : kInvariant;
}

int cmd_convergence(const Globals& g, bool budget) {
    const auto cfg = load(g);
    const auto sw = lab::convergence_sweep(cfg, budget, g.threads);
    Sink out(g);
    out.header("lambda,finite_re,finite_im,limit_re,limit_im,gap,norm_drift,leakage,ode_err,disc_err,tail,budget,steps,config_hash");
    for (const auto& p : sw.points)
        out.os() << num(p.lambda) << "," << num(p.finite.real()) << "," << num(p.finite.imag()) << ","
                 << num(p.limit.real()) << "," << num(p.limit.imag()) << "," << num(p.gap) << "," << num(p.drift) << ","
                 << num(p.leakage) << "," << num(p.ode_err) << "," << num(p.disc_err) << "," << num(p.tail) << ","
                 << num(p.budget()) << "," << p.steps << "," << hash_hex(cfg.hash) << "\n";
    return sw.monotone ? kPass : kInvariant;
}

int cmd_bounds(const Globals& g, int n_max) {
    const auto cfg = load(g);
    auto spec = cfg.dyson_spec(0, cfg.run.lambdas.front());
    spec.validate();
    const auto opt = integrator(cfg, g);
    Sink out(g);
    out.header("n,bound,term_abs,std_err,ratio,config_hash");
    bool ok = true;
    double prev = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        const double b = truncation_bound(spec, n);
        std::string term = "", se = "";
        if (n <= std::min(3, cfg.run.N_max)) {
            spec.n = n;
            const auto r = dyson_term(spec, opt);
            ok = ok && std::abs(r.value) <= b + 3 * r.std_err;
            term = num(std::abs(r.value));
            se = num(r.std_err);
        }
        const double ratio = n > 0 && prev > 0 ? b / prev : std::numeric_limits<double>::quiet_NaN();
        out.os() << n << "," << num(b) << "," << term << "," << se << "," << num(ratio) << "," << hash_hex(cfg.hash) << "\n";
        prev = b;
    }
    double last = 0.0;
    const bool summable = lab::bound_ratio_test(spec, &last);
    std::cerr << "ratio test: b(n+1)/b(n) -> " << last << (summable ? " (summable)" : " (NOT summable)") << "\n";
    return ok && summable ? kPass : kInvariant;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fermi_lab: CAR algebra, Wick ordering, Dyson terms and the weak-coupling limit"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "Experiment config (JSON)");
    app.add_option("--out", g.out_path, "Write CSV here instead of stdout");
    app.add_option("--seed", g.seed, "Override run.seed");
    app.add_option("--threads", g.threads, "Worker threads (default FERMI_LAB_THREADS or all cores)");
    app.add_option("--tolerance", g.tolerance, "Override run.tolerance");
    app.add_flag("--append", g.append, "Append to --out, writing the header only once");
    app.fallthrough();

    std::vector<int> car_modes{4, 5, 6};
    int car_trials = 100;
    auto* car = app.add_subcommand("verify-car", "Check the anticommutation relations on random vectors");
    car->add_option("--modes", car_modes, "Mode counts")->check(CLI::Range(1, 12));
    car->add_option("--trials", car_trials, "Random (f, g) pairs per mode count")->check(CLI::PositiveNumber);

    std::string expr;
    int wick_modes = 4;
    auto* wick = app.add_subcommand("wick-check", "Normal-order a word and compare against dense matrices");
    wick->add_option("expr", expr, "Word, e.g. \"a-(g2) a+(f1)\"")->required();
    wick->add_option("--modes", wick_modes, "Mode count for names missing from the vector table");

    app.add_subcommand("sign-demo", "Print the sign of the worked partition example");

    std::optional<int> order;
    std::optional<double> lambda;
    auto* term = app.add_subcommand("dyson-term", "One Dyson term with its truncation bound");
    term->add_option("--order", order, "Order n (default run.order)");
    term->add_option("--lambda", lambda, "Coupling (default the first of run.lambdas)");
    auto* sum = app.add_subcommand("dyson-sum", "Dyson partial sum up to run.N_max");
    sum->add_option("--lambda", lambda, "Coupling (default the first of run.lambdas)");

    app.add_subcommand("qsde-eval", "Limit matrix element with per-order contributions");

    bool budget = false;
    auto* conv = app.add_subcommand("convergence-run", "Finite-lambda oracle vs limit over run.lambdas");
    conv->add_flag("--budget", budget, "Also estimate ODE and discretization errors by rerunning");

    int bound_n = 12;
    auto* bounds = app.add_subcommand("bounds-report", "Truncation bounds, computed terms and ratio test");
    bounds->add_option("--n-max", bound_n, "Largest order of the bound sequence")->check(CLI::Range(1, 40));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kPass : kConfig;
    }

    try {
        if (*car) return cmd_verify_car(g, car_modes, car_trials);
        if (*wick) return cmd_wick_check(g, expr, wick_modes);
        if (app.got_subcommand("sign-demo")) {
            Sink out(g);
            out.os() << lab::sign_demo_text();
            return kPass;
        }
        if (*term) return cmd_dyson_term(g, order, lambda);
        if (*sum) return cmd_dyson_sum(g, lambda);
        if (app.got_subcommand("qsde-eval")) return cmd_qsde_eval(g);
        if (*conv) return cmd_convergence(g, budget);
        if (*bounds) return cmd_bounds(g, bound_n);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kConfig;
    } catch (const GuardError& e) {
        std::cerr << "guard: " << e.what() << "\n";
        return kConfig;
    } catch (const DimensionError& e) {
        std::cerr << "dimension: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "failed: " << e.what() << "\n";
        return kInvariant;
    }
    return kPass;
}
