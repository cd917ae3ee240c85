#include "fermi/config.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace fermi {

namespace {

using json = nlohmann::json;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

cplx to_complex(const json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw ConfigError(where + ": expected a number or [re, im]");
}

CMat to_matrix(const json& v, int d, const std::string& where) {
    if (v.is_null()) return CMat::Zero(d, d);
    if (!v.is_array() || int(v.size()) != d) throw ConfigError(where + ": expected " + std::to_string(d) + " rows");
    CMat m(d, d);
    for (int r = 0; r < d; ++r) {
        if (!v[r].is_array() || int(v[r].size()) != d)
            throw ConfigError(where + ": row " + std::to_string(r) + " needs " + std::to_string(d) + " entries");
        for (int c = 0; c < d; ++c) m(r, c) = to_complex(v[r][c], where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
    return m;
}

CVec to_vector(const json& v, int d, const std::string& where) {
    if (!v.is_array() || int(v.size()) != d) throw ConfigError(where + ": expected " + std::to_string(d) + " entries");
    CVec x(d);
    for (int i = 0; i < d; ++i) x[i] = to_complex(v[i], where + "[" + std::to_string(i) + "]");
    return x;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

ReservoirModel parse_reservoir(const json& r) {
    const std::string family = get_or<std::string>(r, "family", "lorentzian");
    const double omega = get_or(r, "omega", 0.0);
    GridSpec grid;
    if (r.contains("grid")) {
        grid.points = get_or(r["grid"], "points", grid.points);
        grid.half_span = get_or(r["grid"], "half_span", grid.half_span);
    }
    if (grid.points < 1) throw ConfigError("reservoir.grid.points must be positive");
    const KernelMode mode = get_or<std::string>(r, "kernel", "continuum") == "finite_modes" ? KernelMode::FiniteModes
                                                                                           : KernelMode::Continuum;
    if (family == "lorentzian") {
        Lorentzian l{get_or(r, "gamma0", 1.0), get_or(r, "width", 1.0), get_or(r, "detuning", 0.0)};
        if (!(l.gamma0 > 0.0 && l.width > 0.0)) throw ConfigError("reservoir: gamma0 and width must be positive");
        return ReservoirModel(l, omega, grid, mode);
    }
    if (family == "flat") {
        FlatBand f{get_or(r, "height", 1.0), get_or(r, "half_width", 1.0), get_or(r, "detuning", 0.0)};
        if (!(f.height > 0.0 && f.half_width > 0.0)) throw ConfigError("reservoir: height and half_width must be positive");
        return ReservoirModel(f, omega, grid, mode);
    }
    if (family == "tabulated") {
        Tabulated t{r.at("nu").get<std::vector<double>>(), r.at("J").get<std::vector<double>>()};
        return ReservoirModel(t, omega, grid, mode);
    }
    throw ConfigError("reservoir.family: unknown family '" + family + "' (lorentzian, flat, tabulated)");
}

std::vector<SmearedVector> parse_legs(const json& arr, const std::string& where) {
    std::vector<SmearedVector> out;
    if (arr.is_null()) return out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto& l = arr[i];
        const std::string w = where + "[" + std::to_string(i) + "]";
        const std::string kind = get_or<std::string>(l, "profile", "coupling");
        const cplx c = l.contains("coefficient") ? to_complex(l["coefficient"], w + ".coefficient") : cplx(1.0);
        SmearedVector v;
        if (kind == "coupling") {
            v.profile = LegProfile::coupling(c);
        } else if (kind == "box") {
            v.profile = LegProfile::box(c, l.at("lo").get<double>(), l.at("hi").get<double>());
        } else {
            throw ConfigError(w + ".profile: expected 'coupling' or 'box'");
        }
        v.S = l.at("S").get<double>();
        v.T = l.at("T").get<double>();
        if (!(v.T > v.S) || v.S < 0.0) throw ConfigError(w + ": needs 0 <= S < T");
        out.push_back(v);
    }
    return out;
}

}  // namespace

std::string hash_hex(std::uint64_t h) {
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

DysonTermSpec ExperimentConfig::dyson_spec(int n, double lambda) const {
    DysonTermSpec s;
    s.n = n;
    s.t = run.t;
    s.lambda = lambda;
    s.sys = sys;
    s.bath = bath;
    s.left = left;
    s.right = right;
    s.phi1 = phi1;
    s.phi2 = phi2;
    s.evaluator = run.evaluator;
    return s;
}

PropagatorRun ExperimentConfig::propagator_run(double lambda) const {
    PropagatorRun r;
    r.sys = sys;
    r.bath = bath;
    r.lambda = lambda;
    r.t = run.t;
    r.opt.cap = run.cap;
    r.opt.rel_tol = r.opt.abs_tol = run.tolerance;
    return r;
}

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig c;
    c.hash = fnv1a(j.dump());
    try {
        const auto& s = j.at("system");
        const int d = s.at("d").get<int>();
        if (d < 1 || d > 16) throw ConfigError("system.d must lie in [1, 16]");
        c.bath = parse_reservoir(j.value("reservoir", json::object()));
        const CMat E00 = to_matrix(s.value("E00", json()), d, "system.E00");
        const CMat E10 = to_matrix(s.value("E10", json()), d, "system.E10");
        const CMat E11 = to_matrix(s.value("E11", json()), d, "system.E11");
        c.sys = SystemModel::make(E00, E10, E11, c.bath.kappa());
        if (s.contains("E01") && (to_matrix(s["E01"], d, "system.E01") - E10.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
            throw ConfigError("system.E01 must equal E10^dagger (or be omitted)");
        try {
            c.sys.validate();
        } catch (const GuardError& e) {
            throw ConfigError(std::string("system: ") + e.what());
        }

        const auto legs = j.value("legs", json::object());
        c.left = parse_legs(legs.value("left", json()), "legs.left");
        c.right = parse_legs(legs.value("right", json()), "legs.right");

        const auto st = j.value("states", json::object());
        CVec e0 = CVec::Zero(d);
        e0[0] = 1.0;
        c.phi1 = st.contains("phi1") ? to_vector(st["phi1"], d, "states.phi1") : e0;
        c.phi2 = st.contains("phi2") ? to_vector(st["phi2"], d, "states.phi2") : e0;

        int vec_len = -1;
        const json vecs = j.value("vectors", json::object());
        for (const auto& [name, v] : vecs.items()) {
            if (!v.is_array() || v.empty()) throw ConfigError("vectors." + name + ": expected a non-empty array");
            if (vec_len >= 0 && int(v.size()) != vec_len) throw ConfigError("vectors." + name + ": length differs from the other vectors");
            vec_len = int(v.size());
            c.vectors[name] = to_vector(v, vec_len, "vectors." + name);
        }

        const auto r = j.value("run", json::object());
        auto& rb = c.run;
        if (r.contains("lambdas")) rb.lambdas = r["lambdas"].get<std::vector<double>>();
        if (r.contains("lambda")) rb.lambdas = {r["lambda"].get<double>()};
        rb.t = get_or(r, "t", rb.t);
        rb.order = get_or(r, "order", rb.order);
        rb.N_max = get_or(r, "N_max", rb.N_max);
        rb.seed = get_or<std::uint64_t>(r, "seed", rb.seed);
        rb.tolerance = get_or(r, "tolerance", rb.tolerance);
        rb.cap = get_or(r, "cap", rb.cap);
        rb.samples = get_or(r, "samples", rb.samples);
        const std::string scheme = get_or<std::string>(r, "scheme", "auto");
        if (scheme == "auto") rb.scheme = SimplexScheme::Auto;
        else if (scheme == "nested") rb.scheme = SimplexScheme::Nested;
        else if (scheme == "monte_carlo") rb.scheme = SimplexScheme::MonteCarlo;
        else throw ConfigError("run.scheme: expected auto, nested or monte_carlo");
        const std::string ev = get_or<std::string>(r, "evaluator", "continuum");
        if (ev == "continuum") rb.evaluator = Evaluator::Continuum;
        else if (ev == "discretized") rb.evaluator = Evaluator::Discretized;
        else throw ConfigError("run.evaluator: expected continuum or discretized");

        if (rb.lambdas.empty()) throw ConfigError("run.lambdas must not be empty");
        for (double l : rb.lambdas)
            if (!(l > 0.0)) throw ConfigError("run.lambdas: every lambda must be positive");
        if (!(rb.t >= 0.0)) throw ConfigError("run.t must be non-negative");
        if (rb.order < 0 || rb.order > 5) throw ConfigError("run.order must lie in [0, 5]");
        if (rb.N_max < 0 || rb.N_max > 5) throw ConfigError("run.N_max must lie in [0, 5]");
        if (!(rb.tolerance > 0.0)) throw ConfigError("run.tolerance must be positive");

        // the Dyson bounds need Kbar ||E11|| < 1 whenever Kbar is finite
        try {
            const double kq = c.bath.kbar() * op_norm(c.sys.E11);
            if (!(kq < 1.0))
                throw ConfigError("system.E11: Kbar ||E11|| = " + std::to_string(kq) +
                                  " must be < 1; scale E11 down");
        } catch (const GuardError&) {
        }
        // every finite-mode run must stay inside the recurrence window of the grid
        for (double l : rb.lambdas)
            if (rb.t / (l * l) > c.bath.t_valid())
                throw ConfigError("run: t / lambda^2 = " + std::to_string(rb.t / (l * l)) + " exceeds the grid window " +
                                  std::to_string(c.bath.t_valid()) + " at lambda = " + std::to_string(l) +
                                  "; raise reservoir.grid.points or lambda");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace fermi
