#include "boxmodel/config.hpp"

#include <cmath>
#include <map>
#include <set>

#include "boxmodel/errors.hpp"

namespace boxmodel::config {

namespace {

// Reads one JSON object, naming the full field path in every error; finish() rejects leftovers.
class Obj {
public:
    Obj(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    const Json& raw(const std::string& key) {
        used_.insert(key);
        if (!j_.contains(key)) throw ConfigError(field(key) + ": missing");
        return j_.at(key);
    }
    double num(const std::string& key) {
        const Json& v = raw(key);
        try {
            return io::to_double(v);
        } catch (const ConfigError&) {
            throw ConfigError(field(key) + ": expected a number");
        }
    }
    double num(const std::string& key, double def) {
        used_.insert(key);
        return has(key) ? num(key) : def;
    }
    std::optional<double> opt(const std::string& key) {
        used_.insert(key);
        if (!has(key)) return std::nullopt;
        return num(key);
    }
    long long integer(const std::string& key) {
        const Json& v = raw(key);
        if (!v.is_number_integer()) throw ConfigError(field(key) + ": expected an integer");
        return v.get<long long>();
    }
    long long integer(const std::string& key, long long def) {
        used_.insert(key);
        return has(key) ? integer(key) : def;
    }
    std::size_t count(const std::string& key, long long min = 0) {
        const long long v = integer(key);
        if (v < min) throw ConfigError(field(key) + ": must be >= " + std::to_string(min));
        return static_cast<std::size_t>(v);
    }
    std::string str(const std::string& key) {
        const Json& v = raw(key);
        if (!v.is_string()) throw ConfigError(field(key) + ": expected a string");
        return v.get<std::string>();
    }
    std::string str(const std::string& key, const std::string& def) {
        used_.insert(key);
        return has(key) ? str(key) : def;
    }
    bool flag(const std::string& key) {
        const Json& v = raw(key);
        if (!v.is_boolean()) throw ConfigError(field(key) + ": expected true or false");
        return v.get<bool>();
    }
    std::vector<double> nums(const std::string& key) {
        const Json& v = raw(key);
        if (!v.is_array()) throw ConfigError(field(key) + ": expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            try {
                out.push_back(io::to_double(v[i]));
            } catch (const ConfigError&) {
                throw ConfigError(field(key) + "[" + std::to_string(i) + "]: expected a number");
            }
        }
        return out;
    }
    Obj sub(const std::string& key) { return Obj(raw(key), field(key)); }

    void finish() const {
        for (const auto& [key, value] : j_.items())
            if (!used_.count(key)) throw ConfigError(field(key) + ": unknown field");
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> used_;
};

const std::set<std::string>& free_form() {
    static const std::set<std::string> s{"free_energy", "freeenergy.potential", "freeenergy.limit",
                                         "chessboard.event"};
    return s;
}

// element kinds of array-valued fields
const std::map<std::string, std::string>& array_kinds() {
    static const std::map<std::string, std::string> m{
        {"thetas.gammas", "number"},     {"thetas.lambdas", "number"},    {"scan.lambdas", "number"},
        {"freeenergy.gammas", "number"}, {"report.gammas", "number"},     {"report.inputs", "string"},
        {"verify.suites", "string"},     {"chessboard.block.corner", "integer"}};
    return m;
}

std::string type_name(const Json& j) {
    if (j.is_number_integer()) return "an integer";
    if (j.is_number()) return "a number";
    if (j.is_boolean()) return "true or false";
    if (j.is_string()) return "a string";
    if (j.is_array()) return "an array";
    if (j.is_object()) return "an object";
    return "null";
}

Json merge_rec(const Json& def, const Json& cfg, const std::string& path) {
    if (free_form().count(path)) {
        if (!cfg.is_null() && !cfg.is_object()) throw ConfigError(path + ": expected an object");
        return cfg;
    }
    if (def.is_object()) {
        if (!cfg.is_object()) throw ConfigError(path + ": expected an object");
        Json out = def;
        for (const auto& [key, value] : cfg.items()) {
            const std::string f = path.empty() ? key : path + "." + key;
            if (!def.contains(key)) throw ConfigError(f + ": unknown field");
            out[key] = merge_rec(def.at(key), value, f);
        }
        return out;
    }
    if (def.is_array() || array_kinds().count(path)) {
        if (cfg.is_null() && def.is_null()) return cfg;
        if (!cfg.is_array()) throw ConfigError(path + ": expected an array");
        const auto it = array_kinds().find(path);
        const std::string kind = it == array_kinds().end() ? "number" : it->second;
        for (std::size_t i = 0; i < cfg.size(); ++i) {
            const Json& e = cfg[i];
            const bool ok = kind == "string" ? e.is_string() : kind == "integer" ? e.is_number_integer() : e.is_number();
            if (!ok) throw ConfigError(path + "[" + std::to_string(i) + "]: expected " +
                                       (kind == "string" ? "a string" : kind == "integer" ? "an integer" : "a number"));
        }
        return cfg;
    }
    if (def.is_null()) {
        if (!cfg.is_null() && !cfg.is_number()) throw ConfigError(path + ": expected a number or null");
        return cfg;
    }
    if (def.is_number_integer()) {
        if (!cfg.is_number_integer()) throw ConfigError(path + ": expected an integer, got " + type_name(cfg));
        if (def.is_number_unsigned() && cfg.get<long long>() < 0) throw ConfigError(path + ": must be nonnegative");
        return cfg;
    }
    if (def.is_number()) {
        if (!cfg.is_number()) throw ConfigError(path + ": expected a number, got " + type_name(cfg));
        return Json(cfg.get<double>());
    }
    if (def.is_boolean() && !cfg.is_boolean()) throw ConfigError(path + ": expected true or false");
    if (def.is_string() && !cfg.is_string()) throw ConfigError(path + ": expected a string");
    return cfg;
}

SpinDomain parse_domain(const std::string& s, const std::string& field) {
    if (s == "continuous") return SpinDomain::Continuous;
    if (s == "discrete") return SpinDomain::Discrete;
    throw ConfigError(field + ": expected \"continuous\" or \"discrete\"");
}

CoreCase parse_core(const std::string& s, const std::string& field) {
    if (s == "hard_core") return CoreCase::HardCore;
    if (s == "soft_core") return CoreCase::SoftCore;
    throw ConfigError(field + ": expected \"hard_core\" or \"soft_core\"");
}

HistogramSpec parse_histogram(Obj o) {
    HistogramSpec h;
    h.bins = o.count("bins", 1);
    h.lo = o.num("lo");
    h.hi = o.num("hi");
    if (!(h.hi > h.lo)) throw ConfigError(o.field("hi") + ": must exceed lo");
    o.finish();
    return h;
}

Json opt_json(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

Json num_array(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(x);
    return a;
}

}  // namespace

Json defaults() {
    Json d;
    d["format_version"] = io::kFormatVersion;
    d["command"] = "";
    d["seed"] = std::uint64_t{1};
    d["out"] = "out";
    d["free_energy"] = Json{{"kind", "tonks"}, {"rod_length", 1.0}, {"beta", 1.0}};
    d["model"] = Json{{"d", std::uint64_t{2}},   {"L", std::uint64_t{16}}, {"beta", 1.0},
                      {"alpha", 12.0},           {"J2", 1.0},              {"gamma", 0.25},
                      {"lambda", nullptr},       {"domain", "continuous"}};
    d["meanfield"] = Json{{"grid_points", std::uint64_t{4096}}};
    d["regions"] = Json{{"delta", nullptr}, {"kappa", nullptr}};
    d["sampler"] = Json{{"sweeps", std::uint64_t{1000}},
                        {"burn_in", std::uint64_t{100}},
                        {"thin", std::uint64_t{1}},
                        {"step", nullptr},
                        {"independence_prob", 0.1},
                        {"histogram", Json{{"bins", std::uint64_t{50}}, {"lo", 0.0}, {"hi", 1.0}}}};
    d["thetas"] = Json{{"gammas", Json::array()}, {"lambdas", Json::array()}};
    d["scan"] = Json{{"lambdas", Json::array()},
                     {"sweeps", std::uint64_t{4000}},
                     {"burn_in", std::uint64_t{500}},
                     {"thin", std::uint64_t{10}},
                     {"delta3", 0.05},
                     {"histogram", Json{{"bins", std::uint64_t{40}}, {"lo", 0.0}, {"hi", 1.0}}},
                     {"pressures", true},
                     {"path", Json{{"sweeps", std::uint64_t{1200}},
                                   {"burn_in", std::uint64_t{200}},
                                   {"lambda_low_offset", 4.0},
                                   {"lambda_high", 30.0},
                                   {"overlap", 0.25},
                                   {"fine_step", 0.05},
                                   {"max_step", 1.0},
                                   {"growth", 1.2}}}};
    d["chessboard"] = Json{{"block", Json{{"kind", "edge"}, {"axis", std::uint64_t{0}}, {"corner", Json::array()}}},
                           {"event", nullptr},
                           {"trials", std::uint64_t{100}},
                           {"mc_samples", std::uint64_t{20000}}};
    d["freeenergy"] = Json{{"potential", Json{{"kind", "hard_core"}, {"d", 1}, {"R", 1.0}}},
                           {"gammas", Json{0.2, 0.1, 0.05}},
                           {"beta", 1.0},
                           {"rho_max", 0.7},
                           {"samples", std::uint64_t{20000}},
                           {"trials", std::uint64_t{1}},
                           {"core", "hard_core"},
                           {"rho_cp", 1.0},
                           {"spec_rho_max", 2.0},
                           {"alpha_max", 0.0},
                           {"limit", nullptr},
                           {"superstability", Json{{"C", nullptr}, {"D", nullptr}}}};
    d["verify"] = Json{{"suites", nullptr}, {"trials", std::uint64_t{100}}};
    d["report"] = Json{{"gammas", Json{0.5, 0.35, 0.25}}, {"inputs", Json::array()}};
    return d;
}

Json merge(const Json& def, const Json& cfg) {
    if (!cfg.is_object()) throw ConfigError("config: expected a JSON object at the top level");
    return merge_rec(def, cfg, "");
}

Manifest manifest_from_doc(Json doc) {
    Manifest m;
    m.doc = std::move(doc);
    m.digest = io::hex64(io::fnv1a64(io::dump(m.doc, -1)));
    return m;
}

Manifest make_manifest(const Json& cfg, const std::string& command, std::optional<std::uint64_t> seed,
                       std::optional<std::string> out) {
    Json doc = merge(defaults(), cfg);
    if (doc["format_version"] != io::kFormatVersion)
        throw ConfigError("format_version: unsupported, expected " + std::string(io::kFormatVersion));
    doc["command"] = command;
    if (seed) doc["seed"] = *seed;
    if (out) doc["out"] = *out;
    return manifest_from_doc(std::move(doc));
}

FreeEnergySpec parse_free_energy(const Json& j, const std::string& field) {
    Obj o(j, field);
    const std::string kind = o.str("kind");
    FreeEnergySpec spec;
    if (kind == "tonks") {
        spec = FreeEnergySpec::tonks(o.num("rod_length", 1.0), o.num("beta", 1.0));
    } else if (kind == "ideal_gas") {
        spec = FreeEnergySpec::ideal_gas(o.num("beta", 1.0));
    } else if (kind == "hard_rods") {
        const double b = o.num("rod_length", 1.0);
        spec = hard_rod_table(b, o.num("beta", 1.0), o.nums("gammas"), o.num("rho_max", 2.0 / b));
    } else if (kind == "tabulated") {
        std::vector<FreeEnergyTable> tables;
        const Json& arr = o.raw("tables");
        if (!arr.is_array()) throw ConfigError(o.field("tables") + ": expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Obj t(arr[i], o.field("tables") + "[" + std::to_string(i) + "]");
            FreeEnergyTable tab;
            tab.gamma = t.num("gamma");
            tab.rho = t.nums("rho");
            tab.f = t.nums("f");
            if (t.has("std_error")) tab.std_error = t.nums("std_error");
            t.opt("std_error");
            t.finish();
            tables.push_back(std::move(tab));
        }
        const CoreCase core = parse_core(o.str("core"), o.field("core"));
        spec = FreeEnergySpec::tabulated(std::move(tables), core, o.num("beta", 1.0), o.opt("rho_cp"), o.opt("rho_max"),
                                         o.num("alpha_max", core == CoreCase::HardCore ? kInf : 0.0));
    } else {
        throw ConfigError(o.field("kind") + ": expected tonks, ideal_gas, hard_rods or tabulated");
    }
    o.finish();
    spec.validate();
    return spec;
}

ModelParams parse_model(const Json& m, double fallback_lambda) {
    Obj o(m.at("model"), "model");
    ModelParams p;
    p.d = static_cast<int>(o.count("d", 1));
    p.L = static_cast<int>(o.count("L", 2));
    p.beta = o.num("beta");
    p.alpha = o.num("alpha");
    p.J2 = o.num("J2");
    p.gamma = o.num("gamma");
    p.lambda = o.opt("lambda").value_or(fallback_lambda);
    p.domain = parse_domain(o.str("domain"), "model.domain");
    o.finish();
    if (!(p.beta > 0.0)) throw ConfigError("model.beta: must be positive");
    if (!(p.gamma > 0.0 && p.gamma <= 1.0)) throw ConfigError("model.gamma: must lie in (0, 1]");
    if (p.J2 < 0.0) throw ConfigError("model.J2: must be nonnegative");
    p.spec = parse_free_energy(m.at("free_energy"), "free_energy");
    if (std::abs(p.spec.beta - p.beta) > 1e-12 * p.beta)
        throw ConfigError("model.beta: must equal free_energy.beta");
    p.validate();
    return p;
}

MeanFieldOptions parse_meanfield(const Json& m) {
    Obj o(m.at("meanfield"), "meanfield");
    MeanFieldOptions opt;
    opt.grid_points = o.count("grid_points", 16);
    o.finish();
    return opt;
}

SamplerSettings parse_sampler(const Json& m) {
    Obj o(m.at("sampler"), "sampler");
    SamplerSettings s;
    s.sweeps = o.count("sweeps", 1);
    s.burn_in = o.count("burn_in");
    s.thin = o.count("thin", 1);
    s.step = o.opt("step");
    if (s.step && !(*s.step > 0.0)) throw ConfigError("sampler.step: must be positive");
    s.independence_prob = o.num("independence_prob");
    if (s.independence_prob < 0.0 || s.independence_prob > 1.0)
        throw ConfigError("sampler.independence_prob: must lie in [0, 1]");
    s.histogram = parse_histogram(o.sub("histogram"));
    o.finish();
    if (s.burn_in >= s.sweeps) throw ConfigError("sampler.burn_in: must be below sampler.sweeps");
    s.seed = m.at("seed").get<std::uint64_t>();
    return s;
}

ScanSettings parse_scan(const Json& m) {
    Obj o(m.at("scan"), "scan");
    ScanSettings s;
    s.lambdas = o.nums("lambdas");
    s.sweeps = o.count("sweeps", 1);
    s.burn_in = o.count("burn_in");
    s.thin = o.count("thin", 1);
    s.delta3 = o.num("delta3");
    if (!(s.delta3 > 0.0 && s.delta3 < 1.0)) throw ConfigError("scan.delta3: must lie in (0, 1)");
    s.histogram = parse_histogram(o.sub("histogram"));
    s.pressures = o.flag("pressures");
    Obj p = o.sub("path");
    s.path.sweeps = p.count("sweeps", 1);
    s.path.burn_in = p.count("burn_in");
    s.path.lambda_low_offset = p.num("lambda_low_offset");
    s.path.lambda_high = p.num("lambda_high");
    s.path.overlap = p.num("overlap");
    s.path.fine_step = p.num("fine_step");
    s.path.max_step = p.num("max_step");
    s.path.growth = p.num("growth");
    p.finish();
    o.finish();
    if (s.burn_in >= s.sweeps) throw ConfigError("scan.burn_in: must be below scan.sweeps");
    if (s.path.burn_in >= s.path.sweeps) throw ConfigError("scan.path.burn_in: must be below scan.path.sweeps");
    if (!(s.path.fine_step > 0.0)) throw ConfigError("scan.path.fine_step: must be positive");
    if (!(s.path.max_step >= s.path.fine_step)) throw ConfigError("scan.path.max_step: must be >= fine_step");
    if (!(s.path.growth >= 1.0)) throw ConfigError("scan.path.growth: must be >= 1");
    if (!(s.path.lambda_low_offset > 0.0)) throw ConfigError("scan.path.lambda_low_offset: must be positive");
    s.seed = m.at("seed").get<std::uint64_t>();
    return s;
}

PairPotential parse_potential(const Json& j, const std::string& field) {
    Obj o(j, field);
    const std::string kind = o.str("kind");
    const int d = static_cast<int>(o.integer("d", 1));
    if (d < 1) throw ConfigError(o.field("d") + ": must be >= 1");
    PairPotential pot;
    if (kind == "hard_core") {
        pot = PairPotential::hard_core(d, o.num("R"));
    } else if (kind == "lennard_jones") {
        pot = PairPotential::lennard_jones(d, o.num("epsilon"), o.num("R"));
    } else if (kind == "morse") {
        pot = PairPotential::morse(d, o.num("epsilon"), o.num("a"), o.num("R"));
    } else if (kind == "square_well") {
        pot = PairPotential::square_well(d, o.num("r_core"), o.num("r_well"), o.num("depth"));
    } else if (kind == "table") {
        pot = PairPotential::table(d, o.nums("r"), o.nums("v"));
    } else {
        throw ConfigError(o.field("kind") + ": expected hard_core, lennard_jones, morse, square_well or table");
    }
    pot.stability_B = o.opt("stability_B");
    pot.superstability_C = o.opt("superstability_C");
    pot.superstability_D = o.opt("superstability_D");
    if (o.has("temperedness")) {
        Obj t = o.sub("temperedness");
        pot.temperedness = Temperedness{t.num("A"), t.num("exponent"), t.num("R0")};
        t.finish();
    } else {
        o.opt("temperedness");
    }
    o.finish();
    pot.validate();
    return pot;
}

IntervalSet parse_intervals(const Json& j, const std::string& field) {
    if (!j.is_array()) throw ConfigError(field + ": expected an array of [lo, hi] pairs");
    IntervalSet s;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string f = field + "[" + std::to_string(i) + "]";
        if (!j[i].is_array() || j[i].size() != 2) throw ConfigError(f + ": expected [lo, hi]");
        double a, b;
        try {
            a = io::to_double(j[i][0]);
            b = io::to_double(j[i][1]);
        } catch (const ConfigError&) {
            throw ConfigError(f + ": expected numbers");
        }
        if (!(a <= b)) throw ConfigError(f + ": lo must not exceed hi");
        s.parts.emplace_back(a, b);
    }
    s.normalize();
    return s;
}

Json to_json(const IntervalSet& s) {
    Json a = Json::array();
    for (const auto& [lo, hi] : s.parts) a.push_back(Json{lo, hi});
    return a;
}

Json to_json(const Nonconvexity& n) {
    return Json{{"nonconvex", n.nonconvex}, {"witness_lo", n.witness_lo}, {"witness_hi", n.witness_hi},
                {"max_gap", n.max_gap},     {"gap_argmax", n.gap_argmax}};
}

Json to_json(const MeanFieldAnalysis& a) {
    return Json{{"alpha", a.alpha},
                {"lambda_star", a.lambda_star},
                {"m_star", a.m_star},
                {"rho_minus", a.rho_minus},
                {"rho_plus", a.rho_plus},
                {"rho_zero", a.rho_zero},
                {"minimizers", num_array(a.minimizers)},
                {"nonconvexity", to_json(a.nonconvexity)}};
}

Json to_json(const GoodRegionSpec& g) {
    return Json{{"delta", g.delta},
                {"kappa", g.kappa},
                {"delta_cap", g.delta_cap},
                {"kappa_cap", g.kappa_cap},
                {"G_minus", to_json(g.minus)},
                {"G_plus", to_json(g.plus)},
                {"I_delta", to_json(g.i_delta)},
                {"lambda_minus", g.lambda_minus},
                {"lambda_plus", g.lambda_plus},
                {"rho_T", g.rho_T},
                {"lambda_star", g.lambda_star},
                {"rho_zero", g.rho_zero}};
}

Json to_json(const ThetaReport& t) {
    Json pts = Json::array();
    for (const auto& p : t.points)
        pts.push_back(Json{{"lambda", p.lambda},
                           {"psi", p.psi},
                           {"log_outside", p.log_outside},
                           {"log_minus", p.log_minus},
                           {"log_plus", p.log_plus},
                           {"theta1", p.theta1},
                           {"theta2", p.theta2}});
    return Json{{"gamma", t.gamma},           {"theta1", t.theta1},           {"theta2", t.theta2},
                {"theta3", t.theta3},         {"theta3_minus", t.theta3_minus}, {"theta3_plus", t.theta3_plus},
                {"points", pts}};
}

Json to_json(const PressurePoint& p) {
    return Json{{"lambda", p.lambda},           {"mean_density", p.mean_density},
                {"mean_density_stderr", p.mean_density_stderr}, {"pressure", p.pressure},
                {"stat_error", p.stat_error},   {"quad_error", p.quad_error},
                {"anchor_error", p.anchor_error}};
}

Json to_json(const PressureRow& r) {
    return Json{{"lambda", r.lambda},
                {"branch", r.branch},
                {"sampled", r.sampled},
                {"gates_penrose", r.gates_penrose},
                {"gap", r.gap},
                {"stat_error", r.stat_error},
                {"quad_error", r.quad_error},
                {"anchor_error", r.anchor_error},
                {"finite_gamma_slack", r.finite_gamma_slack},
                {"budget", r.budget()},
                {"bound_holds", r.bound_holds()}};
}

Json to_json(const TraceRow& r) {
    return Json{{"sweep", r.sweep},     {"sites", r.sites},       {"mean_density", r.mean_density},
                {"energy", r.energy},   {"n_minus", r.n_minus},   {"n_plus", r.n_plus},
                {"pi_minus", r.pi_minus}, {"pi_plus", r.pi_plus}, {"psi", r.psi}};
}

Json to_json(const BranchStats& b, bool full) {
    Json j{{"mean_density", b.mean_density},
           {"std_error", b.std_error},
           {"in_region_fraction", b.in_region_fraction},
           {"pi_minus", b.pi_minus},
           {"pi_plus", b.pi_plus},
           {"psi", b.psi},
           {"identity_holds", b.identity_holds},
           {"ergodic_frequency", b.ergodic_frequency},
           {"acceptance", b.acceptance}};
    if (full) {
        j["histogram"] = num_array(b.histogram);
        Json tr = Json::array();
        for (const auto& r : b.trace) tr.push_back(to_json(r));
        j["trace"] = tr;
    }
    return j;
}

Json to_json(const ScanPoint& p, bool full) {
    return Json{{"lambda", p.lambda},
                {"two_phase", p.two_phase},
                {"separation_sigma", p.separation_sigma},
                {"vapor", to_json(p.vapor, full)},
                {"liquid", to_json(p.liquid, full)}};
}

Json to_json(const TransitionReport& r) {
    Json pts = Json::array();
    for (const auto& p : r.points) pts.push_back(to_json(p, false));
    Json vp = Json::array(), lp = Json::array(), pt = Json::array(), warn = Json::array();
    for (const auto& p : r.vapor_path) vp.push_back(to_json(p));
    for (const auto& p : r.liquid_path) lp.push_back(to_json(p));
    for (const auto& row : r.pressure_table) pt.push_back(to_json(row));
    for (const auto& w : r.warnings) warn.push_back(w);
    bool bound = true;
    for (const auto& row : r.pressure_table) bound = bound && row.bound_holds();
    return Json{{"gamma", r.gamma},
                {"L", r.L},
                {"d", r.d},
                {"lambda_star", r.lambda_star},
                {"regions", to_json(r.regions)},
                {"coexistence_detected", r.coexistence_detected},
                {"lambda_c", r.lambda_c ? Json(*r.lambda_c) : Json(nullptr)},
                {"lambda_c_error", r.lambda_c_error},
                {"lambda_c_method", r.lambda_c_method},
                {"lambda_c_distance", r.lambda_c ? Json(std::abs(*r.lambda_c - r.lambda_star)) : Json(nullptr)},
                {"pressure_bound_holds", bound},
                {"concentration_note",
                 "density concentration is measured on finite-L histograms of cold-start chains, "
                 "a surrogate for the infinite-volume statement"},
                {"points", pts},
                {"vapor_path", vp},
                {"liquid_path", lp},
                {"pressure_table", pt},
                {"warnings", warn}};
}

Json to_json(const FreeEnergySpec& s) {
    Json tables = Json::array();
    for (const auto& t : s.tables) {
        Json tj{{"gamma", t.gamma}, {"rho", num_array(t.rho)}, {"f", num_array(t.f)}};
        if (!t.std_error.empty()) tj["std_error"] = num_array(t.std_error);
        tables.push_back(tj);
    }
    return Json{{"kind", "tabulated"},       {"core", s.hard_core() ? "hard_core" : "soft_core"},
                {"beta", s.beta},            {"rho_cp", opt_json(s.rho_cp)},
                {"rho_max", opt_json(s.rho_max)}, {"alpha_max", s.alpha_max},
                {"tables", tables}};
}

namespace {

TraceRow trace_from_json(const Json& j) {
    TraceRow r;
    r.sweep = j.at("sweep").get<std::size_t>();
    r.sites = j.at("sites").get<std::size_t>();
    r.mean_density = io::to_double(j.at("mean_density"));
    r.energy = io::to_double(j.at("energy"));
    r.n_minus = j.at("n_minus").get<std::size_t>();
    r.n_plus = j.at("n_plus").get<std::size_t>();
    r.pi_minus = io::to_double(j.at("pi_minus"));
    r.pi_plus = io::to_double(j.at("pi_plus"));
    r.psi = io::to_double(j.at("psi"));
    return r;
}

BranchStats branch_from_json(const Json& j) {
    BranchStats b;
    b.mean_density = io::to_double(j.at("mean_density"));
    b.std_error = io::to_double(j.at("std_error"));
    b.in_region_fraction = io::to_double(j.at("in_region_fraction"));
    b.pi_minus = io::to_double(j.at("pi_minus"));
    b.pi_plus = io::to_double(j.at("pi_plus"));
    b.psi = io::to_double(j.at("psi"));
    b.identity_holds = j.at("identity_holds").get<bool>();
    b.ergodic_frequency = io::to_double(j.at("ergodic_frequency"));
    b.acceptance = io::to_double(j.at("acceptance"));
    for (const auto& x : j.at("histogram")) b.histogram.push_back(io::to_double(x));
    for (const auto& r : j.at("trace")) b.trace.push_back(trace_from_json(r));
    return b;
}

}  // namespace

ScanPoint scan_point_from_json(const Json& j) {
    ScanPoint p;
    try {
        p.lambda = io::to_double(j.at("lambda"));
        p.two_phase = j.at("two_phase").get<bool>();
        p.separation_sigma = io::to_double(j.at("separation_sigma"));
        p.vapor = branch_from_json(j.at("vapor"));
        p.liquid = branch_from_json(j.at("liquid"));
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("checkpoint: malformed scan point: ") + e.what());
    }
    return p;
}

}  // namespace boxmodel::config
