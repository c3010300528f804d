#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "boxmodel/chessboard.hpp"
#include "boxmodel/config.hpp"
#include "boxmodel/errors.hpp"
#include "boxmodel/io.hpp"
#include "boxmodel/meanfield.hpp"
#include "boxmodel/parallel.hpp"
#include "boxmodel/reference.hpp"
#include "boxmodel/spinmodel.hpp"
#include "boxmodel/transition.hpp"
#include "suites.hpp"

namespace fs = std::filesystem;

namespace boxmodel::cli {

namespace {

using io::Json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Ctx {
    config::Manifest m;
    fs::path out;
    unsigned threads = 1;
    std::optional<std::size_t> stop_after;
    std::ostream& log;
};

Json header(const config::Manifest& m) {
    return Json{{"format_version", io::kFormatVersion}, {"manifest_digest", "fnv1a64:" + m.digest}};
}

void emit_json(const Ctx& c, const std::string& name, const Json& body) {
    Json doc{{"header", header(c.m)}, {"manifest", c.m.doc}};
    for (const auto& [k, v] : body.items()) doc[k] = v;
    io::write_text(c.out / name, io::dump(doc));
    c.log << "wrote " << (c.out / name).string() << "\n";
}

void emit_csv(const Ctx& c, const std::string& name, const io::Csv& csv) {
    io::write_text(c.out / name, csv.str());
    c.log << "wrote " << (c.out / name).string() << "\n";
}

struct MeanField {
    FreeEnergySpec spec;
    double alpha = 0.0;
    MeanFieldOptions opt;
    Nonconvexity nonconvexity;
    std::optional<MeanFieldAnalysis> analysis;
    std::optional<GoodRegionSpec> regions;
};

MeanField mean_field(const Json& doc) {
    MeanField mf;
    mf.spec = config::parse_free_energy(doc.at("free_energy"), "free_energy");
    mf.alpha = io::to_double(doc.at("model").at("alpha"));
    check_alpha(mf.spec, mf.alpha);
    mf.opt = config::parse_meanfield(doc);
    mf.nonconvexity = detect_nonconvexity(mf.spec, mf.alpha, 0.0, mf.opt);
    try {
        mf.analysis = find_coexistence(mf.spec, mf.alpha, mf.opt);
    } catch (const NoCoexistenceError&) {
        return mf;
    }
    const Json& r = doc.at("regions");
    std::optional<double> delta, kappa;
    if (!r.at("delta").is_null()) delta = io::to_double(r.at("delta"));
    if (!r.at("kappa").is_null()) kappa = io::to_double(r.at("kappa"));
    mf.regions = build_good_regions(*mf.analysis, mf.spec, delta, kappa, mf.opt);
    return mf;
}

const MeanFieldAnalysis& require_coexistence(const MeanField& mf) {
    if (!mf.analysis)
        throw NoCoexistenceError("free_energy / model.alpha: phi is convex, no liquid-vapor coexistence to study");
    return *mf.analysis;
}

// ---------------------------------------------------------------- meanfield

int cmd_meanfield(const Ctx& c) {
    const auto mf = mean_field(c.m.doc);
    Json body{{"coexistence", mf.analysis.has_value()},
              {"lambda_star", mf.analysis ? Json(mf.analysis->lambda_star) : Json(nullptr)},
              {"nonconvexity", config::to_json(mf.nonconvexity)}};
    io::Csv csv(c.m.digest, {"rho", "phi", "envelope"});
    if (mf.analysis) {
        const auto& a = *mf.analysis;
        body["analysis"] = config::to_json(a);
        body["regions"] = config::to_json(*mf.regions);
        const auto mx = maxwell_check(mf.spec, a);
        body["maxwell"] = Json{{"envelope_pressure", mx.envelope_pressure},
                               {"equal_area_pressure", mx.equal_area_pressure},
                               {"relative_error", mx.relative_error}};
        body["gates_penrose_pressure"] = gates_penrose_pressure(mf.spec, mf.alpha, a.lambda_star, mf.opt);
        for (std::size_t i = 0; i < a.phi_star.rho.size(); ++i) {
            const double env = i < a.envelope.rho.size() ? a.envelope.value[i] : kInf;
            csv.row(a.phi_star.rho[i], a.phi_star.value[i], env);
        }
    } else {
        const auto g = phi_grid(mf.spec, mf.alpha, 0.0, mf.opt.grid_points);
        const auto ce = convex_envelope(g.rho, g.value);
        for (std::size_t i = 0; i < g.rho.size(); ++i)
            csv.row(g.rho[i], g.value[i], i < ce.rho.size() ? ce.value[i] : kInf);
    }
    emit_json(c, "meanfield.json", body);
    emit_csv(c, "meanfield_phi.csv", csv);
    return kOk;
}

// ---------------------------------------------------------------- freeenergy

int cmd_freeenergy(const Ctx& c) {
    const Json& fe = c.m.doc.at("freeenergy");
    const auto pot = config::parse_potential(fe.at("potential"), "freeenergy.potential");
    TableRequest req;
    req.gammas = {};
    for (const auto& g : fe.at("gammas")) req.gammas.push_back(io::to_double(g));
    if (req.gammas.empty()) throw ConfigError("freeenergy.gammas: need at least one value");
    for (double g : req.gammas)
        if (!(g > 0.0 && g <= 1.0)) throw ConfigError("freeenergy.gammas: values must lie in (0, 1]");
    req.beta = io::to_double(fe.at("beta"));
    req.rho_max = io::to_double(fe.at("rho_max"));
    req.samples = fe.at("samples").get<std::size_t>();
    req.trials = fe.at("trials").get<std::size_t>();
    if (req.trials < 1) throw ConfigError("freeenergy.trials: must be at least 1");
    req.seed = c.m.seed();
    req.threads = c.threads;
    const std::string core = fe.at("core").get<std::string>();
    if (core != "hard_core" && core != "soft_core") throw ConfigError("freeenergy.core: expected hard_core or soft_core");
    req.core = core == "hard_core" ? CoreCase::HardCore : CoreCase::SoftCore;
    if (!fe.at("rho_cp").is_null()) req.rho_cp = io::to_double(fe.at("rho_cp"));
    if (!fe.at("spec_rho_max").is_null()) req.spec_rho_max = io::to_double(fe.at("spec_rho_max"));
    req.alpha_max = io::to_double(fe.at("alpha_max"));
    const auto spec = build_free_energy_table(pot, req);

    io::Csv tables(c.m.digest, {"gamma", "N", "rho", "f_gamma", "std_error"});
    for (const auto& t : spec.tables)
        for (std::size_t i = 0; i < t.rho.size(); ++i) {
            const long N = std::lround(t.rho[i] / std::pow(t.gamma, pot.d));
            tables.row(t.gamma, N, t.rho[i], t.f[i], t.std_error.empty() ? 0.0 : t.std_error[i]);
        }

    Json notes = Json::array();
    for (const auto& n : pot.certification_notes()) notes.push_back(n);
    Json body{{"potential", to_string(pot.kind)}, {"certified_superstable", pot.certified_superstable()},
              {"certification_notes", notes}};

    // closed forms where they exist
    if (pot.kind == PotentialKind::HardCore && pot.d == 1) {
        Json rows = Json::array();
        bool within = true;
        for (const auto& t : spec.tables)
            for (std::size_t i = 0; i < t.rho.size(); ++i) {
                const int N = static_cast<int>(std::lround(t.rho[i] / t.gamma));
                const double exact = hard_rod_free_energy_exact(pot.R, t.gamma, req.beta, N);
                const double se = t.std_error.empty() ? 0.0 : t.std_error[i];
                const bool ok = (std::isinf(exact) && std::isinf(t.f[i])) || std::abs(t.f[i] - exact) <= 3.0 * se + 1e-12;
                within = within && ok;
                rows.push_back(Json{{"gamma", t.gamma}, {"N", N}, {"mc", t.f[i]}, {"exact", exact}, {"std_error", se},
                                    {"within_3se", ok}});
            }
        body["hard_rod_exact"] = Json{{"all_within_3se", within}, {"rows", rows}};
    }

    const double g_min = *std::min_element(req.gammas.begin(), req.gammas.end());
    // uniform configurations rarely avoid hard-core overlaps near packing, so audit at low density
    const int n_audit = std::max(2, std::min(12, static_cast<int>(std::floor(0.3 * req.rho_max / std::pow(g_min, pot.d)))));
    const auto st = stability_audit(pot, g_min, n_audit, std::min<std::size_t>(req.samples, 4000), c.m.seed());
    body["stability"] = Json{{"B", st.B}, {"source", st.source}, {"min_energy_per_particle", st.min_energy_per_particle},
                             {"pass", st.pass}, {"configurations", st.configurations}};
    if (pot.temperedness) {
        const auto t = temperedness_audit(pot);
        body["temperedness"] = Json{{"pass", t.pass}, {"worst_ratio", t.worst_ratio}, {"radii", t.radii}};
    }
    if (!fe.at("limit").is_null()) {
        const auto limit = config::parse_free_energy(fe.at("limit"), "freeenergy.limit");
        if (req.gammas.size() < 3) throw ConfigError("freeenergy.gammas: the convergence check needs three values");
        const auto r = check_convergence_assumptions(spec, limit);
        Json j{{"gammas", r.gammas}, {"sup_distance", r.sup_distance}, {"uniform_convergence", r.uniform_convergence},
               {"rho0", r.rho0}, {"rho1", r.rho1}, {"all_pass", r.all_pass()}};
        if (r.at_close_packing) j["at_close_packing"] = *r.at_close_packing;
        if (r.tail_divergence) j["tail_divergence"] = *r.tail_divergence;
        if (r.growth) j["growth"] = *r.growth;
        if (r.alpha_max_estimate) j["alpha_max_estimate"] = *r.alpha_max_estimate;
        body["convergence"] = j;
    }
    const Json& ss = fe.at("superstability");
    if (!ss.at("C").is_null() && !ss.at("D").is_null()) {
        const auto b = check_superstability_bound(spec, io::to_double(ss.at("C")), io::to_double(ss.at("D")), req.beta);
        body["superstability_bound"] =
            Json{{"holds", b.holds}, {"worst_margin", b.worst_margin}, {"worst_rho", b.worst_rho}, {"nodes", b.nodes}};
    }
    emit_csv(c, "freeenergy_tables.csv", tables);
    emit_json(c, "freeenergy.json", body);
    emit_json(c, "free_energy_spec.json", Json{{"free_energy", config::to_json(spec)}});
    return kOk;
}

// ---------------------------------------------------------------- sample

void trace_rows(io::Csv& csv, const std::vector<TraceRow>& trace) {
    for (const auto& r : trace) csv.row(r.sweep, r.mean_density, r.energy, r.pi_minus, r.pi_plus, r.psi);
}

int cmd_sample(const Ctx& c) {
    const auto mf = mean_field(c.m.doc);
    const auto p = config::parse_model(c.m.doc, mf.analysis ? mf.analysis->lambda_star : 0.0);
    const auto s = config::parse_sampler(c.m.doc);
    std::optional<GoodRegions> regions;
    if (mf.regions) regions = mf.regions->regions();
    const auto r = sample_observables(p, s, regions ? &*regions : nullptr);

    io::Csv trace(c.m.digest, {"sweep", "mean_density", "energy", "pi_minus", "pi_plus", "psi"});
    trace_rows(trace, r.trace);
    io::Csv hist(c.m.digest, {"bin_lo", "bin_hi", "mass"});
    const double w = (r.histogram_spec.hi - r.histogram_spec.lo) / static_cast<double>(r.histogram_spec.bins);
    for (std::size_t b = 0; b < r.histogram.size(); ++b)
        hist.row(r.histogram_spec.lo + w * static_cast<double>(b), r.histogram_spec.lo + w * static_cast<double>(b + 1),
                 r.histogram[b]);

    Json body{{"lambda", p.lambda},          {"mean_density", r.mean_density},
              {"mean_density_stderr", r.mean_density_stderr}, {"acceptance", r.acceptance},
              {"step", r.step},              {"rows", r.trace.size()}};
    if (regions) {
        std::size_t bad = 0;
        for (const auto& row : r.trace)
            if (!ds_identity(row)) ++bad;
        body["regions"] = config::to_json(*mf.regions);
        body["ds_identity"] = Json{{"holds", bad == 0}, {"violations", bad}};
    } else {
        body["regions"] = nullptr;
    }
    emit_json(c, "sample.json", body);
    emit_csv(c, "sample_trace.csv", trace);
    emit_csv(c, "sample_histogram.csv", hist);
    return kOk;
}

// ---------------------------------------------------------------- chessboard

int cmd_chessboard(const Ctx& c) {
    const auto mf = mean_field(c.m.doc);
    const auto p = config::parse_model(c.m.doc, mf.analysis ? mf.analysis->lambda_star : 0.0);
    const Json& cb = c.m.doc.at("chessboard");
    const Json& bj = cb.at("block");
    std::vector<int> corner;
    for (const auto& x : bj.at("corner")) corner.push_back(x.get<int>());
    if (corner.empty()) corner.assign(static_cast<std::size_t>(p.d), 0);
    if (static_cast<int>(corner.size()) != p.d) throw ConfigError("chessboard.block.corner: needs model.d entries");
    const std::string kind = bj.at("kind").get<std::string>();
    const int axis = bj.at("axis").get<int>();
    BlockSpec block;
    if (kind == "vertex") {
        block = BlockSpec::vertex(p.d, p.L, corner);
    } else if (kind == "edge") {
        if (axis >= p.d) throw ConfigError("chessboard.block.axis: must be below model.d");
        block = BlockSpec::edge(p.d, p.L, axis, corner);
    } else {
        throw ConfigError("chessboard.block.kind: expected vertex or edge");
    }
    try {
        block.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("chessboard.block: ") + e.what());
    }

    const Torus torus(p.d, p.L);
    std::vector<std::size_t> sites{torus.index(block.corner)};
    if (block.is_edge()) sites.push_back(torus.neighbor(sites[0], axis, +1));

    std::vector<IntervalSet> sets;
    if (cb.at("event").is_null()) {
        if (mf.regions) {
            const auto& g = *mf.regions;
            if (block.is_edge()) sets = {g.minus, g.plus};
            else sets = {complement(unite(g.minus, g.plus), 0.0, kInf)};
        } else {
            const double mean = SiteMeasure(p).mean();
            if (block.is_edge()) sets = {IntervalSet{{{0.0, mean}}}, IntervalSet{{{mean, kInf}}}};
            else sets = {IntervalSet{{{mean, kInf}}}};
        }
    } else {
        const Json& ev = cb.at("event");
        for (const auto& [k, v] : ev.items())
            if (k != "sets") throw ConfigError("chessboard.event." + k + ": unknown field");
        if (!ev.contains("sets") || !ev.at("sets").is_array() || ev.at("sets").size() != sites.size())
            throw ConfigError("chessboard.event.sets: needs one interval list per block site (" +
                              std::to_string(sites.size()) + ")");
        for (std::size_t i = 0; i < sites.size(); ++i)
            sets.push_back(config::parse_intervals(ev.at("sets")[i], "chessboard.event.sets[" + std::to_string(i) + "]"));
    }
    Event event;
    for (std::size_t i = 0; i < sites.size(); ++i) event = event.intersect(Event::site_event(sites[i], sets[i]));

    const auto group = orbit_group(block);
    Json sets_json = Json::array();
    for (const auto& s : sets) sets_json.push_back(config::to_json(s));
    Json body{{"block", Json{{"kind", kind}, {"corner", block.corner}, {"ell", block.ell}}},
              {"event_sets", sets_json},
              {"orbit_size", group.size()},
              {"orbit_size_formula", orbit_size_formula(block)}};

    const bool enumerable = p.domain == SpinDomain::Discrete && state_count(p) <= 1e6;
    body["enumerable"] = enumerable;
    const auto psi = psi_lower_bound(p, default_xi_grid(p));
    body["psi_lower_bound"] = Json{{"value", psi.value}, {"rho0", psi.rho0}, {"xi", psi.xi}};
    if (enumerable) {
        const auto sn = chessboard_seminorm_exact(event, block, p);
        body["seminorm"] = Json{{"value", sn.value}, {"disseminated_probability", sn.disseminated_probability},
                                {"exponent", sn.exponent}, {"rule", to_string(sn.rule)}, {"heuristic", false}};
        body["probability"] = event_probabilities(p, {event})[0];
        const double lz = exact_log_partition(p) / static_cast<double>(p.sites());
        body["psi_consistency"] = Json{{"log_partition_per_site", lz}, {"holds", lz >= psi.value - 1e-12}};

        const std::size_t trials = cb.at("trials").get<std::size_t>();
        double worst = kInf;
        std::size_t passed = 0;
        for (std::size_t t = 0; t < trials; ++t) {
            CounterRng rng(c.m.seed(), 0xcb, t);
            std::map<std::size_t, Event> events;
            for (std::size_t k = 0; k < group.size(); ++k)
                if (rng.uniform() < 2.0 / 3.0) events[k] = event;
            const auto r = verify_chessboard_inequality(events, block, p);
            worst = std::min(worst, r.margin);
            if (r.margin >= -1e-12) ++passed;
        }
        body["inequality"] = Json{{"trials", trials}, {"passed", passed}, {"worst_margin", trials ? worst : 0.0}};
    } else {
        const auto sn = chessboard_seminorm_mc(event, block, p, cb.at("mc_samples").get<std::size_t>(), c.m.seed());
        body["seminorm"] = Json{{"value", sn.value}, {"log_probability", sn.log_probability},
                                {"samples", sn.samples}, {"ess_conditioned", sn.ess_conditioned},
                                {"ess_free", sn.ess_free}, {"consistent", sn.consistent}, {"heuristic", sn.heuristic}};
    }
    emit_json(c, "chessboard.json", body);
    return kOk;
}

// ---------------------------------------------------------------- thetas

std::vector<double> number_list(const Json& j) {
    std::vector<double> v;
    for (const auto& x : j) v.push_back(io::to_double(x));
    return v;
}

std::vector<ThetaReport> run_thetas(const Json& doc, const MeanField& mf, const std::vector<double>& gammas) {
    const auto& a = require_coexistence(mf);
    auto lambdas = number_list(doc.at("thetas").at("lambdas"));
    std::vector<ThetaReport> out;
    for (double g : gammas) {
        Json d = doc;
        d["model"]["gamma"] = g;
        auto p = config::parse_model(d, a.lambda_star);
        out.push_back(compute_thetas(p, *mf.regions, lambdas));
    }
    return out;
}

io::Csv theta_csv(const std::string& digest, const std::vector<ThetaReport>& ts) {
    io::Csv csv(digest, {"gamma", "theta1", "theta2", "theta3", "theta3_minus", "theta3_plus"});
    for (const auto& t : ts) csv.row(t.gamma, t.theta1, t.theta2, t.theta3, t.theta3_minus, t.theta3_plus);
    return csv;
}

int cmd_thetas(const Ctx& c) {
    const auto mf = mean_field(c.m.doc);
    auto gammas = number_list(c.m.doc.at("thetas").at("gammas"));
    if (gammas.empty()) gammas = {io::to_double(c.m.doc.at("model").at("gamma"))};
    const auto ts = run_thetas(c.m.doc, mf, gammas);
    Json arr = Json::array();
    for (const auto& t : ts) arr.push_back(config::to_json(t));
    emit_json(c, "thetas.json", Json{{"regions", config::to_json(*mf.regions)}, {"thetas", arr}});
    emit_csv(c, "thetas.csv", theta_csv(c.m.digest, ts));
    return kOk;
}

// ---------------------------------------------------------------- scan

// Runs or restores every window point; nullopt when stopped early.
std::optional<TransitionReport> run_scan(const Ctx& c, const Json& doc, const MeanField& mf, const fs::path& dir) {
    const auto& a = require_coexistence(mf);
    const auto& g = *mf.regions;
    const auto p = config::parse_model(doc, a.lambda_star);
    auto s = config::parse_scan(doc);
    s.threads = c.threads;
    if (s.lambdas.empty()) s.lambdas = linspace(g.lambda_minus, g.lambda_plus, 5);
    for (double lam : s.lambdas)
        if (lam < g.lambda_minus - 1e-12 || lam > g.lambda_plus + 1e-12)
            throw ConfigError("scan.lambdas: " + io::format_double(lam) + " lies outside [lambda_-, lambda_+] = [" +
                              io::format_double(g.lambda_minus) + ", " + io::format_double(g.lambda_plus) + "]");

    const fs::path ckdir = dir / "checkpoints";
    std::vector<std::optional<ScanPoint>> done(s.lambdas.size());
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < s.lambdas.size(); ++i) {
        const fs::path f = ckdir / ("scan_point_" + std::to_string(i) + ".json");
        if (fs::exists(f)) {
            const Json j = Json::parse(io::read_text(f));
            if (j.at("header").at("manifest_digest") == "fnv1a64:" + c.m.digest &&
                io::to_double(j.at("point").at("lambda")) == s.lambdas[i]) {
                done[i] = config::scan_point_from_json(j.at("point"));
                continue;
            }
            c.log << "ignoring stale checkpoint " << f.string() << "\n";
        }
        pending.push_back(i);
    }
    if (pending.size() < s.lambdas.size())
        c.log << "resumed " << s.lambdas.size() - pending.size() << " of " << s.lambdas.size() << " window points\n";
    bool stopped = false;
    if (c.stop_after && *c.stop_after < pending.size()) {
        pending.resize(*c.stop_after);
        stopped = true;
    }
    parallel_for(pending.size(), c.threads, [&](std::size_t k) {
        const std::size_t i = pending[k];
        auto sp = scan_point(p, a, g, s.lambdas[i], i, s);
        const Json j{{"header", header(c.m)}, {"index", i}, {"point", config::to_json(sp, true)}};
        io::write_text(ckdir / ("scan_point_" + std::to_string(i) + ".json"), io::dump(j));
        done[i] = std::move(sp);
    });
    if (stopped) {
        c.log << "stopped after " << pending.size() << " new window points; rerun to resume\n";
        return std::nullopt;
    }
    ScanSettings run = s;
    run.threads = c.threads;
    return lambda_scan(p, a, g, run, done);
}

void write_scan_outputs(const Ctx& c, const TransitionReport& r, const std::string& prefix) {
    io::Csv hist(c.m.digest, {"lambda", "branch", "bin_lo", "bin_hi", "mass"});
    io::Csv traces(c.m.digest, {"lambda", "branch", "sweep", "mean_density", "energy", "pi_minus", "pi_plus", "psi"});
    const auto spec = config::parse_scan(c.m.doc).histogram;
    const double w = (spec.hi - spec.lo) / static_cast<double>(spec.bins);
    for (const auto& pt : r.points)
        for (const auto* br : {&pt.vapor, &pt.liquid}) {
            const std::string name = br == &pt.vapor ? "vapor" : "liquid";
            for (std::size_t b = 0; b < br->histogram.size(); ++b)
                hist.row(pt.lambda, name, spec.lo + w * static_cast<double>(b), spec.lo + w * static_cast<double>(b + 1),
                         br->histogram[b]);
            for (const auto& row : br->trace)
                traces.row(pt.lambda, name, row.sweep, row.mean_density, row.energy, row.pi_minus, row.pi_plus, row.psi);
        }
    io::Csv pressure(c.m.digest, {"lambda", "branch", "sampled", "gates_penrose", "gap", "stat_error", "quad_error",
                                  "anchor_error", "finite_gamma_slack", "bound_holds"});
    for (const auto& row : r.pressure_table)
        pressure.row(row.lambda, row.branch, row.sampled, row.gates_penrose, row.gap, row.stat_error, row.quad_error,
                     row.anchor_error, row.finite_gamma_slack, row.bound_holds());
    io::Csv plot(c.m.digest, {"series", "gamma", "x", "y", "y_err"});
    for (const auto& pt : r.points) {
        plot.row("window_vapor_density", r.gamma, pt.lambda, pt.vapor.mean_density, pt.vapor.std_error);
        plot.row("window_liquid_density", r.gamma, pt.lambda, pt.liquid.mean_density, pt.liquid.std_error);
    }
    for (const auto& pp : r.vapor_path)
        plot.row("path_vapor_density", r.gamma, pp.lambda, pp.mean_density, pp.mean_density_stderr);
    for (const auto& pp : r.liquid_path)
        plot.row("path_liquid_density", r.gamma, pp.lambda, pp.mean_density, pp.mean_density_stderr);
    emit_json(c, prefix + "scan_report.json", Json{{"report", config::to_json(r)}});
    emit_csv(c, prefix + "scan_histograms.csv", hist);
    emit_csv(c, prefix + "scan_traces.csv", traces);
    emit_csv(c, prefix + "scan_pressure.csv", pressure);
    emit_csv(c, prefix + "scan_plot.csv", plot);
}

int cmd_scan(const Ctx& c) {
    const auto mf = mean_field(c.m.doc);
    const auto r = run_scan(c, c.m.doc, mf, c.out);
    if (!r) return kOk;
    write_scan_outputs(c, *r, "");
    return kOk;
}

// ---------------------------------------------------------------- report

// Gap at λ by linear interpolation over the pressure table.
std::optional<double> gap_at(const Json& table, double lambda) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : table) pts.emplace_back(io::to_double(row.at("lambda")), io::to_double(row.at("gap")));
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        if (pts[i].first <= lambda && lambda <= pts[i + 1].first) {
            const double t = (lambda - pts[i].first) / (pts[i + 1].first - pts[i].first);
            return pts[i].second + t * (pts[i + 1].second - pts[i].second);
        }
    return std::nullopt;
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        if (!(v[i + 1] < v[i])) return false;
    return v.size() >= 2;
}

int cmd_report(const Ctx& c) {
    const Json& rep = c.m.doc.at("report");
    std::vector<Json> scans;   // "report" blocks of scan_report.json
    std::vector<Json> thetas;  // theta reports
    const auto inputs = rep.at("inputs");
    if (!inputs.empty()) {
        for (const auto& in : inputs) {
            const std::string path = in.get<std::string>();
            Json j;
            try {
                j = Json::parse(io::read_text(path));
            } catch (const Json::parse_error& e) {
                throw UsageError("report.inputs: " + path + ": " + e.what());
            } catch (const std::runtime_error& e) {
                throw ConfigError("report.inputs: " + std::string(e.what()));
            }
            if (j.contains("report")) scans.push_back(j.at("report"));
            else if (j.contains("thetas"))
                for (const auto& t : j.at("thetas")) thetas.push_back(t);
            else throw ConfigError("report.inputs: " + path + " is neither a scan report nor a theta report");
        }
    } else {
        // full pipeline: meanfield → regions → thetas → scan for each γ
        const auto gammas = number_list(rep.at("gammas"));
        if (gammas.empty()) throw ConfigError("report.gammas: need at least one value");
        const auto mf = mean_field(c.m.doc);
        for (const auto& t : run_thetas(c.m.doc, mf, gammas)) thetas.push_back(config::to_json(t));
        for (double g : gammas) {
            Json d = c.m.doc;
            d["model"]["gamma"] = g;
            char tag_buf[32];
            std::snprintf(tag_buf, sizeof tag_buf, "gamma_%g", g);
            const std::string tag = tag_buf;
            const auto r = run_scan(c, d, mf, c.out / tag);
            if (!r) return kOk;
            write_scan_outputs(c, *r, tag + "/");
            scans.push_back(config::to_json(*r));
        }
    }

    io::Csv plot(c.m.digest, {"series", "gamma", "x", "y", "y_err"});
    Json per_gamma = Json::array();
    std::vector<double> lc_dist, gap_lo, gap_hi, th1, th2, th3;
    for (const auto& s : scans) {
        const double g = io::to_double(s.at("gamma"));
        const double ls = io::to_double(s.at("lambda_star"));
        for (const auto& pt : s.at("points")) {
            plot.row("window_vapor_density", g, io::to_double(pt.at("lambda")),
                     io::to_double(pt.at("vapor").at("mean_density")), io::to_double(pt.at("vapor").at("std_error")));
            plot.row("window_liquid_density", g, io::to_double(pt.at("lambda")),
                     io::to_double(pt.at("liquid").at("mean_density")), io::to_double(pt.at("liquid").at("std_error")));
        }
        for (const auto& pp : s.at("vapor_path"))
            plot.row("path_vapor_density", g, io::to_double(pp.at("lambda")), io::to_double(pp.at("mean_density")),
                     io::to_double(pp.at("mean_density_stderr")));
        for (const auto& pp : s.at("liquid_path"))
            plot.row("path_liquid_density", g, io::to_double(pp.at("lambda")), io::to_double(pp.at("mean_density")),
                     io::to_double(pp.at("mean_density_stderr")));
        const auto lo = gap_at(s.at("pressure_table"), ls - 0.2);
        const auto hi = gap_at(s.at("pressure_table"), ls + 0.2);
        Json row{{"gamma", g},
                 {"lambda_c", s.at("lambda_c")},
                 {"lambda_c_distance", s.at("lambda_c_distance")},
                 {"lambda_c_method", s.at("lambda_c_method")},
                 {"coexistence_detected", s.at("coexistence_detected")},
                 {"pressure_bound_holds", s.at("pressure_bound_holds")},
                 {"gap_at_lambda_star_minus_0.2", lo ? Json(*lo) : Json(nullptr)},
                 {"gap_at_lambda_star_plus_0.2", hi ? Json(*hi) : Json(nullptr)}};
        per_gamma.push_back(row);
        if (!s.at("lambda_c").is_null()) {
            lc_dist.push_back(io::to_double(s.at("lambda_c_distance")));
            plot.row("lambda_c_distance", g, g, lc_dist.back(), io::to_double(s.at("lambda_c_error")));
        }
        if (lo) gap_lo.push_back(std::abs(*lo));
        if (hi) gap_hi.push_back(std::abs(*hi));
        if (lo) plot.row("pressure_gap_minus", g, g, *lo, 0.0);
        if (hi) plot.row("pressure_gap_plus", g, g, *hi, 0.0);
    }
    for (const auto& t : thetas) {
        const double g = io::to_double(t.at("gamma"));
        th1.push_back(io::to_double(t.at("theta1")));
        th2.push_back(io::to_double(t.at("theta2")));
        th3.push_back(io::to_double(t.at("theta3")));
        plot.row("theta1", g, g, th1.back(), 0.0);
        plot.row("theta2", g, g, th2.back(), 0.0);
        plot.row("theta3", g, g, th3.back(), 0.0);
    }
    Json trends{{"note", "trends compare consecutive entries in input order, which should list decreasing gamma"},
                {"theta_decreasing", Json{strictly_decreasing(th1), strictly_decreasing(th2), strictly_decreasing(th3)}},
                {"lambda_c_distance_decreasing", strictly_decreasing(lc_dist)},
                {"gap_minus_shrinking", strictly_decreasing(gap_lo)},
                {"gap_plus_shrinking", strictly_decreasing(gap_hi)}};
    emit_json(c, "report.json", Json{{"per_gamma", per_gamma}, {"thetas", thetas}, {"trends", trends}});
    emit_csv(c, "plot_bundle.csv", plot);
    return kOk;
}

// ---------------------------------------------------------------- verify

int cmd_verify(const Ctx& c) {
    const Json& v = c.m.doc.at("verify");
    std::vector<std::string> names;
    if (v.at("suites").is_null()) names = suites::default_suites();
    else
        for (const auto& s : v.at("suites")) names.push_back(s.get<std::string>());
    if (names.empty()) throw UsageError("verify.suites: empty suite selection");
    for (const auto& n : names)
        if (!suites::known(n)) throw UsageError("verify.suites: unknown suite " + n);
    suites::Options opt{c.m.seed(), v.at("trials").get<std::size_t>(), c.threads};
    Json results = Json::array();
    bool all = true;
    for (const auto& n : names) {
        const auto r = suites::run(n, opt);
        all = all && r.pass;
        c.log << (r.pass ? "PASS " : "FAIL ") << n << " (" << r.checks << " checks, worst margin "
              << io::format_double(r.worst_margin) << ")\n";
        results.push_back(Json{{"suite", r.name}, {"pass", r.pass}, {"checks", r.checks}, {"failures", r.failures},
                               {"worst_margin", r.worst_margin}, {"detail", r.detail}});
    }
    emit_json(c, "verify.json", Json{{"all_pass", all}, {"suites", results}});
    return all ? kOk : kCheckFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Box-model liquid-vapor toolkit", "boxmodel"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::optional<std::size_t> stop_after;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u));
    const std::map<std::string, std::string> commands{
        {"meanfield", "double tangent, good regions and the phi grid"},
        {"freeenergy", "Monte Carlo free-energy tables from a pair potential"},
        {"sample", "one Metropolis chain with traces and a histogram"},
        {"chessboard", "orbit sizes, seminorms and the chessboard inequality"},
        {"thetas", "theta parameters over a list of gamma"},
        {"scan", "lambda scan with hysteresis and pressure comparison"},
        {"verify", "property suites"},
        {"report", "pipeline over gamma and plot bundle"}};
    for (const auto& [name, desc] : commands) {
        auto* sub = app.add_subcommand(name, desc);
        if (name == "scan" || name == "report")
            sub->add_option("--stop-after", stop_after, "stop after this many new window points (resume later)");
    }

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        Json cfg = Json::object();
        if (!config_path.empty()) {
            std::string text;
            try {
                text = io::read_text(config_path);
            } catch (const std::runtime_error& e) {
                err << "usage error: " << e.what() << "\n";
                return kUsage;
            }
            try {
                cfg = Json::parse(text);
            } catch (const Json::parse_error& e) {
                err << "parse error: " << config_path << ": " << e.what() << "\n";
                return kUsage;
            }
        }
        // a manifest.json written by an earlier run is accepted as a config
        if (cfg.is_object() && cfg.contains("header") && cfg.contains("manifest")) {
            const Json inner = cfg.at("manifest");
            const auto again = config::make_manifest(inner, inner.value("command", command), std::nullopt, std::nullopt);
            if (cfg.at("header").value("manifest_digest", "") != "fnv1a64:" + again.digest)
                throw ConfigError("manifest: digest does not match its contents");
            cfg = inner;
        }
        std::optional<std::string> out_opt;
        if (!out_dir.empty()) out_opt = out_dir;
        const auto m = config::make_manifest(cfg, command, seed, out_opt);
        Ctx c{m, fs::path(m.doc.at("out").get<std::string>()), threads, stop_after, out};
        emit_json(c, "manifest.json", Json::object());
        if (command == "meanfield") return cmd_meanfield(c);
        if (command == "freeenergy") return cmd_freeenergy(c);
        if (command == "sample") return cmd_sample(c);
        if (command == "chessboard") return cmd_chessboard(c);
        if (command == "thetas") return cmd_thetas(c);
        if (command == "scan") return cmd_scan(c);
        if (command == "report") return cmd_report(c);
        return cmd_verify(c);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const CapacityError& e) {
        err << "capacity error: " << e.what() << "\n";
        return kCapacity;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const DomainError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const NoCoexistenceError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const WitnessRejectedError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kInternal;
    }
}

}  // namespace boxmodel::cli
