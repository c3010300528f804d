#include "suites.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "boxmodel/chessboard.hpp"
#include "boxmodel/errors.hpp"
#include "boxmodel/meanfield.hpp"
#include "boxmodel/numeric.hpp"
#include "boxmodel/reference.hpp"
#include "boxmodel/spinmodel.hpp"
#include "boxmodel/transition.hpp"

namespace boxmodel::suites {

namespace {

// Hard-core table at γ = 1 with atoms {0, 1, 2}.
ModelParams three_state(int d, int L, double J2, double lambda) {
    FreeEnergyTable t{1.0, {0.0, 1.0, 2.0}, {0.0, 0.3, 1.5}, {}};
    ModelParams p;
    p.d = d;
    p.L = L;
    p.J2 = J2;
    p.lambda = lambda;
    p.domain = SpinDomain::Discrete;
    p.spec = FreeEnergySpec::tabulated({t}, CoreCase::HardCore, 1.0, 2.0, 2.5, kInf);
    return p;
}

struct Tally {
    Result r;
    explicit Tally(std::string name) {
        r.name = std::move(name);
        r.worst_margin = kInf;
    }
    // margin >= 0 passes
    void check(double margin) {
        ++r.checks;
        r.worst_margin = std::min(r.worst_margin, margin);
        if (!(margin >= 0.0)) {
            ++r.failures;
            r.pass = false;
        }
    }
    Result done(std::string detail) {
        if (r.checks == 0) r.worst_margin = 0.0;
        r.detail = std::move(detail);
        return r;
    }
};

Event random_event(const BlockSpec& b, const Torus& torus, CounterRng& rng) {
    Event e;
    for (int s = 0; s <= (b.is_edge() ? 1 : 0); ++s) {
        IntervalSet set;
        for (double a : {0.0, 1.0, 2.0})
            if (rng.uniform() < 0.5) set.parts.emplace_back(a, a);
        if (set.empty()) set.parts.emplace_back(2.0, 2.0);
        std::vector<int> c = b.corner;
        for (std::size_t i = 0; i < c.size(); ++i)
            if (b.ell[i] > 0) c[i] = (c[i] + s) % b.L;
        e = e.intersect(Event::site_event(torus.index(c), set));
    }
    return e;
}

// E[Π τ(E_τ)] ≤ Π ‖E_τ‖ on random events; `deflate` scales the right-hand side (fixture only).
Result chessboard_trials(const Options& o, const std::string& name, double deflate) {
    Tally t(name);
    for (std::size_t k = 0; k < o.trials; ++k) {
        CounterRng rng(o.seed, 0x5ce, k);
        const bool two_d = k % 4 == 3;
        const auto p = two_d ? three_state(2, 2, 0.5 + rng.uniform(), rng.uniform() - 0.5)
                             : three_state(1, 4, 0.2 + rng.uniform(), rng.uniform() - 0.5);
        const Torus torus(p.d, p.L);
        std::vector<int> corner(static_cast<std::size_t>(p.d));
        for (auto& x : corner) x = static_cast<int>(rng() % static_cast<std::uint64_t>(p.L));
        // an edge block needs 4 | L, so the d=2 L=2 instances use vertex blocks
        const BlockSpec b = k % 2 == 1 && !two_d ? BlockSpec::edge(p.d, p.L, 0, corner) : BlockSpec::vertex(p.d, p.L, corner);
        const auto g = orbit_group(b);
        std::map<std::size_t, Event> events;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (rng.uniform() < 2.0 / 3.0) events[i] = random_event(b, torus, rng);
        const auto r = verify_chessboard_inequality(events, b, p);
        t.check(deflate * r.rhs - r.lhs + 1e-12);
    }
    return t.done(std::to_string(o.trials) + " random-event trials on d=1 L=4 and d=2 L=2 three-state instances");
}

Result orbit_sizes(const Options&) {
    Tally t("orbit_size");
    for (int d : {1, 2})
        for (int L = 2; L <= 8; ++L)
            for (int l0 = 0; l0 < L; ++l0)
                for (int l1 = 0; l1 < (d == 2 ? L : 1); ++l1) {
                    BlockSpec b;
                    b.L = L;
                    b.corner.assign(static_cast<std::size_t>(d), 0);
                    b.ell = d == 1 ? std::vector<int>{l0} : std::vector<int>{l0, l1};
                    try {
                        b.validate();
                    } catch (const ConfigError&) {
                        continue;
                    }
                    const auto n = orbit_group(b).size();
                    t.check(n == orbit_size_formula(b) ? 0.0 : -1.0);
                }
    return t.done("|T^R_L| against the product formula for all valid blocks with L <= 8, d <= 2");
}

Result psi_consistency(const Options&) {
    Tally t("psi_consistency");
    for (int d : {1, 2})
        for (double J2 : {0.2, 1.0, 3.0})
            for (double lam : {-1.0, 0.5}) {
                const auto p = three_state(d, d == 1 ? 4 : 2, J2, lam);
                const double lz = exact_log_partition(p) / static_cast<double>(p.sites());
                t.check(lz - psi_lower_bound(p, default_xi_grid(p)).value + 1e-12);
            }
    return t.done("exact log partition per site against the interval bound");
}

Result ds_identity_suite(const Options& o) {
    Tally t("ds_identity");
    const auto spec = FreeEnergySpec::tonks(1.0, 1.0);
    const auto a = find_coexistence(spec, 12.0);
    const auto g = build_good_regions(a, spec);
    ModelParams p;
    p.d = 2;
    p.L = 8;
    p.alpha = 12.0;
    p.gamma = 0.35;
    p.lambda = a.lambda_star;
    p.spec = spec;
    SamplerSettings s;
    s.sweeps = 600;
    s.burn_in = 100;
    s.seed = o.seed;
    const auto regions = g.regions();
    const auto r = sample_observables(p, s, &regions);
    for (const auto& row : r.trace) {
        const double lhs = std::max(row.pi_minus, row.pi_plus);
        t.check(ds_identity(row) ? 0.0 : -1.0);
        t.check(lhs - (1.0 - row.psi) + 1e-15);
    }
    // exhaustive integer form
    for (std::size_t n = 1; n <= 40; ++n)
        for (std::size_t a1 = 0; a1 <= n; ++a1)
            for (std::size_t b1 = 0; a1 + b1 <= n; ++b1) {
                TraceRow row;
                row.sites = n;
                row.n_minus = a1;
                row.n_plus = b1;
                t.check(ds_identity(row) ? 0.0 : -1.0);
            }
    return t.done("max{Pi-, Pi+} >= 1 - Psi on every sampled configuration and on all integer counts up to 40");
}

Result enumeration(const Options& o) {
    Tally t("enumeration");
    // J₂ = 0 single-site marginals against normalized weights
    {
        const auto p = three_state(1, 2, 0.0, 0.1);
        const SiteMeasure omega(p);
        SpinConfig cfg = SpinConfig::constant(p, 0.0);
        std::vector<std::vector<double>> ind(3);
        ProposalSettings prop;
        for (std::size_t k = 0; k < 40000; ++k) {
            CounterRng rng(o.seed, 7, k);
            mcmc_sweep(cfg, p, omega, prop, rng);
            if (k < 100) continue;
            for (int a = 0; a < 3; ++a) ind[a].push_back(cfg.eta[0] == a ? 1.0 : 0.0);
        }
        std::vector<double> w;
        for (double x : {0.0, 1.0, 2.0}) w.push_back(log_site_weight(p, x));
        const double z = log_sum_exp(w);
        for (int a = 0; a < 3; ++a) {
            double m = 0.0;
            for (double x : ind[a]) m += x;
            m /= static_cast<double>(ind[a].size());
            t.check(3.0 * batch_means_stderr(ind[a]) - std::abs(m - std::exp(w[a] - z)));
        }
    }
    // pressure along a λ path against exact enumeration
    for (const auto& [d, L] : std::vector<std::pair<int, int>>{{1, 2}, {1, 4}, {2, 2}}) {
        const auto p = three_state(d, L, 0.5, 0.0);
        std::vector<double> path;
        for (int i = 0; i <= 40; ++i) path.push_back(-8.0 + 0.25 * i);
        PressureSettings s;
        s.sampler.sweeps = 4000;
        s.sampler.burn_in = 200;
        s.sampler.seed = o.seed + 4;
        const auto r = pressure_estimate(p, path, s);
        for (const auto& pt : r.ascending) {
            ModelParams q = p;
            q.lambda = pt.lambda;
            const double exact = exact_log_partition(q) / (q.beta * q.scale() * static_cast<double>(q.sites()));
            t.check(3.0 * pt.error() - std::abs(pt.pressure - exact));
        }
    }
    return t.done("J2=0 marginals and thermodynamic-integration pressures on d=1 L=2, 4 and d=2 L=2 within 3 sigma");
}

Result hard_rods(const Options& o) {
    Tally t("hard_rods");
    const double gamma = 0.02;
    for (int N = 1; N <= 10; ++N) {
        const auto e = particle_free_energy_mc(PairPotential::hard_core(1, 1.0), gamma, 1.0, N, 20000, o.seed,
                                               static_cast<std::uint64_t>(N));
        const double exact = hard_rod_free_energy_exact(1.0, gamma, 1.0, N);
        t.check(3.0 * e.std_error + 1e-12 - std::abs(e.value - exact));
    }
    return t.done("hard-rod Monte Carlo free energies at gamma = 0.02, N <= 10, within 3 standard errors");
}

Result witness(const Options&) {
    Tally t("witness");
    std::vector<double> r, g;
    for (int i = 0; i <= 600; ++i) {
        r.push_back(0.02 * i);
        g.push_back(std::exp(-r.back() * r.back()));
    }
    for (int d : {1, 2, 3}) {
        const auto w = check_superstability_witness(PairPotential::table(d, r, g), r, g);
        t.check(w.verdict ? 0.0 : -1.0);
        t.check(w.C > 0.0 ? 0.0 : -1.0);
    }
    return t.done("Gaussian witness exp(-r^2) dominated by itself in d = 1, 2, 3");
}

Result budget(const Options&) {
    Tally t("ds_budget");
    const double b = ds_budget(0.5, 0.0, 0.0).budget;
    t.check(1e-9 - std::abs(b - (1.0 - 0.25 - std::sqrt(0.5))));
    return t.done("ds_budget(0.5, 0, 0) = 3/4 - sqrt(1/2)");
}

const std::map<std::string, std::function<Result(const Options&)>>& table() {
    static const std::map<std::string, std::function<Result(const Options&)>> m{
        {"chessboard_inequality", [](const Options& o) { return chessboard_trials(o, "chessboard_inequality", 1.0); }},
        {"orbit_size", orbit_sizes},
        {"psi_consistency", psi_consistency},
        {"ds_identity", ds_identity_suite},
        {"enumeration", enumeration},
        {"hard_rods", hard_rods},
        {"witness", witness},
        {"ds_budget", budget},
        // right-hand side halved: the fixture must be reported as failing
        {"injected_violation", [](const Options& o) {
             Options one = o;
             one.trials = std::min<std::size_t>(o.trials, 4);
             return chessboard_trials(one, "injected_violation", 0.5);
         }}};
    return m;
}

}  // namespace

std::vector<std::string> default_suites() {
    return {"orbit_size", "chessboard_inequality", "psi_consistency", "ds_identity",
            "enumeration", "hard_rods",            "witness",         "ds_budget"};
}

bool known(const std::string& name) { return table().count(name) > 0; }

Result run(const std::string& name, const Options& opt) { return table().at(name)(opt); }

}  // namespace boxmodel::suites
