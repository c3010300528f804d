#include "boxmodel/transition.hpp"

#include <algorithm>
#include <cmath>

#include "boxmodel/errors.hpp"
#include "boxmodel/numeric.hpp"
#include "boxmodel/parallel.hpp"

namespace boxmodel {

double terminal_density(const MeanFieldAnalysis& a, const FreeEnergySpec& spec, const MeanFieldOptions& opt) {
    const double lam = a.lambda_star + 1.0;  // φ_λ(ρ) is smallest at the top of the λ range for ρ ≥ 0
    const double upper = spec.hard_core() ? *spec.rho_max : density_upper(spec, a.alpha, lam);
    const auto rho = linspace(0.0, upper, opt.grid_points);
    const double level = a.m_star + 1.0;
    std::size_t i = rho.size();
    while (i > 0 && eval_phi(spec, a.alpha, lam, rho[i - 1]) >= level) --i;
    if (i == rho.size()) throw ConfigError("terminal density: phi stays below m_* + 1 up to the grid end");
    return rho[i];
}

namespace {

/// Crossing of φ_{λ_*} = level between an inside point and an outside point.
double level_crossing(const FreeEnergySpec& spec, double alpha, double lambda, double level, double inside,
                      double outside) {
    for (int it = 0; it < 100 && std::abs(outside - inside) > 1e-14; ++it) {
        const double mid = 0.5 * (inside + outside);
        if (eval_phi(spec, alpha, lambda, mid) <= level)
            inside = mid;
        else
            outside = mid;
    }
    return inside;
}

}  // namespace

GoodRegionSpec build_good_regions(const MeanFieldAnalysis& a, const FreeEnergySpec& spec, std::optional<double> delta,
                                  std::optional<double> kappa, const MeanFieldOptions& opt) {
    GoodRegionSpec g;
    g.lambda_star = a.lambda_star;
    g.rho_zero = a.rho_zero;
    const double barrier = eval_phi(spec, a.alpha, a.lambda_star, a.rho_zero) - a.m_star;
    g.delta_cap = std::min(barrier, 1.0);
    bool cp_at_minimum = false;
    if (spec.hard_core()) {
        const double at_cp = eval_phi(spec, a.alpha, a.lambda_star, *spec.rho_cp);
        if (std::abs(at_cp - a.m_star) <= opt.value_tol)
            cp_at_minimum = true;
        else
            g.delta_cap = std::min(g.delta_cap, at_cp - a.m_star);
    }
    g.rho_T = terminal_density(a, spec, opt);
    g.kappa_cap = std::min(1.0, 1.0 / (a.rho_plus + g.rho_T));
    g.delta = delta.value_or(0.3 * g.delta_cap);
    g.kappa = kappa.value_or(0.5 * g.kappa_cap);
    if (!(g.delta > 0.0 && g.delta < g.delta_cap))
        throw ConfigError("good regions: delta = " + std::to_string(g.delta) +
                          " violates the cap delta_0 = min{phi(rho_0) - m_*, 1, hard-core margin} = " +
                          std::to_string(g.delta_cap));
    if (!(g.kappa > 0.0 && g.kappa < g.kappa_cap))
        throw ConfigError("good regions: kappa = " + std::to_string(g.kappa) +
                          " violates the cap min{1, 1/(rho_+ + rho_T)} = " + std::to_string(g.kappa_cap));

    const auto& rho = a.phi_star.rho;
    const auto& val = a.phi_star.value;
    const double level = a.m_star + g.delta;
    auto inside = [&](std::size_t i) { return std::isfinite(val[i]) && val[i] <= level; };
    for (std::size_t i = 0; i < rho.size();) {
        if (!inside(i)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < rho.size() && inside(j + 1)) ++j;
        const double lo = i == 0 ? rho[0] : level_crossing(spec, a.alpha, a.lambda_star, level, rho[i], rho[i - 1]);
        const double hi = j + 1 == rho.size() ? rho[j]
                                               : level_crossing(spec, a.alpha, a.lambda_star, level, rho[j], rho[j + 1]);
        (hi < a.rho_zero ? g.minus : g.plus).parts.emplace_back(lo, hi);
        i = j + 1;
    }
    if (cp_at_minimum) {
        g.i_delta.parts.emplace_back(*spec.rho_cp, *spec.rho_cp + g.delta);
        g.plus = unite(g.plus, g.i_delta);
    }
    g.minus.normalize();
    g.plus.normalize();
    if (g.minus.empty() || g.plus.empty()) throw ConfigError("good regions: a sublevel set is empty");
    if (!(distance(g.minus, g.plus) > 0.0)) throw ConfigError("good regions: G_- and G_+ touch");
    g.lambda_minus = a.lambda_star - g.kappa * g.delta;
    g.lambda_plus = a.lambda_star + g.kappa * g.delta;
    return g;
}

double log_mass_in(const SiteMeasure& omega, const IntervalSet& set) {
    double acc = -kInf;
    if (omega.discrete()) {
        for (std::size_t i = 0; i < omega.atoms().size(); ++i)
            if (set.contains(omega.atoms()[i])) acc = log_add(acc, omega.atom_log_weights()[i]);
        return acc;
    }
    for (const auto& [a, b] : set.parts) acc = log_add(acc, omega.log_mass(a, b));
    return acc;
}

double log_mass_outside(const SiteMeasure& omega, const IntervalSet& set) {
    double acc = -kInf;
    if (omega.discrete()) {
        for (std::size_t i = 0; i < omega.atoms().size(); ++i)
            if (!set.contains(omega.atoms()[i])) acc = log_add(acc, omega.atom_log_weights()[i]);
        return acc;
    }
    for (const auto& [a, b] : complement(set, 0.0, omega.upper()).parts) acc = log_add(acc, omega.log_mass(a, b));
    return acc;
}

ThetaReport compute_thetas(const ModelParams& p, const GoodRegionSpec& g, std::vector<double> lambdas) {
    if (lambdas.empty()) lambdas = linspace(g.lambda_minus, g.lambda_plus, 5);
    std::sort(lambdas.begin(), lambdas.end());
    const double tol = 1e-12 * std::max(1.0, std::abs(g.lambda_star));
    if (std::abs(lambdas.front() - g.lambda_minus) > tol || std::abs(lambdas.back() - g.lambda_plus) > tol)
        throw ConfigError("thetas: lambda samples must include both endpoints lambda_-(delta), lambda_+(delta)");
    const IntervalSet both = unite(g.minus, g.plus);
    const double dist = distance(g.minus, g.plus);
    ThetaReport r;
    r.gamma = p.gamma;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        ModelParams q = p;
        q.lambda = lambdas[k];
        const SiteMeasure omega(q);
        ThetaPoint pt;
        pt.lambda = lambdas[k];
        pt.psi = psi_lower_bound(omega, default_xi_grid(q)).value;
        pt.log_outside = log_mass_outside(omega, both) - pt.psi;
        pt.log_minus = log_mass_in(omega, g.minus) - pt.psi;
        pt.log_plus = log_mass_in(omega, g.plus) - pt.psi;
        pt.theta1 = std::exp(pt.log_outside);
        pt.theta2 = std::exp(-0.5 * q.J() * dist * dist + 0.5 * (pt.log_minus + pt.log_plus));
        r.theta1 = std::max(r.theta1, pt.theta1);
        r.theta2 = std::max(r.theta2, pt.theta2);
        if (k == 0) r.theta3_minus = std::exp(log_mass_outside(omega, g.minus) - pt.psi);
        if (k + 1 == lambdas.size()) r.theta3_plus = std::exp(log_mass_outside(omega, g.plus) - pt.psi);
        r.points.push_back(pt);
    }
    r.theta3 = std::max(r.theta3_minus, r.theta3_plus);
    return r;
}

DsBudget ds_budget(double eps, double delta1, double delta2) {
    if (!(eps > 0.0 && eps <= 0.5)) throw DomainError("ds_budget: epsilon must lie in (0, 1/2]");
    if (delta1 < 0.0 || delta2 < 0.0) throw DomainError("ds_budget: delta1, delta2 must be nonnegative");
    DsBudget r;
    r.budget = 1.0 - eps / 2.0 - std::sqrt(1.0 - eps);
    const double s = delta1 + delta2;
    r.verdict = s <= r.budget;
    if (r.verdict) {
        // (1−δ₃)(1 − 2s/δ₃) = 1 − ε  ⇔  δ₃² − (ε + 2s)δ₃ + 2s = 0; the larger root is ≤ ε
        const double b = eps + 2.0 * s;
        const double disc = std::max(0.0, b * b - 8.0 * s);
        const double big = 0.5 * (b + std::sqrt(disc));
        r.delta3 = big;
    }
    return r;
}

bool ds_identity(const TraceRow& row) {
    if (row.sites > 0) {
        const std::size_t mx = std::max(row.n_minus, row.n_plus);
        return mx * row.sites >= row.n_minus * row.n_minus + row.n_plus * row.n_plus;
    }
    return std::max(row.pi_minus, row.pi_plus) >= 1.0 - row.psi;
}

ErgodicResult ergodic_density_bound(const std::vector<TraceRow>& trace, double delta3) {
    if (trace.empty()) throw DomainError("ergodic bound: empty trace");
    ErgodicResult r;
    r.rows = trace.size();
    std::size_t hits = 0;
    for (const auto& row : trace) {
        if (std::max(row.pi_minus, row.pi_plus) >= 1.0 - delta3) ++hits;
        if (!ds_identity(row)) {
            r.identity_holds = false;
            ++r.violations;
        }
    }
    r.frequency = static_cast<double>(hits) / static_cast<double>(trace.size());
    return r;
}

std::vector<double> branch_path(double from, double to, const PathSettings& s) {
    std::vector<double> out{from};
    const double dir = to > from ? 1.0 : -1.0;
    double step = s.fine_step;
    double x = from;
    while (dir * (to - x) > 1e-12) {
        x += dir * step;
        if (dir * (to - x) < 0.5 * step) x = to;
        out.push_back(x);
        step = std::min(step * s.growth, s.max_step);
    }
    return out;
}

namespace {

BranchStats branch_stats(const SampleResult& r, const IntervalSet& own, double delta3) {
    BranchStats b;
    b.mean_density = r.mean_density;
    b.std_error = r.mean_density_stderr;
    std::size_t in = 0;
    for (double m : r.mean_density_series)
        if (own.contains(m)) ++in;
    b.in_region_fraction = static_cast<double>(in) / static_cast<double>(r.mean_density_series.size());
    for (const auto& row : r.trace) {
        b.pi_minus += row.pi_minus;
        b.pi_plus += row.pi_plus;
        b.psi += row.psi;
    }
    const double n = static_cast<double>(r.trace.size());
    b.pi_minus /= n;
    b.pi_plus /= n;
    b.psi /= n;
    const ErgodicResult e = ergodic_density_bound(r.trace, delta3);
    b.identity_holds = e.identity_holds;
    b.ergodic_frequency = e.frequency;
    b.acceptance = r.acceptance;
    b.histogram = r.histogram;
    b.trace = r.trace;
    return b;
}

constexpr std::uint64_t kWindowChains = 1ull << 24;
constexpr std::uint64_t kVaporChains = 2ull << 24;
constexpr std::uint64_t kLiquidChains = 3ull << 24;

double interp(const std::vector<PressurePoint>& pts, double lam, double PressurePoint::*field) {
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        if (lam >= pts[i].lambda && lam <= pts[i + 1].lambda) {
            const double t = (lam - pts[i].lambda) / (pts[i + 1].lambda - pts[i].lambda);
            return (1 - t) * (pts[i].*field) + t * (pts[i + 1].*field);
        }
    throw DomainError("interp: lambda outside the branch path");
}

}  // namespace

ScanPoint scan_point(const ModelParams& p, const MeanFieldAnalysis& a, const GoodRegionSpec& g, double lambda,
                     std::size_t index, const ScanSettings& s) {
    ModelParams q = p;
    q.lambda = lambda;
    const GoodRegions regions = g.regions();
    ScanPoint pt;
    pt.lambda = lambda;
    for (int branch = 0; branch < 2; ++branch) {
        SamplerSettings ss;
        ss.sweeps = s.sweeps;
        ss.burn_in = s.burn_in;
        ss.thin = s.thin;
        ss.seed = s.seed;
        ss.chain = kWindowChains + 2 * index + static_cast<std::uint64_t>(branch);
        ss.histogram = s.histogram;
        const double start = round_to_domain(q, branch == 0 ? a.rho_minus : a.rho_plus);
        const SampleResult r = sample_observables(q, ss, &regions, SpinConfig::constant(q, start));
        (branch == 0 ? pt.vapor : pt.liquid) = branch_stats(r, branch == 0 ? g.minus : g.plus, s.delta3);
    }
    const double sigma = std::hypot(pt.vapor.std_error, pt.liquid.std_error);
    const double sep = std::abs(pt.liquid.mean_density - pt.vapor.mean_density);
    pt.separation_sigma = sigma > 0.0 ? sep / sigma : (sep > 0.0 ? kInf : 0.0);
    pt.two_phase = pt.separation_sigma > 5.0;
    return pt;
}

TransitionReport lambda_scan(const ModelParams& p, const MeanFieldAnalysis& a, const GoodRegionSpec& g,
                             const ScanSettings& s, std::vector<std::optional<ScanPoint>> done) {
    TransitionReport rep;
    rep.gamma = p.gamma;
    rep.L = p.L;
    rep.d = p.d;
    rep.lambda_star = a.lambda_star;
    rep.regions = g;
    const std::vector<double> lambdas = s.lambdas.empty() ? linspace(g.lambda_minus, g.lambda_plus, 5) : s.lambdas;
    for (double lam : lambdas)
        if (lam < g.lambda_minus - 1e-12 || lam > g.lambda_plus + 1e-12)
            throw ConfigError("scan: lambda grid must lie inside [lambda_-, lambda_+]");
    done.resize(lambdas.size());
    parallel_for(lambdas.size(), s.threads, [&](std::size_t i) {
        if (!done[i]) done[i] = scan_point(p, a, g, lambdas[i], i, s);
    });
    for (auto& d : done) rep.points.push_back(std::move(*d));
    rep.coexistence_detected =
        std::any_of(rep.points.begin(), rep.points.end(), [](const ScanPoint& x) { return x.two_phase; });
    if (!rep.coexistence_detected) rep.warnings.push_back("no branch separation on the lambda grid");

    if (s.pressures) {
        const PathSettings& ps = s.path;
        const double o = ps.overlap;
        const auto n_common = static_cast<std::size_t>(std::llround(2.0 * o / ps.fine_step)) + 1;
        const auto common = linspace(a.lambda_star - o, a.lambda_star + o, n_common);
        auto below = branch_path(a.lambda_star - o, a.lambda_star - ps.lambda_low_offset, ps);
        std::reverse(below.begin(), below.end());
        std::vector<double> vapor(below.begin(), below.end() - 1);
        vapor.insert(vapor.end(), common.begin(), common.end());
        const auto above = branch_path(a.lambda_star + o, ps.lambda_high, ps);
        std::vector<double> liquid = common;
        liquid.insert(liquid.end(), above.begin() + 1, above.end());

        SamplerSettings ss;
        ss.sweeps = ps.sweeps;
        ss.burn_in = ps.burn_in;
        ss.seed = s.seed;
        ss.histogram = s.histogram;
        parallel_for(2, s.threads, [&](std::size_t b) {
            if (b == 0)
                rep.vapor_path = run_pressure_branch(p, vapor, ss, false, kVaporChains);
            else
                rep.liquid_path = run_pressure_branch(p, liquid, ss, true, kLiquidChains);
        });
        ModelParams lo = p, hi = p;
        lo.lambda = vapor.front();
        hi.lambda = liquid.back();
        const auto [va, ve] = product_anchor(lo);
        const auto [la, le] = product_anchor(hi);
        integrate_branch(rep.vapor_path, 0, va, ve);
        integrate_branch(rep.liquid_path, rep.liquid_path.size() - 1, la, le);

        // first sign change of p_vapor − p_liquid on the shared grid
        for (std::size_t i = 0; i + 1 < common.size(); ++i) {
            auto diff = [&](double lam) {
                return interp(rep.vapor_path, lam, &PressurePoint::pressure) -
                       interp(rep.liquid_path, lam, &PressurePoint::pressure);
            };
            const double d0 = diff(common[i]);
            const double d1 = diff(common[i + 1]);
            if (d0 >= 0.0 && d1 < 0.0) {
                const double t = d0 / (d0 - d1);
                rep.lambda_c = common[i] + t * (common[i + 1] - common[i]);
                auto err = [&](double lam) {
                    return interp(rep.vapor_path, lam, &PressurePoint::stat_error) +
                           interp(rep.vapor_path, lam, &PressurePoint::quad_error) +
                           interp(rep.vapor_path, lam, &PressurePoint::anchor_error) +
                           interp(rep.liquid_path, lam, &PressurePoint::stat_error) +
                           interp(rep.liquid_path, lam, &PressurePoint::quad_error) +
                           interp(rep.liquid_path, lam, &PressurePoint::anchor_error);
                };
                const double jump = interp(rep.liquid_path, *rep.lambda_c, &PressurePoint::mean_density) -
                                    interp(rep.vapor_path, *rep.lambda_c, &PressurePoint::mean_density);
                rep.lambda_c_error = err(*rep.lambda_c) / std::max(std::abs(jump), 1e-12);
                rep.lambda_c_method = "pressure-crossing";
                break;
            }
        }
        rep.pressure_table = pressure_comparison(p, rep.vapor_path, rep.liquid_path);
    }
    if (!rep.lambda_c && s.pressures) {
        // branches merged: λ where the branch densities sit symmetrically about ρ_{*,0}
        std::vector<std::pair<double, double>> curve;
        for (const auto& x : rep.vapor_path) {
            double m = x.mean_density;
            for (const auto& y : rep.liquid_path)
                if (std::abs(y.lambda - x.lambda) < 1e-12) m = 0.5 * (m + y.mean_density);
            curve.emplace_back(x.lambda, m);
        }
        for (const auto& y : rep.liquid_path)
            if (y.lambda > rep.vapor_path.back().lambda + 1e-12) curve.emplace_back(y.lambda, y.mean_density);
        double best = kInf;
        for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
            const auto [l0, m0] = curve[i];
            const auto [l1, m1] = curve[i + 1];
            if ((m0 - g.rho_zero) * (m1 - g.rho_zero) > 0.0 || m0 == m1) continue;
            const double lam = l0 + (g.rho_zero - m0) / (m1 - m0) * (l1 - l0);
            if (std::abs(lam - a.lambda_star) < best) {
                best = std::abs(lam - a.lambda_star);
                rep.lambda_c = lam;
                rep.lambda_c_error = l1 - l0;
            }
        }
        if (rep.lambda_c) rep.lambda_c_method = "density-midpoint";
    }
    if (!rep.lambda_c) {
        // last resort: pooled share of window sweeps above ρ_{*,0} crosses 1/2
        std::vector<double> share;
        for (const auto& pt : rep.points) {
            std::size_t above = 0, total = 0;
            for (const auto* b : {&pt.vapor, &pt.liquid})
                for (const auto& row : b->trace) {
                    ++total;
                    if (row.mean_density > g.rho_zero) ++above;
                }
            share.push_back(total ? static_cast<double>(above) / static_cast<double>(total) : 0.0);
        }
        for (std::size_t i = 0; i + 1 < share.size(); ++i)
            if ((share[i] - 0.5) * (share[i + 1] - 0.5) <= 0.0 && share[i] != share[i + 1]) {
                const double t = (0.5 - share[i]) / (share[i + 1] - share[i]);
                rep.lambda_c = rep.points[i].lambda + t * (rep.points[i + 1].lambda - rep.points[i].lambda);
                rep.lambda_c_error = rep.points[i + 1].lambda - rep.points[i].lambda;
                rep.lambda_c_method = "equal-weight";
                break;
            }
        if (!rep.lambda_c) rep.warnings.push_back("lambda_c not located on the scanned range");
    }
    return rep;
}

std::vector<PressureRow> pressure_comparison(const ModelParams& p, const std::vector<PressurePoint>& vapor,
                                             const std::vector<PressurePoint>& liquid) {
    std::vector<double> lambdas;
    for (const auto& x : vapor) lambdas.push_back(x.lambda);
    for (const auto& x : liquid) lambdas.push_back(x.lambda);
    std::sort(lambdas.begin(), lambdas.end());
    lambdas.erase(std::unique(lambdas.begin(), lambdas.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                  lambdas.end());
    auto find = [](const std::vector<PressurePoint>& v, double lam) -> const PressurePoint* {
        for (const auto& x : v)
            if (std::abs(x.lambda - lam) < 1e-12) return &x;
        return nullptr;
    };
    std::vector<PressureRow> rows(lambdas.size());
    parallel_for(lambdas.size(), 1, [&](std::size_t i) {
        const double lam = lambdas[i];
        const PressurePoint* v = find(vapor, lam);
        const PressurePoint* l = find(liquid, lam);
        const PressurePoint* best = v && (!l || v->pressure >= l->pressure) ? v : l;
        PressureRow& row = rows[i];
        row.lambda = lam;
        row.branch = best == v ? "vapor" : "liquid";
        row.sampled = best->pressure;
        row.stat_error = best->stat_error;
        row.quad_error = best->quad_error;
        row.anchor_error = best->anchor_error;
        row.gates_penrose = gates_penrose_pressure(p.spec, p.alpha, lam);
        row.gap = row.sampled - row.gates_penrose;
        ModelParams q = p;
        q.lambda = lam;
        const double psi = psi_lower_bound(q, default_xi_grid(q), 128).value / (q.beta * q.scale());
        row.finite_gamma_slack = std::max(0.0, row.gates_penrose - psi);
    });
    return rows;
}

}  // namespace boxmodel
