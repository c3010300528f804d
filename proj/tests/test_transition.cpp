#include <cmath>

#include "boxmodel/errors.hpp"
#include "boxmodel/meanfield.hpp"
#include "boxmodel/transition.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace boxmodel;

namespace {

ModelParams tonks_params(double gamma, int L = 8) {
    ModelParams p;
    p.d = 2;
    p.L = L;
    p.beta = 1.0;
    p.alpha = 12.0;
    p.J2 = 1.0;
    p.gamma = gamma;
    p.domain = SpinDomain::Continuous;
    p.spec = FreeEnergySpec::tonks(1.0, 1.0);
    return p;
}

double total_length(const IntervalSet& s) {
    double acc = 0.0;
    for (const auto& [a, b] : s.parts) acc += b - a;
    return acc;
}

TraceRow row(std::size_t n, std::size_t nm, std::size_t np) {
    TraceRow r;
    r.sites = n;
    r.n_minus = nm;
    r.n_plus = np;
    r.pi_minus = static_cast<double>(nm) / static_cast<double>(n);
    r.pi_plus = static_cast<double>(np) / static_cast<double>(n);
    r.psi = 1.0 - r.pi_minus * r.pi_minus - r.pi_plus * r.pi_plus;
    return r;
}

}  // namespace

TEST_CASE("good regions of the symmetric double well") {
    const auto spec = fixture::double_well_spec();
    const auto a = find_coexistence(spec, 0.0);
    const double delta = 0.1;
    const auto g = build_good_regions(a, spec, delta);
    REQUIRE(g.minus.parts.size() == 1);
    REQUIRE(g.plus.parts.size() == 1);
    // (ρ−1)(ρ−3) = ±√δ
    const double s = std::sqrt(delta);
    CHECK(g.minus.lower() == doctest::Approx(2.0 - std::sqrt(1.0 + s)).epsilon(1e-5));
    CHECK(g.minus.upper() == doctest::Approx(2.0 - std::sqrt(1.0 - s)).epsilon(1e-5));
    CHECK(g.plus.lower() == doctest::Approx(2.0 + std::sqrt(1.0 - s)).epsilon(1e-5));
    CHECK(g.plus.upper() == doctest::Approx(2.0 + std::sqrt(1.0 + s)).epsilon(1e-5));
    CHECK(g.i_delta.empty());
    CHECK(g.minus.upper() < g.rho_zero);
    CHECK(g.plus.lower() > g.rho_zero);
    CHECK(g.lambda_minus == doctest::Approx(a.lambda_star - g.kappa * delta));
    CHECK(g.lambda_plus == doctest::Approx(a.lambda_star + g.kappa * delta));
    CHECK(g.delta_cap == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(g.kappa == doctest::Approx(0.5 * g.kappa_cap));

    CHECK_THROWS_AS(build_good_regions(a, spec, 1.0), ConfigError);
    CHECK_THROWS_AS(build_good_regions(a, spec, 0.1, g.kappa_cap), ConfigError);
    CHECK_THROWS_AS(build_good_regions(a, spec, -0.1), ConfigError);
}

TEST_CASE("good regions shrink with delta") {
    const auto spec = FreeEnergySpec::tonks(1.0, 1.0);
    const auto a = find_coexistence(spec, 12.0);
    const auto g0 = build_good_regions(a, spec);
    CHECK(g0.delta == doctest::Approx(0.3 * g0.delta_cap));
    CHECK(g0.i_delta.empty());
    CHECK(g0.minus.contains(a.rho_minus));
    CHECK(g0.plus.contains(a.rho_plus));
    GoodRegionSpec prev;
    bool first = true;
    for (double delta : {0.07, 0.04, 0.02, 0.01, 0.005}) {
        const auto g = build_good_regions(a, spec, delta);
        for (double rho : a.phi_star.rho)
            if (g.minus.contains(rho) || g.plus.contains(rho))
                CHECK(eval_phi(spec, 12.0, a.lambda_star, rho) <= a.m_star + delta + 1e-9);
        if (!first) {
            CHECK(total_length(g.minus) < total_length(prev.minus));
            CHECK(total_length(g.plus) < total_length(prev.plus));
            CHECK(prev.minus.lower() <= g.minus.lower());
            CHECK(prev.plus.upper() >= g.plus.upper());
        }
        prev = g;
        first = false;
    }
}

TEST_CASE("hard-core minimum at close packing adds I(delta)") {
    // f = ρ²(ρ−2)² on [0, 2], ρ_cp = 2: the liquid minimizer sits at ρ_cp
    FreeEnergyTable t;
    t.rho = linspace(0.0, 2.0, 2001);
    for (double r : t.rho) t.f.push_back(r * r * (r - 2) * (r - 2));
    const auto spec = FreeEnergySpec::tabulated({t}, CoreCase::HardCore, 1.0, 2.0, 3.0, kInf);
    const auto a = find_coexistence(spec, 0.0);
    REQUIRE(a.rho_plus == doctest::Approx(2.0).epsilon(1e-6));
    const auto g = build_good_regions(a, spec, 0.1);
    REQUIRE(g.i_delta.parts.size() == 1);
    CHECK(g.i_delta.lower() == doctest::Approx(2.0));
    CHECK(g.i_delta.upper() == doctest::Approx(2.1));
    CHECK(g.plus.contains(2.05));
}

TEST_CASE("theta values on a three-atom instance") {
    auto p = fixture::discrete_params(fixture::three_state_spec(), 1, 4, 1.0, 0.0);
    GoodRegionSpec g;
    g.minus.parts = {{0.0, 0.5}};
    g.plus.parts = {{0.9, 2.5}};
    g.lambda_minus = -0.1;
    g.lambda_plus = 0.1;
    g.lambda_star = 0.0;
    const auto r = compute_thetas(p, g, {-0.1, 0.0, 0.1});
    CHECK(r.theta1 == 0.0);
    CHECK(r.points.size() == 3);
    CHECK(r.theta2 > 0.0);
    CHECK(r.theta3 > 0.0);
    CHECK(r.theta3 == std::max(r.theta3_minus, r.theta3_plus));

    // θ₂ collapses with the Gaussian factor
    double last = r.theta2;
    for (double J2 : {10.0, 100.0, 1000.0}) {
        p.J2 = J2;
        const auto q = compute_thetas(p, g, {-0.1, 0.1});
        CHECK(q.theta2 < last);
        last = q.theta2;
    }
    CHECK(last < 1e-15);

    CHECK_THROWS_AS(compute_thetas(p, g, {-0.1, 0.05}), ConfigError);
}

TEST_CASE("thetas are monotone in delta") {
    const auto spec = FreeEnergySpec::tonks(1.0, 1.0);
    const auto a = find_coexistence(spec, 12.0);
    auto p = tonks_params(0.5);
    const auto g0 = build_good_regions(a, spec);
    ThetaReport prev;
    bool first = true;
    for (double delta : {0.02, 0.04, 0.06}) {
        auto g = build_good_regions(a, spec, delta, g0.kappa);
        // same λ samples for every δ so only the regions change
        g.lambda_minus = g0.lambda_minus;
        g.lambda_plus = g0.lambda_plus;
        const auto r = compute_thetas(p, g);
        if (!first) {
            CHECK(r.theta1 <= prev.theta1);
            CHECK(r.theta3 <= prev.theta3);
            for (std::size_t k = 0; k < r.points.size(); ++k) {
                CHECK(r.points[k].log_minus >= prev.points[k].log_minus);
                CHECK(r.points[k].log_plus >= prev.points[k].log_plus);
            }
        }
        prev = r;
        first = false;
    }
}

TEST_CASE("Tonks thetas decrease with gamma") {
    const auto spec = FreeEnergySpec::tonks(1.0, 1.0);
    const auto a = find_coexistence(spec, 12.0);
    const auto g = build_good_regions(a, spec);
    std::vector<ThetaReport> rs;
    for (double gamma : {0.5, 0.35, 0.25}) rs.push_back(compute_thetas(tonks_params(gamma), g));
    for (std::size_t i = 0; i + 1 < rs.size(); ++i) {
        CHECK(rs[i + 1].theta1 < rs[i].theta1);
        CHECK(rs[i + 1].theta2 < rs[i].theta2);
        CHECK(rs[i + 1].theta3 < rs[i].theta3);
    }
}

TEST_CASE("ds_budget") {
    const auto r = ds_budget(0.5, 0.0, 0.0);
    CHECK(r.budget == doctest::Approx(1.0 - 0.25 - std::sqrt(0.5)).epsilon(1e-15));
    CHECK(std::abs(r.budget - 0.042893) < 1e-6);
    CHECK(r.verdict);
    for (double eps : {0.1, 0.3, 0.5}) {
        const double b = ds_budget(eps, 0.0, 0.0).budget;
        const auto at = ds_budget(eps, 0.4 * b, 0.6 * b);
        CHECK(at.verdict);
        CHECK_FALSE(ds_budget(eps, 0.4 * b, 0.6 * b + 1e-9).verdict);
        for (double frac : {0.0, 0.3, 0.9, 1.0}) {
            const double s = frac * b;
            const auto v = ds_budget(eps, s / 2, s / 2);
            REQUIRE(v.delta3.has_value());
            const double d3 = *v.delta3;
            CHECK(d3 <= eps + 1e-15);
            if (s > 0.0) CHECK(std::abs((1 - d3) * (1 - 2 * s / d3) - (1 - eps)) < 1e-12);
        }
    }
    CHECK_FALSE(ds_budget(0.3, 0.1, 0.1).delta3.has_value());
    CHECK_THROWS_AS(ds_budget(0.0, 0.0, 0.0), DomainError);
    CHECK_THROWS_AS(ds_budget(0.6, 0.0, 0.0), DomainError);
    CHECK_THROWS_AS(ds_budget(0.3, -1.0, 0.0), DomainError);
}

TEST_CASE("ergodic density bound on synthetic traces") {
    std::vector<TraceRow> pure{row(16, 16, 0), row(16, 0, 16), row(16, 16, 0)};
    for (const auto& r : pure) CHECK(r.psi == 0.0);
    for (double d3 : {1e-6, 0.05, 0.5}) CHECK(ergodic_density_bound(pure, d3).frequency == 1.0);

    // Ψ near 0.3 on every row; whether max Π ≥ 0.8 depends on the split
    std::vector<TraceRow> mixed{row(100, 83, 0), row(100, 70, 25), row(100, 0, 83), row(100, 14, 78)};
    const auto e = ergodic_density_bound(mixed, 0.2);
    CHECK(e.identity_holds);
    CHECK(e.violations == 0);
    CHECK(e.frequency == doctest::Approx(0.5));
    CHECK(e.rows == 4);

    // exhaustive integer check of the identity
    for (std::size_t n = 1; n <= 12; ++n)
        for (std::size_t a = 0; a <= n; ++a)
            for (std::size_t b = 0; a + b <= n; ++b) CHECK(ds_identity(row(n, a, b)));

    CHECK_THROWS_AS(ergodic_density_bound({}, 0.1), DomainError);
}

TEST_CASE("branch path") {
    PathSettings s;
    const auto up = branch_path(1.0, 10.0, s);
    CHECK(up.front() == 1.0);
    CHECK(up.back() == 10.0);
    for (std::size_t i = 1; i < up.size(); ++i) {
        CHECK(up[i] > up[i - 1]);
        CHECK(up[i] - up[i - 1] <= s.max_step * 1.5 + 1e-12);
    }
    CHECK(up[1] - up[0] == doctest::Approx(s.fine_step));
    const auto down = branch_path(0.0, -3.0, s);
    CHECK(down.back() == -3.0);
    CHECK(branch_path(2.0, 2.0, s).size() == 1);
}

TEST_CASE("scan far below coexistence stays in the vapor basin") {
    const auto spec = FreeEnergySpec::tonks(1.0, 1.0);
    const auto a = find_coexistence(spec, 12.0);
    const auto g = build_good_regions(a, spec);
    auto p = tonks_params(0.25, 8);
    ScanSettings s;
    s.sweeps = 400;
    s.burn_in = 100;
    s.thin = 1;
    const auto pt = scan_point(p, a, g, a.lambda_star - 3.5, 0, s);
    CHECK(g.minus.contains(pt.vapor.mean_density));
    CHECK(g.minus.contains(pt.liquid.mean_density));
    CHECK_FALSE(pt.two_phase);
    CHECK(pt.vapor.identity_holds);
    CHECK(pt.liquid.identity_holds);
    CHECK(pt.vapor.ergodic_frequency >= 0.99);
}

TEST_CASE("scan near coexistence separates the branches") {
    const auto spec = FreeEnergySpec::tonks(1.0, 1.0);
    const auto a = find_coexistence(spec, 12.0);
    const auto g = build_good_regions(a, spec);
    auto p = tonks_params(0.25, 8);
    ScanSettings s;
    s.lambdas = {g.lambda_minus, a.lambda_star, g.lambda_plus};
    s.sweeps = 400;
    s.burn_in = 100;
    s.thin = 1;
    s.pressures = false;
    s.threads = 2;
    const auto rep = lambda_scan(p, a, g, s);
    CHECK(rep.coexistence_detected);
    for (const auto& pt : rep.points) {
        CHECK(pt.vapor.in_region_fraction >= 0.95);
        CHECK(pt.liquid.in_region_fraction >= 0.95);
        CHECK(pt.vapor.identity_holds);
        CHECK(pt.liquid.identity_holds);
    }
    // restoring finished points reproduces the report
    std::vector<std::optional<ScanPoint>> done(3);
    done[1] = rep.points[1];
    const auto again = lambda_scan(p, a, g, s, done);
    for (std::size_t i = 0; i < 3; ++i) CHECK(again.points[i].vapor.mean_density == rep.points[i].vapor.mean_density);

    s.lambdas = {a.lambda_star + 1.0};
    CHECK_THROWS_AS(lambda_scan(p, a, g, s), ConfigError);
}

TEST_CASE("pressure comparison against enumeration at J2 = 0") {
    auto p = fixture::discrete_params(fixture::three_state_spec(), 1, 4, 0.0, 0.0);
    std::vector<PressurePoint> branch;
    for (double lam : {-0.5, 0.0, 0.5}) {
        auto q = p;
        q.lambda = lam;
        PressurePoint x;
        x.lambda = lam;
        x.pressure = exact_log_partition(q) / static_cast<double>(q.sites());
        x.stat_error = 1e-9;
        branch.push_back(x);
    }
    const auto rows = pressure_comparison(p, branch, branch);
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
        CHECK(r.gap == doctest::Approx(r.sampled - r.gates_penrose));
        CHECK(r.finite_gamma_slack >= 0.0);
        CHECK(r.bound_holds());
    }
}
