#include <cmath>
#include <map>

#include "boxmodel/errors.hpp"
#include "boxmodel/numeric.hpp"
#include "boxmodel/spinmodel.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace boxmodel;

namespace {

ModelParams ideal_params(int d, int L, double gamma) {
    ModelParams p;
    p.d = d;
    p.L = L;
    p.gamma = gamma;
    p.J2 = 1.0;
    p.spec = FreeEnergySpec::ideal_gas(1.0);
    return p;
}

}  // namespace

TEST_CASE("torus edges form a multiset with d L^d entries") {
    const Torus t(1, 2);
    const auto e = t.edges();
    REQUIRE(e.size() == 2);
    CHECK(e[0] == std::pair<std::size_t, std::size_t>{0, 1});
    CHECK(e[1] == std::pair<std::size_t, std::size_t>{1, 0});
    CHECK(Torus(3, 4).edges().size() == 3 * 64);
    const Torus t2(2, 4);
    for (std::size_t v = 0; v < t2.sites(); ++v) CHECK(t2.index(t2.coords(v)) == v);
}

TEST_CASE("hamiltonian of a constant configuration has no gradient part") {
    const auto p = ideal_params(2, 4, 0.5);
    const auto cfg = SpinConfig::constant(p, 0.7);
    const auto e = hamiltonian_parts(cfg, p);
    CHECK(e.gradient == 0.0);
    CHECK(e.total() == doctest::Approx(p.scale() * 16 * p.spec.limit(0.7)).epsilon(1e-13));
}

TEST_CASE("hamiltonian counts both parallel edges on the 2-site cycle") {
    auto p = ideal_params(1, 2, 0.5);
    p.J2 = 1.3;
    const double rho = 0.6;
    const SpinConfig cfg{1, 2, {0.0, rho}};
    // explicit edge list of the 2-cycle multigraph: (0,1) via +e₁ from 0 and (1,0) via +e₁ from 1
    const std::vector<std::pair<int, int>> edges{{0, 1}, {1, 0}};
    double grad = 0.0;
    for (auto [a, b] : edges) grad += std::pow(cfg.eta[a] - cfg.eta[b], 2);
    CHECK(hamiltonian_parts(cfg, p).gradient == doctest::Approx(p.scale() * 0.5 * p.J2 * grad));
    CHECK(hamiltonian_parts(cfg, p).gradient == doctest::Approx(p.scale() * 0.5 * 1.3 * 2 * rho * rho));
}

TEST_CASE("hamiltonian shift with linear f") {
    FreeEnergyTable t{0.0, {0.0, 10.0}, {0.0, 25.0}, {}};
    ModelParams p;
    p.d = 2;
    p.L = 4;
    p.gamma = 0.5;
    p.spec = FreeEnergySpec::tabulated({t}, CoreCase::SoftCore, 1.0, std::nullopt, std::nullopt, 1.0);
    SpinConfig cfg = SpinConfig::constant(p, 0.0);
    for (std::size_t i = 0; i < cfg.eta.size(); ++i) cfg.eta[i] = 0.1 * static_cast<double>(i % 5);
    SpinConfig shifted = cfg;
    for (double& x : shifted.eta) x += 0.4;
    const auto a = hamiltonian_parts(cfg, p);
    const auto b = hamiltonian_parts(shifted, p);
    CHECK(b.site - a.site == doctest::Approx(p.scale() * 16 * 2.5 * 0.4).epsilon(1e-12));
    CHECK(b.gradient == doctest::Approx(a.gradient).epsilon(1e-14));
}

TEST_CASE("hamiltonian is invariant under torus shifts and axis swaps") {
    auto p = ideal_params(2, 4, 0.5);
    const Torus t(2, 4);
    SpinConfig cfg = SpinConfig::constant(p, 0.0);
    for (std::size_t v = 0; v < t.sites(); ++v) cfg.eta[v] = 0.05 * static_cast<double>((v * 7) % 11);
    const double h = hamiltonian(cfg, p);
    SpinConfig shifted = cfg, swapped = cfg;
    for (std::size_t v = 0; v < t.sites(); ++v) {
        auto c = t.coords(v);
        shifted.eta[t.index({c[0] + 1, c[1] + 3})] = cfg.eta[v];
        swapped.eta[t.index({c[1], c[0]})] = cfg.eta[v];
    }
    CHECK(hamiltonian(shifted, p) == doctest::Approx(h).epsilon(1e-13));
    CHECK(hamiltonian(swapped, p) == doctest::Approx(h).epsilon(1e-13));
    const auto parts = hamiltonian_parts(cfg, p);
    CHECK(parts.gradient > 0.0);
    CHECK(parts.total() == doctest::Approx(h));
}

TEST_CASE("hamiltonian is infinite on hard-core violations") {
    ModelParams p;
    p.d = 1;
    p.L = 2;
    p.alpha = 12.0;
    p.spec = FreeEnergySpec::tonks(1.0, 1.0);
    CHECK(is_pos_inf(hamiltonian(SpinConfig{1, 2, {0.2, 2.2}}, p)));
}

TEST_CASE("log_site_weight") {
    auto p = fixture::discrete_params(fixture::three_state_spec(), 2, 2, 1.0, 0.0);
    p.gamma = 1.0;
    CHECK(log_site_weight(p, 0.0) == doctest::Approx(0.0));  // d log γ = 0 at γ = 1
    auto q = ideal_params(2, 2, 0.5);
    q.domain = SpinDomain::Discrete;
    CHECK(log_site_weight(q, 0.0) == doctest::Approx(2 * std::log(0.5)));
    q.domain = SpinDomain::Continuous;
    CHECK(log_site_weight(q, 0.0) == 0.0);
    ModelParams t;
    t.spec = FreeEnergySpec::tonks(1.0, 1.0);
    CHECK(log_site_weight(t, *t.spec.rho_max + 0.1) == -kInf);
    // ratio between two densities moves by βγ^{−d}(ρ₂ − ρ₁) per unit λ
    auto r = ideal_params(2, 2, 0.5);
    const double before = log_site_weight(r, 0.8) - log_site_weight(r, 0.3);
    r.lambda += 1.0;
    const double after = log_site_weight(r, 0.8) - log_site_weight(r, 0.3);
    CHECK(after - before == doctest::Approx(r.beta * r.scale() * 0.5).epsilon(1e-12));
}

TEST_CASE("detailed balance holds exactly for every discrete single-site move") {
    auto p = fixture::discrete_params(fixture::three_state_spec(0.2, 0.9), 1, 4, 0.7, 0.4);
    p.alpha = 0.5;
    const SiteMeasure omega(p);
    ProposalSettings prop;
    std::size_t checked = 0;
    enumerate_configs(p, [&](const SpinConfig& x, double lwx) {
        for (std::size_t v = 0; v < x.eta.size(); ++v)
            for (double to : omega.atoms()) {
                if (to == x.eta[v]) continue;
                SpinConfig y = x;
                y.eta[v] = to;
                const double lwy = log_gibbs_weight(y, p);
                const double fwd = site_transition_probability(x, p, omega, prop, v, to);
                const double bwd = site_transition_probability(y, p, omega, prop, v, x.eta[v]);
                CHECK(std::exp(lwx) * fwd == doctest::Approx(std::exp(lwy) * bwd).epsilon(1e-12));
                ++checked;
            }
    });
    CHECK(checked == 81 * 4 * 2);
}

TEST_CASE("frozen continuous proposal leaves the configuration unchanged") {
    auto p = ideal_params(2, 4, 0.5);
    p.alpha = -1.0;
    const SiteMeasure omega(p);
    SpinConfig cfg = SpinConfig::constant(p, 0.3);
    cfg.eta[3] = 0.9;
    const SpinConfig before = cfg;
    ProposalSettings prop;
    prop.step = 0.0;
    CounterRng rng(5, 0, 0);
    mcmc_sweep(cfg, p, omega, prop, rng);
    CHECK(cfg.eta == before.eta);
}

TEST_CASE("counter rng streams depend only on the key") {
    CounterRng a(1, 2, 3), b(1, 2, 3), c(1, 2, 4);
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("J2 = 0 single-site marginal matches normalized weights") {
    const auto p = fixture::discrete_params(fixture::three_state_spec(), 1, 2, 0.0, 0.1);
    SamplerSettings s;
    s.sweeps = 100000;
    s.burn_in = 100;
    s.seed = 11;
    s.histogram = {3, -0.5, 2.5};
    const auto r = sample_observables(p, s);
    std::vector<double> w;
    for (double x : {0.0, 1.0, 2.0}) w.push_back(log_site_weight(p, x));
    const double z = log_sum_exp(w);
    // σ from batch means of the η₀ indicator series of an identical chain
    const SiteMeasure omega(p);
    SpinConfig cfg = SpinConfig::constant(p, 0.0);
    std::vector<std::vector<double>> ind(3);
    ProposalSettings prop;
    for (std::size_t t = 0; t < 20000; ++t) {
        CounterRng rng(s.seed, 1, t);
        mcmc_sweep(cfg, p, omega, prop, rng);
        for (int k = 0; k < 3; ++k) ind[k].push_back(cfg.eta[0] == k ? 1.0 : 0.0);
    }
    for (int k = 0; k < 3; ++k) {
        const double q = std::exp(w[k] - z);
        // the 20000-sweep chain's σ, rescaled to the longer run
        const double sigma = batch_means_stderr(ind[k]) * std::sqrt(20000.0 / static_cast<double>(s.sweeps - s.burn_in));
        CHECK(std::abs(r.histogram[k] - q) < 3.0 * sigma);
    }
    double total = 0.0;
    for (double m : r.histogram) total += m;
    CHECK(std::abs(total - 1.0) < 1e-12);
}

TEST_CASE("sample_observables region statistics") {
    auto p = fixture::discrete_params(fixture::three_state_spec(), 1, 4, 1.0, 0.0);
    SamplerSettings s;
    s.sweeps = 10;
    s.burn_in = 10;
    CHECK_THROWS_AS(sample_observables(p, s), ConfigError);

    GoodRegions g;
    g.minus.parts = {{0.0, 0.5}};
    g.plus.parts = {{1.5, 2.0}};
    const auto row = region_observables(SpinConfig{1, 4, {0, 0, 0, 0}}, g);
    CHECK(row.pi_minus == 1.0);
    CHECK(row.pi_plus == 0.0);
    CHECK(row.psi == 0.0);

    s.sweeps = 2000;
    s.burn_in = 100;
    const auto r = sample_observables(p, s, &g);
    for (const auto& t : r.trace) {
        CHECK(t.pi_minus + t.pi_plus <= 1.0);
        CHECK(std::max(t.n_minus, t.n_plus) * 4 >= t.n_minus * t.n_minus + t.n_plus * t.n_plus);
    }
    CHECK(r.trace.size() == 1900);
}

TEST_CASE("exact_log_partition") {
    // J₂ = 0 factorizes
    const auto p0 = fixture::discrete_params(fixture::three_state_spec(), 1, 4, 0.0, 0.3);
    const SiteMeasure omega(p0);
    CHECK(exact_log_partition(p0) == doctest::Approx(4 * omega.log_total()).epsilon(1e-13));

    // 2 states, f ≡ 0, λ = α = 0, L = 2, d = 1: explicit sum over 4 configurations
    auto p = fixture::discrete_params(fixture::two_state_spec(), 1, 2, 0.8, 0.0);
    const double J = p.J();
    const double brute = std::log(1.0 + std::exp(-2 * J) + std::exp(-2 * J) + 1.0);
    CHECK(exact_log_partition(p) == doctest::Approx(brute).epsilon(1e-14));

    // lower bound through any interval S
    auto q = fixture::discrete_params(fixture::three_state_spec(), 2, 2, 0.6, 0.2);
    const double lz = exact_log_partition(q);
    const SiteMeasure om(q);
    const double edges = 2 * 4;
    for (auto [a, b] : std::vector<std::pair<double, double>>{{0, 0}, {0, 1}, {1, 2}, {0, 2}, {2, 2}}) {
        CHECK(lz >= edges * (-q.J() * (b - a) * (b - a)) + 4 * om.log_mass(a, b) - 1e-12);
    }

    auto big = fixture::discrete_params(fixture::three_state_spec(), 2, 6, 0.6, 0.2);
    CHECK_THROWS_AS(exact_log_partition(big), CapacityError);
}

TEST_CASE("site measure continuous quadrature") {
    // ideal gas with α < 0 gives ω(dρ) = exp(−ρ(ln ρ − 1) − ρ²/2) on [0, ∞)
    auto p = ideal_params(1, 2, 1.0);
    p.alpha = -1.0;
    const SiteMeasure omega(p);
    // reference by plain composite Simpson on a fine grid
    double s = 0.0;
    const int n = 200000;
    const double b = omega.upper();
    const double h = b / n;
    for (int i = 0; i <= n; ++i) {
        const double x = i * h;
        const double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
        s += w * std::exp(log_site_weight(p, x));
    }
    s *= h / 3;
    CHECK(omega.log_total() == doctest::Approx(std::log(s)).epsilon(1e-9));
}

TEST_CASE("pressure_estimate matches exact values") {
    SUBCASE("J2 = 0 factorized") {
        const auto p = fixture::discrete_params(fixture::three_state_spec(), 1, 2, 0.0, 0.0);
        std::vector<double> path;
        for (int i = 0; i <= 40; ++i) path.push_back(-8.0 + 0.25 * i);
        PressureSettings s;
        s.sampler.sweeps = 4000;
        s.sampler.burn_in = 200;
        s.sampler.seed = 3;
        const auto r = pressure_estimate(p, path, s);
        for (const auto& pt : r.ascending) {
            ModelParams q = p;
            q.lambda = pt.lambda;
            const double exact = SiteMeasure(q).log_total() / (q.beta * q.scale());
            CHECK(std::abs(pt.pressure - exact) <= 3.0 * pt.error());
        }
        for (std::size_t i = 1; i < r.ascending.size(); ++i)
            CHECK(r.ascending[i].pressure >= r.ascending[i - 1].pressure);
    }
    SUBCASE("tiny torus against enumeration") {
        const auto p = fixture::discrete_params(fixture::three_state_spec(), 1, 4, 0.5, 0.0);
        std::vector<double> path;
        for (int i = 0; i <= 40; ++i) path.push_back(-8.0 + 0.25 * i);
        PressureSettings s;
        s.sampler.sweeps = 4000;
        s.sampler.burn_in = 200;
        s.sampler.seed = 4;
        const auto r = pressure_estimate(p, path, s);
        for (const auto& pt : r.ascending) {
            ModelParams q = p;
            q.lambda = pt.lambda;
            const double exact = exact_log_partition(q) / (q.beta * q.scale() * 4);
            CHECK(std::abs(pt.pressure - exact) <= 3.0 * pt.error());
        }
    }
}
