#include "boxmodel/reference.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numbers>

#include "boxmodel/errors.hpp"
#include "boxmodel/numeric.hpp"
#include "boxmodel/parallel.hpp"
#include "boxmodel/spinmodel.hpp"

namespace boxmodel {

PairPotential PairPotential::hard_core(int d, double R) {
    PairPotential p;
    p.kind = PotentialKind::HardCore;
    p.d = d;
    p.R = R;
    p.validate();
    return p;
}

PairPotential PairPotential::lennard_jones(int d, double epsilon, double R) {
    PairPotential p;
    p.kind = PotentialKind::LennardJones;
    p.d = d;
    p.epsilon = epsilon;
    p.R = R;
    p.validate();
    return p;
}

PairPotential PairPotential::morse(int d, double epsilon, double a, double R) {
    PairPotential p;
    p.kind = PotentialKind::Morse;
    p.d = d;
    p.epsilon = epsilon;
    p.a = a;
    p.R = R;
    p.validate();
    return p;
}

PairPotential PairPotential::square_well(int d, double r_core, double r_well, double depth) {
    PairPotential p;
    p.kind = PotentialKind::SquareWell;
    p.d = d;
    p.r_core = r_core;
    p.r_well = r_well;
    p.depth = depth;
    p.validate();
    return p;
}

PairPotential PairPotential::table(int d, std::vector<double> r, std::vector<double> v) {
    PairPotential p;
    p.kind = PotentialKind::Table;
    p.d = d;
    p.table_r = std::move(r);
    p.table_v = std::move(v);
    p.validate();
    return p;
}

double PairPotential::operator()(double r) const {
    r = std::abs(r);
    switch (kind) {
        case PotentialKind::HardCore:
            return r < R ? kInf : 0.0;
        case PotentialKind::LennardJones: {
            const double s6 = std::pow(R / r, 6);
            return 4.0 * epsilon * (s6 * s6 - s6);
        }
        case PotentialKind::Morse: {
            const double e = std::exp(-a * (r - R));
            return epsilon * (e * e - 2.0 * e);
        }
        case PotentialKind::SquareWell:
            if (r < r_core) return kInf;
            return r < r_well ? -depth : 0.0;
        case PotentialKind::Table: {
            if (r <= table_r.front()) return table_v.front();
            if (r > table_r.back()) return 0.0;
            const auto it = std::upper_bound(table_r.begin(), table_r.end(), r);
            const std::size_t j = static_cast<std::size_t>(it - table_r.begin());
            if (j >= table_r.size()) return table_v.back();
            const double t = (r - table_r[j - 1]) / (table_r[j] - table_r[j - 1]);
            return (1 - t) * table_v[j - 1] + t * table_v[j];
        }
    }
    return 0.0;
}

std::vector<std::string> PairPotential::certification_notes() const {
    std::vector<std::string> notes;
    if (kind == PotentialKind::Morse && std::exp(a * R) <= 16.0)
        notes.push_back("Morse potential with e^{aR} <= 16: superstability not certified");
    if ((kind == PotentialKind::Morse || kind == PotentialKind::LennardJones) && d != 3)
        notes.push_back("superstability of this potential is only established in three dimensions");
    if (kind == PotentialKind::Table) notes.push_back("tabulated potential: supply a superstability witness");
    return notes;
}

bool PairPotential::certified_superstable() const { return certification_notes().empty(); }

void PairPotential::validate() const {
    if (d < 1) throw ConfigError("potential: dimension must be positive");
    switch (kind) {
        case PotentialKind::HardCore:
            if (!(R > 0.0)) throw ConfigError("potential: hard-core diameter R must be positive");
            break;
        case PotentialKind::LennardJones:
            if (!(epsilon > 0.0 && R > 0.0)) throw ConfigError("potential: Lennard-Jones needs epsilon > 0 and R > 0");
            break;
        case PotentialKind::Morse:
            if (!(epsilon > 0.0 && a > 0.0 && R > 0.0))
                throw ConfigError("potential: Morse needs epsilon > 0, a > 0 and R > 0");
            break;
        case PotentialKind::SquareWell:
            if (!(r_core > 0.0 && r_well > r_core && depth >= 0.0))
                throw ConfigError("potential: square well needs 0 < r_core < r_well and depth >= 0");
            break;
        case PotentialKind::Table:
            if (table_r.size() < 2 || table_r.size() != table_v.size())
                throw ConfigError("potential: table needs at least two (r, v) pairs");
            if (table_r.front() < 0.0) throw ConfigError("potential: table radii must be nonnegative");
            for (std::size_t i = 1; i < table_r.size(); ++i)
                if (!(table_r[i] > table_r[i - 1])) throw ConfigError("potential: table radii must increase");
            break;
    }
    if (temperedness && !(temperedness->exponent > d))
        throw ConfigError("potential: temperedness exponent must exceed the dimension");
    if (superstability_C && !(*superstability_C > 0.0)) throw ConfigError("potential: superstability C must be > 0");
    if (superstability_D && *superstability_D < 0.0) throw ConfigError("potential: superstability D must be >= 0");
}

std::string to_string(PotentialKind kind) {
    switch (kind) {
        case PotentialKind::HardCore: return "hard-core";
        case PotentialKind::LennardJones: return "lennard-jones";
        case PotentialKind::Morse: return "morse";
        case PotentialKind::SquareWell: return "square-well";
        case PotentialKind::Table: return "table";
    }
    return "unknown";
}

namespace {

double pair_distance(const std::vector<double>& x, int d, int i, int j) {
    double s = 0.0;
    for (int k = 0; k < d; ++k) {
        const double t = x[i * d + k] - x[j * d + k];
        s += t * t;
    }
    return std::sqrt(s);
}

double energy(const PairPotential& pot, const std::vector<double>& x, int N) {
    double h = 0.0;
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) {
            const double v = pot(pair_distance(x, pot.d, i, j));
            if (v == kInf) return kInf;
            h += v;
        }
    return h;
}

/// Interaction energy of particle i with all the others.
double energy_of(const PairPotential& pot, const std::vector<double>& x, int N, int i) {
    double h = 0.0;
    for (int j = 0; j < N; ++j)
        if (j != i) h += pot(pair_distance(x, pot.d, i, j));
    return h;
}

void check_gamma(double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("particle free energy: gamma must lie in (0, 1]");
}

}  // namespace

ParticleEstimate particle_free_energy_mc(const PairPotential& pot, double gamma, double beta, int N,
                                         std::size_t samples, std::uint64_t seed, std::uint64_t stream,
                                         std::size_t trials) {
    check_gamma(gamma);
    if (N < 0) throw DomainError("particle free energy: N must be nonnegative");
    if (samples < 1000) throw ConfigError("particle free energy: at least 1000 samples are required");
    if (trials < 1) throw ConfigError("particle free energy: need at least one trial position");
    ParticleEstimate r;
    r.samples = samples;
    if (N == 0) return r;
    const double side = 1.0 / gamma;
    const double vol_d = std::pow(gamma, pot.d);
    const auto d = static_cast<std::size_t>(pot.d);
    CounterRng rng(seed, stream, 0);
    std::vector<double> x(static_cast<std::size_t>(N) * d);
    std::vector<double> cand(trials * d), u(trials);
    // Rosenbluth growth: particle i goes to one of k uniform trial spots, chosen with weight e^{−βU};
    // W = Π_i (1/k) Σ_j e^{−βU_ij} has mean ∫ e^{−βH} / V^N.
    std::vector<double> logw;
    logw.reserve(samples);
    double min_h = kInf;
    for (std::size_t s = 0; s < samples; ++s) {
        double lw = 0.0, h = 0.0;
        bool dead = false;
        for (int i = 0; i < N && !dead; ++i) {
            double umin = kInf;
            for (std::size_t j = 0; j < trials; ++j) {
                for (std::size_t k = 0; k < d; ++k) cand[j * d + k] = side * rng.uniform();
                double e = 0.0;
                for (int m = 0; m < i && e != kInf; ++m) {
                    double s2 = 0.0;
                    for (std::size_t k = 0; k < d; ++k) {
                        const double t = cand[j * d + k] - x[static_cast<std::size_t>(m) * d + k];
                        s2 += t * t;
                    }
                    e += pot(std::sqrt(s2));
                }
                u[j] = e;
                umin = std::min(umin, e);
            }
            if (umin == kInf) {
                dead = true;
                break;
            }
            double sum = 0.0;
            for (std::size_t j = 0; j < trials; ++j) sum += u[j] == kInf ? 0.0 : std::exp(-beta * (u[j] - umin));
            lw += -beta * umin + std::log(sum / static_cast<double>(trials));
            double pick = rng.uniform() * sum;
            std::size_t chosen = 0;
            for (std::size_t j = 0; j < trials; ++j) {
                if (u[j] == kInf) continue;
                chosen = j;
                pick -= std::exp(-beta * (u[j] - umin));
                if (pick <= 0.0) break;
            }
            for (std::size_t k = 0; k < d; ++k) x[static_cast<std::size_t>(i) * d + k] = cand[chosen * d + k];
            h += u[chosen];
        }
        if (dead) continue;
        min_h = std::min(min_h, h);
        logw.push_back(lw);
    }
    const double n = static_cast<double>(samples);
    r.acceptance = static_cast<double>(logw.size()) / n;
    r.min_energy = min_h;
    if (logw.empty()) {
        r.infinite = true;
        r.value = kInf;
        return r;
    }
    const double top = *std::max_element(logw.begin(), logw.end());
    double sum = 0.0, sum2 = 0.0;
    for (double lw : logw) {
        const double w = std::exp(lw - top);
        sum += w;
        sum2 += w * w;
    }
    const double mean = sum / n;
    const double var = std::max(0.0, sum2 / n - mean * mean) * n / (n - 1.0);
    const double log_integral = N * pot.d * std::log(side) + top + std::log(mean);
    r.value = -(vol_d / beta) * (log_integral - std::lgamma(N + 1.0));
    r.std_error = (vol_d / beta) * std::sqrt(var / n) / mean;
    return r;
}

double hard_rod_free_energy_exact(double b, double gamma, double beta, int N) {
    check_gamma(gamma);
    if (N == 0) return 0.0;
    const double free = 1.0 / gamma - (N - 1) * b;
    if (free <= 0.0) return kInf;
    return -(gamma / beta) * (N * std::log(free) - std::lgamma(N + 1.0));
}

double ideal_free_energy_exact(int d, double gamma, double beta, int N) {
    check_gamma(gamma);
    const double vd = std::pow(gamma, d);
    return -(vd / beta) * (N * d * std::log(1.0 / gamma) - std::lgamma(N + 1.0));
}

namespace {

int max_count(double rho_max, double gamma, int d) {
    return static_cast<int>(std::floor(rho_max / std::pow(gamma, d) + 1e-9));
}

FreeEnergySpec finish_spec(std::vector<FreeEnergyTable> tables, const TableRequest& req) {
    if (req.core == CoreCase::HardCore) {
        if (!req.rho_cp || !req.spec_rho_max) throw ConfigError("table: hard-core tables need rho_cp and rho_max");
        return FreeEnergySpec::tabulated(std::move(tables), CoreCase::HardCore, req.beta, req.rho_cp,
                                         req.spec_rho_max, kInf);
    }
    return FreeEnergySpec::tabulated(std::move(tables), CoreCase::SoftCore, req.beta, std::nullopt, std::nullopt,
                                     req.alpha_max);
}

}  // namespace

FreeEnergySpec build_free_energy_table(const PairPotential& pot, const TableRequest& req) {
    pot.validate();
    if (req.gammas.empty()) throw ConfigError("table: no gamma values");
    struct Cell {
        std::size_t g;
        int N;
    };
    std::vector<Cell> cells;
    std::vector<FreeEnergyTable> tables(req.gammas.size());
    for (std::size_t g = 0; g < req.gammas.size(); ++g) {
        check_gamma(req.gammas[g]);
        const int nmax = max_count(req.rho_max, req.gammas[g], pot.d);
        if (nmax > 64) throw CapacityError("table: more than 64 particles per box is out of reach");
        auto& t = tables[g];
        t.gamma = req.gammas[g];
        t.rho.resize(nmax + 1);
        t.f.resize(nmax + 1);
        t.std_error.resize(nmax + 1);
        for (int N = 0; N <= nmax; ++N) cells.push_back({g, N});
    }
    parallel_for(cells.size(), req.threads, [&](std::size_t i) {
        const auto [g, N] = cells[i];
        const double vd = std::pow(req.gammas[g], pot.d);
        const auto e = particle_free_energy_mc(pot, req.gammas[g], req.beta, N, req.samples, req.seed,
                                               (static_cast<std::uint64_t>(g) << 32) | static_cast<std::uint64_t>(N),
                                               req.trials);
        tables[g].rho[N] = N * vd;
        tables[g].f[N] = e.value;
        tables[g].std_error[N] = e.std_error;
    });
    return finish_spec(std::move(tables), req);
}

FreeEnergySpec hard_rod_table(double b, double beta, const std::vector<double>& gammas, double rho_max) {
    if (!(b > 0.0)) throw ConfigError("hard rods: rod length must be positive");
    if (!(rho_max > 1.0 / b)) throw ConfigError("hard rods: rho_max must exceed 1/b");
    std::vector<FreeEnergyTable> tables;
    for (double g : gammas) {
        FreeEnergyTable t;
        t.gamma = g;
        for (int N = 0; N <= max_count(rho_max, g, 1); ++N) {
            t.rho.push_back(N * g);
            t.f.push_back(hard_rod_free_energy_exact(b, g, beta, N));
        }
        tables.push_back(std::move(t));
    }
    TableRequest req;
    req.beta = beta;
    req.rho_cp = 1.0 / b;
    req.spec_rho_max = rho_max;
    return finish_spec(std::move(tables), req);
}

bool ConvergenceReport::all_pass() const {
    return uniform_convergence && at_close_packing.value_or(true) && tail_divergence.value_or(true) &&
           growth.value_or(true);
}

namespace {

double se_at(const FreeEnergyTable& t, std::size_t i) { return t.std_error.empty() ? 0.0 : t.std_error[i]; }

double max_se(const FreeEnergyTable& t) {
    double m = 0.0;
    for (std::size_t i = 0; i < t.std_error.size(); ++i)
        if (std::isfinite(t.f[i])) m = std::max(m, t.std_error[i]);
    return m;
}

/// Smallest value of the interpolated table on [lo, hi] (nodes and endpoints).
double table_min(const FreeEnergyTable& t, double lo, double hi) {
    double m = std::min(t.at(lo), t.at(hi));
    for (std::size_t i = 0; i < t.rho.size(); ++i)
        if (t.rho[i] >= lo && t.rho[i] <= hi) m = std::min(m, t.f[i]);
    return m;
}

/// Least squares fit r(ρ) ≈ c₀ + c₁/ρ + c₂ log ρ / ρ; returns c₀.
double growth_fit(const std::vector<double>& rho, const std::vector<double>& ratio) {
    double A[3][4] = {};
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const double phi[3] = {1.0, 1.0 / rho[i], std::log(rho[i]) / rho[i]};
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) A[a][b] += phi[a] * phi[b];
            A[a][3] += phi[a] * ratio[i];
        }
    }
    for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int r = c + 1; r < 3; ++r)
            if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
        std::swap(A[c], A[piv]);
        if (std::abs(A[c][c]) < 1e-300) throw ConfigError("convergence check: growth fit is singular");
        for (int r = 0; r < 3; ++r) {
            if (r == c) continue;
            const double f = A[r][c] / A[c][c];
            for (int k = c; k < 4; ++k) A[r][k] -= f * A[c][k];
        }
    }
    return A[0][3] / A[0][0];
}

}  // namespace

ConvergenceReport check_convergence_assumptions(const FreeEnergySpec& tables, const FreeEnergySpec& limit,
                                                const ConvergenceOptions& opt) {
    std::vector<const FreeEnergyTable*> ts;
    for (const auto& t : tables.tables)
        if (t.gamma > 0.0) ts.push_back(&t);
    if (ts.size() < 3) throw ConfigError("convergence check: at least 3 tabulated gamma values are required");
    std::sort(ts.begin(), ts.end(), [](auto* a, auto* b) { return a->gamma > b->gamma; });

    ConvergenceReport r;
    const bool hard = tables.hard_core();
    const double rho_cp = hard ? *tables.rho_cp : 0.0;
    double table_end = kInf;
    for (auto* t : ts) table_end = std::min(table_end, t->rho.back());
    r.rho0 = opt.rho0 > 0.0 ? opt.rho0 : (hard ? 0.8 * rho_cp : 0.5 * table_end);

    double noise = 0.0;
    for (auto* t : ts) {
        r.gammas.push_back(t->gamma);
        noise = std::max(noise, max_se(*t));
        double sup = 0.0;
        for (std::size_t i = 0; i < t->rho.size(); ++i) {
            if (t->rho[i] > r.rho0 + 1e-12) continue;
            const double fl = limit.limit(t->rho[i]);
            const double diff = std::abs(t->f[i] - fl);
            sup = std::max(sup, std::isnan(diff) ? 0.0 : diff);
        }
        r.sup_distance.push_back(sup);
    }
    const double slack = opt.tolerance + 3.0 * noise;
    r.uniform_convergence = true;
    for (std::size_t i = 0; i + 1 < r.sup_distance.size(); ++i)
        if (r.sup_distance[i + 1] > r.sup_distance[i] + slack) r.uniform_convergence = false;

    if (hard) {
        const double w0 = opt.neighborhood > 0.0 ? opt.neighborhood : 0.1 * rho_cp;
        r.cp_limit = limit.limit(rho_cp);
        for (auto* t : ts) {
            const double w = w0 * t->gamma / ts.front()->gamma;
            r.cp_minimum.push_back(table_min(*t, rho_cp - w, rho_cp + w));
        }
        if (std::isfinite(r.cp_limit)) {
            r.at_close_packing = r.cp_minimum.back() >= r.cp_limit - slack;
        } else {
            bool ok = true;
            for (std::size_t i = 0; i + 1 < r.cp_minimum.size(); ++i)
                if (r.cp_minimum[i + 1] < r.cp_minimum[i] - slack) ok = false;
            r.at_close_packing = ok;
        }
        const double rmax = *tables.rho_max;
        r.rho1 = opt.rho1 > 0.0 ? opt.rho1 : 0.5 * (rho_cp + rmax);
        for (auto* t : ts) r.tail_infimum.push_back(table_min(*t, r.rho1, std::max(r.rho1, t->rho.back())));
        bool ok = true;
        for (std::size_t i = 0; i + 1 < r.tail_infimum.size(); ++i)
            if (r.tail_infimum[i + 1] < r.tail_infimum[i] - slack) ok = false;
        if (std::isfinite(r.tail_infimum.back()) && !(r.tail_infimum.back() > r.tail_infimum.front())) ok = false;
        r.tail_divergence = ok;
    } else {
        const FreeEnergyTable& t = *ts.back();
        std::vector<double> rho, ratio;
        for (std::size_t i = 0; i < t.rho.size(); ++i)
            if (t.rho[i] >= 0.5 * t.rho.back() && t.rho[i] > 0.0 && std::isfinite(t.f[i])) {
                rho.push_back(t.rho[i]);
                ratio.push_back(t.f[i] / (0.5 * t.rho[i] * t.rho[i]));
            }
        if (rho.size() < 3) throw ConfigError("convergence check: too few large-density nodes for the growth fit");
        r.alpha_max_fit = growth_fit(rho, ratio);
        r.growth = *r.alpha_max_fit > opt.growth_tolerance;
        r.alpha_max_estimate = *r.growth ? *r.alpha_max_fit : 0.0;
    }
    return r;
}

SuperstabilityBound check_superstability_bound(const FreeEnergySpec& spec, double C, double D, double beta,
                                               double rho_probe) {
    if (!(C > 0.0) || D < 0.0) throw DomainError("superstability bound: need C > 0 and D >= 0");
    SuperstabilityBound r;
    r.worst_margin = kInf;
    auto visit = [&](double rho, double f, double se) {
        ++r.nodes;
        if (f == kInf) return;
        const double bound = rho > 0.0 ? rho * (rho * C - D + (std::log(rho) - 1.0) / beta) : 0.0;
        const double margin = f - bound + 3.0 * se;
        if (margin < r.worst_margin) {
            r.worst_margin = margin;
            r.worst_rho = rho;
        }
        if (margin < -1e-12) r.holds = false;
    };
    if (spec.kind == FreeEnergyKind::Tabulated) {
        for (const auto& t : spec.tables)
            for (std::size_t i = 0; i < t.rho.size(); ++i) visit(t.rho[i], t.f[i], se_at(t, i));
    } else {
        const double end = std::min(spec.support_end(), rho_probe);
        for (double rho : linspace(0.0, end, 4001)) visit(rho, spec.limit(rho), 0.0);
    }
    return r;
}

namespace {

double sphere_area(int d) { return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d); }

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) s += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
    return s;
}

}  // namespace

// φ̂₀(k) = ∫ φ₀(r) r^{d−1} G(kr) dr with G(x) = x^{−ν} J_ν(x), ν = d/2 − 1.
// For odd d the integrand is even in r and the trapezoid rule is spectrally accurate; for even d it is odd and
// the r = 0 end needs Euler–Maclaurin terms, taken from φ₀ ≈ φ₀(0) + φ₂ r² and G(x) ≈ G(0)(1 − x²/(2d)).
double radial_fourier(int d, const std::vector<double>& r, const std::vector<double>& phi0, double k) {
    const double nu = 0.5 * d - 1.0;
    const double g0 = 1.0 / (std::pow(2.0, nu) * std::tgamma(nu + 1.0));
    auto G = [&](double x) {
        if (x == 0.0) return g0;
        if (d == 1) return std::sqrt(2.0 / std::numbers::pi) * std::cos(x);
        if (d == 3) return std::sqrt(2.0 / std::numbers::pi) * std::sin(x) / x;
        return boost::math::cyl_bessel_j(nu, x) * std::pow(x, -nu);
    };
    std::vector<double> y(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) y[i] = phi0[i] * std::pow(r[i], d - 1) * G(k * r[i]);
    double s = trapezoid(r, y);
    if (d % 2 == 0 && r.size() > 1) {
        const double h = r[1] - r[0];
        const double c2 = (phi0[1] - phi0[0]) / (h * h) - phi0[0] * k * k / (2.0 * d);
        double y1 = 0.0, y3 = 0.0;  // first and third derivative of the integrand at 0
        if (d == 2) {
            y1 = g0 * phi0[0];
            y3 = 6.0 * g0 * c2;
        } else if (d == 4) {
            y3 = 6.0 * g0 * phi0[0];
        }
        s += h * h / 12.0 * y1 - std::pow(h, 4) / 720.0 * y3;
    }
    return s;
}

WitnessReport check_superstability_witness(const PairPotential& pot, const std::vector<double>& r,
                                           const std::vector<double>& phi0, double tolerance) {
    pot.validate();
    if (r.size() < 3 || r.size() != phi0.size()) throw ConfigError("witness: need matching r and phi0 of length >= 3");
    const double h = r[1] - r[0];
    if (r.front() != 0.0) throw ConfigError("witness: the radial grid must start at r = 0");
    for (std::size_t i = 1; i < r.size(); ++i)
        if (std::abs((r[i] - r[i - 1]) - h) > 1e-9 * h) throw ConfigError("witness: the radial grid must be uniform");

    WitnessReport w;
    double scale = 0.0;
    for (double v : phi0) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < r.size(); ++i)
        if (pot(r[i]) < phi0[i] - tolerance * scale) ++w.violations;
    if (w.violations == r.size()) throw WitnessRejectedError("witness: phi0 exceeds the potential at every grid point");
    w.dominated = w.violations == 0;

    const int d = pot.d;
    std::vector<double> abs_phi(phi0.size());
    std::transform(phi0.begin(), phi0.end(), abs_phi.begin(), [](double v) { return std::abs(v); });
    const double abs_integral = radial_fourier(d, r, abs_phi, 0.0) * std::pow(2.0 * std::numbers::pi, 0.5 * d);
    w.fourier_zero = radial_fourier(d, r, phi0, 0.0);
    w.integral = w.fourier_zero * std::pow(2.0 * std::numbers::pi, 0.5 * d);
    w.positive_integral = w.integral > tolerance * abs_integral;

    // dual grid k_j = jπ/r_max up to π/(2h), the Nyquist wavenumber of the every-other-node grid
    const double dk = std::numbers::pi / r.back();
    double peak = std::abs(w.fourier_zero);
    w.min_fourier = w.fourier_zero;
    // quadrature error per k from the grid with every other node; a value only counts as negative below it
    std::vector<double> r2, phi2;
    for (std::size_t i = 0; i < r.size(); i += 2) {
        r2.push_back(r[i]);
        phi2.push_back(phi0[i]);
    }
    double worst = 0.0;
    for (std::size_t j = 1; 2 * j < r.size(); ++j) {
        const double k = dk * static_cast<double>(j);
        const double v = radial_fourier(d, r, phi0, k);
        const double err = std::abs(v - radial_fourier(d, r2, phi2, k));
        w.min_fourier = std::min(w.min_fourier, v);
        worst = std::min(worst, v + err);
        peak = std::max(peak, std::abs(v));
    }
    w.fourier_nonnegative = worst >= -tolerance * peak;
    w.verdict = w.dominated && w.fourier_nonnegative && w.positive_integral;

    // C ≈ ½(2π)^{−d/2} φ̂₀(0) ∫ f(|k|) dk, f(p) = max{0, 1 − (cosh(p√d) − cos(p√d))/2}
    const double sd = std::sqrt(static_cast<double>(d));
    auto fp = [&](double p) { return std::max(0.0, 1.0 - 0.5 * (std::cosh(p * sd) - std::cos(p * sd))); };
    double lo = 0.0, hi = 1.0;
    while (fp(hi) > 0.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (fp(mid) > 0.0 ? lo : hi) = mid;
    }
    const double radial = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double p) { return fp(p) * std::pow(p, d - 1); }, 0.0, hi, 10, 1e-12);
    w.C = 0.5 * std::pow(2.0 * std::numbers::pi, -0.5 * d) * w.fourier_zero * sphere_area(d) * radial;
    w.D = std::max(0.0, 0.5 * phi0.front());
    return w;
}

std::optional<double> stability_constant(const PairPotential& pot) {
    if (pot.stability_B) return pot.stability_B;
    if (pot.kind == PotentialKind::HardCore) return 0.0;
    if (pot.kind == PotentialKind::SquareWell) {
        // disjoint balls of radius r_core/2 around partners within r_well fit in a ball of radius r_well + r_core/2
        const double ratio = (pot.r_well + 0.5 * pot.r_core) / (0.5 * pot.r_core);
        const double K = std::floor(std::pow(ratio, pot.d)) - 1.0;
        return 0.5 * K * pot.depth;
    }
    return std::nullopt;
}

double estimate_stability_constant(const PairPotential& pot, int N, std::size_t trials, std::uint64_t seed) {
    if (N < 2) return 0.0;
    const double length = pot.kind == PotentialKind::SquareWell ? pot.r_well
                          : pot.kind == PotentialKind::Table ? pot.table_r.back()
                                                             : std::max(pot.R, 1e-12);
    const double side = length * std::pow(static_cast<double>(N), 1.0 / pot.d);
    CounterRng rng(seed, 0x5741, 0);
    std::vector<double> x(static_cast<std::size_t>(N) * pot.d), best;
    double best_h = kInf;
    for (std::size_t t = 0; t < trials; ++t) {
        for (double& c : x) c = side * rng.uniform();
        const double h = energy(pot, x, N);
        if (h < best_h) {
            best_h = h;
            best = x;
        }
    }
    if (best.empty()) return 0.0;
    // greedy single-particle descent from the best draw
    CounterRng mv(seed, 0x5742, 0);
    x = best;
    for (int step = 0; step < 400 * N; ++step) {
        const int i = static_cast<int>(mv.uniform() * N) % N;
        const double before = energy_of(pot, x, N, i);
        std::vector<double> old(x.begin() + i * pot.d, x.begin() + (i + 1) * pot.d);
        for (int k = 0; k < pot.d; ++k) x[i * pot.d + k] += 0.05 * length * mv.normal();
        const double after = energy_of(pot, x, N, i);
        if (after < before)
            best_h += after - before;
        else
            std::copy(old.begin(), old.end(), x.begin() + i * pot.d);
    }
    return std::max(0.0, -best_h / N);
}

StabilityAudit stability_audit(const PairPotential& pot, double gamma, int N, std::size_t samples,
                               std::uint64_t seed) {
    check_gamma(gamma);
    StabilityAudit a;
    if (pot.stability_B) {
        a.B = *pot.stability_B;
        a.source = "declared";
    } else if (auto b = stability_constant(pot)) {
        a.B = *b;
        a.source = "exact bound";
    } else {
        a.B = estimate_stability_constant(pot, N, 20000, seed);
        a.source = "estimated";
    }
    const double side = 1.0 / gamma;
    CounterRng rng(seed, 0x5743, 0);
    std::vector<double> x(static_cast<std::size_t>(N) * pot.d);
    a.min_energy_per_particle = kInf;
    for (std::size_t s = 0; s < samples; ++s) {
        for (double& c : x) c = side * rng.uniform();
        const double h = energy(pot, x, N);
        ++a.configurations;
        if (h == kInf || N == 0) continue;
        a.min_energy_per_particle = std::min(a.min_energy_per_particle, h / N);
        if (h < -N * a.B - 1e-9 * std::max(1.0, std::abs(h))) a.pass = false;
    }
    return a;
}

TemperednessAudit temperedness_audit(const PairPotential& pot) {
    if (!pot.temperedness) throw ConfigError("temperedness audit: the potential declares no (A, lambda, R0)");
    const auto& t = *pot.temperedness;
    std::vector<double> radii;
    if (pot.kind == PotentialKind::Table) {
        for (double r : pot.table_r)
            if (r >= t.R0) radii.push_back(r);
    } else {
        for (int i = 0; i < 400; ++i) radii.push_back(t.R0 * std::pow(100.0, i / 399.0));
    }
    TemperednessAudit a;
    for (double r : radii) {
        const double bound = t.A * std::pow(r, -t.exponent);
        const double v = pot(r);
        ++a.radii;
        a.worst_ratio = std::max(a.worst_ratio, v / bound);
        if (v > bound * (1.0 + 1e-12)) a.pass = false;
    }
    return a;
}

}  // namespace boxmodel
