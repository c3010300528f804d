#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "boxmodel/free_energy.hpp"

namespace boxmodel {

enum class PotentialKind { HardCore, LennardJones, Morse, SquareWell, Table };

struct Temperedness {
    double A = 0.0;
    double exponent = 0.0;  // λ in v ≤ A|x|^{−λ}, must exceed d
    double R0 = 0.0;
};

/// Radial pair potential v(|x|) in dimension d.
struct PairPotential {
    PotentialKind kind = PotentialKind::HardCore;
    int d = 1;
    double epsilon = 0.0;  // LJ and Morse energy scale
    double R = 0.0;        // hard-core diameter, LJ / Morse length
    double a = 0.0;        // Morse inverse length
    double r_core = 0.0;   // square well
    double r_well = 0.0;
    double depth = 0.0;
    std::vector<double> table_r;  // uniform or not, increasing; v = 0 beyond the last node
    std::vector<double> table_v;
    std::optional<double> stability_B;
    std::optional<double> superstability_C;
    std::optional<double> superstability_D;
    std::optional<Temperedness> temperedness;

    static PairPotential hard_core(int d, double R);
    static PairPotential lennard_jones(int d, double epsilon, double R);
    static PairPotential morse(int d, double epsilon, double a, double R);
    static PairPotential square_well(int d, double r_core, double r_well, double depth);
    static PairPotential table(int d, std::vector<double> r, std::vector<double> v);

    double operator()(double r) const;
    bool has_hard_core() const { return kind == PotentialKind::HardCore || kind == PotentialKind::SquareWell; }
    /// Morse with e^{aR} ≤ 16, and LJ / Morse outside d = 3, are not covered by the known superstability result.
    bool certified_superstable() const;
    std::vector<std::string> certification_notes() const;
    void validate() const;
};

std::string to_string(PotentialKind kind);

struct ParticleEstimate {
    double value = 0.0;      // f_γ(Nγ^d)
    double std_error = 0.0;
    bool infinite = false;   // every growth attempt hit a hard-core overlap
    double acceptance = 1.0; // share of growths that completed
    double min_energy = 0.0; // smallest finite H seen, for the stability audit
    std::size_t samples = 0;
};

/// f_γ(Nγ^d) = −(γ^d/β) log[(1/N!) ∫ e^{−βH}] over [0, γ^{−1}]^d with free boundaries, by Rosenbluth
/// growth with `trials` uniform candidate positions per inserted particle (trials = 1 is plain uniform
/// sampling). The stream is a pure function of (seed, stream).
ParticleEstimate particle_free_energy_mc(const PairPotential& pot, double gamma, double beta, int N,
                                         std::size_t samples, std::uint64_t seed, std::uint64_t stream = 0,
                                         std::size_t trials = 1);

/// Configuration integral of N rods of length b on [0, ℓ], ℓ = γ^{−1}: (ℓ − (N−1)b)_+^N / N!.
double hard_rod_free_energy_exact(double b, double gamma, double beta, int N);
/// Ideal gas: −(γ^d/β)(N d log γ^{−1} − log N!).
double ideal_free_energy_exact(int d, double gamma, double beta, int N);

struct TableRequest {
    std::vector<double> gammas;
    double beta = 1.0;
    double rho_max = 1.0;  // nodes N = 0 .. floor(ρ_max γ^{−d})
    std::size_t samples = 10000;
    std::size_t trials = 1;  // Rosenbluth candidates per insertion; 1 is plain uniform sampling
    std::uint64_t seed = 1;
    unsigned threads = 1;
    CoreCase core = CoreCase::HardCore;
    std::optional<double> rho_cp;
    std::optional<double> spec_rho_max;  // ρ_max of the resulting spec (hard-core)
    double alpha_max = 0.0;              // soft-core α_max recorded in the spec
};

/// One Monte Carlo cell per (γ, N); cell streams depend only on (seed, γ index, N).
FreeEnergySpec build_free_energy_table(const PairPotential& pot, const TableRequest& req);

/// Closed-form hard-rod tables on the same lattice.
FreeEnergySpec hard_rod_table(double b, double beta, const std::vector<double>& gammas, double rho_max);

struct ConvergenceOptions {
    double rho0 = 0.0;             // uniform-convergence window [0, ρ₀]; 0 picks 0.8 ρ_cp or half the table
    double rho1 = 0.0;             // hard-core tail start; 0 picks midway between ρ_cp and ρ_max
    double neighborhood = 0.0;     // half-width of the ρ_cp window at the largest γ; 0 picks 0.1 ρ_cp
    double tolerance = 1e-9;
    double growth_tolerance = 0.05;  // fitted α_max below this counts as 0
};

struct ConvergenceReport {
    std::vector<double> gammas;     // decreasing
    std::vector<double> sup_distance;  // sup_{[0, ρ₀]} |f_γ − f| per γ
    bool uniform_convergence = false;  // 1a / 2a
    std::vector<double> cp_minimum;    // min of f_γ near ρ_cp per γ
    double cp_limit = 0.0;             // lim_{ρ↑ρ_cp} f
    std::optional<bool> at_close_packing;  // 1b (hard-core only)
    std::vector<double> tail_infimum;      // inf_{ρ ≥ ρ₁} f_γ per γ
    std::optional<bool> tail_divergence;   // 1c (hard-core only)
    std::optional<double> alpha_max_estimate;  // 2b (soft-core only)
    std::optional<double> alpha_max_fit;
    std::optional<bool> growth;                // 2b
    double rho0 = 0.0;
    double rho1 = 0.0;
    bool all_pass() const;
};

/// Needs at least three tabulated γ values.
ConvergenceReport check_convergence_assumptions(const FreeEnergySpec& tables, const FreeEnergySpec& limit,
                                                const ConvergenceOptions& opt = {});

struct SuperstabilityBound {
    bool holds = true;
    double worst_margin = 0.0;  // min of f − bound (+ 3 se) over the nodes
    double worst_rho = 0.0;
    std::size_t nodes = 0;
};

/// f_γ(ρ) ≥ ρ(ρC − D + (log ρ − 1)/β) on every tabulated node (analytic specs: a grid up to rho_probe).
SuperstabilityBound check_superstability_bound(const FreeEnergySpec& spec, double C, double D, double beta,
                                               double rho_probe = 50.0);

struct WitnessReport {
    bool verdict = false;
    bool dominated = false;     // φ ≥ φ₀ on the grid
    bool fourier_nonnegative = false;
    bool positive_integral = false;
    double min_fourier = 0.0;   // min_k φ̂₀(k)
    double fourier_zero = 0.0;  // φ̂₀(0)
    double integral = 0.0;      // ∫ φ₀ dx
    double C = 0.0;
    double D = 0.0;
    std::size_t violations = 0;
};

/// Radial witness φ₀ on a uniform grid r_j = j h. Throws WitnessRejectedError when φ₀ > φ at every node.
WitnessReport check_superstability_witness(const PairPotential& pot, const std::vector<double>& r,
                                           const std::vector<double>& phi0, double tolerance = 1e-8);

/// φ̂₀(k) = (2π)^{−d/2} ∫ e^{ikx} φ₀(|x|) dx for a radial table (trapezoid rule in r, end-corrected for even d).
double radial_fourier(int d, const std::vector<double>& r, const std::vector<double>& phi0, double k);

struct StabilityAudit {
    double B = 0.0;
    std::string source;  // declared, exact bound, or estimated
    double min_energy_per_particle = 0.0;
    bool pass = true;
    std::size_t configurations = 0;
};

/// Lower bound B for hard-core and square-well potentials; nullopt for the others.
std::optional<double> stability_constant(const PairPotential& pot);
/// Heuristic B for LJ / Morse: min H/N over random configurations plus local descent.
double estimate_stability_constant(const PairPotential& pot, int N, std::size_t trials, std::uint64_t seed);
/// Checks H ≥ −N B on every sampled configuration.
StabilityAudit stability_audit(const PairPotential& pot, double gamma, int N, std::size_t samples, std::uint64_t seed);

struct TemperednessAudit {
    bool pass = true;
    double worst_ratio = 0.0;  // max v(r) / (A r^{−λ}) over the checked radii
    std::size_t radii = 0;
};

TemperednessAudit temperedness_audit(const PairPotential& pot);

}  // namespace boxmodel
