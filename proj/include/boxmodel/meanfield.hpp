#pragma once

#include <span>
#include <vector>

#include "boxmodel/free_energy.hpp"

namespace boxmodel {

/// Sampled function on a sorted density grid.
struct Grid {
    std::vector<double> rho;
    std::vector<double> value;
};

struct MeanFieldOptions {
    std::size_t grid_points = 4096;
    double lambda_tol = 1e-10;    // bisection tolerance on λ_*
    double value_tol = 1e-9;      // minimum-value comparison tolerance
    double convexity_tol = 1e-9;  // φ − CE φ above this counts as non-convex
};

/// φ_λ(ρ) = −λρ − (α/2)ρ² + f(ρ); +∞ exactly where f is.
/// Throws DomainError for ρ < 0 and ConfigError when 0 < α and α ≥ α_max.
double eval_phi(const FreeEnergySpec& spec, double alpha, double lambda, double rho);

/// Gate for a well-defined model: α < α_max (non-positive α is always admissible).
void check_alpha(const FreeEnergySpec& spec, double alpha);

/// Density window [0, upper] on which φ_λ is studied: [0, ρ_max] in the hard-core case,
/// the tabulated range for soft-core tables, otherwise the first point past which φ_λ
/// exceeds φ_λ(0) + 10 while increasing.
double density_upper(const FreeEnergySpec& spec, double alpha, double lambda);

Grid phi_grid(const FreeEnergySpec& spec, double alpha, double lambda, std::size_t points);

/// Largest convex minorant restricted to the grid points (lower hull).
/// A trailing run of +∞ values is truncated first; the result covers the finite prefix.
Grid convex_envelope(std::span<const double> rho, std::span<const double> values);

struct Nonconvexity {
    bool nonconvex = false;
    double witness_lo = 0.0;  // maximal interval where φ − CE φ exceeds the tolerance
    double witness_hi = 0.0;
    double max_gap = 0.0;
    double gap_argmax = 0.0;
};

/// Convexity of φ_λ does not depend on λ; the test runs on φ₀ for every λ so the output is identical.
Nonconvexity detect_nonconvexity(const FreeEnergySpec& spec, double alpha, double lambda = 0.0,
                                 const MeanFieldOptions& opt = {});

struct MeanFieldAnalysis {
    double alpha = 0.0;
    double lambda_star = 0.0;
    double m_star = 0.0;
    double rho_minus = 0.0;
    double rho_plus = 0.0;
    double rho_zero = 0.0;
    std::vector<double> minimizers;  // M, grid-resolved plus the refined ρ_{*,±}
    Grid phi_star;                   // φ_{λ_*} on the analysis grid
    Grid envelope;                   // CE φ_{λ_*} on the finite part of the grid
    Nonconvexity nonconvexity;
};

/// Double-tangent construction. Throws NoCoexistenceError when no λ gives two global minima,
/// including the flat case where φ_{λ_*} has no strict barrier between the minimizers.
MeanFieldAnalysis find_coexistence(const FreeEnergySpec& spec, double alpha, const MeanFieldOptions& opt = {});

/// Van der Waals isotherm Tρ/(1−ρb) − aρ²/2.
double vdw_pressure(double temperature, double rho, double a, double b);

/// ρ² d/dρ [f(ρ)/ρ] from tabulated f by central differences, interpolated to ρ.
double pressure_from_free_energy(std::span<const double> rho_grid, std::span<const double> f_values, double rho);

/// −inf_ρ φ_λ(ρ) (the limiting grand-canonical pressure, in energy-density units).
double gates_penrose_pressure(const FreeEnergySpec& spec, double alpha, double lambda,
                              const MeanFieldOptions& opt = {});

struct MaxwellCheck {
    double envelope_pressure = 0.0;    // −m_*, the pressure on the flat part of CE φ
    double equal_area_pressure = 0.0;  // (v_v − v_l)^{−1} ∫ p dv between the coexisting volumes
    double relative_error = 0.0;
};

/// Isotherm p(ρ) = ρ f'(ρ) − f(ρ) − (α/2)ρ² integrated over v = 1/ρ from 1/ρ_{*,+} to 1/ρ_{*,−}.
double isotherm_pressure(const FreeEnergySpec& spec, double alpha, double rho);
MaxwellCheck maxwell_check(const FreeEnergySpec& spec, const MeanFieldAnalysis& a);

/// Minimizer of φ_λ; companion of gates_penrose_pressure.
double phi_argmin(const FreeEnergySpec& spec, double alpha, double lambda, const MeanFieldOptions& opt = {});

}  // namespace boxmodel
