#pragma once

#include <optional>
#include <string>
#include <vector>

namespace boxmodel {

enum class FreeEnergyKind { IdealGas, Tonks, Tabulated };
enum class CoreCase { HardCore, SoftCore };

/// f_γ sampled at densities ρ_k (for particle systems ρ_k = kγ^d), linearly interpolated.
/// gamma == 0 marks a table of the γ ↓ 0 limit f.
struct FreeEnergyTable {
    double gamma = 0.0;
    std::vector<double> rho;
    std::vector<double> f;       // +∞ allowed
    std::vector<double> std_error;  // empty or same size as rho

    /// Linear interpolation; +∞ outside [rho.front(), rho.back()] or next to an infinite node.
    double at(double rho_value) const;
};

/// Reference free-energy family (f_γ)_γ and its limit f.
///
/// Analytic kinds (ideal gas, Tonks) use f_γ = f for every γ. Tabulated specs look up
/// the table with matching γ and fall back to the γ = 0 table (or the smallest γ) for f.
struct FreeEnergySpec {
    FreeEnergyKind kind = FreeEnergyKind::IdealGas;
    CoreCase core = CoreCase::SoftCore;
    double beta = 1.0;
    double rod_length = 1.0;  // Tonks b
    std::optional<double> rho_cp;
    std::optional<double> rho_max;
    double alpha_max = 0.0;   // +∞ allowed; always +∞ for hard-core specs
    std::vector<FreeEnergyTable> tables;

    static FreeEnergySpec ideal_gas(double beta);
    static FreeEnergySpec tonks(double rod_length, double beta);
    /// Tabulated spec. Hard-core specs need rho_cp < rho_max.
    static FreeEnergySpec tabulated(std::vector<FreeEnergyTable> tables, CoreCase core, double beta,
                                    std::optional<double> rho_cp, std::optional<double> rho_max,
                                    double alpha_max);

    /// Limit free energy f(ρ); +∞ beyond ρ_cp in the hard-core case. Throws DomainError for ρ < 0.
    double limit(double rho) const;
    /// f_γ(ρ) as used by the box model at scale γ.
    double at_gamma(double gamma, double rho) const;

    /// Upper end of the density range on which the spec carries information:
    /// ρ_max for hard-core specs, the last tabulated node for tabulated soft-core specs,
    /// +∞ for analytic soft-core specs.
    double support_end() const;

    bool hard_core() const { return core == CoreCase::HardCore; }

    /// Checks the type invariants (ρ_cp < ρ_max, α_max > 0 for soft-core tables, sorted grids).
    void validate() const;

    const FreeEnergyTable* table_for(double gamma) const;
    const FreeEnergyTable* limit_table() const;
};

std::string to_string(FreeEnergyKind kind);
std::string to_string(CoreCase core);

}  // namespace boxmodel
