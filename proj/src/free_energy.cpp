#include "boxmodel/free_energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "boxmodel/errors.hpp"
#include "boxmodel/numeric.hpp"

namespace boxmodel {

double FreeEnergyTable::at(double x) const {
    if (rho.empty() || x < rho.front() || x > rho.back()) return kInf;
    auto it = std::upper_bound(rho.begin(), rho.end(), x);
    if (it == rho.end()) return f.back();
    const auto hi = static_cast<std::size_t>(it - rho.begin());
    if (hi == 0) return f.front();
    const std::size_t lo = hi - 1;
    if (x == rho[lo]) return f[lo];
    if (is_pos_inf(f[lo]) || is_pos_inf(f[hi])) return kInf;
    const double t = (x - rho[lo]) / (rho[hi] - rho[lo]);
    return f[lo] + t * (f[hi] - f[lo]);
}

FreeEnergySpec FreeEnergySpec::ideal_gas(double beta) {
    FreeEnergySpec s;
    s.kind = FreeEnergyKind::IdealGas;
    s.core = CoreCase::SoftCore;
    s.beta = beta;
    // f ~ ρ log ρ grows slower than ρ², so the liminf of f/(ρ²/2) vanishes.
    s.alpha_max = 0.0;
    return s;
}

FreeEnergySpec FreeEnergySpec::tonks(double rod_length, double beta) {
    if (!(rod_length > 0.0)) throw ConfigError("tonks: rod length must be positive");
    FreeEnergySpec s;
    s.kind = FreeEnergyKind::Tonks;
    s.core = CoreCase::HardCore;
    s.beta = beta;
    s.rod_length = rod_length;
    s.rho_cp = 1.0 / rod_length;
    // Free-boundary rods in a box of length 1/γ fit up to 1/(γb) + 1 particles, so
    // f_γ = +∞ above 1/b + γ ≤ 1/b + 1.
    s.rho_max = 1.0 / rod_length + 1.0;
    s.alpha_max = kInf;
    return s;
}

FreeEnergySpec FreeEnergySpec::tabulated(std::vector<FreeEnergyTable> tables, CoreCase core, double beta,
                                         std::optional<double> rho_cp, std::optional<double> rho_max,
                                         double alpha_max) {
    FreeEnergySpec s;
    s.kind = FreeEnergyKind::Tabulated;
    s.core = core;
    s.beta = beta;
    s.rho_cp = rho_cp;
    s.rho_max = rho_max;
    s.alpha_max = core == CoreCase::HardCore ? kInf : alpha_max;
    s.tables = std::move(tables);
    std::sort(s.tables.begin(), s.tables.end(),
              [](const FreeEnergyTable& a, const FreeEnergyTable& b) { return a.gamma < b.gamma; });
    s.validate();
    return s;
}

void FreeEnergySpec::validate() const {
    if (!(beta > 0.0)) throw ConfigError("free energy: beta must be positive");
    if (core == CoreCase::HardCore) {
        if (!rho_cp || !rho_max) throw ConfigError("free energy: hard-core case needs rho_cp and rho_max");
        if (!(*rho_cp > 0.0 && *rho_cp < *rho_max))
            throw ConfigError("free energy: hard-core case needs 0 < rho_cp < rho_max");
    } else if (kind == FreeEnergyKind::Tabulated && !(alpha_max > 0.0)) {
        throw ConfigError("free energy: soft-core tabulated case needs alpha_max > 0");
    }
    if (kind == FreeEnergyKind::Tabulated) {
        if (tables.empty()) throw ConfigError("free energy: tabulated kind needs at least one table");
        for (const auto& t : tables) {
            if (t.rho.size() != t.f.size() || t.rho.size() < 2)
                throw ConfigError("free energy: table needs >= 2 matching (rho, f) pairs");
            if (!t.std_error.empty() && t.std_error.size() != t.rho.size())
                throw ConfigError("free energy: stderr column size mismatch");
            if (!std::is_sorted(t.rho.begin(), t.rho.end()) || t.rho.front() < 0.0)
                throw ConfigError("free energy: table densities must be sorted and nonnegative");
        }
    }
}

const FreeEnergyTable* FreeEnergySpec::table_for(double gamma) const {
    for (const auto& t : tables)
        if (std::abs(t.gamma - gamma) <= 1e-12 * std::max(1.0, gamma)) return &t;
    return nullptr;
}

const FreeEnergyTable* FreeEnergySpec::limit_table() const {
    if (tables.empty()) return nullptr;
    if (const auto* t = table_for(0.0)) return t;
    return &tables.front();  // sorted: smallest γ stands in for the limit
}

namespace {

double tonks_f(double rho, double b, double beta) {
    if (rho == 0.0) return 0.0;
    if (rho * b >= 1.0) return kInf;
    return rho * (std::log(rho / (1.0 - b * rho)) - 1.0) / beta;
}

}  // namespace

double FreeEnergySpec::limit(double rho) const {
    if (rho < 0.0 || std::isnan(rho)) throw DomainError("free energy: negative density");
    switch (kind) {
        case FreeEnergyKind::IdealGas:
            return rho == 0.0 ? 0.0 : rho * (std::log(rho) - 1.0) / beta;
        case FreeEnergyKind::Tonks:
            return tonks_f(rho, rod_length, beta);
        case FreeEnergyKind::Tabulated: {
            if (hard_core() && rho > *rho_cp) return kInf;
            return limit_table()->at(rho);
        }
    }
    return kInf;
}

double FreeEnergySpec::at_gamma(double gamma, double rho) const {
    if (rho < 0.0 || std::isnan(rho)) throw DomainError("free energy: negative density");
    if (hard_core() && rho > *rho_max) return kInf;
    if (kind != FreeEnergyKind::Tabulated) return limit(rho);
    if (const auto* t = table_for(gamma)) return t->at(rho);
    return limit(rho);
}

double FreeEnergySpec::support_end() const {
    if (hard_core()) return *rho_max;
    if (kind == FreeEnergyKind::Tabulated) return limit_table()->rho.back();
    return kInf;
}

std::string to_string(FreeEnergyKind kind) {
    switch (kind) {
        case FreeEnergyKind::IdealGas: return "ideal-gas";
        case FreeEnergyKind::Tonks: return "tonks";
        case FreeEnergyKind::Tabulated: return "tabulated";
    }
    return "unknown";
}

std::string to_string(CoreCase core) { return core == CoreCase::HardCore ? "hard-core" : "soft-core"; }

}  // namespace boxmodel
