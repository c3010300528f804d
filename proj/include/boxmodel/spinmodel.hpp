#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "boxmodel/free_energy.hpp"
#include "boxmodel/intervals.hpp"

namespace boxmodel {

enum class SpinDomain { Continuous, Discrete };

std::string to_string(SpinDomain domain);

/// Scalar parameters of a box-model instance.
struct ModelParams {
    int d = 1;
    int L = 2;
    double beta = 1.0;
    double alpha = 0.0;
    double J2 = 1.0;
    double gamma = 1.0;
    double lambda = 0.0;
    SpinDomain domain = SpinDomain::Continuous;
    FreeEnergySpec spec;

    /// γ^{−d}
    double scale() const;
    /// Atom spacing γ^d of S_γ in the discrete domain.
    double atom() const;
    /// J = βJ₂γ^{−d}/2
    double J() const;
    std::size_t sites() const;
    void validate() const;
};

/// Periodic lattice Λ_L = (ℤ/Lℤ)^d with sites indexed by Σ c_i L^i.
class Torus {
public:
    Torus(int d, int L);
    int d() const { return d_; }
    int L() const { return L_; }
    std::size_t sites() const { return n_; }
    std::vector<int> coords(std::size_t v) const;
    std::size_t index(const std::vector<int>& c) const;
    /// v ± e_axis
    std::size_t neighbor(std::size_t v, int axis, int dir) const { return nbr_[v * 2 * d_ + 2 * axis + (dir > 0 ? 0 : 1)]; }
    /// Edge multiset {(v, v+e_i)}: d·L^d entries, parallel edges kept at L = 2.
    std::vector<std::pair<std::size_t, std::size_t>> edges() const;

private:
    int d_;
    int L_;
    std::size_t n_;
    std::vector<std::size_t> nbr_;
};

struct SpinConfig {
    int d = 1;
    int L = 2;
    std::vector<double> eta;

    static SpinConfig constant(const ModelParams& p, double value);
};

/// −λρ − (α/2)ρ² + f_γ(ρ)
double site_energy_density(const ModelParams& p, double rho);

struct EnergyParts {
    double site = 0.0;
    double gradient = 0.0;
    double total() const { return site + gradient; }
};

/// γ^{−d}[Σ_v (−λη_v − (α/2)η_v² + f_γ(η_v)) + (J₂/2) Σ_{edges} (η_v − η_w)²]; +∞ if any f_γ(η_v) is.
EnergyParts hamiltonian_parts(const SpinConfig& cfg, const ModelParams& p);
double hamiltonian(const SpinConfig& cfg, const ModelParams& p);

/// βγ^{−d}(λρ + (α/2)ρ² − f_γ(ρ)) plus d·log γ in the discrete domain; −∞ where f_γ = +∞.
double log_site_weight(const ModelParams& p, double rho);

/// Single-site measure ω_{λ,γ}, truncated to a window [0, upper] outside of which it carries
/// less than e^{−60} relative mass (hard-core: the window ends at ρ_max).
class SiteMeasure {
public:
    explicit SiteMeasure(const ModelParams& p);

    const ModelParams& params() const { return p_; }
    double upper() const { return upper_; }
    bool discrete() const { return p_.domain == SpinDomain::Discrete; }

    /// Discrete atoms k·γ^d with finite weight inside the window.
    const std::vector<double>& atoms() const { return atoms_; }
    const std::vector<double>& atom_log_weights() const { return atom_logw_; }

    /// log ∫_{[a,b]} ρ^k ω(dρ), −∞ for zero mass. Continuous: Gauss–Kronrod per panel in log-space.
    double log_moment(double a, double b, int k = 0) const;
    double log_mass(double a, double b) const { return log_moment(a, b, 0); }
    double log_total() const { return log_moment(0.0, upper_, 0); }
    double mean() const;
    double variance() const;

    /// Draw from the normalized discrete measure (independence proposals).
    double sample_atom(double u) const;
    /// Index of an atom value in atoms(), or −1 when outside the truncated set.
    long atom_index(double value) const;

private:
    ModelParams p_;
    double upper_ = 0.0;
    std::vector<double> atoms_;
    std::vector<double> atom_logw_;
    std::vector<double> atom_cdf_;
    // continuous domain: per-segment log moments on a uniform grid over [0, upper], built on first use
    struct Segments {
        std::vector<double> log;
        std::vector<double> prefix;  // running sums scaled by e^{−max}
        double max = 0.0;
        std::once_flag once;
    };
    double seg_width_ = 0.0;
    std::shared_ptr<std::array<Segments, 3>> segments_;

    double panel_log_moment(double a, double b, int k) const;
    const Segments& segments(int k) const;
};

/// Counter-based generator: the stream is a pure function of (seed, chain, sweep).
class CounterRng {
public:
    using result_type = std::uint64_t;
    CounterRng(std::uint64_t seed, std::uint64_t chain, std::uint64_t sweep);
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()();
    double uniform();
    double normal();

private:
    std::uint64_t state_;
    std::normal_distribution<double> normal_;
};

struct ProposalSettings {
    double step = 0.05;              // continuous: Gaussian σ
    double independence_prob = 0.1;  // discrete: draw from ω instead of ±γ^d
};

struct SweepStats {
    std::size_t proposed = 0;
    std::size_t accepted = 0;
};

/// One systematic Metropolis sweep over all sites.
SweepStats mcmc_sweep(SpinConfig& cfg, const ModelParams& p, const SiteMeasure& omega, const ProposalSettings& prop,
                      CounterRng& rng);

/// Exact probability that a discrete sweep step at `site` moves cfg to the value `to` (≠ current).
double site_transition_probability(const SpinConfig& cfg, const ModelParams& p, const SiteMeasure& omega,
                                   const ProposalSettings& prop, std::size_t site, double to);

/// log of the unnormalized Gibbs weight Π ω(η_v) e^{−J Σ (η_v−η_w)²} (ν_γ included).
double log_gibbs_weight(const SpinConfig& cfg, const ModelParams& p);

struct GoodRegions {
    IntervalSet minus;
    IntervalSet plus;
};

struct HistogramSpec {
    std::size_t bins = 50;
    double lo = 0.0;
    double hi = 1.0;
};

struct SamplerSettings {
    std::size_t sweeps = 1000;
    std::size_t burn_in = 100;
    std::size_t thin = 1;
    std::uint64_t seed = 1;
    std::uint64_t chain = 0;
    std::optional<double> step;  // continuous; tuned during burn-in when absent
    double independence_prob = 0.1;
    HistogramSpec histogram;
};

struct TraceRow {
    std::size_t sweep = 0;
    std::size_t sites = 0;  // 0 when the row carries no region counts
    double mean_density = 0.0;
    double energy = 0.0;
    std::size_t n_minus = 0;
    std::size_t n_plus = 0;
    double pi_minus = 0.0;
    double pi_plus = 0.0;
    double psi = 0.0;
};

struct SampleResult {
    std::vector<TraceRow> trace;
    std::vector<double> mean_density_series;  // every post-burn-in sweep
    std::vector<double> histogram;            // masses of η₀ over the bins, sum 1
    HistogramSpec histogram_spec;
    double mean_density = 0.0;
    double mean_density_stderr = 0.0;
    double acceptance = 0.0;
    double step = 0.0;
    SpinConfig final_config;
};

/// Runs one chain. `init` defaults to the constant configuration at the site-measure mean.
SampleResult sample_observables(const ModelParams& p, const SamplerSettings& s, const GoodRegions* regions = nullptr,
                                std::optional<SpinConfig> init = std::nullopt);

/// Π_{±,L} and Ψ_L of one configuration from integer counts.
TraceRow region_observables(const SpinConfig& cfg, const GoodRegions& regions);

/// Exact log Ξ by enumeration over the truncated atom set; at most 1e8 states.
double exact_log_partition(const ModelParams& p, double max_states = 1e8);

/// Number of configurations of the truncated discrete state space (may overflow to +∞).
double state_count(const ModelParams& p);

/// Visits every configuration with its log Gibbs weight.
template <class F>
void enumerate_configs(const ModelParams& p, F&& visit, double max_states = 1e8);

struct PressurePoint {
    double lambda = 0.0;
    double mean_density = 0.0;
    double mean_density_stderr = 0.0;
    double pressure = 0.0;
    double stat_error = 0.0;
    double quad_error = 0.0;
    double anchor_error = 0.0;
    double error() const { return stat_error + quad_error + anchor_error; }
};

struct PressureSettings {
    SamplerSettings sampler;
    bool hysteresis_check = false;
};

struct PressureResult {
    std::vector<PressurePoint> ascending;
    std::vector<PressurePoint> descending;  // filled when hysteresis_check is set
    bool hysteresis = false;
    std::vector<std::string> warnings;
};

/// Anchor of the thermodynamic integration at λ: midpoint of the Jensen bracket
/// L^d log ω(ℝ) − 2dJL^d Var_ω̂ ≤ log Ξ ≤ L^d log ω(ℝ), in pressure units. Returns {value, half-width}.
std::pair<double, double> product_anchor(const ModelParams& p);

/// Trapezoid integral of mean densities from an anchor at index `anchor`, with
/// statistical and Richardson quadrature error estimates.
void integrate_branch(std::vector<PressurePoint>& pts, std::size_t anchor, double anchor_value, double anchor_error);

/// Chains along an ascending λ path, each warm-started from the previous point's final
/// configuration (from the last point down when `descending`). The first chain starts at the
/// constant configuration `init` (default: ω mean, or the densest mode of ω when descending).
std::vector<PressurePoint> run_pressure_branch(const ModelParams& p, const std::vector<double>& path,
                                               const SamplerSettings& s, bool descending, std::uint64_t chain_base,
                                               std::optional<double> init = std::nullopt);

/// Nearest admissible value of the spin domain (the nearest atom in the discrete case).
double round_to_domain(const ModelParams& p, double x);

/// (1/(βγ^{−d}L^d)) log Ξ(λ) along λ_path by thermodynamic integration from λ_path[0].
PressureResult pressure_estimate(const ModelParams& p, const std::vector<double>& lambda_path,
                                 const PressureSettings& s);

}  // namespace boxmodel

#include "boxmodel/spinmodel_enumerate.hpp"
