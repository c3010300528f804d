#pragma once

#include <optional>
#include <string>
#include <vector>

#include "boxmodel/chessboard.hpp"
#include "boxmodel/intervals.hpp"
#include "boxmodel/meanfield.hpp"
#include "boxmodel/spinmodel.hpp"

namespace boxmodel {

struct GoodRegionSpec {
    double delta = 0.0;
    double kappa = 0.0;
    double delta_cap = 0.0;  // δ₀ bound
    double kappa_cap = 0.0;  // min{1, 1/(ρ_{*,+} + ρ_T)}
    IntervalSet minus;
    IntervalSet plus;
    IntervalSet i_delta;  // empty unless hard-core with φ_{λ_*}(ρ_cp) = m_*
    double lambda_minus = 0.0;
    double lambda_plus = 0.0;
    double rho_T = 0.0;
    double lambda_star = 0.0;
    double rho_zero = 0.0;

    GoodRegions regions() const { return {minus, plus}; }
};

/// ρ_T: smallest grid density from which inf_{λ∈[λ_*−1, λ_*+1]} φ_λ ≥ m_* + 1 to the right.
double terminal_density(const MeanFieldAnalysis& a, const FreeEnergySpec& spec, const MeanFieldOptions& opt = {});

/// δ and κ default to 0.3·δ₀ and 0.5·min{1, 1/(ρ_{*,+} + ρ_T)}.
GoodRegionSpec build_good_regions(const MeanFieldAnalysis& a, const FreeEnergySpec& spec,
                                  std::optional<double> delta = std::nullopt,
                                  std::optional<double> kappa = std::nullopt, const MeanFieldOptions& opt = {});

struct ThetaPoint {
    double lambda = 0.0;
    double psi = 0.0;  // ψ proxy
    double log_outside = 0.0;  // log ω̃((G_−∪G_+)^c)
    double log_minus = 0.0;    // log ω̃(G_−)
    double log_plus = 0.0;     // log ω̃(G_+)
    double theta1 = 0.0;
    double theta2 = 0.0;
};

struct ThetaReport {
    double gamma = 0.0;
    double theta1 = 0.0;
    double theta2 = 0.0;
    double theta3 = 0.0;
    double theta3_minus = 0.0;  // ω̃_{λ_−}(G_−^c)
    double theta3_plus = 0.0;   // ω̃_{λ_+}(G_+^c)
    std::vector<ThetaPoint> points;
};

/// log ω(B) and log ω(B^c) for a region given as an interval union.
double log_mass_in(const SiteMeasure& omega, const IntervalSet& set);
double log_mass_outside(const SiteMeasure& omega, const IntervalSet& set);

/// θ₁ and θ₂ as maxima over the λ samples, θ₃ from the two endpoints λ_∓.
ThetaReport compute_thetas(const ModelParams& p, const GoodRegionSpec& regions, std::vector<double> lambdas = {});

struct DsBudget {
    double budget = 0.0;  // 1 − ε/2 − √(1−ε)
    bool verdict = false;
    std::optional<double> delta3;
};

/// Accepts 0 < ε ≤ 1/2.
DsBudget ds_budget(double eps, double delta1, double delta2);

struct ErgodicResult {
    double frequency = 0.0;
    bool identity_holds = true;
    std::size_t violations = 0;
    std::size_t rows = 0;
};

/// Frequency of max{Π_−, Π_+} ≥ 1 − δ₃ and the per-row check max{Π_−, Π_+} ≥ 1 − Ψ.
ErgodicResult ergodic_density_bound(const std::vector<TraceRow>& trace, double delta3);

/// max{n_−, n_+}·n ≥ n_−² + n_+² in integers.
bool ds_identity(const TraceRow& row);

struct BranchStats {
    double mean_density = 0.0;
    double std_error = 0.0;
    double in_region_fraction = 0.0;  // share of post-burn-in sweeps with mean density in the own G
    double pi_minus = 0.0;
    double pi_plus = 0.0;
    double psi = 0.0;
    bool identity_holds = true;
    double ergodic_frequency = 0.0;
    double acceptance = 0.0;
    std::vector<double> histogram;
    std::vector<TraceRow> trace;
};

struct ScanPoint {
    double lambda = 0.0;
    BranchStats vapor;
    BranchStats liquid;
    bool two_phase = false;
    double separation_sigma = 0.0;
};

struct PathSettings {
    std::size_t sweeps = 1200;
    std::size_t burn_in = 200;
    double lambda_low_offset = 4.0;  // vapor anchor at λ_* − offset
    double lambda_high = 30.0;       // liquid anchor
    double overlap = 0.25;           // branches extend this far past λ_*
    double fine_step = 0.05;
    double max_step = 1.0;
    double growth = 1.2;
};

struct ScanSettings {
    std::vector<double> lambdas;  // window grid; defaults to 5 points on [λ_−, λ_+]
    std::size_t sweeps = 4000;
    std::size_t burn_in = 500;
    std::size_t thin = 10;
    std::uint64_t seed = 1;
    double delta3 = 0.05;
    HistogramSpec histogram{40, 0.0, 1.0};
    bool pressures = true;
    PathSettings path;
    unsigned threads = 1;
};

struct PressureRow {
    double lambda = 0.0;
    double sampled = 0.0;
    double gates_penrose = 0.0;
    double gap = 0.0;
    double stat_error = 0.0;
    double quad_error = 0.0;
    double anchor_error = 0.0;
    double finite_gamma_slack = 0.0;  // max{0, GP − ψ/(βγ^{−d})}
    double budget() const { return stat_error + quad_error + anchor_error + finite_gamma_slack; }
    bool bound_holds() const { return gap >= -budget(); }
    std::string branch;
};

struct TransitionReport {
    double gamma = 0.0;
    int L = 0;
    int d = 0;
    double lambda_star = 0.0;
    GoodRegionSpec regions;
    std::vector<ScanPoint> points;
    std::vector<PressurePoint> vapor_path;
    std::vector<PressurePoint> liquid_path;
    bool coexistence_detected = false;
    std::optional<double> lambda_c;
    double lambda_c_error = 0.0;
    std::string lambda_c_method;
    std::vector<PressureRow> pressure_table;
    std::vector<std::string> warnings;
};

/// Thermodynamic-integration path from the window edge outward with geometrically growing steps.
std::vector<double> branch_path(double from, double to, const PathSettings& s);

/// Runs one window point (both cold-start chains).
ScanPoint scan_point(const ModelParams& p, const MeanFieldAnalysis& a, const GoodRegionSpec& g, double lambda,
                     std::size_t index, const ScanSettings& s);

/// Assembles the report from window points (some possibly restored from a checkpoint).
TransitionReport lambda_scan(const ModelParams& p, const MeanFieldAnalysis& a, const GoodRegionSpec& g,
                             const ScanSettings& s, std::vector<std::optional<ScanPoint>> done = {});

/// Sampled pressure against −inf φ_λ along the branch paths.
std::vector<PressureRow> pressure_comparison(const ModelParams& p, const std::vector<PressurePoint>& vapor,
                                             const std::vector<PressurePoint>& liquid);

}  // namespace boxmodel
