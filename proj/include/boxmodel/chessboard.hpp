#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "boxmodel/intervals.hpp"
#include "boxmodel/numeric.hpp"
#include "boxmodel/spinmodel.hpp"

namespace boxmodel {

/// Reflection through the hyperplane x_axis = p with p ∈ ℤ + 1/2, stored as the odd integer 2p.
struct ReflectionSpec {
    int axis = 0;
    int two_p = 1;
    int L = 2;
};

std::vector<int> reflect(const std::vector<int>& v, const ReflectionSpec& r);

/// Block x + {0..ℓ_1} × ... × {0..ℓ_d} on Λ_L.
struct BlockSpec {
    std::vector<int> corner;
    std::vector<int> ell;
    int L = 2;

    static BlockSpec vertex(int d, int L, std::vector<int> corner = {});
    static BlockSpec edge(int d, int L, int axis, std::vector<int> corner = {});
    int d() const { return static_cast<int>(ell.size()); }
    bool is_vertex() const;
    bool is_edge() const;
    bool contains(const std::vector<int>& c) const;
    void validate() const;
};

/// Site permutations making up T^R_L; element 0 is the identity.
struct OrbitGroup {
    std::vector<std::vector<std::size_t>> elements;
    std::size_t size() const { return elements.size(); }
};

/// Closure of the reflections through p ∈ x_i − 1/2 + (ℓ_i + 1)ℤ, i = 1..d.
OrbitGroup orbit_group(const BlockSpec& block);

/// Π_i L/(ℓ_i + 1)
std::size_t orbit_size_formula(const BlockSpec& block);

/// Conjunction of site conditions η_site ∈ set. No conditions is the whole space.
struct Event {
    struct Condition {
        std::size_t site;
        IntervalSet set;
    };
    std::vector<Condition> conditions;

    static Event whole();
    static Event empty(std::size_t site);
    static Event site_event(std::size_t site, IntervalSet set);
    static Event edge_event(std::size_t v, std::size_t w, IntervalSet a, IntervalSet b);

    bool holds(const SpinConfig& cfg) const;
    /// τ(E): the same conditions moved to the image sites.
    Event mapped(const std::vector<std::size_t>& perm) const;
    Event intersect(const Event& other) const;
};

/// Exponent used for the seminorm of one block shape.
enum class SeminormExponent {
    OrbitSize,    // 1/|T^R_L|
    EdgeFormula,  // 2/L^d, the form used for edge events; equals 1/|T^R_L| for edge blocks
};

std::string to_string(SeminormExponent e);

struct SeminormResult {
    double value = 0.0;
    double disseminated_probability = 0.0;  // P(⋂_τ τ(E))
    double exponent = 0.0;
    SeminormExponent rule = SeminormExponent::OrbitSize;
    std::size_t group_size = 0;
};

/// P of each event under the Gibbs measure, by one enumeration pass.
std::vector<double> event_probabilities(const ModelParams& p, const std::vector<Event>& events,
                                        double max_states = 1e8);

/// ‖E‖ = P(⋂_{τ∈T} τ(E))^{exponent}; the event must depend on block sites only.
SeminormResult chessboard_seminorm_exact(const Event& event, const BlockSpec& block, const ModelParams& p,
                                         SeminormExponent rule = SeminormExponent::OrbitSize);

struct InequalityResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    bool pass = false;
};

/// E[Π_{τ∈A} τ(E_τ)] ≤ Π_{τ∈A} ‖E_τ‖, with A given by indices into orbit_group(block).
InequalityResult verify_chessboard_inequality(const std::map<std::size_t, Event>& events, const BlockSpec& block,
                                              const ModelParams& p);

struct SeminormEstimate {
    double value = 0.0;
    double log_probability = 0.0;
    std::size_t samples = 0;
    double ess_conditioned = 0.0;
    double ess_free = 0.0;
    bool consistent = true;  // false when the ratio estimate exceeds probability 1
    bool heuristic = true;
};

/// Importance-sampling estimate of ‖E‖ for instances too large to enumerate: the product
/// measure ω̂ conditioned on the disseminated pattern proposes, e^{−JΣ(η_v−η_w)²} reweights.
SeminormEstimate chessboard_seminorm_mc(const Event& event, const BlockSpec& block, const ModelParams& p,
                                        std::size_t samples, std::uint64_t seed);

struct PsiBound {
    double value = -kInf;  // max of −dJξ² + log ω([ρ₀, ρ₀ + ξ])
    double rho0 = 0.0;
    double xi = 0.0;
};

/// Default widths {0} ∪ {kγ^d : k = 1..32} ∪ {0.01, 0.02, ..., 0.5}.
std::vector<double> default_xi_grid(const ModelParams& p);

/// Interval bound on ψ. ρ₀ runs over the atoms (discrete) or a uniform grid of the window.
PsiBound psi_lower_bound(const ModelParams& p, const std::vector<double>& xi_grid, std::size_t rho_points = 256);
PsiBound psi_lower_bound(const SiteMeasure& omega, const std::vector<double>& xi_grid,
                         std::size_t rho_points = 256);

}  // namespace boxmodel
