#include "boxmodel/chessboard.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "boxmodel/errors.hpp"
#include "boxmodel/numeric.hpp"

namespace boxmodel {

std::vector<int> reflect(const std::vector<int>& v, const ReflectionSpec& r) {
    if (r.two_p % 2 == 0) throw ConfigError("reflection: p must lie in Z + 1/2");
    std::vector<int> out = v;
    auto& c = out[static_cast<std::size_t>(r.axis)];
    c = (((r.two_p - c) % r.L) + r.L) % r.L;
    return out;
}

BlockSpec BlockSpec::vertex(int d, int L, std::vector<int> corner) {
    if (corner.empty()) corner.assign(static_cast<std::size_t>(d), 0);
    return BlockSpec{std::move(corner), std::vector<int>(static_cast<std::size_t>(d), 0), L};
}

BlockSpec BlockSpec::edge(int d, int L, int axis, std::vector<int> corner) {
    BlockSpec b = vertex(d, L, std::move(corner));
    b.ell[static_cast<std::size_t>(axis)] = 1;
    return b;
}

bool BlockSpec::is_vertex() const {
    return std::all_of(ell.begin(), ell.end(), [](int l) { return l == 0; });
}

bool BlockSpec::is_edge() const {
    int ones = 0;
    for (int l : ell) {
        if (l == 1) ++ones;
        else if (l != 0) return false;
    }
    return ones == 1;
}

bool BlockSpec::contains(const std::vector<int>& c) const {
    for (std::size_t i = 0; i < ell.size(); ++i) {
        const int off = (((c[i] - corner[i]) % L) + L) % L;
        if (off > ell[i]) return false;
    }
    return true;
}

void BlockSpec::validate() const {
    if (corner.size() != ell.size() || ell.empty()) throw ConfigError("block: corner and side lengths must match d");
    for (int l : ell) {
        if (l < 0) throw ConfigError("block: side lengths must be nonnegative");
        if (L % (2 * (l + 1)) != 0)
            throw ConfigError("block: 2(l_i + 1) must divide L (l_i = " + std::to_string(l) +
                              ", L = " + std::to_string(L) + ")");
    }
}

std::size_t orbit_size_formula(const BlockSpec& block) {
    std::size_t n = 1;
    for (int l : block.ell) n *= static_cast<std::size_t>(block.L / (l + 1));
    return n;
}

OrbitGroup orbit_group(const BlockSpec& block) {
    block.validate();
    const int d = block.d();
    const Torus torus(d, block.L);
    const std::size_t n = torus.sites();
    std::vector<std::vector<std::size_t>> gens;
    for (int i = 0; i < d; ++i) {
        const int period = 2 * (block.ell[static_cast<std::size_t>(i)] + 1);
        std::set<int> seen;
        for (int k = 0; k < block.L; ++k) {
            int two_p = 2 * block.corner[static_cast<std::size_t>(i)] - 1 + period * k;
            two_p = ((two_p % (2 * block.L)) + 2 * block.L) % (2 * block.L);
            if (!seen.insert(two_p).second) continue;
            std::vector<std::size_t> perm(n);
            for (std::size_t v = 0; v < n; ++v) perm[v] = torus.index(reflect(torus.coords(v), {i, two_p, block.L}));
            gens.push_back(std::move(perm));
        }
    }
    std::vector<std::size_t> id(n);
    for (std::size_t v = 0; v < n; ++v) id[v] = v;
    OrbitGroup g;
    std::set<std::vector<std::size_t>> known{id};
    g.elements.push_back(id);
    for (std::size_t head = 0; head < g.elements.size(); ++head) {
        for (const auto& s : gens) {
            std::vector<std::size_t> h(n);
            for (std::size_t v = 0; v < n; ++v) h[v] = s[g.elements[head][v]];
            if (known.insert(h).second) g.elements.push_back(std::move(h));
        }
    }
    return g;
}

Event Event::whole() { return {}; }

Event Event::empty(std::size_t site) { return {{{site, IntervalSet{}}}}; }

Event Event::site_event(std::size_t site, IntervalSet set) {
    set.normalize();
    return {{{site, std::move(set)}}};
}

Event Event::edge_event(std::size_t v, std::size_t w, IntervalSet a, IntervalSet b) {
    return site_event(v, std::move(a)).intersect(site_event(w, std::move(b)));
}

bool Event::holds(const SpinConfig& cfg) const {
    for (const auto& c : conditions)
        if (!c.set.contains(cfg.eta[c.site])) return false;
    return true;
}

Event Event::mapped(const std::vector<std::size_t>& perm) const {
    Event out;
    for (const auto& c : conditions) out = out.intersect(Event{{{perm[c.site], c.set}}});
    return out;
}

Event Event::intersect(const Event& other) const {
    Event out = *this;
    for (const auto& c : other.conditions) {
        auto it = std::find_if(out.conditions.begin(), out.conditions.end(),
                               [&](const Condition& x) { return x.site == c.site; });
        if (it == out.conditions.end())
            out.conditions.push_back(c);
        else
            it->set = boxmodel::intersect(it->set, c.set);
    }
    return out;
}

std::string to_string(SeminormExponent e) { return e == SeminormExponent::OrbitSize ? "orbit-size" : "edge-formula"; }

std::vector<double> event_probabilities(const ModelParams& p, const std::vector<Event>& events, double max_states) {
    double z = -kInf;
    std::vector<double> acc(events.size(), -kInf);
    enumerate_configs(
        p,
        [&](const SpinConfig& cfg, double lw) {
            z = log_add(z, lw);
            for (std::size_t k = 0; k < events.size(); ++k)
                if (events[k].holds(cfg)) acc[k] = log_add(acc[k], lw);
        },
        max_states);
    std::vector<double> out(events.size());
    for (std::size_t k = 0; k < events.size(); ++k) out[k] = acc[k] == -kInf ? 0.0 : std::exp(acc[k] - z);
    return out;
}

namespace {

void check_local(const Event& e, const BlockSpec& block) {
    const Torus torus(block.d(), block.L);
    for (const auto& c : e.conditions)
        if (!block.contains(torus.coords(c.site)))
            throw ConfigError("chessboard: event depends on a site outside the block");
}

Event disseminate(const Event& e, const OrbitGroup& g) {
    Event out;
    for (const auto& perm : g.elements) out = out.intersect(e.mapped(perm));
    return out;
}

double exponent_for(const BlockSpec& block, std::size_t group_size, SeminormExponent rule) {
    if (rule == SeminormExponent::OrbitSize) return 1.0 / static_cast<double>(group_size);
    return 2.0 / std::pow(static_cast<double>(block.L), block.d());
}

}  // namespace

SeminormResult chessboard_seminorm_exact(const Event& event, const BlockSpec& block, const ModelParams& p,
                                         SeminormExponent rule) {
    if (block.d() != p.d || block.L != p.L) throw ConfigError("chessboard: block does not match the torus");
    check_local(event, block);
    const OrbitGroup g = orbit_group(block);
    SeminormResult r;
    r.rule = rule;
    r.group_size = g.size();
    r.exponent = exponent_for(block, g.size(), rule);
    r.disseminated_probability = event_probabilities(p, {disseminate(event, g)})[0];
    r.value = r.disseminated_probability > 0.0 ? std::pow(r.disseminated_probability, r.exponent) : 0.0;
    return r;
}

InequalityResult verify_chessboard_inequality(const std::map<std::size_t, Event>& events, const BlockSpec& block,
                                              const ModelParams& p) {
    if (block.d() != p.d || block.L != p.L) throw ConfigError("chessboard: block does not match the torus");
    const OrbitGroup g = orbit_group(block);
    std::vector<Event> queries;
    Event joint;
    for (const auto& [idx, e] : events) {
        if (idx >= g.size()) throw ConfigError("chessboard: orbit element index out of range");
        check_local(e, block);
        joint = joint.intersect(e.mapped(g.elements[idx]));
        queries.push_back(disseminate(e, g));
    }
    queries.push_back(joint);
    const auto probs = event_probabilities(p, queries);
    InequalityResult r;
    r.lhs = probs.back();
    r.rhs = 1.0;
    const double ex = 1.0 / static_cast<double>(g.size());
    for (std::size_t k = 0; k + 1 < probs.size(); ++k) r.rhs *= probs[k] > 0.0 ? std::pow(probs[k], ex) : 0.0;
    r.margin = r.rhs - r.lhs;
    r.pass = r.margin >= -1e-12;
    return r;
}

SeminormEstimate chessboard_seminorm_mc(const Event& event, const BlockSpec& block, const ModelParams& p,
                                        std::size_t samples, std::uint64_t seed) {
    if (samples == 0) throw ConfigError("chessboard mc: need samples > 0");
    check_local(event, block);
    const OrbitGroup g = orbit_group(block);
    const Event pattern = disseminate(event, g);
    const SiteMeasure omega(p);
    // discrete stand-in for ω: the atoms, or cell midpoints weighted by the cell mass
    std::vector<double> pts, logw;
    if (omega.discrete()) {
        pts = omega.atoms();
        logw = omega.atom_log_weights();
    } else {
        const auto edges = linspace(0.0, omega.upper(), 4097);
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
            pts.push_back(0.5 * (edges[i] + edges[i + 1]));
            logw.push_back(omega.log_mass(edges[i], edges[i + 1]));
        }
    }
    struct Sampler {
        std::vector<double> values, cdf;
        double log_mass = -kInf;
    };
    auto make = [&](const IntervalSet* set) {
        Sampler s;
        std::vector<double> lw;
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (!set || set->contains(pts[i])) {
                s.values.push_back(pts[i]);
                lw.push_back(logw[i]);
            }
        s.log_mass = log_sum_exp(lw);
        double acc = -kInf;
        for (double x : lw) {
            acc = log_add(acc, x);
            s.cdf.push_back(std::exp(acc - s.log_mass));
        }
        return s;
    };
    const Torus torus(p.d, p.L);
    const Sampler free = make(nullptr);
    std::vector<Sampler> site(torus.sites());
    double log_prior = 0.0;
    std::vector<bool> constrained(torus.sites(), false);
    for (const auto& c : pattern.conditions) {
        site[c.site] = make(&c.set);
        constrained[c.site] = true;
        log_prior += site[c.site].log_mass - free.log_mass;
    }
    SeminormEstimate est;
    est.samples = samples;
    if (log_prior == -kInf || std::isnan(log_prior)) {
        est.log_probability = -kInf;
        return est;
    }
    const auto edges = torus.edges();
    auto draw = [](const Sampler& s, double u) {
        const auto it = std::lower_bound(s.cdf.begin(), s.cdf.end(), u);
        return s.values[static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - s.cdf.begin(),
                                                                          static_cast<std::ptrdiff_t>(s.values.size() - 1)))];
    };
    double lcond = -kInf, lfree = -kInf, lcond2 = -kInf, lfree2 = -kInf;
    std::vector<double> eta(torus.sites());
    for (std::size_t k = 0; k < samples; ++k) {
        for (int pass = 0; pass < 2; ++pass) {
            CounterRng rng(seed, static_cast<std::uint64_t>(pass), k);
            for (std::size_t v = 0; v < eta.size(); ++v)
                eta[v] = draw(pass == 0 && constrained[v] ? site[v] : free, rng.uniform());
            double e = 0.0;
            for (const auto& [a, b] : edges) e += (eta[a] - eta[b]) * (eta[a] - eta[b]);
            (pass == 0 ? lcond : lfree) = log_add(pass == 0 ? lcond : lfree, -p.J() * e);
            (pass == 0 ? lcond2 : lfree2) = log_add(pass == 0 ? lcond2 : lfree2, -2.0 * p.J() * e);
        }
    }
    est.log_probability = log_prior + lcond - lfree;
    est.value = std::exp(est.log_probability / static_cast<double>(g.size()));
    // Kish effective sample sizes (Σw)²/Σw²
    est.ess_conditioned = std::exp(2.0 * lcond - lcond2);
    est.ess_free = std::exp(2.0 * lfree - lfree2);
    est.consistent = est.log_probability <= 0.0;
    return est;
}

std::vector<double> default_xi_grid(const ModelParams& p) {
    std::vector<double> xi{0.0};
    for (int k = 1; k <= 32; ++k) xi.push_back(k * p.atom());
    for (int k = 1; k <= 50; ++k) xi.push_back(0.01 * k);
    std::sort(xi.begin(), xi.end());
    xi.erase(std::unique(xi.begin(), xi.end()), xi.end());
    return xi;
}

PsiBound psi_lower_bound(const SiteMeasure& omega, const std::vector<double>& xi_grid, std::size_t rho_points) {
    const ModelParams& p = omega.params();
    const std::vector<double> starts = omega.discrete() ? omega.atoms() : linspace(0.0, omega.upper(), rho_points);
    PsiBound best;
    for (double r0 : starts)
        for (double xi : xi_grid) {
            if (xi < 0.0) throw DomainError("psi bound: widths must be nonnegative");
            const double lm = omega.log_mass(r0, r0 + xi);
            if (lm == -kInf) continue;
            const double v = -p.d * p.J() * xi * xi + lm;
            if (v > best.value) best = {v, r0, xi};
        }
    if (best.value == -kInf) throw DomainError("psi bound: every interval has zero mass (degenerate measure)");
    return best;
}

PsiBound psi_lower_bound(const ModelParams& p, const std::vector<double>& xi_grid, std::size_t rho_points) {
    return psi_lower_bound(SiteMeasure(p), xi_grid, rho_points);
}

}  // namespace boxmodel
