#include "boxmodel/spinmodel.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "boxmodel/errors.hpp"
#include "boxmodel/meanfield.hpp"
#include "boxmodel/numeric.hpp"

namespace boxmodel {

std::string to_string(SpinDomain domain) { return domain == SpinDomain::Discrete ? "discrete" : "continuous"; }

double ModelParams::scale() const { return std::pow(gamma, -static_cast<double>(d)); }
double ModelParams::atom() const { return std::pow(gamma, static_cast<double>(d)); }
double ModelParams::J() const { return 0.5 * beta * J2 * scale(); }
std::size_t ModelParams::sites() const {
    std::size_t n = 1;
    for (int i = 0; i < d; ++i) n *= static_cast<std::size_t>(L);
    return n;
}

void ModelParams::validate() const {
    if (d < 1) throw ConfigError("params: d must be >= 1");
    if (L < 2 || L % 2 != 0) throw ConfigError("params: L must be even and >= 2");
    if (!(beta > 0.0)) throw ConfigError("params: beta must be positive");
    if (J2 < 0.0) throw ConfigError("params: J2 must be nonnegative");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("params: gamma must lie in (0, 1]");
    spec.validate();
    check_alpha(spec, alpha);
}

Torus::Torus(int d, int L) : d_(d), L_(L), n_(1) {
    if (d < 1 || L < 1) throw ConfigError("torus: need d >= 1 and L >= 1");
    for (int i = 0; i < d; ++i) n_ *= static_cast<std::size_t>(L);
    nbr_.resize(n_ * 2 * static_cast<std::size_t>(d));
    for (std::size_t v = 0; v < n_; ++v) {
        std::size_t stride = 1;
        for (int i = 0; i < d; ++i) {
            const int c = static_cast<int>((v / stride) % static_cast<std::size_t>(L));
            const std::size_t base = v - static_cast<std::size_t>(c) * stride;
            nbr_[v * 2 * d + 2 * i] = base + static_cast<std::size_t>((c + 1) % L) * stride;
            nbr_[v * 2 * d + 2 * i + 1] = base + static_cast<std::size_t>((c + L - 1) % L) * stride;
            stride *= static_cast<std::size_t>(L);
        }
    }
}

std::vector<int> Torus::coords(std::size_t v) const {
    std::vector<int> c(static_cast<std::size_t>(d_));
    for (int i = 0; i < d_; ++i) {
        c[static_cast<std::size_t>(i)] = static_cast<int>(v % static_cast<std::size_t>(L_));
        v /= static_cast<std::size_t>(L_);
    }
    return c;
}

std::size_t Torus::index(const std::vector<int>& c) const {
    std::size_t v = 0;
    for (int i = d_ - 1; i >= 0; --i) {
        const int x = ((c[static_cast<std::size_t>(i)] % L_) + L_) % L_;
        v = v * static_cast<std::size_t>(L_) + static_cast<std::size_t>(x);
    }
    return v;
}

std::vector<std::pair<std::size_t, std::size_t>> Torus::edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(n_ * static_cast<std::size_t>(d_));
    for (std::size_t v = 0; v < n_; ++v)
        for (int i = 0; i < d_; ++i) out.emplace_back(v, neighbor(v, i, +1));
    return out;
}

SpinConfig SpinConfig::constant(const ModelParams& p, double value) {
    return SpinConfig{p.d, p.L, std::vector<double>(p.sites(), value)};
}

double site_energy_density(const ModelParams& p, double rho) {
    const double f = p.spec.at_gamma(p.gamma, rho);
    if (is_pos_inf(f)) return kInf;
    return -p.lambda * rho - 0.5 * p.alpha * rho * rho + f;
}

EnergyParts hamiltonian_parts(const SpinConfig& cfg, const ModelParams& p) {
    const Torus torus(p.d, p.L);
    if (cfg.eta.size() != torus.sites()) throw ConfigError("hamiltonian: configuration size mismatch");
    EnergyParts e;
    for (double x : cfg.eta) e.site += site_energy_density(p, x);
    double grad = 0.0;
    for (const auto& [a, b] : torus.edges()) {
        const double diff = cfg.eta[a] - cfg.eta[b];
        grad += diff * diff;
    }
    e.site *= p.scale();
    e.gradient = p.scale() * 0.5 * p.J2 * grad;
    return e;
}

double hamiltonian(const SpinConfig& cfg, const ModelParams& p) { return hamiltonian_parts(cfg, p).total(); }

double log_site_weight(const ModelParams& p, double rho) {
    if (rho < 0.0) return -kInf;
    const double e = site_energy_density(p, rho);
    if (is_pos_inf(e)) return -kInf;
    double lw = -p.beta * p.scale() * e;
    if (p.domain == SpinDomain::Discrete) lw += p.d * std::log(p.gamma);
    return lw;
}

double log_gibbs_weight(const SpinConfig& cfg, const ModelParams& p) {
    const Torus torus(p.d, p.L);
    double lw = 0.0;
    for (double x : cfg.eta) lw += log_site_weight(p, x);
    if (lw == -kInf) return lw;
    for (const auto& [a, b] : torus.edges()) {
        const double diff = cfg.eta[a] - cfg.eta[b];
        lw -= p.J() * diff * diff;
    }
    return lw;
}

SiteMeasure::SiteMeasure(const ModelParams& p) : p_(p) {
    constexpr double kDrop = 60.0;
    if (p.domain == SpinDomain::Discrete) {
        const double h = p.atom();
        double best = -kInf;
        const double cap = p.spec.hard_core() ? *p.spec.rho_max : kInf;
        std::vector<double> candidates;
        for (long k = 0;; ++k) {
            const double x = static_cast<double>(k) * h;
            if (x > cap * (1.0 + 1e-12)) break;
            if (k > 10'000'000) throw CapacityError("site measure: too many atoms before the weight decays");
            const double lw = log_site_weight(p, x);
            if (!p.spec.hard_core() && lw < best - kDrop && !atoms_.empty() && lw < atom_logw_.back()) break;
            if (lw == -kInf) continue;
            best = std::max(best, lw);
            atoms_.push_back(x);
            atom_logw_.push_back(lw);
        }
        if (atoms_.empty()) throw ConfigError("site measure: no atom carries positive weight");
        // keep the atoms within e^{−60} of the largest one on the soft-core side only
        upper_ = atoms_.back();
        const double total = log_sum_exp(atom_logw_);
        double acc = -kInf;
        atom_cdf_.resize(atoms_.size());
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            acc = log_add(acc, atom_logw_[i]);
            atom_cdf_[i] = std::exp(acc - total);
        }
        atom_cdf_.back() = 1.0;
        return;
    }
    if (p.spec.hard_core()) {
        const double rmax = *p.spec.rho_max;
        const auto grid = linspace(0.0, rmax, 4097);
        std::size_t last = 0;
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (log_site_weight(p, grid[i]) > -kInf) last = i;
        upper_ = grid[std::min(last + 1, grid.size() - 1)];
        seg_width_ = upper_ / 4096;
        segments_ = std::make_shared<std::array<Segments, 3>>();
        return;
    }
    double r = 1.0;
    for (int it = 0;; ++it, r *= 2.0) {
        if (it > 60) throw ConfigError("site measure: weight does not decay; model ill-defined");
        double best = -kInf;
        for (double x : linspace(0.0, r, 1025)) best = std::max(best, log_site_weight(p, x));
        const double a = log_site_weight(p, r);
        if (a < best - kDrop && log_site_weight(p, 2.0 * r) < a) break;
    }
    upper_ = r;
    seg_width_ = upper_ / 4096;
    segments_ = std::make_shared<std::array<Segments, 3>>();
}

double SiteMeasure::panel_log_moment(double lo, double hi, int k) const {
    double m = -kInf;
    for (double x : linspace(lo, hi, 9)) m = std::max(m, log_site_weight(p_, x));
    if (m == -kInf) return -kInf;
    auto integrand = [&](double x) {
        const double lw = log_site_weight(p_, x);
        if (lw == -kInf) return 0.0;
        return std::exp(lw - m) * (k == 0 ? 1.0 : std::pow(x, k));
    };
    const double v = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(integrand, lo, hi, 2, 1e-10);
    return v > 0.0 ? m + std::log(v) : -kInf;
}

const SiteMeasure::Segments& SiteMeasure::segments(int k) const {
    Segments& seg = (*segments_)[k];
    std::call_once(seg.once, [&] {
        const std::size_t n = 4096;
        seg.log.resize(n);
        for (std::size_t j = 0; j < n; ++j)
            seg.log[j] = panel_log_moment(seg_width_ * j, j + 1 == n ? upper_ : seg_width_ * (j + 1), k);
        seg.max = *std::max_element(seg.log.begin(), seg.log.end());
        seg.prefix.assign(n + 1, 0.0);
        for (std::size_t j = 0; j < n; ++j) seg.prefix[j + 1] = seg.prefix[j] + std::exp(seg.log[j] - seg.max);
    });
    return seg;
}

double SiteMeasure::log_moment(double a, double b, int k) const {
    a = std::max(a, 0.0);
    b = std::min(b, upper_);
    if (!(b >= a)) return -kInf;
    if (discrete()) {
        const double tol = 1e-9 * p_.atom();
        double acc = -kInf;
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            const double x = atoms_[i];
            if (x < a - tol || x > b + tol) continue;
            if (k > 0 && x == 0.0) continue;
            acc = log_add(acc, k > 0 ? atom_logw_[i] + k * std::log(x) : atom_logw_[i]);
        }
        return acc;
    }
    if (b == a) return -kInf;
    const Segments& seg = segments(k);
    const auto i = static_cast<std::size_t>(std::ceil(a / seg_width_ - 1e-9));
    const auto j = std::min(static_cast<std::size_t>(std::floor(b / seg_width_ + 1e-9)), seg.log.size());
    if (i >= j) return panel_log_moment(a, b, k);
    double acc = -kInf;
    if (a < seg_width_ * i) acc = log_add(acc, panel_log_moment(a, seg_width_ * i, k));
    if (b > seg_width_ * j) acc = log_add(acc, panel_log_moment(seg_width_ * j, b, k));
    const double whole = seg.prefix[j] - seg.prefix[i];
    if (whole > 1e-6 * seg.prefix[j]) return log_add(acc, seg.max + std::log(whole));
    // tiny relative to the prefix: sum the segments directly
    for (std::size_t t = i; t < j; ++t) acc = log_add(acc, seg.log[t]);
    return acc;
}

double SiteMeasure::mean() const { return std::exp(log_moment(0.0, upper_, 1) - log_total()); }

double SiteMeasure::variance() const {
    const double m = mean();
    const double m2 = std::exp(log_moment(0.0, upper_, 2) - log_total());
    return std::max(0.0, m2 - m * m);
}

double SiteMeasure::sample_atom(double u) const {
    const auto it = std::lower_bound(atom_cdf_.begin(), atom_cdf_.end(), u);
    return atoms_[static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - atom_cdf_.begin(),
                                                                    static_cast<std::ptrdiff_t>(atoms_.size() - 1)))];
}

long SiteMeasure::atom_index(double value) const {
    const auto it = std::lower_bound(atoms_.begin(), atoms_.end(), value - 1e-9 * p_.atom());
    if (it == atoms_.end() || std::abs(*it - value) > 1e-9 * p_.atom()) return -1;
    return static_cast<long>(it - atoms_.begin());
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t chain, std::uint64_t sweep)
    : state_(splitmix(splitmix(splitmix(seed) ^ chain) ^ sweep)) {}

CounterRng::result_type CounterRng::operator()() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double CounterRng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double CounterRng::normal() { return normal_(*this); }

namespace {

double gradient_change(const SpinConfig& cfg, const Torus& torus, std::size_t v, double from, double to) {
    double s = 0.0;
    for (int i = 0; i < torus.d(); ++i)
        for (int dir : {+1, -1}) {
            const double w = cfg.eta[torus.neighbor(v, i, dir)];
            s += (to - w) * (to - w) - (from - w) * (from - w);
        }
    return s;
}

double neighbor_value(double x, double h, int dir) {
    const long k = std::lround(x / h) + dir;
    return static_cast<double>(k) * h;
}

}  // namespace

SweepStats mcmc_sweep(SpinConfig& cfg, const ModelParams& p, const SiteMeasure& omega, const ProposalSettings& prop,
                      CounterRng& rng) {
    const Torus torus(p.d, p.L);
    const double J = p.J();
    const bool discrete = p.domain == SpinDomain::Discrete;
    const double h = p.atom();
    SweepStats st;
    for (std::size_t v = 0; v < cfg.eta.size(); ++v) {
        const double x = cfg.eta[v];
        double y;
        bool independence = false;
        if (discrete) {
            if (rng.uniform() < prop.independence_prob) {
                independence = true;
                y = omega.sample_atom(rng.uniform());
            } else {
                y = neighbor_value(x, h, rng.uniform() < 0.5 ? -1 : +1);
            }
        } else {
            y = std::abs(x + prop.step * rng.normal());
        }
        const double u = rng.uniform();
        ++st.proposed;
        if (y < 0.0) continue;
        double log_acc;
        if (independence) {
            if (omega.atom_index(x) < 0) continue;
            log_acc = -J * gradient_change(cfg, torus, v, x, y);
        } else {
            const double ly = log_site_weight(p, y);
            if (ly == -kInf) continue;
            log_acc = ly - log_site_weight(p, x) - J * gradient_change(cfg, torus, v, x, y);
        }
        if (log_acc >= 0.0 || u < std::exp(log_acc)) {
            cfg.eta[v] = y;
            ++st.accepted;
        }
    }
    return st;
}

double site_transition_probability(const SpinConfig& cfg, const ModelParams& p, const SiteMeasure& omega,
                                   const ProposalSettings& prop, std::size_t site, double to) {
    if (p.domain != SpinDomain::Discrete) throw ConfigError("transition probability needs the discrete domain");
    const Torus torus(p.d, p.L);
    const double x = cfg.eta[site];
    const double h = p.atom();
    const double J = p.J();
    const double grad = J * gradient_change(cfg, torus, site, x, to);
    double prob = 0.0;
    const long step = std::lround(to / h) - std::lround(x / h);
    if ((step == 1 || step == -1) && to >= 0.0) {
        const double ly = log_site_weight(p, to);
        if (ly > -kInf) {
            const double a = ly - log_site_weight(p, x) - grad;
            prob += (1.0 - prop.independence_prob) * 0.5 * std::min(1.0, std::exp(a));
        }
    }
    const long ix = omega.atom_index(x);
    const long iy = omega.atom_index(to);
    if (ix >= 0 && iy >= 0 && ix != iy) {
        const double q = std::exp(omega.atom_log_weights()[static_cast<std::size_t>(iy)] -
                                  omega.log_total());
        prob += prop.independence_prob * q * std::min(1.0, std::exp(-grad));
    }
    return prob;
}

TraceRow region_observables(const SpinConfig& cfg, const GoodRegions& regions) {
    TraceRow r;
    for (double x : cfg.eta) {
        if (regions.minus.contains(x))
            ++r.n_minus;
        else if (regions.plus.contains(x))
            ++r.n_plus;
    }
    r.sites = cfg.eta.size();
    const double n = static_cast<double>(cfg.eta.size());
    r.pi_minus = static_cast<double>(r.n_minus) / n;
    r.pi_plus = static_cast<double>(r.n_plus) / n;
    r.psi = 1.0 - r.pi_minus * r.pi_minus - r.pi_plus * r.pi_plus;
    return r;
}

SampleResult sample_observables(const ModelParams& p, const SamplerSettings& s, const GoodRegions* regions,
                                std::optional<SpinConfig> init) {
    if (s.burn_in >= s.sweeps) throw ConfigError("sampler: burn_in must be smaller than sweeps");
    if (s.thin == 0) throw ConfigError("sampler: thin must be positive");
    if (s.histogram.bins == 0 || !(s.histogram.hi > s.histogram.lo))
        throw ConfigError("sampler: histogram needs bins > 0 and hi > lo");
    p.validate();
    const SiteMeasure omega(p);
    SpinConfig cfg = init ? *init : SpinConfig::constant(p, p.domain == SpinDomain::Discrete
                                                                ? neighbor_value(omega.mean(), p.atom(), 0)
                                                                : omega.mean());
    if (cfg.eta.size() != p.sites()) throw ConfigError("sampler: initial configuration size mismatch");

    ProposalSettings prop;
    prop.independence_prob = s.independence_prob;
    const bool tune = p.domain == SpinDomain::Continuous && !s.step;
    prop.step = s.step ? *s.step : std::max(1e-4, std::sqrt(omega.variance()));

    SampleResult out;
    out.histogram_spec = s.histogram;
    out.histogram.assign(s.histogram.bins, 0.0);
    const double bin_w = (s.histogram.hi - s.histogram.lo) / static_cast<double>(s.histogram.bins);
    SweepStats window, post;
    for (std::size_t t = 0; t < s.sweeps; ++t) {
        CounterRng rng(s.seed, s.chain, t);
        const SweepStats st = mcmc_sweep(cfg, p, omega, prop, rng);
        if (t < s.burn_in) {
            window.proposed += st.proposed;
            window.accepted += st.accepted;
            if (tune && (t + 1) % 25 == 0) {
                const double rate = static_cast<double>(window.accepted) / static_cast<double>(window.proposed);
                if (rate < 0.3)
                    prop.step *= 0.7;
                else if (rate > 0.5)
                    prop.step *= 1.4;
                window = {};
            }
            continue;
        }
        post.proposed += st.proposed;
        post.accepted += st.accepted;
        double mean = 0.0;
        for (double x : cfg.eta) mean += x;
        mean /= static_cast<double>(cfg.eta.size());
        out.mean_density_series.push_back(mean);
        const double x0 = cfg.eta[0];
        const auto bin = static_cast<std::size_t>(
            std::clamp(std::floor((x0 - s.histogram.lo) / bin_w), 0.0, static_cast<double>(s.histogram.bins - 1)));
        out.histogram[bin] += 1.0;
        if ((t - s.burn_in) % s.thin == 0) {
            TraceRow row = regions ? region_observables(cfg, *regions) : TraceRow{};
            row.sweep = t;
            row.mean_density = mean;
            row.energy = hamiltonian(cfg, p);
            out.trace.push_back(row);
        }
    }
    const double n_post = static_cast<double>(out.mean_density_series.size());
    for (double& m : out.histogram) m /= n_post;
    double sum = 0.0;
    for (double m : out.mean_density_series) sum += m;
    out.mean_density = sum / n_post;
    out.mean_density_stderr = batch_means_stderr(out.mean_density_series);
    out.acceptance = post.proposed ? static_cast<double>(post.accepted) / static_cast<double>(post.proposed) : 0.0;
    out.step = prop.step;
    out.final_config = std::move(cfg);
    return out;
}

double state_count(const ModelParams& p) {
    const SiteMeasure omega(p);
    return std::pow(static_cast<double>(omega.atoms().size()), static_cast<double>(p.sites()));
}

double exact_log_partition(const ModelParams& p, double max_states) {
    double acc = -kInf;
    enumerate_configs(p, [&](const SpinConfig&, double lw) { acc = log_add(acc, lw); }, max_states);
    return acc;
}

std::pair<double, double> product_anchor(const ModelParams& p) {
    const SiteMeasure omega(p);
    const double upper = omega.log_total() / (p.beta * p.scale());
    const double bracket = p.d * p.J2 * omega.variance();
    return {upper - 0.5 * bracket, 0.5 * bracket};
}

void integrate_branch(std::vector<PressurePoint>& pts, std::size_t anchor, double anchor_value, double anchor_error) {
    const std::size_t n = pts.size();
    if (anchor >= n) throw DomainError("integrate_branch: anchor index out of range");
    pts[anchor].pressure = anchor_value;
    pts[anchor].stat_error = 0.0;
    pts[anchor].quad_error = 0.0;
    pts[anchor].anchor_error = anchor_error;

    auto seg = [&](std::size_t i) {  // trapezoid over [λ_i, λ_{i+1}]
        return 0.5 * (pts[i + 1].lambda - pts[i].lambda) * (pts[i].mean_density + pts[i + 1].mean_density);
    };
    // Richardson pair error for segments i, i+1: |T(h) − T(2h)| / 3
    auto pair_err = [&](std::size_t i) {
        const double fine = seg(i) + seg(i + 1);
        const double coarse =
            0.5 * (pts[i + 2].lambda - pts[i].lambda) * (pts[i].mean_density + pts[i + 2].mean_density);
        return std::abs(fine - coarse) / 3.0;
    };
    auto seg_err = [&](std::size_t i) {
        if (n < 3) return 0.0;
        const std::size_t j = std::min(i, n - 3);
        return 0.5 * pair_err(j);
    };

    for (std::size_t i = anchor + 1; i < n; ++i) {
        pts[i].pressure = pts[i - 1].pressure + seg(i - 1);
        pts[i].quad_error = pts[i - 1].quad_error + seg_err(i - 1);
        pts[i].anchor_error = anchor_error;
    }
    for (std::size_t i = anchor; i-- > 0;) {
        pts[i].pressure = pts[i + 1].pressure - seg(i);
        pts[i].quad_error = pts[i + 1].quad_error + seg_err(i);
        pts[i].anchor_error = anchor_error;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = std::min(i, anchor);
        const std::size_t hi = std::max(i, anchor);
        double var = 0.0;
        for (std::size_t j = lo; j <= hi && hi > lo; ++j) {
            double w = 0.0;
            if (j > lo) w += 0.5 * (pts[j].lambda - pts[j - 1].lambda);
            if (j < hi) w += 0.5 * (pts[j + 1].lambda - pts[j].lambda);
            var += w * w * pts[j].mean_density_stderr * pts[j].mean_density_stderr;
        }
        pts[i].stat_error = std::sqrt(var);
    }
}

double round_to_domain(const ModelParams& p, double x) {
    if (p.domain == SpinDomain::Continuous) return std::max(0.0, x);
    return std::max(0.0, neighbor_value(x, p.atom(), 0));
}

std::vector<PressurePoint> run_pressure_branch(const ModelParams& base, const std::vector<double>& path,
                                               const SamplerSettings& s, bool descending, std::uint64_t chain_base,
                                               std::optional<double> init) {
    std::vector<PressurePoint> pts(path.size());
    std::optional<SpinConfig> cfg;
    for (std::size_t k = 0; k < path.size(); ++k) {
        const std::size_t i = descending ? path.size() - 1 - k : k;
        ModelParams p = base;
        p.lambda = path[i];
        SamplerSettings si = s;
        si.chain = chain_base + i;
        if (!cfg) {
            double start;
            if (init) {
                start = *init;
            } else if (descending) {
                const SiteMeasure omega(p);
                double best = -kInf;
                start = 0.0;
                for (double x : linspace(0.0, omega.upper(), 2049)) {
                    const double lw = log_site_weight(p, x);
                    if (lw > best) {
                        best = lw;
                        start = x;
                    }
                }
            } else {
                start = SiteMeasure(p).mean();
            }
            cfg = SpinConfig::constant(p, round_to_domain(p, start));
        }
        const SampleResult r = sample_observables(p, si, nullptr, cfg);
        cfg = r.final_config;
        pts[i].lambda = path[i];
        pts[i].mean_density = r.mean_density;
        pts[i].mean_density_stderr = r.mean_density_stderr;
    }
    return pts;
}

PressureResult pressure_estimate(const ModelParams& p, const std::vector<double>& lambda_path,
                                 const PressureSettings& s) {
    if (lambda_path.empty()) throw ConfigError("pressure_estimate: empty lambda path");
    if (!std::is_sorted(lambda_path.begin(), lambda_path.end()))
        throw ConfigError("pressure_estimate: lambda path must be ascending");
    ModelParams p0 = p;
    p0.lambda = lambda_path.front();
    p0.validate();
    const auto [anchor, anchor_err] = product_anchor(p0);

    PressureResult out;
    out.ascending = run_pressure_branch(p, lambda_path, s.sampler, false, 0);
    integrate_branch(out.ascending, 0, anchor, anchor_err);
    if (s.hysteresis_check) {
        out.descending = run_pressure_branch(p, lambda_path, s.sampler, true, 1u << 20);
        integrate_branch(out.descending, 0, anchor, anchor_err);
        for (std::size_t i = 0; i < lambda_path.size(); ++i) {
            const auto& a = out.ascending[i];
            const auto& b = out.descending[i];
            const double sigma = std::hypot(a.mean_density_stderr, b.mean_density_stderr);
            if (std::abs(a.mean_density - b.mean_density) > 5.0 * sigma) {
                out.hysteresis = true;
                out.warnings.push_back("hysteresis at lambda = " + std::to_string(a.lambda) +
                                       ": branch mean densities " + std::to_string(a.mean_density) + " and " +
                                       std::to_string(b.mean_density));
            }
        }
    }
    return out;
}

}  // namespace boxmodel
