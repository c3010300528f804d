#include "boxmodel/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <string>

#include "boxmodel/errors.hpp"
#include "boxmodel/numeric.hpp"

namespace boxmodel {

void check_alpha(const FreeEnergySpec& spec, double alpha) {
    if (alpha > 0.0 && !(alpha < spec.alpha_max))
        throw ConfigError("model ill-defined: alpha = " + std::to_string(alpha) +
                          " is not below alpha_max = " + std::to_string(spec.alpha_max));
}

double eval_phi(const FreeEnergySpec& spec, double alpha, double lambda, double rho) {
    check_alpha(spec, alpha);
    if (rho < 0.0 || std::isnan(rho)) throw DomainError("eval_phi: density must be nonnegative");
    const double f = spec.limit(rho);
    if (is_pos_inf(f)) return kInf;
    return -lambda * rho - 0.5 * alpha * rho * rho + f;
}

double density_upper(const FreeEnergySpec& spec, double alpha, double lambda) {
    check_alpha(spec, alpha);
    const double end = spec.support_end();
    if (std::isfinite(end)) return end;
    const double phi0 = eval_phi(spec, alpha, lambda, 0.0);
    double r = 1.0;
    for (int i = 0; i < 80; ++i, r *= 2.0) {
        const double a = eval_phi(spec, alpha, lambda, r);
        const double b = eval_phi(spec, alpha, lambda, 2.0 * r);
        if (a > phi0 + 10.0 && b >= a) return r;
    }
    throw ConfigError("density_upper: phi_lambda does not grow; model ill-defined");
}

Grid phi_grid(const FreeEnergySpec& spec, double alpha, double lambda, std::size_t points) {
    if (points < 2) throw DomainError("phi_grid: need at least 2 points");
    Grid g;
    g.rho = linspace(0.0, density_upper(spec, alpha, lambda), points);
    g.value.resize(points);
    for (std::size_t i = 0; i < points; ++i) g.value[i] = eval_phi(spec, alpha, lambda, g.rho[i]);
    return g;
}

Grid convex_envelope(std::span<const double> rho, std::span<const double> values) {
    if (rho.size() != values.size()) throw DomainError("convex_envelope: size mismatch");
    std::size_t n = values.size();
    while (n > 0 && is_pos_inf(values[n - 1])) --n;

    std::vector<std::size_t> hull;
    hull.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(values[i])) continue;
        while (hull.size() >= 2) {
            const std::size_t a = hull[hull.size() - 2];
            const std::size_t b = hull.back();
            // Drop b when it lies on or above the chord a–i.
            const double cross = (rho[b] - rho[a]) * (values[i] - values[a]) -
                                 (values[b] - values[a]) * (rho[i] - rho[a]);
            if (cross <= 0.0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(i);
    }
    if (hull.size() < 2) throw DomainError("convex_envelope: fewer than 2 finite points");

    Grid out;
    const std::size_t first = hull.front();
    out.rho.assign(rho.begin() + static_cast<std::ptrdiff_t>(first), rho.begin() + static_cast<std::ptrdiff_t>(n));
    out.value.resize(out.rho.size());
    std::size_t seg = 0;
    for (std::size_t k = 0; k < out.rho.size(); ++k) {
        const std::size_t i = first + k;
        while (seg + 2 < hull.size() && hull[seg + 1] <= i) ++seg;
        const std::size_t a = hull[seg];
        const std::size_t b = hull[seg + 1];
        if (i == a) {
            out.value[k] = values[a];
        } else if (i == b) {
            out.value[k] = values[b];
        } else {
            const double t = (rho[i] - rho[a]) / (rho[b] - rho[a]);
            out.value[k] = values[a] + t * (values[b] - values[a]);
        }
    }
    return out;
}

namespace {

struct BasinMin {
    double rho;
    double value;
};

/// Grid argmin over [lo, hi] refined by golden-section search between the neighbours.
template <class F>
BasinMin basin_min(const F& phi, const std::vector<double>& rho, const std::vector<double>& vals, std::size_t lo,
                   std::size_t hi) {
    std::size_t best = lo;
    for (std::size_t i = lo; i <= hi; ++i)
        if (vals[i] < vals[best]) best = i;
    const double a = rho[best > lo ? best - 1 : lo];
    const double b = rho[best < hi ? best + 1 : hi];
    BasinMin out{rho[best], vals[best]};
    if (b > a) {
        const double x = golden_section_min(phi, a, b);
        const double fx = phi(x);
        if (fx < out.value) out = {x, fx};
    }
    return out;
}

double max_abs_finite(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v)
        if (std::isfinite(x)) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

Nonconvexity detect_nonconvexity(const FreeEnergySpec& spec, double alpha, double /*lambda*/,
                                 const MeanFieldOptions& opt) {
    const Grid g = phi_grid(spec, alpha, 0.0, opt.grid_points);
    const Grid ce = convex_envelope(g.rho, g.value);
    const auto offset = static_cast<std::size_t>(std::find(g.rho.begin(), g.rho.end(), ce.rho.front()) - g.rho.begin());
    const double tol = opt.convexity_tol * std::max(1.0, max_abs_finite(g.value));

    Nonconvexity out;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < ce.rho.size(); ++k) {
        const double v = g.value[offset + k];
        if (!std::isfinite(v)) continue;
        const double gap = v - ce.value[k];
        if (gap > out.max_gap) {
            out.max_gap = gap;
            arg = k;
        }
    }
    if (out.max_gap <= tol) return out;
    out.nonconvex = true;
    out.gap_argmax = ce.rho[arg];
    std::size_t lo = arg;
    std::size_t hi = arg;
    auto gap_at = [&](std::size_t k) { return g.value[offset + k] - ce.value[k]; };
    while (lo > 0 && gap_at(lo - 1) > tol) --lo;
    while (hi + 1 < ce.rho.size() && gap_at(hi + 1) > tol) ++hi;
    out.witness_lo = ce.rho[lo];
    out.witness_hi = ce.rho[hi];
    return out;
}

MeanFieldAnalysis find_coexistence(const FreeEnergySpec& spec, double alpha, const MeanFieldOptions& opt) {
    const Nonconvexity nc = detect_nonconvexity(spec, alpha, 0.0, opt);
    if (!nc.nonconvex) throw NoCoexistenceError("find_coexistence: phi_lambda is convex; no coexistence");

    const Grid g0 = phi_grid(spec, alpha, 0.0, opt.grid_points);
    const std::vector<double>& rho = g0.rho;
    const std::size_t n = rho.size();
    const double h = rho[1] - rho[0];
    std::size_t split = 0;
    while (split + 1 < n && rho[split] < nc.gap_argmax) ++split;
    std::size_t last = n - 1;
    while (last > split && is_pos_inf(g0.value[last])) --last;

    std::vector<double> vals(n);
    auto shifted = [&](double lambda) {
        for (std::size_t i = 0; i < n; ++i) vals[i] = g0.value[i] - lambda * rho[i];
    };
    auto basins = [&](double lambda) {
        shifted(lambda);
        auto phi = [&](double x) { return eval_phi(spec, alpha, lambda, x); };
        return std::pair{basin_min(phi, rho, vals, 0, split), basin_min(phi, rho, vals, split, last)};
    };
    auto diff = [&](double lambda) {
        const auto [l, r] = basins(lambda);
        return l.value - r.value;
    };

    // Initial guess: slope of the envelope segment bridging the non-convex region.
    const Grid ce0 = convex_envelope(rho, g0.value);
    double guess = 0.0;
    {
        const double a = std::max(nc.witness_lo - h, ce0.rho.front());
        const double b = std::min(nc.witness_hi + h, ce0.rho.back());
        auto ce_at = [&](double x) {
            auto it = std::lower_bound(ce0.rho.begin(), ce0.rho.end(), x);
            return ce0.value[static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - ce0.rho.begin(), static_cast<std::ptrdiff_t>(ce0.rho.size() - 1)))];
        };
        guess = (ce_at(b) - ce_at(a)) / (b - a);
    }
    double step = 0.25 * (1.0 + std::abs(guess));
    double lo = guess - step;
    double hi = guess + step;
    double dlo = diff(lo);
    double dhi = diff(hi);
    for (int i = 0; i < 60 && !(dlo <= 0.0 && dhi >= 0.0); ++i) {
        step *= 2.0;
        if (dlo > 0.0) {
            lo = guess - step;
            dlo = diff(lo);
        }
        if (dhi < 0.0) {
            hi = guess + step;
            dhi = diff(hi);
        }
    }
    if (!(dlo <= 0.0 && dhi >= 0.0))
        throw NoCoexistenceError("find_coexistence: bisection on lambda does not bracket a double minimum");
    while (hi - lo > opt.lambda_tol) {
        const double mid = 0.5 * (lo + hi);
        if (diff(mid) > 0.0)
            hi = mid;
        else
            lo = mid;
    }

    MeanFieldAnalysis out;
    out.alpha = alpha;
    out.nonconvexity = nc;
    out.lambda_star = 0.5 * (lo + hi);
    const auto [left, right] = basins(out.lambda_star);
    if (left.rho >= rho[split] - 0.5 * h || right.rho <= rho[split] + 0.5 * h)
        throw NoCoexistenceError("find_coexistence: one basin has no interior minimum");
    out.m_star = std::min(left.value, right.value);

    out.phi_star.rho = rho;
    out.phi_star.value = vals;  // basins() left φ_{λ_*} in vals
    const double tol = opt.value_tol;
    out.minimizers = {left.rho, right.rho};
    for (std::size_t i = 0; i < n; ++i)
        if (vals[i] <= out.m_star + tol) out.minimizers.push_back(rho[i]);
    std::sort(out.minimizers.begin(), out.minimizers.end());
    out.minimizers.erase(std::unique(out.minimizers.begin(), out.minimizers.end()), out.minimizers.end());

    out.rho_minus = left.rho;
    out.rho_plus = right.rho;
    if (out.minimizers.front() < left.rho - 2.0 * h) out.rho_minus = out.minimizers.front();
    if (out.minimizers.back() > right.rho + 2.0 * h) out.rho_plus = out.minimizers.back();

    double best = -kInf;
    for (std::size_t i = 0; i < n; ++i) {
        if (rho[i] <= out.rho_minus || rho[i] >= out.rho_plus || !std::isfinite(vals[i])) continue;
        if (vals[i] > best) {
            best = vals[i];
            out.rho_zero = rho[i];
        }
    }
    if (!(best > out.m_star + 10.0 * tol))
        throw NoCoexistenceError("find_coexistence: flat coexistence, no rho_zero outside the minimizer set");
    out.envelope = convex_envelope(rho, vals);
    return out;
}

double vdw_pressure(double temperature, double rho, double a, double b) {
    if (rho < 0.0) throw DomainError("vdw_pressure: negative density");
    if (b > 0.0 && rho * b >= 1.0) throw DomainError("vdw_pressure: density at or above close packing 1/b");
    return temperature * rho / (1.0 - rho * b) - 0.5 * a * rho * rho;
}

double pressure_from_free_energy(std::span<const double> x, std::span<const double> f, double rho) {
    if (x.size() != f.size() || x.size() < 3) throw DomainError("pressure_from_free_energy: need >= 3 grid points");
    if (!(rho >= x[1] && rho <= x[x.size() - 2]))
        throw DomainError("pressure_from_free_energy: density not interior to the grid");
    auto g = [&](std::size_t i) {
        if (!(x[i] > 0.0) || !std::isfinite(f[i]))
            throw DomainError("pressure_from_free_energy: f must be finite at positive densities near rho");
        return f[i] / x[i];
    };
    auto dg = [&](std::size_t i) {
        const double hl = x[i] - x[i - 1];
        const double hr = x[i + 1] - x[i];
        return (hl * hl * g(i + 1) - hr * hr * g(i - 1) + (hr * hr - hl * hl) * g(i)) / (hl * hr * (hl + hr));
    };
    auto it = std::upper_bound(x.begin(), x.end(), rho);
    std::size_t j = static_cast<std::size_t>(it - x.begin()) - 1;
    double deriv;
    if (rho == x[j] || j + 1 > x.size() - 2) {
        deriv = dg(j);
    } else {
        const double t = (rho - x[j]) / (x[j + 1] - x[j]);
        deriv = (1.0 - t) * dg(j) + t * dg(j + 1);
    }
    return rho * rho * deriv;
}

namespace {

BasinMin global_min(const FreeEnergySpec& spec, double alpha, double lambda, const MeanFieldOptions& opt) {
    check_alpha(spec, alpha);
    const double upper = spec.hard_core() ? *spec.rho_cp : density_upper(spec, alpha, lambda);
    const std::vector<double> rho = linspace(0.0, upper, opt.grid_points);
    std::vector<double> vals(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) vals[i] = eval_phi(spec, alpha, lambda, rho[i]);
    auto phi = [&](double x) { return eval_phi(spec, alpha, lambda, x); };
    BasinMin best{0.0, kInf};
    const std::size_t n = rho.size();
    for (std::size_t i = 0; i < n; ++i) {
        const bool left_ok = i == 0 || vals[i] <= vals[i - 1];
        const bool right_ok = i + 1 == n || vals[i] <= vals[i + 1];
        if (!left_ok || !right_ok || !std::isfinite(vals[i])) continue;
        const BasinMin m = basin_min(phi, rho, vals, i > 0 ? i - 1 : 0, i + 1 < n ? i + 1 : i);
        if (m.value < best.value) best = m;
    }
    return best;
}

}  // namespace

double gates_penrose_pressure(const FreeEnergySpec& spec, double alpha, double lambda, const MeanFieldOptions& opt) {
    return -global_min(spec, alpha, lambda, opt).value;
}

double phi_argmin(const FreeEnergySpec& spec, double alpha, double lambda, const MeanFieldOptions& opt) {
    return global_min(spec, alpha, lambda, opt).rho;
}

double isotherm_pressure(const FreeEnergySpec& spec, double alpha, double rho) {
    if (!(rho > 0.0)) throw DomainError("isotherm_pressure: density must be positive");
    const double h = 1e-5 * rho;
    const double f = spec.limit(rho);
    const double df = (spec.limit(rho + h) - spec.limit(rho - h)) / (2.0 * h);
    if (!std::isfinite(df)) throw DomainError("isotherm_pressure: f is not finite around rho");
    return rho * df - f - 0.5 * alpha * rho * rho;
}

MaxwellCheck maxwell_check(const FreeEnergySpec& spec, const MeanFieldAnalysis& a) {
    MaxwellCheck m;
    m.envelope_pressure = -a.m_star;
    const double vl = 1.0 / a.rho_plus;
    const double vv = 1.0 / a.rho_minus;
    const double area = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double v) { return isotherm_pressure(spec, a.alpha, 1.0 / v); }, vl, vv, 15, 1e-12);
    m.equal_area_pressure = area / (vv - vl);
    m.relative_error = std::abs(m.equal_area_pressure - m.envelope_pressure) / std::abs(m.envelope_pressure);
    return m;
}

}  // namespace boxmodel
