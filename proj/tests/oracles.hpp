#pragma once
// Independent reference computations shared by unit and acceptance tests.

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

namespace oracle {

/// Tonks f with b = β = 1.
inline double tonks_f(double r) { return r == 0.0 ? 0.0 : r * (std::log(r / (1.0 - r)) - 1.0); }
inline double tonks_df(double r) { return std::log(r / (1.0 - r)) + r / (1.0 - r); }

struct Tangent {
    double lambda;
    double rho_minus;
    double rho_plus;
    double m;
};

/// Common tangent of −(α/2)ρ² + f_Tonks by Newton on (equal slope, equal intercept).
inline std::optional<Tangent> tonks_double_tangent(double alpha, double r1, double r2) {
    auto slope = [&](double r) { return tonks_df(r) - alpha * r; };
    auto g = [&](double r) { return tonks_f(r) - 0.5 * alpha * r * r; };
    for (int it = 0; it < 100; ++it) {
        const double s1 = slope(r1), s2 = slope(r2);
        const double F1 = s1 - s2;
        const double F2 = (g(r1) - s1 * r1) - (g(r2) - s2 * r2);
        if (std::abs(F1) + std::abs(F2) < 1e-15) break;
        const double h = 1e-7;
        const double a11 = (slope(r1 + h) - slope(r1 - h)) / (2 * h);
        const double a12 = -(slope(r2 + h) - slope(r2 - h)) / (2 * h);
        // d/dr [g − g'r] = −r g''
        const double a21 = -r1 * a11;
        const double a22 = r2 * (-a12);
        const double det = a11 * a22 - a12 * a21;
        double d1 = (F1 * a22 - a12 * F2) / det;
        double d2 = (a11 * F2 - a21 * F1) / det;
        // damped step keeps both points inside (0, 1)
        double t = 1.0;
        while ((r1 - t * d1 <= 0 || r1 - t * d1 >= 1 || r2 - t * d2 <= 0 || r2 - t * d2 >= 1) && t > 1e-6) t *= 0.5;
        r1 -= t * d1;
        r2 -= t * d2;
    }
    if (std::abs(r1 - r2) < 1e-4) return std::nullopt;
    const double lam = slope(r1);
    return Tangent{lam, std::min(r1, r2), std::max(r1, r2), g(r1) - lam * r1};
}

/// Dense-grid double tangent: scan λ, compare global minima of φ_λ left and right of a split.
inline Tangent grid_double_tangent(double alpha, double lam_lo, double lam_hi, std::size_t n_lambda,
                                   std::size_t n_rho) {
    std::vector<double> rho(n_rho), g(n_rho);
    for (std::size_t i = 0; i < n_rho; ++i) {
        rho[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n_rho);
        g[i] = tonks_f(rho[i]) - 0.5 * alpha * rho[i] * rho[i];
    }
    auto gap = [&](double lam, double& rl, double& rr, double& m) {
        // split at the minimum of φ_λ'' sign, i.e. the spinodal midpoint 1/3 for Tonks
        double ml = 1e300, mr = 1e300;
        for (std::size_t i = 0; i < n_rho; ++i) {
            const double v = g[i] - lam * rho[i];
            if (rho[i] < 1.0 / 3.0) {
                if (v < ml) { ml = v; rl = rho[i]; }
            } else if (v < mr) {
                mr = v;
                rr = rho[i];
            }
        }
        m = std::min(ml, mr);
        return ml - mr;
    };
    double best_lam = lam_lo, best = 1e300, rl = 0, rr = 0, m = 0;
    for (std::size_t k = 0; k < n_lambda; ++k) {
        const double lam = lam_lo + (lam_hi - lam_lo) * static_cast<double>(k) / static_cast<double>(n_lambda - 1);
        const double d = std::abs(gap(lam, rl, rr, m));
        if (d < best) {
            best = d;
            best_lam = lam;
        }
    }
    gap(best_lam, rl, rr, m);
    return {best_lam, rl, rr, m};
}

/// Min over the grid of second differences of −(α/2)ρ² + f_Tonks on (0, 1).
inline double tonks_min_second_difference(double alpha, std::size_t n) {
    const double h = 1.0 / static_cast<double>(n);
    double mn = 1e300;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        auto g = [&](double r) { return tonks_f(r) - 0.5 * alpha * r * r; };
        const double r = h * static_cast<double>(i);
        mn = std::min(mn, (g(r + h) - 2 * g(r) + g(r - h)) / (h * h));
    }
    return mn;
}

/// Lower hull by gift wrapping: from each hull point take the next point of least slope.
inline std::vector<double> gift_wrap_lower_hull(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> out(n);
    std::size_t i = 0;
    out[0] = y[0];
    while (i + 1 < n) {
        std::size_t best = i + 1;
        double bs = (y[best] - y[i]) / (x[best] - x[i]);
        for (std::size_t j = i + 2; j < n; ++j) {
            const double s = (y[j] - y[i]) / (x[j] - x[i]);
            if (s <= bs) {
                bs = s;
                best = j;
            }
        }
        for (std::size_t k = i + 1; k <= best; ++k) out[k] = y[i] + bs * (x[k] - x[i]);
        i = best;
    }
    return out;
}

}  // namespace oracle
