#pragma once

#include <cmath>
#include <vector>

#include "boxmodel/errors.hpp"

namespace boxmodel {

template <class F>
void enumerate_configs(const ModelParams& p, F&& visit, double max_states) {
    if (p.domain != SpinDomain::Discrete) throw ConfigError("enumeration needs the discrete domain");
    const SiteMeasure omega(p);
    const auto& atoms = omega.atoms();
    const auto& logw = omega.atom_log_weights();
    const Torus torus(p.d, p.L);
    const std::size_t n = torus.sites();
    if (std::pow(static_cast<double>(atoms.size()), static_cast<double>(n)) > max_states)
        throw CapacityError("state space of " + std::to_string(atoms.size()) + "^" + std::to_string(n) +
                            " configurations exceeds the enumeration limit");
    const auto edges = torus.edges();
    const double J = p.J();
    std::vector<std::size_t> idx(n, 0);
    SpinConfig cfg{p.d, p.L, std::vector<double>(n, atoms.front())};
    while (true) {
        double lw = 0.0;
        for (std::size_t v = 0; v < n; ++v) lw += logw[idx[v]];
        for (const auto& [a, b] : edges) {
            const double diff = cfg.eta[a] - cfg.eta[b];
            lw -= J * diff * diff;
        }
        visit(static_cast<const SpinConfig&>(cfg), lw);
        std::size_t v = 0;
        while (v < n && ++idx[v] == atoms.size()) {
            idx[v] = 0;
            cfg.eta[v] = atoms[0];
            ++v;
        }
        if (v == n) break;
        cfg.eta[v] = atoms[idx[v]];
    }
}

}  // namespace boxmodel
