#pragma once
// Small model instances shared by the tests.

#include "boxmodel/numeric.hpp"
#include "boxmodel/spinmodel.hpp"

namespace fixture {

/// Soft-core table f = (ρ−1)²(ρ−3)² + shift on [0, 4].
inline boxmodel::FreeEnergySpec double_well_spec(double shift = 0.0) {
    boxmodel::FreeEnergyTable t;
    t.rho = boxmodel::linspace(0.0, 4.0, 4001);
    for (double r : t.rho) t.f.push_back((r - 1) * (r - 1) * (r - 3) * (r - 3) + shift);
    return boxmodel::FreeEnergySpec::tabulated({t}, boxmodel::CoreCase::SoftCore, 1.0, std::nullopt, std::nullopt,
                                               1.0);
}

/// Hard-core table at γ = 1 with atoms {0, 1, 2}.
inline boxmodel::FreeEnergySpec three_state_spec(double f1 = 0.3, double f2 = 1.5) {
    boxmodel::FreeEnergyTable t{1.0, {0.0, 1.0, 2.0}, {0.0, f1, f2}, {}};
    return boxmodel::FreeEnergySpec::tabulated({t}, boxmodel::CoreCase::HardCore, 1.0, 2.0, 2.5,
                                               boxmodel::kInf);
}

/// Hard-core table at γ = 1 with atoms {0, 1}; f ≡ 0.
inline boxmodel::FreeEnergySpec two_state_spec() {
    boxmodel::FreeEnergyTable t{1.0, {0.0, 1.0}, {0.0, 0.0}, {}};
    return boxmodel::FreeEnergySpec::tabulated({t}, boxmodel::CoreCase::HardCore, 1.0, 1.0, 1.5,
                                               boxmodel::kInf);
}

inline boxmodel::ModelParams discrete_params(boxmodel::FreeEnergySpec spec, int d, int L, double J2,
                                             double lambda) {
    boxmodel::ModelParams p;
    p.d = d;
    p.L = L;
    p.beta = 1.0;
    p.alpha = 0.0;
    p.J2 = J2;
    p.gamma = 1.0;
    p.lambda = lambda;
    p.domain = boxmodel::SpinDomain::Discrete;
    p.spec = std::move(spec);
    return p;
}

}  // namespace fixture
