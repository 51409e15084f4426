// schrodinger.hpp: noiseless two-level evolution of one k-mode on one branch

#pragma once

#include "cqd/integrator.hpp"
#include "cqd/model.hpp"

#include <array>
#include <functional>
#include <vector>

namespace cqd {

using SpinorVec = std::array<double, 4>; // Re v, Im v, Re u, Im u

SpinorVec pack(const BranchState& s) noexcept;
BranchState unpack(const SpinorVec& x) noexcept;

// Right-hand side of i d/dt (v,u) = H(h) (v,u) for a given instantaneous field.
inline void schrodinger_rhs(const SpinorVec& x, SpinorVec& dx, double hk, double dk) noexcept {
    const double wr_v = hk * x[0] + dk * x[2];
    const double wi_v = hk * x[1] + dk * x[3];
    const double wr_u = dk * x[0] - hk * x[2];
    const double wi_u = dk * x[1] - hk * x[3];
    dx[0] = wi_v;
    dx[1] = -wr_v;
    dx[2] = wi_u;
    dx[3] = -wr_u;
}

// Evolves init from cfg.grid.front() under h(t) = t / tau_Q shifted by the branch.
std::vector<BranchState> evolve_schrodinger(const KMode& mode, const BranchSpec& branch,
                                            const RampProtocol& ramp, const BranchState& init,
                                            const IntegratorConfig& cfg);

// Same, under an arbitrary deterministic field profile h(t) (branch shift still added).
std::vector<BranchState> evolve_schrodinger(const KMode& mode, const BranchSpec& branch,
                                            const std::function<double(double)>& field,
                                            const BranchState& init, const IntegratorConfig& cfg,
                                            double energy_scale = default_energy_scale);

// exp(-N delta^2 / (4 h^2 (h^2 - 1))), valid deep in the paramagnetic phase.
double adiabatic_df(int N, double delta, double h);

} // namespace cqd
