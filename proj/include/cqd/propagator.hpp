// propagator.hpp: closed-form Landau-Zener propagator of a linearly swept k-mode
//
// Built from parabolic cylinder functions D_omega(+-z) with omega = i lambda^2 / 2,
// lambda = Delta_k sqrt(tau_Q) and z = sqrt(2) e^{-i pi/4} tau_k(t) / sqrt(tau_Q),
// tau_k(t) = hk(t) tau_Q. Used as an independent oracle for the ODE integrator.

#pragma once

#include "cqd/model.hpp"

#include <array>

namespace cqd {

struct Propagator2 {
    cplx U11{1.0}, U12{0.0}, U21{0.0}, U22{1.0};

    BranchState apply(const BranchState& s) const noexcept {
        return {U11 * s.v + U12 * s.u, U21 * s.v + U22 * s.u};
    }
    // max |(U^dagger U - 1)_ij|
    double unitarity_defect() const noexcept;
};

Propagator2 exact_propagator_pcf(const KMode& mode, const BranchSpec& branch, const RampProtocol& ramp,
                                 double t_start, double t_end);

} // namespace cqd
