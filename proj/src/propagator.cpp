#include "cqd/propagator.hpp"

#include "cqd/errors.hpp"
#include "cqd/special.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace cqd {

double Propagator2::unitarity_defect() const noexcept {
    const cplx a11 = std::norm(U11) + std::norm(U21) - 1.0;
    const cplx a22 = std::norm(U12) + std::norm(U22) - 1.0;
    const cplx a12 = std::conj(U11) * U12 + std::conj(U21) * U22;
    return std::max({std::abs(a11), std::abs(a22), std::abs(a12)});
}

namespace {

// D_omega and D_{omega-1} at one argument, sharing a log scale.
struct PcfPair {
    cplx d0;  // D_omega(z)
    cplx dm1; // D_{omega-1}(z)
    double log_scale;
};

PcfPair pcf_pair(cplx omega, cplx z) {
    const auto r = special::pcf(omega, z);
    // D'_w(z) = -(z/2) D_w(z) + w D_{w-1}(z)
    return {r.value, (r.derivative + 0.5 * z * r.value) / omega, r.log_scale};
}

[[noreturn]] void fail(cplx omega, cplx zi, cplx zf) {
    std::ostringstream os;
    os << "exact_propagator_pcf: non-finite special-function product (omega = " << omega
       << ", z_i = " << zi << ", z_f = " << zf << ")";
    throw DomainError(os.str());
}

bool finite(cplx c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); }

} // namespace

Propagator2 exact_propagator_pcf(const KMode& mode, const BranchSpec& branch, const RampProtocol& ramp,
                                 double t_start, double t_end) {
    if (t_start == t_end) return {};
    // energy_scale * H(t / tau_Q) is H(t' / tau) in the rescaled time t' = s t, tau = s tau_Q.
    const double tau = ramp.energy_scale * ramp.tau_Q;
    const double lambda = mode.delta_k * std::sqrt(tau);
    if (!(lambda > 0.0)) {
        throw DomainError("exact_propagator_pcf: requires delta_k > 0");
    }
    const cplx omega(0.0, 0.5 * lambda * lambda);
    const cplx phase_m = std::polar(1.0, -std::numbers::pi / 4.0); // e^{-i pi/4}
    const cplx phase_p = std::conj(phase_m);
    const double offset = branch.shift() - mode.cos_k();
    auto z_of = [&](double t) {
        const double tau_k = -(t / ramp.tau_Q + offset) * tau;
        return std::sqrt(2.0) * phase_m * tau_k / std::sqrt(tau);
    };
    const cplx zi = z_of(t_start);
    const cplx zf = z_of(t_end);

    const PcfPair pi = pcf_pair(omega, zi);
    const PcfPair mi = pcf_pair(omega, -zi);
    const PcfPair pf = pcf_pair(omega, zf);
    const PcfPair mf = pcf_pair(omega, -zf);

    // Every term is a product of one z_i factor and one z_f factor.
    const double ls_i = std::max(pi.log_scale, mi.log_scale);
    const double ls_f = std::max(pf.log_scale, mf.log_scale);
    const double wi_p = std::exp(pi.log_scale - ls_i), wi_m = std::exp(mi.log_scale - ls_i);
    const double wf_p = std::exp(pf.log_scale - ls_f), wf_m = std::exp(mf.log_scale - ls_f);
    const cplx g = std::exp(special::lgamma(1.0 - omega) + ls_i + ls_f);
    if (!finite(g)) fail(omega, zi, zf);

    const cplx Di = pi.d0 * wi_p, Dmi = mi.d0 * wi_m, Di1 = pi.dm1 * wi_p, Dmi1 = mi.dm1 * wi_m;
    const cplx Df = pf.d0 * wf_p, Dmf = mf.d0 * wf_m, Df1 = pf.dm1 * wf_p, Dmf1 = mf.dm1 * wf_m;

    const double sqrt_pi = std::sqrt(std::numbers::pi);
    const double sqrt_2pi = std::sqrt(2.0 * std::numbers::pi);
    Propagator2 U;
    U.U11 = g / sqrt_2pi * (Dmi1 * Df + Di1 * Dmf);
    // Off-diagonal signs match i d/dt (v,u) = [[hk, +dk], [dk, -hk]] (v,u).
    U.U12 = -g / (lambda * sqrt_pi) * phase_p * (Di * Dmf - Dmi * Df);
    U.U21 = -lambda * g / (2.0 * sqrt_pi) * phase_m * (Di1 * Dmf1 - Dmi1 * Df1);
    U.U22 = g / sqrt_2pi * (Dmi * Df1 + Di * Dmf1);
    if (!finite(U.U11) || !finite(U.U12) || !finite(U.U21) || !finite(U.U22)) fail(omega, zi, zf);
    return U;
}

} // namespace cqd
