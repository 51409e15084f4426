#include "cqd/schrodinger.hpp"

#include <cmath>

namespace cqd {

SpinorVec pack(const BranchState& s) noexcept { return {s.v.real(), s.v.imag(), s.u.real(), s.u.imag()}; }

BranchState unpack(const SpinorVec& x) noexcept { return {cplx(x[0], x[1]), cplx(x[2], x[3])}; }

namespace {

std::vector<BranchState> unpack_all(const std::vector<SpinorVec>& xs) {
    std::vector<BranchState> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(unpack(x));
    return out;
}

void check_normalized(const BranchState& init) {
    if (std::abs(init.norm2() - 1.0) > 1e-10) {
        throw InvalidArgument("evolve_schrodinger: initial state is not normalized");
    }
}

} // namespace

std::vector<BranchState> evolve_schrodinger(const KMode& mode, const BranchSpec& branch,
                                            const RampProtocol& ramp, const BranchState& init,
                                            const IntegratorConfig& cfg) {
    check_normalized(init);
    cfg.validate_within(ramp.t_i(), ramp.t_f());
    const double s = ramp.energy_scale;
    const double offset = branch.shift() - mode.cos_k();
    const double inv_tau = 1.0 / ramp.tau_Q;
    const double dk = s * mode.delta_k;
    auto rhs = [=](const SpinorVec& x, SpinorVec& dx, double t) {
        schrodinger_rhs(x, dx, -s * (t * inv_tau + offset), dk);
    };
    return unpack_all(integrate_adaptive(rhs, pack(init), cfg));
}

std::vector<BranchState> evolve_schrodinger(const KMode& mode, const BranchSpec& branch,
                                            const std::function<double(double)>& field,
                                            const BranchState& init, const IntegratorConfig& cfg,
                                            double energy_scale) {
    check_normalized(init);
    if (!(energy_scale > 0.0)) throw InvalidArgument("evolve_schrodinger: energy_scale must be positive");
    const double s = energy_scale;
    const double offset = branch.shift() - mode.cos_k();
    const double dk = s * mode.delta_k;
    auto rhs = [&field, s, offset, dk](const SpinorVec& x, SpinorVec& dx, double t) {
        schrodinger_rhs(x, dx, -s * (field(t) + offset), dk);
    };
    return unpack_all(integrate_adaptive(rhs, pack(init), cfg));
}

double adiabatic_df(int N, double delta, double h) {
    const double h2 = h * h;
    if (!(h2 > 1.0) || !std::isfinite(h)) {
        throw DomainError("adiabatic_df: requires |h| > 1 (paramagnetic phase)");
    }
    return std::exp(-static_cast<double>(N) * delta * delta / (4.0 * h2 * (h2 - 1.0)));
}

} // namespace cqd
