#include "cqd/model.hpp"

#include "cqd/errors.hpp"

#include <cmath>
#include <numbers>

namespace cqd {

RampProtocol::RampProtocol(double tau_q, double hi, double hf, double scale)
    : tau_Q(tau_q), h_i(hi), h_f(hf), energy_scale(scale) {
    if (!(tau_Q > 0.0) || !std::isfinite(tau_Q)) {
        throw InvalidArgument("RampProtocol: tau_Q must be positive and finite");
    }
    if (!(h_i < h_f)) {
        throw InvalidArgument("RampProtocol: h_i must be smaller than h_f");
    }
    if (!(energy_scale > 0.0) || !std::isfinite(energy_scale)) {
        throw InvalidArgument("RampProtocol: energy_scale must be positive and finite");
    }
}

double KMode::cos_k() const noexcept { return std::cos(k); }

double BlochHamiltonian::gap() const noexcept { return std::hypot(hk, dk); }

cplx overlap(const BranchState& a, const BranchState& b) noexcept {
    return std::conj(a.v) * b.v + std::conj(a.u) * b.u;
}

KMode make_mode(int m, int N) {
    if (N < 2 || N % 2 != 0) {
        throw InvalidArgument("k-mode: chain length must be even and >= 2, got " + std::to_string(N));
    }
    if (m < 1 || m > N / 2) {
        throw InvalidArgument("k-mode: index m out of range [1, N/2]");
    }
    KMode mode;
    mode.m = m;
    mode.N = N;
    mode.k = (2.0 * m - 1.0) * std::numbers::pi / N;
    mode.delta_k = std::sin(mode.k);
    return mode;
}

std::vector<KMode> k_grid(int N) {
    if (N < 2 || N % 2 != 0) {
        throw InvalidArgument("k_grid: chain length must be even and >= 2, got " + std::to_string(N));
    }
    std::vector<KMode> modes;
    modes.reserve(static_cast<std::size_t>(N / 2));
    for (int m = 1; m <= N / 2; ++m) {
        modes.push_back(make_mode(m, N));
    }
    return modes;
}

BlochHamiltonian bloch_hamiltonian(const KMode& mode, double h, const BranchSpec& branch) noexcept {
    return {-(h + branch.shift() - mode.cos_k()), mode.delta_k};
}

BranchState ground_state(const BlochHamiltonian& H) {
    const double E = H.gap();
    if (!(E > 0.0)) {
        throw DegenerateHamiltonian("ground_state: zero gap (hk = dk = 0)");
    }
    // Eigenvalue -E. Pick the row of (H + E) that avoids cancellation.
    double x, y;
    if (H.hk >= 0.0) {
        x = H.dk;
        y = -(H.hk + E);
    } else {
        x = E - H.hk;
        y = -H.dk;
    }
    const double n = std::hypot(x, y);
    x /= n;
    y /= n;
    if (x < 0.0 || (x == 0.0 && y < 0.0)) {
        x = -x;
        y = -y;
    }
    return {cplx(x, 0.0), cplx(y, 0.0)};
}

BranchState ground_state(const KMode& mode, double h, const BranchSpec& branch) {
    return ground_state(bloch_hamiltonian(mode, h, branch));
}

BranchState environment_ground_state(const KMode& mode, double h) { return ground_state(mode, h, {+1, 0.0}); }

double field_at(double t, const RampProtocol& ramp) noexcept {
    // Pin the endpoints so h0(t_i) and h0(t_f) round-trip exactly.
    if (t == ramp.t_i()) return ramp.h_i;
    if (t == ramp.t_f()) return ramp.h_f;
    return t / ramp.tau_Q;
}

} // namespace cqd
