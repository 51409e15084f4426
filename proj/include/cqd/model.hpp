// model.hpp: momentum-mode decomposition of the driven transverse-field Ising ring
//
// After fermionization the ring of N spins splits into N/2 independent two-level
// problems labelled by k = (2m-1)pi/N. Each mode is evolved twice, once per qubit
// branch, under the effective field h(t) +/- delta.

#pragma once

#include <complex>
#include <vector>

namespace cqd {

using cplx = std::complex<double>;

// Fermionizing -sum (sx sx + h sz) gives single-particle energies 2 sqrt(hk^2 + dk^2);
// the mode dynamics are generated by energy_scale * H_k. Set it to 1 to evolve with
// H_k as written.
inline constexpr double default_energy_scale = 2.0;

// Linear drive h0(t) = t / tau_Q between t_i = h_i tau_Q and t_f = h_f tau_Q.
struct RampProtocol {
    double tau_Q{250.0};
    double h_i{-5.0};
    double h_f{5.0};
    double energy_scale{default_energy_scale};

    RampProtocol() = default;
    RampProtocol(double tau_q, double hi, double hf, double scale = default_energy_scale);

    double t_i() const noexcept { return h_i * tau_Q; }
    double t_f() const noexcept { return h_f * tau_Q; }
};

struct KMode {
    int m{1};            // 1..N/2
    int N{2};
    double k{0.0};
    double delta_k{0.0}; // sin k; tests may override it to get a diagonal Hamiltonian

    double cos_k() const noexcept;
};

// Qubit branch: the chain sees the field shifted by sign * delta.
struct BranchSpec {
    int sign{+1};
    double delta{0.0};

    double shift() const noexcept { return sign * delta; }
};

// H = [[hk, dk], [dk, -hk]]
struct BlochHamiltonian {
    double hk{0.0};
    double dk{0.0};

    double gap() const noexcept; // sqrt(hk^2 + dk^2), half the level splitting
};

// Spinor (v, u) in the ordering of the Nambu basis.
struct BranchState {
    cplx v{1.0, 0.0};
    cplx u{0.0, 0.0};

    double norm2() const noexcept { return std::norm(v) + std::norm(u); }
};

// <a|b> = a.v* b.v + a.u* b.u
cplx overlap(const BranchState& a, const BranchState& b) noexcept;

std::vector<KMode> k_grid(int N);

KMode make_mode(int m, int N);

BlochHamiltonian bloch_hamiltonian(const KMode& mode, double h, const BranchSpec& branch) noexcept;

// Lower-eigenvalue eigenvector; first nonzero component made real positive.
BranchState ground_state(const KMode& mode, double h, const BranchSpec& branch);
BranchState ground_state(const BlochHamiltonian& H);

// Ground state of the uncoupled environment at field h. Both branches start from it: the
// qubit and the chain begin as a product state, so D(t_i) = 1 exactly.
BranchState environment_ground_state(const KMode& mode, double h);

double field_at(double t, const RampProtocol& ramp) noexcept;

} // namespace cqd
