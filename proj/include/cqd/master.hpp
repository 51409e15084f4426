// master.hpp: noise-averaged dynamics of one k-mode
//
// OU noise enters the Bloch Hamiltonian as S(t) H1 with H1 = -sigma_z. The memory
// integral of the exact OU master equation is carried by an auxiliary operator
//   Gamma(t) = int_{t_i}^t e^{-(t-s)/tau_n} [H1, rho(s)] ds,
// giving the local pair
//   rho'   = -i[H0(t), rho] - xi^2/(2 tau_n) [H1, Gamma]
//   Gamma' = -Gamma / tau_n + [H1, rho].
// The white limit is the Lindblad form rho' = -i[H0, rho] - xi^2/2 [H1, [H1, rho]].
//
// The cross operator X = <|phi->< phi+|> obeys the same structure with the drift
// -i(H0- X - X H0+); its trace is the averaged coherence <d_k(t)>.
//
// The Gamma pair feeds rho(s) into the memory without propagating it back to time t, so
// it drops the coherent drift of the memory and is only a second-order closure in xi even
// when H0 and H1 commute (pure dephasing then comes out as a damped oscillator instead of
// the exact Gaussian attenuation). OuClosure::Hierarchy instead integrates the stochastic Liouville hierarchy
// of the OU process (Hermite moments X_n of the joint system-noise distribution),
//   X_n' = L0[X_n] - (n / tau_n) X_n - i sigma [H1, sqrt(n) X_{n-1} + sqrt(n+1) X_{n+1}],
// sigma^2 = xi^2 / (2 tau_n), truncated at X_{depth+1} = 0. Its first level with the
// L0 term removed is the Gamma pair under X_1 = -i sigma Gamma.

#pragma once

#include "cqd/integrator.hpp"
#include "cqd/mat2.hpp"
#include "cqd/model.hpp"
#include "cqd/noise.hpp"

#include <string>
#include <vector>

namespace cqd {

struct ModeDensity {
    Mat2 rho;
    Mat2 gamma;
};

struct CrossOperator {
    Mat2 X;
    Mat2 gammaX;
};

struct BranchSolution {
    std::vector<ModeDensity> states; // one per grid time
    double min_eigenvalue{1.0};      // most negative eigenvalue of rho seen on the grid
    bool positivity_warning{false};  // min_eigenvalue < -1e-6
};

struct CrossSolution {
    std::vector<CrossOperator> states;
    std::vector<cplx> coherence; // trace X per grid time
};

enum class OuClosure { Kernel, Hierarchy };

std::string to_string(OuClosure c);
OuClosure ou_closure_from_string(const std::string& s);

struct MasterOptions {
    OuClosure closure{OuClosure::Hierarchy};
    int hierarchy_depth{3};
    // Test hook: flips the sign of the memory feedback term in the OU equations.
    double gamma_feedback_sign{1.0};

    void validate() const;
};

// The step of the fixed-step RK4 used for OU runs: min(tau_n / 10, cfg.rk4_step).
double ou_step(const NoiseModel& noise, const IntegratorConfig& cfg);

// All solvers start at cfg.grid.front() from the uncoupled ground state at that time's field.
BranchSolution solve_branch_master_equation(const KMode& mode, const BranchSpec& branch, const RampProtocol& ramp,
                                            const NoiseModel& noise, const IntegratorConfig& cfg,
                                            const MasterOptions& opts = {});

BranchSolution solve_white_master_equation(const KMode& mode, const BranchSpec& branch, const RampProtocol& ramp,
                                           double xi, const IntegratorConfig& cfg);

// Same two solvers from an arbitrary initial density matrix (Gamma starts at zero).
BranchSolution solve_branch_master_equation(const KMode& mode, const BranchSpec& branch, const RampProtocol& ramp,
                                            const NoiseModel& noise, const IntegratorConfig& cfg,
                                            const MasterOptions& opts, const Mat2& rho0);
BranchSolution solve_white_master_equation(const KMode& mode, const BranchSpec& branch, const RampProtocol& ramp,
                                           double xi, const IntegratorConfig& cfg, const Mat2& rho0);

// noise may be None, White or OU.
CrossSolution solve_cross_master_equation(const KMode& mode, const RampProtocol& ramp, double delta,
                                          const NoiseModel& noise, const IntegratorConfig& cfg,
                                          const MasterOptions& opts = {});

// Branch solver dispatching on the noise kind (None behaves as white with xi = 0).
BranchSolution solve_branch(const KMode& mode, const BranchSpec& branch, const RampProtocol& ramp,
                            const NoiseModel& noise, const IntegratorConfig& cfg, const MasterOptions& opts = {});

} // namespace cqd
