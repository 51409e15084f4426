// trajectory.hpp: Monte Carlo oracle: explicit noise realizations, pure-state branches
//
// Each trajectory draws one realization of S(t) and integrates both branch spinors
// under h(t) = t/tau_Q + S(t) +/- delta with fixed-step RK4 on a uniform noise grid.
// White noise is piecewise constant on that grid (variance xi^2/dt); OU noise is
// sampled exactly at the nodes and linearly interpolated between them.

#pragma once

#include "cqd/integrator.hpp"
#include "cqd/model.hpp"
#include "cqd/noise.hpp"

#include <cstdint>
#include <vector>

namespace cqd {

enum class Estimator { Abs2OfMean, MeanOfAbs2 };

struct TrajectoryEstimate {
    double mean{0.0};
    double std_err{0.0};
    std::size_t n_traj{0};
    std::uint64_t seed{0};
};

struct EnsembleOptions {
    std::size_t M{2000};
    std::uint64_t seed{1};
    Estimator estimator{Estimator::Abs2OfMean};
    bool common_noise{true};
    double dt_noise{0.0}; // 0 selects the default (see default_noise_step)
    unsigned threads{0};
};

// Noise-averaged bilinears of one branch at one time, with standard errors of the mean.
struct BranchAverages {
    double v2{0.0}, u2{0.0};
    cplx vu{0.0}; // <v u*> = rho_12
    double v2_err{0.0}, u2_err{0.0}, vu_err{0.0};
};

struct EnsembleResult {
    std::vector<double> times;
    // [mode][time]
    std::vector<std::vector<TrajectoryEstimate>> per_mode;
    std::vector<std::vector<cplx>> mean_coherence; // <d_k> per mode and time
    std::vector<std::vector<BranchAverages>> plus, minus;
    // product over modes, per time, with jackknife error over trajectories
    std::vector<TrajectoryEstimate> global;
};

// min(tau_Q/2000, pi/(20 E_max)) with E_max the largest single-particle gap on the
// ramp; OU additionally caps the step at tau_n/10.
double default_noise_step(const RampProtocol& ramp, double delta, const NoiseModel& noise);

// Observables are sampled at cfg.grid (checkpoints); only cfg.grid is used from cfg.
EnsembleResult trajectory_ensemble(const std::vector<KMode>& modes, const RampProtocol& ramp, double delta,
                                   const NoiseModel& noise, const EnsembleOptions& opts,
                                   const IntegratorConfig& cfg);

} // namespace cqd
