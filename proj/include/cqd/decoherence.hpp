// decoherence.hpp: assembling D(t) = prod_k F_k(t) from per-mode solutions
//
// Routes:
//   Noiseless     F_k = |<phi+|phi->|^2 from two Schrodinger runs
//   Factorized    F_k = Tr(rho+ rho-) from the two noise-averaged branch densities
//   CrossOperator F_k = |Tr X_k|^2 = |<d_k>|^2 from the averaged cross operator
//   Trajectory    F_k estimated from an explicit noise ensemble

#pragma once

#include "cqd/integrator.hpp"
#include "cqd/master.hpp"
#include "cqd/model.hpp"
#include "cqd/noise.hpp"
#include "cqd/trajectory.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cqd {

enum class Route { Noiseless, Factorized, CrossOperator, Trajectory };

std::string to_string(Route r);
Route route_from_string(const std::string& s);

// One mode's factor F_k(t) on the common grid, plus <d_k(t)> when the route has it.
struct ModeFactor {
    std::vector<double> F;
    std::optional<std::vector<cplx>> d;
    double min_eigenvalue{1.0}; // factorized route: most negative branch eigenvalue
};

struct DecoherenceSeries {
    Route route{Route::Noiseless};
    double tau_Q{0.0};
    double delta{0.0};
    std::vector<double> times;
    std::vector<double> fields;                // h0(t)
    std::vector<std::vector<double>> per_mode_F; // [mode][time]
    std::vector<double> log_D;                 // sum_k ln F_k
    std::vector<double> D;                     // exp(log_D), 0 below 1e-300
    std::optional<std::vector<cplx>> d_complex; // prod_k d_k(t)
    std::optional<std::vector<double>> D_err;  // trajectory route: jackknife errors
    double min_eigenvalue{1.0};

    std::size_t size() const noexcept { return times.size(); }
    // |d(t)| = sqrt(D), computed from log_D so it survives underflow of D
    std::vector<double> coherence_magnitude() const;
};

ModeFactor mode_factor_noiseless(const std::vector<BranchState>& plus, const std::vector<BranchState>& minus);
ModeFactor mode_factor_factorized(const BranchSolution& plus, const BranchSolution& minus);
ModeFactor mode_factor_cross(const CrossSolution& cross);

// Product over modes, accumulated in log space in mode order.
DecoherenceSeries assemble_decoherence(Route route, const std::vector<double>& times, const RampProtocol& ramp,
                                       const std::vector<ModeFactor>& modes);

struct ModelParams {
    int N{500};
    double delta{0.01};
    RampProtocol ramp{};
};

// Uniform grid of n points in h over [h_i, h_f], returned as times h tau_Q.
std::vector<double> uniform_field_grid(const RampProtocol& ramp, std::size_t n);

struct SimulationOptions {
    IntegratorConfig integrator{}; // grid must be set
    unsigned threads{0};
    EnsembleOptions ensemble{};    // trajectory route only
    MasterOptions master{};        // factorized and cross-operator routes
};

// Solves every k-mode of the chain on the requested route and assembles D(t).
DecoherenceSeries simulate(const ModelParams& model, const NoiseModel& noise, Route route,
                           const SimulationOptions& opts);

} // namespace cqd
