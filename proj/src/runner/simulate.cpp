#include "detail.hpp"

#include <algorithm>
#include <cmath>

namespace cqd::runner {

NoiseModel effective_noise(const ExperimentConfig& cfg) {
    if (cfg.experiment == "noiseless") return NoiseModel::none();
    if (cfg.experiment == "white") return NoiseModel::white(cfg.noise.xi);
    if (cfg.experiment == "ou") return NoiseModel::ou(cfg.noise.xi, cfg.noise.tau_n);
    NoiseModel n = cfg.noise;
    if (n.kind == NoiseKind::None) n = NoiseModel::none();
    return n;
}

namespace detail {

Route effective_route(const ExperimentConfig& cfg, const NoiseModel& noise) {
    if (noise.silent()) return Route::Noiseless;
    if (cfg.route == Route::Noiseless) {
        throw ConfigError("route: 'noiseless' cannot be combined with noise of strength xi = " + fmt(noise.xi));
    }
    return cfg.route;
}

SimulationOptions simulation_options(const ExperimentConfig& cfg) {
    SimulationOptions o;
    o.integrator = cfg.integrator;
    o.threads = cfg.threads;
    o.ensemble = cfg.ensemble;
    o.ensemble.threads = cfg.threads;
    o.master = cfg.master;
    return o;
}

} // namespace detail

PointResult simulate_point(const ExperimentConfig& cfg) {
    const NoiseModel noise = effective_noise(cfg);
    const Route route = detail::effective_route(cfg, noise);
    const SimulationOptions opts = detail::simulation_options(cfg);

    PointResult r;
    r.series = simulate(cfg.model, noise, route, opts);
    if (r.series.min_eigenvalue < -1e-6) {
        r.warnings.push_back("positivity excursion: most negative branch eigenvalue " +
                             detail::fmt(r.series.min_eigenvalue));
    }
    if (cfg.compare_factorized && route == Route::CrossOperator) {
        r.factorized = simulate(cfg.model, noise, Route::Factorized, opts);
        if (r.factorized->min_eigenvalue < -1e-6) {
            r.warnings.push_back("positivity excursion on the factorized companion: " +
                                 detail::fmt(r.factorized->min_eigenvalue));
        }
    }

    if (cfg.convergence_check) {
        // Same observation points, ramp started further out.
        ModelParams wide = cfg.model;
        wide.ramp = RampProtocol(cfg.model.ramp.tau_Q, cfg.convergence_h_i, cfg.model.ramp.h_f,
                                 cfg.model.ramp.energy_scale);
        SimulationOptions wopts = opts;
        wopts.integrator.grid.clear();
        wopts.integrator.grid.push_back(wide.ramp.t_i());
        wopts.integrator.grid.insert(wopts.integrator.grid.end(), cfg.integrator.grid.begin(), cfg.integrator.grid.end());
        const DecoherenceSeries w = simulate(wide, noise, route, wopts);
        double worst = 0.0;
        for (std::size_t i = 0; i < r.series.size(); ++i) worst = std::max(worst, std::abs(w.D[i + 1] - r.series.D[i]));
        r.convergence_max_abs_dD = worst;
        if (worst > 1e-3) {
            r.warnings.push_back("starting field h_i = " + detail::fmt(cfg.model.ramp.h_i) +
                                 " not converged: max |dD| = " + detail::fmt(worst) + " against h_i = " +
                                 detail::fmt(cfg.convergence_h_i));
        }
    }
    return r;
}

} // namespace cqd::runner
