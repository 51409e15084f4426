#include "cqd/decoherence.hpp"

#include "cqd/parallel.hpp"
#include "cqd/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cqd {

std::string to_string(Route r) {
    switch (r) {
    case Route::Noiseless: return "noiseless";
    case Route::Factorized: return "factorized";
    case Route::CrossOperator: return "cross_operator";
    case Route::Trajectory: return "trajectory";
    }
    return "noiseless";
}

Route route_from_string(const std::string& s) {
    if (s == "noiseless") return Route::Noiseless;
    if (s == "factorized") return Route::Factorized;
    if (s == "cross_operator") return Route::CrossOperator;
    if (s == "trajectory") return Route::Trajectory;
    throw InvalidArgument("unknown route '" + s + "' (expected noiseless, factorized, cross_operator or trajectory)");
}

std::vector<double> DecoherenceSeries::coherence_magnitude() const {
    std::vector<double> out(log_D.size());
    for (std::size_t i = 0; i < log_D.size(); ++i) out[i] = std::exp(0.5 * log_D[i]);
    return out;
}

ModeFactor mode_factor_noiseless(const std::vector<BranchState>& plus, const std::vector<BranchState>& minus) {
    if (plus.size() != minus.size()) throw InvalidArgument("mode_factor_noiseless: branch grids differ");
    ModeFactor f;
    f.F.resize(plus.size());
    f.d.emplace(plus.size());
    for (std::size_t i = 0; i < plus.size(); ++i) {
        const cplx d = overlap(plus[i], minus[i]);
        (*f.d)[i] = d;
        f.F[i] = std::norm(d);
    }
    return f;
}

ModeFactor mode_factor_factorized(const BranchSolution& plus, const BranchSolution& minus) {
    if (plus.states.size() != minus.states.size()) throw InvalidArgument("mode_factor_factorized: branch grids differ");
    ModeFactor f;
    f.F.resize(plus.states.size());
    for (std::size_t i = 0; i < f.F.size(); ++i) {
        const Mat2& a = plus.states[i].rho;
        const Mat2& b = minus.states[i].rho;
        // <|v+|^2><|v-|^2> + <|u+|^2><|u-|^2> + 2 Re(<v+u+*> <v-u-*>*)
        f.F[i] = a.a11.real() * b.a11.real() + a.a22.real() * b.a22.real() +
                 2.0 * (a.a12 * std::conj(b.a12)).real();
    }
    f.min_eigenvalue = std::min(plus.min_eigenvalue, minus.min_eigenvalue);
    return f;
}

ModeFactor mode_factor_cross(const CrossSolution& cross) {
    ModeFactor f;
    f.F.resize(cross.coherence.size());
    f.d = cross.coherence;
    for (std::size_t i = 0; i < f.F.size(); ++i) f.F[i] = std::norm(cross.coherence[i]);
    return f;
}

DecoherenceSeries assemble_decoherence(Route route, const std::vector<double>& times, const RampProtocol& ramp,
                                       const std::vector<ModeFactor>& modes) {
    const std::size_t n = times.size();
    for (const auto& m : modes) {
        if (m.F.size() != n || (m.d && m.d->size() != n)) {
            throw InvalidArgument("assemble_decoherence: mode grid does not match the time grid");
        }
    }
    DecoherenceSeries s;
    s.route = route;
    s.tau_Q = ramp.tau_Q;
    s.times = times;
    s.fields.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.fields[i] = field_at(times[i], ramp);
    s.log_D.assign(n, 0.0);
    s.D.assign(n, 1.0);
    const bool have_d = !modes.empty() && std::all_of(modes.begin(), modes.end(), [](const ModeFactor& m) { return m.d.has_value(); });
    if (have_d) s.d_complex.emplace(n, cplx(1.0));
    s.per_mode_F.reserve(modes.size());
    for (const auto& m : modes) {
        s.per_mode_F.push_back(m.F);
        s.min_eigenvalue = std::min(s.min_eigenvalue, m.min_eigenvalue);
        for (std::size_t i = 0; i < n; ++i) {
            s.log_D[i] += m.F[i] > 0.0 ? std::log(m.F[i]) : -std::numeric_limits<double>::infinity();
            if (have_d) (*s.d_complex)[i] *= (*m.d)[i];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::exp(s.log_D[i]);
        s.D[i] = d < 1e-300 ? 0.0 : d;
    }
    return s;
}

std::vector<double> uniform_field_grid(const RampProtocol& ramp, std::size_t n) {
    if (n < 2) throw InvalidArgument("uniform_field_grid: need at least 2 points");
    std::vector<double> t(n);
    const double dh = (ramp.h_f - ramp.h_i) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) t[i] = (ramp.h_i + dh * static_cast<double>(i)) * ramp.tau_Q;
    t.front() = ramp.t_i();
    t.back() = ramp.t_f();
    return t;
}

DecoherenceSeries simulate(const ModelParams& model, const NoiseModel& noise, Route route,
                           const SimulationOptions& opts) {
    noise.validate();
    const auto modes = k_grid(model.N);
    const auto& cfg = opts.integrator;
    cfg.validate_within(model.ramp.t_i(), model.ramp.t_f());
    const BranchSpec plus{+1, model.delta}, minus{-1, model.delta};
    const double h0 = field_at(cfg.grid.front(), model.ramp);

    if (route == Route::Trajectory) {
        const EnsembleResult ens = trajectory_ensemble(modes, model.ramp, model.delta, noise, opts.ensemble, cfg);
        std::vector<ModeFactor> factors(modes.size());
        for (std::size_t mi = 0; mi < modes.size(); ++mi) {
            factors[mi].F.resize(cfg.grid.size());
            for (std::size_t c = 0; c < cfg.grid.size(); ++c) factors[mi].F[c] = ens.per_mode[mi][c].mean;
            if (opts.ensemble.estimator == Estimator::Abs2OfMean) factors[mi].d = ens.mean_coherence[mi];
        }
        auto s = assemble_decoherence(route, cfg.grid, model.ramp, factors);
        s.delta = model.delta;
        s.D_err.emplace(cfg.grid.size());
        for (std::size_t c = 0; c < cfg.grid.size(); ++c) (*s.D_err)[c] = ens.global[c].std_err;
        return s;
    }

    if (route == Route::Noiseless && !noise.silent()) {
        throw InvalidArgument("simulate: the noiseless route requires silent noise");
    }
    std::vector<ModeFactor> factors(modes.size());
    parallel_for(modes.size(), opts.threads, [&](std::size_t mi) {
        const KMode& mode = modes[mi];
        // Without noise every route reduces to the pure-state overlap; use the same
        // integration so the outputs agree bit for bit.
        const Route effective = noise.silent() ? Route::Noiseless : route;
        switch (effective) {
        case Route::Noiseless: {
            const auto p = evolve_schrodinger(mode, plus, model.ramp, environment_ground_state(mode, h0), cfg);
            const auto m = evolve_schrodinger(mode, minus, model.ramp, environment_ground_state(mode, h0), cfg);
            factors[mi] = mode_factor_noiseless(p, m);
            if (route == Route::Factorized) factors[mi].d.reset();
            break;
        }
        case Route::Factorized:
            factors[mi] = mode_factor_factorized(solve_branch(mode, plus, model.ramp, noise, cfg, opts.master),
                                                 solve_branch(mode, minus, model.ramp, noise, cfg, opts.master));
            break;
        case Route::CrossOperator:
            factors[mi] = mode_factor_cross(solve_cross_master_equation(mode, model.ramp, model.delta, noise, cfg, opts.master));
            break;
        case Route::Trajectory: break;
        }
    });
    auto s = assemble_decoherence(route, cfg.grid, model.ramp, factors);
    s.delta = model.delta;
    return s;
}

} // namespace cqd
