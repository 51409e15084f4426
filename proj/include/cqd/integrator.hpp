// integrator.hpp: thin wrappers over boost::odeint used by every solver
//
// Two drivers, both sampling the solution on a caller-supplied time grid:
//   integrate_adaptive : Dormand-Prince 5(4) with dense output and a max-step cap
//   integrate_rk4      : classic fixed-step RK4, steps sized to land on grid points

#pragma once

#include "cqd/errors.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace cqd {

struct IntegratorConfig {
    double rel_tol{1e-12};
    double abs_tol{1e-14};
    double max_step{0.25};        // cap for the adaptive stepper
    double min_step{1e-12};       // smaller accepted steps count as underflow
    double rk4_step{0.001};       // upper bound on the fixed step of RK4 drivers
    std::vector<double> grid;     // observation times, strictly increasing

    void validate() const;
    void validate_within(double t_lo, double t_hi) const;
};

inline void IntegratorConfig::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
        throw InvalidArgument("IntegratorConfig: tolerances must be positive");
    }
    if (!(max_step > 0.0) || !(rk4_step > 0.0) || !(min_step > 0.0)) {
        throw InvalidArgument("IntegratorConfig: step bounds must be positive");
    }
    if (grid.empty()) {
        throw InvalidArgument("IntegratorConfig: empty observation grid");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw InvalidArgument("IntegratorConfig: observation grid must be strictly increasing");
        }
    }
}

inline void IntegratorConfig::validate_within(double t_lo, double t_hi) const {
    validate();
    if (grid.front() < t_lo || grid.back() > t_hi) {
        throw InvalidArgument("IntegratorConfig: observation grid leaves the ramp interval");
    }
}

// Integrates x' = rhs(x, t) starting at grid.front() with the initial value x0.
// Returns the state at every grid time; element 0 is x0 itself.
template <class State, class Rhs>
std::vector<State> integrate_adaptive(Rhs rhs, const State& x0, const IntegratorConfig& cfg) {
    namespace odeint = boost::numeric::odeint;
    cfg.validate();
    const auto& grid = cfg.grid;

    std::vector<State> out;
    out.reserve(grid.size());
    out.push_back(x0);
    if (grid.size() == 1) return out;

    auto stepper = odeint::make_dense_output(cfg.abs_tol, cfg.rel_tol, cfg.max_step,
                                             odeint::runge_kutta_dopri5<State>());
    auto sys = [&rhs](const State& x, State& dxdt, double t) { rhs(x, dxdt, t); };
    const double first_dt = std::min(cfg.max_step, (grid[1] - grid[0]) * 0.5);
    stepper.initialize(x0, grid.front(), first_dt);

    State x{};
    std::size_t idx = 1;
    while (idx < grid.size()) {
        while (stepper.current_time() < grid[idx]) {
            const double t_before = stepper.current_time();
            try {
                stepper.do_step(sys);
            } catch (const odeint::odeint_error& e) {
                throw IntegrationError(std::string("step adjustment failed: ") + e.what(), t_before);
            }
            const double taken = stepper.current_time() - t_before;
            if (!(taken >= cfg.min_step) && stepper.current_time() < grid.back()) {
                throw IntegrationError("step size underflow", t_before);
            }
            for (double c : stepper.current_state()) {
                if (!std::isfinite(c)) throw IntegrationError("non-finite state", t_before);
            }
        }
        while (idx < grid.size() && grid[idx] <= stepper.current_time()) {
            stepper.calc_state(grid[idx], x);
            out.push_back(x);
            ++idx;
        }
    }
    return out;
}

// Fixed-step RK4. Each grid interval is cut into the fewest equal sub-steps no longer
// than max_step, so grid times are hit exactly and no interpolation is needed.
template <class State, class Rhs>
std::vector<State> integrate_rk4(Rhs rhs, const State& x0, std::span<const double> grid, double max_step) {
    namespace odeint = boost::numeric::odeint;
    if (grid.empty()) throw InvalidArgument("integrate_rk4: empty grid");
    if (!(max_step > 0.0)) throw InvalidArgument("integrate_rk4: step must be positive");

    std::vector<State> out;
    out.reserve(grid.size());
    out.push_back(x0);

    odeint::runge_kutta4<State> stepper;
    auto sys = [&rhs](const State& x, State& dxdt, double t) { rhs(x, dxdt, t); };
    State x = x0;
    for (std::size_t j = 1; j < grid.size(); ++j) {
        const double span = grid[j] - grid[j - 1];
        if (!(span > 0.0)) throw InvalidArgument("integrate_rk4: grid must be strictly increasing");
        const auto n_sub = static_cast<long>(std::ceil(span / max_step - 1e-9));
        const double dt = span / static_cast<double>(std::max(1L, n_sub));
        for (long s = 0; s < std::max(1L, n_sub); ++s) {
            const double t = grid[j - 1] + static_cast<double>(s) * dt;
            stepper.do_step(sys, x, t, dt);
        }
        for (double c : x) {
            if (!std::isfinite(c)) throw IntegrationError("non-finite state", grid[j]);
        }
        out.push_back(x);
    }
    return out;
}

} // namespace cqd
