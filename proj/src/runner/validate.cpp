#include "detail.hpp"

#include "cqd/parallel.hpp"
#include "cqd/propagator.hpp"
#include "cqd/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace cqd::runner {

using detail::fmt;

namespace {

ValidationCheck make_check(std::string name, double measured, double threshold, bool passed, std::string detail) {
    return {std::move(name), measured, threshold, passed, std::move(detail)};
}

MasterOptions validation_master(const ExperimentConfig& cfg) {
    MasterOptions m = cfg.master;
    if (cfg.inject_fault == "gamma_feedback_sign") m.gamma_feedback_sign = -1.0;
    return m;
}

ValidationCheck ode_vs_pcf(const ExperimentConfig& cfg) {
    std::mt19937_64 rng(derive_seed(cfg.ensemble.seed, 0, 0, 7));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    std::ostringstream where;
    for (int c = 0; c < 20; ++c) {
        const int N = 16 << (rng() % 3);
        const int m = 1 + static_cast<int>(rng() % static_cast<unsigned>(N / 2));
        const double tau_Q = 1.0 + 49.0 * unit(rng);
        const double delta = 0.05 * unit(rng);
        const BranchSpec branch{rng() % 2 ? +1 : -1, delta};
        const RampProtocol ramp(tau_Q, -3.0, 3.0, cfg.model.ramp.energy_scale);
        const KMode mode = make_mode(m, N);
        const double t0 = ramp.t_i();
        const double t1 = t0 + (ramp.t_f() - t0) * (0.25 + 0.75 * unit(rng));

        IntegratorConfig ic = cfg.integrator;
        ic.rel_tol = 1e-12;
        ic.abs_tol = 1e-14;
        ic.grid = {t0, t1};
        const BranchState init = ground_state(mode, ramp.h_i, branch);
        const BranchState ode = evolve_schrodinger(mode, branch, ramp, init, ic).back();
        const BranchState exact = exact_propagator_pcf(mode, branch, ramp, t0, t1).apply(init);
        const double err = std::abs(1.0 - std::norm(overlap(ode, exact)));
        if (err > worst) {
            worst = err;
            where.str("");
            where << "worst case N=" << N << " m=" << m << " tau_Q=" << fmt(tau_Q) << " delta=" << fmt(delta);
        }
    }
    return make_check("ode_vs_parabolic_cylinder_propagator", worst, 1e-6, worst < 1e-6,
                      "max fidelity error over 20 random cases; " + where.str());
}

// Cross-operator D(t) against the trajectory estimator, in units of the jackknife error.
ValidationCheck cross_vs_trajectory(const ExperimentConfig& cfg, const NoiseModel& noise, const std::string& name) {
    ModelParams mp;
    mp.N = cfg.validate_N;
    mp.delta = 0.01;
    mp.ramp = RampProtocol(10.0, -5.0, 5.0, cfg.model.ramp.energy_scale);
    SimulationOptions o = detail::simulation_options(cfg);
    o.master = validation_master(cfg);
    o.integrator.grid = uniform_field_grid(mp.ramp, 21);
    o.ensemble.M = cfg.validate_M;
    o.ensemble.estimator = Estimator::Abs2OfMean;
    o.ensemble.common_noise = true;
    const DecoherenceSeries me = simulate(mp, noise, Route::CrossOperator, o);
    const DecoherenceSeries tr = simulate(mp, noise, Route::Trajectory, o);
    double worst = 0.0;
    for (std::size_t i = 1; i < me.size(); ++i) {
        const double se = std::hypot((*tr.D_err)[i], 1e-12);
        worst = std::max(worst, std::abs(me.D[i] - tr.D[i]) / se);
    }
    return make_check(name, worst, 3.0, worst <= 3.0,
                      "max |D_master - D_trajectory| / jackknife error at 20 checkpoints; N=" +
                          std::to_string(mp.N) + ", M=" + std::to_string(o.ensemble.M));
}

// Noise-averaged branch bilinears of the ensemble against the branch master equation.
ValidationCheck branch_bilinears(const ExperimentConfig& cfg) {
    const NoiseModel noise = NoiseModel::white(0.01);
    const RampProtocol ramp(10.0, -5.0, 5.0, cfg.model.ramp.energy_scale);
    const double delta = 0.01;
    const auto modes = k_grid(cfg.validate_N);
    IntegratorConfig ic = cfg.integrator;
    ic.grid = uniform_field_grid(ramp, 21);
    EnsembleOptions eo = cfg.ensemble;
    eo.M = cfg.validate_M;
    eo.threads = cfg.threads;
    const EnsembleResult ens = trajectory_ensemble(modes, ramp, delta, noise, eo, ic);
    double worst = 0.0;
    for (std::size_t mi = 0; mi < modes.size(); ++mi) {
        for (int sign : {+1, -1}) {
            const BranchSolution me = solve_branch(modes[mi], {sign, delta}, ramp, noise, ic, validation_master(cfg));
            const auto& avg = sign > 0 ? ens.plus[mi] : ens.minus[mi];
            for (std::size_t c = 1; c < ic.grid.size(); ++c) {
                const Mat2& rho = me.states[c].rho;
                const double z1 = std::abs(avg[c].v2 - rho.a11.real()) / std::hypot(avg[c].v2_err, 1e-8);
                const double z2 = std::abs(avg[c].u2 - rho.a22.real()) / std::hypot(avg[c].u2_err, 1e-8);
                const double z3 = std::abs(avg[c].vu - rho.a12) / std::hypot(avg[c].vu_err, 1e-8);
                worst = std::max({worst, z1, z2, z3});
            }
        }
    }
    return make_check("branch_bilinears_vs_master_equation", worst, 3.0, worst <= 3.0,
                      "max |<psi psi^dagger> - rho| / standard error over modes, branches, elements and 20 "
                      "checkpoints (white xi=0.01)");
}

} // namespace

ValidationCheck white_limit_check(const ExperimentConfig& cfg, const MasterOptions& master) {
    const RampProtocol ramp(10.0, -2.0, 2.0, cfg.model.ramp.energy_scale);
    const double xi = 0.05;
    const BranchSpec branch{+1, 0.01};
    const auto modes = k_grid(cfg.validate_N);
    IntegratorConfig ic = cfg.integrator;
    ic.grid = uniform_field_grid(ramp, 201);
    const std::vector<double> taus{0.1, 0.03, 0.01, 0.003};
    std::vector<double> err(taus.size(), 0.0);
    std::vector<BranchSolution> white(modes.size());
    parallel_for(modes.size(), cfg.threads, [&](std::size_t mi) {
        white[mi] = solve_white_master_equation(modes[mi], branch, ramp, xi, ic);
    });
    for (std::size_t j = 0; j < taus.size(); ++j) {
        std::vector<double> per_mode(modes.size(), 0.0);
        parallel_for(modes.size(), cfg.threads, [&](std::size_t mi) {
            const BranchSolution ou = solve_branch_master_equation(modes[mi], branch, ramp, NoiseModel::ou(xi, taus[j]), ic, master);
            for (std::size_t c = 0; c < ic.grid.size(); ++c) {
                per_mode[mi] = std::max(per_mode[mi], (ou.states[c].rho - white[mi].states[c].rho).max_abs());
            }
        });
        err[j] = *std::max_element(per_mode.begin(), per_mode.end());
    }
    bool monotone = true;
    double worst_ratio = 0.0;
    for (std::size_t j = 1; j < err.size(); ++j) {
        const double ratio = err[j] / err[j - 1];
        worst_ratio = std::max(worst_ratio, ratio);
        if (!(ratio < 1.0)) monotone = false;
    }
    // Converging means shrinking with tau_n, not just drifting down: demand the error fall
    // by at least a factor ten over the 33-fold reduction of tau_n.
    const double overall = err.back() / err.front();
    std::ostringstream d;
    d << "max |rho_OU - rho_white| at tau_n = 0.1, 0.03, 0.01, 0.003: ";
    for (std::size_t j = 0; j < err.size(); ++j) d << (j ? ", " : "") << fmt(err[j]);
    d << "; overall reduction " << fmt(overall);
    return make_check("white_limit_convergence", worst_ratio, 1.0, monotone && overall < 0.1, d.str());
}

namespace {

ValidationCheck invariants(const ExperimentConfig& cfg) {
    const RampProtocol ramp(10.0, -5.0, 5.0, cfg.model.ramp.energy_scale);
    const double delta = 0.01;
    const auto modes = k_grid(cfg.validate_N);
    IntegratorConfig ic = cfg.integrator;
    ic.grid = uniform_field_grid(ramp, 201);
    const MasterOptions master = validation_master(cfg);

    double norm = 0.0, trace = 0.0, herm = 0.0, min_eig = 1.0, cross = 0.0, unit = 0.0;
    for (const auto& mode : modes) {
        for (int sign : {+1, -1}) {
            const BranchSpec b{sign, delta};
            const auto psi = evolve_schrodinger(mode, b, ramp, ground_state(mode, ramp.h_i, b), ic);
            for (const auto& s : psi) norm = std::max(norm, std::abs(s.norm2() - 1.0));
            for (const NoiseModel& n : {NoiseModel::white(0.02), NoiseModel::ou(0.02, 5.0)}) {
                const BranchSolution sol = solve_branch(mode, b, ramp, n, ic, master);
                for (const auto& st : sol.states) {
                    trace = std::max(trace, std::abs((st.rho.a11 + st.rho.a22) - 1.0));
                    herm = std::max({herm, std::abs(st.rho.a11.imag()), std::abs(st.rho.a22.imag()),
                                     std::abs(st.rho.a12 - std::conj(st.rho.a21))});
                    min_eig = std::min(min_eig, hermitian_eigenvalues(st.rho).first);
                }
            }
            unit = std::max(unit, exact_propagator_pcf(mode, b, ramp, ramp.t_i(), 0.5 * ramp.t_i()).unitarity_defect());
        }
        for (const NoiseModel& n : {NoiseModel::white(0.02), NoiseModel::ou(0.02, 5.0)}) {
            const CrossSolution x = solve_cross_master_equation(mode, ramp, delta, n, ic, master);
            for (const auto& d : x.coherence) cross = std::max(cross, std::abs(d) - 1.0);
        }
    }
    const bool ok = norm < 1e-7 && trace < 1e-8 && herm < 1e-10 && min_eig > -1e-6 && cross < 1e-9 && unit < 1e-9;
    std::ostringstream d;
    d << "norm drift " << fmt(norm) << " (< 1e-7), trace error " << fmt(trace) << " (< 1e-8), hermiticity "
      << fmt(herm) << " (< 1e-10), min eigenvalue " << fmt(min_eig) << " (> -1e-6), |Tr X| - 1 " << fmt(cross)
      << " (< 1e-9), propagator unitarity " << fmt(unit) << " (< 1e-9)";
    const double measured = std::max({norm / 1e-7, trace / 1e-8, herm / 1e-10, -min_eig / 1e-6, cross / 1e-9, unit / 1e-9});
    return make_check("norm_trace_hermiticity_positivity", measured, 1.0, ok, d.str());
}

ValidationCheck thread_determinism(const ExperimentConfig& cfg) {
    ModelParams mp;
    mp.N = cfg.validate_N;
    mp.delta = 0.01;
    mp.ramp = RampProtocol(10.0, -5.0, 5.0, cfg.model.ramp.energy_scale);
    SimulationOptions o = detail::simulation_options(cfg);
    o.master = validation_master(cfg);
    o.integrator.grid = uniform_field_grid(mp.ramp, 101);
    o.ensemble.M = 64;
    double diff = 0.0;
    const NoiseModel ou = NoiseModel::ou(0.01, 5.0);
    for (Route r : {Route::CrossOperator, Route::Factorized, Route::Trajectory}) {
        std::vector<DecoherenceSeries> runs;
        for (unsigned t : {1u, 3u, 8u}) {
            o.threads = t;
            o.ensemble.threads = t;
            runs.push_back(simulate(mp, ou, r, o));
        }
        for (std::size_t k = 1; k < runs.size(); ++k) {
            for (std::size_t i = 0; i < runs[0].size(); ++i) {
                diff = std::max(diff, std::abs(runs[k].log_D[i] - runs[0].log_D[i]));
                if (runs[0].D_err) diff = std::max(diff, std::abs((*runs[k].D_err)[i] - (*runs[0].D_err)[i]));
            }
        }
    }
    return make_check("determinism_across_threads", diff, 0.0, diff == 0.0,
                      "max difference of ln D (and errors) between 1, 3 and 8 threads on three routes");
}

} // namespace

ValidationReport run_validation(const ExperimentConfig& cfg) {
    ValidationReport rep;
    rep.checks.push_back(ode_vs_pcf(cfg));
    rep.checks.push_back(cross_vs_trajectory(cfg, NoiseModel::white(0.01), "cross_operator_vs_trajectory_white"));
    rep.checks.push_back(cross_vs_trajectory(cfg, NoiseModel::ou(0.003, 50.0), "cross_operator_vs_trajectory_ou"));
    rep.checks.push_back(branch_bilinears(cfg));
    rep.checks.push_back(white_limit_check(cfg, validation_master(cfg)));
    rep.checks.push_back(invariants(cfg));
    rep.checks.push_back(thread_determinism(cfg));
    return rep;
}

std::vector<std::filesystem::path> command_validate(const ExperimentConfig& cfg, ValidationReport& report) {
    const std::string started = detail::iso_timestamp();
    detail::OutputStage stage(cfg.output_dir);
    report = run_validation(cfg);
    json checks = json::array();
    for (const auto& c : report.checks) {
        checks.push_back({{"name", c.name}, {"measured", c.measured}, {"threshold", c.threshold},
                          {"passed", c.passed}, {"detail", c.detail}});
    }
    stage.write("validation.json",
                json{{"passed", report.all_passed()}, {"inject_fault", cfg.inject_fault}, {"checks", checks}}.dump(2) +
                    "\n");
    json manifest = detail::manifest_base(cfg, "validate", started);
    manifest["validation_passed"] = report.all_passed();
    return stage.commit(std::move(manifest));
}

} // namespace cqd::runner
