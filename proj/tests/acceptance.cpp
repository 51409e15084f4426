// acceptance: one PASS/FAIL line per acceptance criterion, plus information lines.
// Exits 0 when every criterion was evaluated; a FAIL line is a result, not an error.

#include "cqd/decoherence.hpp"
#include "cqd/observables.hpp"
#include "cqd/propagator.hpp"
#include "cqd/runner.hpp"
#include "cqd/schrodinger.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <string>

using namespace cqd;
using std::numbers::pi;

namespace {

std::string report_text;
int n_pass = 0, n_fail = 0;

void emit(const char* format, ...) {
    char buf[4096];
    va_list ap;
    va_start(ap, format);
    std::vsnprintf(buf, sizeof buf, format, ap);
    va_end(ap);
    std::fputs(buf, stdout);
    std::fflush(stdout);
    report_text += buf;
}

void criterion(const char* id, bool pass, const std::string& detail, double seconds) {
    emit("criterion %-3s %s  %s  [%.0f s]\n", id, pass ? "PASS" : "FAIL", detail.c_str(), seconds);
    (pass ? n_pass : n_fail)++;
}

void info(const std::string& text) { emit("  info: %s\n", text.c_str()); }

std::string num(double x, int digits = 4) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

struct Clock {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); }
};

ModelParams model(int N, double delta, double tau_Q) {
    ModelParams mp;
    mp.N = N;
    mp.delta = delta;
    mp.ramp = RampProtocol(tau_Q, -5.0, 5.0);
    return mp;
}

// Default output grid of the runner: 2000 points uniform in h.
SimulationOptions dense(const ModelParams& mp) {
    SimulationOptions o;
    o.integrator.grid = uniform_field_grid(mp.ramp, 2000);
    return o;
}

// Only t_i and the two critical points.
SimulationOptions critical_only(const ModelParams& mp) {
    SimulationOptions o;
    o.integrator.grid = {mp.ramp.t_i(), -mp.ramp.tau_Q, mp.ramp.tau_Q};
    return o;
}

std::string fit_text(const ScalingFit& f) {
    return "slope " + num(f.slope) + " r^2 " + num(f.r_squared);
}

std::string peaks_text(const RevivalReport& r) {
    std::string s;
    for (const auto& p : r.peaks) s += (s.empty() ? "" : " ") + num(p.D, 5);
    return s.empty() ? "none" : s;
}

// Revival data of one run at tau_Q = 250 in the window between the critical points.
struct RevivalRun {
    RevivalReport revivals;
    double blp{0.0};
};

RevivalRun revival_run(const NoiseModel& noise, const SimulationOptions& o) {
    const ModelParams mp = model(500, 0.01, 250.0);
    const Route route = noise.silent() ? Route::Noiseless : Route::CrossOperator;
    const DecoherenceSeries s = simulate(mp, noise, route, o);
    return {detect_revivals(s, -1.0, 1.0), blp_measure(s).measure};
}

// --- criteria ---------------------------------------------------------------------------

DecoherenceSeries slow_noiseless;

void criterion_1() {
    Clock c;
    const ModelParams mp = model(500, 0.01, 250.0);
    slow_noiseless = simulate(mp, NoiseModel::none(), Route::Noiseless, dense(mp));
    const RevivalReport r = detect_revivals(slow_noiseless, -1.0, 1.0);
    const double period = r.period_estimate.value_or(0.0);
    const double rel = std::abs(period - pi / 10.0) / (pi / 10.0);
    criterion("1", r.peaks.size() >= 3 && rel <= 0.10,
              std::to_string(r.peaks.size()) + " revivals in (-1, 1), mean spacing " + num(period, 6) + " vs pi/10 = " +
                  num(pi / 10.0, 6) + " (rel. error " + num(rel, 3) + ", limit 0.10)",
              c.seconds());
}

void criterion_2() {
    Clock c;
    const ModelParams fast = model(500, 0.01, 10.0);
    const DecoherenceSeries s = simulate(fast, NoiseModel::none(), Route::Noiseless, dense(fast));
    const RevivalReport rf = detect_revivals(s, -1.0, 1.0);
    double max_rise = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (s.fields[i - 1] >= -1.0 && s.fields[i] <= 1.0) max_rise = std::max(max_rise, s.D[i] - s.D[i - 1]);
    }
    const RevivalReport rs = detect_revivals(slow_noiseless, -1.0, 1.0);
    criterion("2", rf.peaks.empty() && !rs.peaks.empty(),
              "tau_Q=10: " + std::to_string(rf.peaks.size()) + " interior peaks (largest step-to-step rise of D " +
                  num(max_rise, 3) + "); tau_Q=250: " + std::to_string(rs.peaks.size()) + " interior peaks",
              c.seconds());
}

void criterion_3() {
    Clock c;
    double worst = 0.0, worst_h = 0.0;
    for (std::size_t i = 0; i < slow_noiseless.size(); ++i) {
        const double h = slow_noiseless.fields[i];
        if (h < 1.5 || h > 4.0) continue;
        const double a = adiabatic_df(500, 0.01, h);
        const double rel = std::abs(slow_noiseless.D[i] - a) / a;
        if (rel > worst) worst = rel, worst_h = h;
    }
    criterion("3", worst <= 0.05,
              "max relative deviation of the dynamical D from the adiabatic closed form on h in [1.5, 4]: " +
                  num(worst, 4) + " at h = " + num(worst_h, 4) + " (limit 0.05)",
              c.seconds());

    // The closed form against the exact static ground-state overlap, which it approximates.
    const auto modes = k_grid(500);
    double static_worst = 0.0;
    for (double h = 1.5; h <= 4.0 + 1e-12; h += 0.25) {
        double log_f = 0.0;
        for (const auto& m : modes) {
            log_f += std::log(std::norm(overlap(ground_state(m, h, {+1, 0.01}), ground_state(m, h, {-1, 0.01}))));
        }
        static_worst = std::max(static_worst, std::abs(std::exp(log_f) - adiabatic_df(500, 0.01, h)) / adiabatic_df(500, 0.01, h));
    }
    info("the closed form matches the static ground-state overlap of the two branches to " + num(static_worst, 3) +
         " relative on the same h range; after the ramp the chain carries Kibble-Zurek excitations and D(h=1.5..4) = " +
         num(slow_noiseless.D[std::lower_bound(slow_noiseless.fields.begin(), slow_noiseless.fields.end(), 1.5) -
                                slow_noiseless.fields.begin()],
             3) +
         "..., far below the static value");
}

// ln D(h_c) of the noise-induced part: the noiseless ln D at the same N is subtracted.
struct CriticalPoint {
    double x;
    double log_D;
    double log_D_noise;
};

ScalingFit fit_points(const std::vector<CriticalPoint>& pts, bool noise_part, const std::string& xdef) {
    std::vector<ScalingPoint> sp;
    for (const auto& p : pts) sp.push_back({p.x, 0.0, noise_part ? p.log_D_noise : p.log_D});
    return fit_scaling(sp, FitModel::Exponential, xdef);
}

void criterion_4() {
    Clock c;
    std::vector<CriticalPoint> pts;
    for (int N : {100, 200, 300, 400, 500}) {
        const ModelParams mp = model(N, 0.01, 10.0);
        const double quiet = simulate(mp, NoiseModel::none(), Route::Noiseless, critical_only(mp)).log_D[2];
        for (double xi : {0.005, 0.01, 0.015, 0.02}) {
            const double ld = simulate(mp, NoiseModel::white(xi), Route::CrossOperator, critical_only(mp)).log_D[2];
            pts.push_back({N * xi * xi, ld, ld - quiet});
        }
    }
    const ScalingFit f = fit_points(pts, false, "N xi^2");
    criterion("4", f.r_squared >= 0.95 && f.slope < 0.0,
              "ln D(h=+1) vs N xi^2 over 20 points: " + fit_text(f) + " (need r^2 >= 0.95, slope < 0)", c.seconds());
    info("ln D(h=+1) of the noiseless chain is about " + num(pts[0].log_D - pts[0].log_D_noise, 4) +
         " per 100 sites at tau_Q=10 and dominates; the noise-induced part ln D - ln D_noiseless vs N xi^2: " +
         fit_text(fit_points(pts, true, "N xi^2")));
}

void criterion_5() {
    Clock c;
    std::vector<CriticalPoint> pts;
    const double xi = 0.01;
    for (int N : {100, 200, 300, 400, 500}) {
        const ModelParams mp = model(N, 0.01, 10.0);
        const double quiet = simulate(mp, NoiseModel::none(), Route::Noiseless, critical_only(mp)).log_D[1];
        for (double tau_n : {1.0, 2.0, 5.0, 10.0, 20.0}) {
            const double ld = simulate(mp, NoiseModel::ou(xi, tau_n), Route::CrossOperator, critical_only(mp)).log_D[1];
            pts.push_back({N * xi * xi / tau_n, ld, ld - quiet});
        }
    }
    const ScalingFit f = fit_points(pts, false, "N xi^2 / tau_n");
    criterion("5", f.r_squared >= 0.95,
              "ln D(h=-1) vs N xi^2/tau_n over N {100..500} x tau_n {1,2,5,10,20}, xi=0.01, tau_Q=10: " + fit_text(f) +
                  " (need r^2 >= 0.95)",
              c.seconds());
    info("noise-induced part ln D - ln D_noiseless vs N xi^2/tau_n: " +
         fit_text(fit_points(pts, true, "N xi^2 / tau_n")));
}

std::map<double, RevivalRun> white_runs;

void criterion_6a() {
    Clock c;
    const ModelParams mp = model(500, 0.01, 250.0);
    const std::vector<double> xis{0.001, 0.002, 0.003, 0.005};
    std::size_t n_peaks = 1000;
    for (double xi : xis) {
        white_runs[xi] = revival_run(NoiseModel::white(xi), dense(mp));
        n_peaks = std::min(n_peaks, white_runs[xi].revivals.peaks.size());
        info("white xi=" + num(xi) + ": D_max " + peaks_text(white_runs[xi].revivals));
    }
    bool pass = n_peaks >= 2;
    double prev_slope = 0.0, worst_r2 = 1.0;
    std::string slopes;
    for (std::size_t p = 0; p < n_peaks; ++p) {
        std::vector<ScalingPoint> sp;
        for (double xi : xis) sp.push_back({xi * xi, white_runs[xi].revivals.peaks[p].D, std::nullopt});
        const ScalingFit f = fit_scaling(sp, FitModel::Exponential, "xi^2");
        worst_r2 = std::min(worst_r2, f.r_squared);
        if (f.r_squared < 0.9 || (p > 0 && !(f.slope < prev_slope))) pass = false;
        prev_slope = f.slope;
        slopes += (slopes.empty() ? "" : ", ") + num(f.slope);
    }
    criterion("6a", pass,
              "white ln D_max vs xi^2 per revival (" + std::to_string(n_peaks) + " peaks): slopes " + slopes +
                  "; worst r^2 " + num(worst_r2) + " (need r^2 >= 0.9 and steeper slopes for later peaks)",
              c.seconds());
}

std::map<double, RevivalRun> ou_runs;

void criterion_6b() {
    Clock c;
    const ModelParams mp = model(500, 0.01, 250.0);
    // The exact closure at N=500 over the full slow ramp is run with the fixed step 0.005; the
    // halved-step comparison below bounds its effect on these observables.
    SimulationOptions o = dense(mp);
    o.integrator.rk4_step = 0.005;
    for (double tau_n : {10.0, 25.0, 50.0, 75.0, 100.0, 200.0}) ou_runs[tau_n] = revival_run(NoiseModel::ou(0.003, tau_n), o);

    SimulationOptions half = o;
    half.integrator.rk4_step = 0.0025;
    const RevivalRun check = revival_run(NoiseModel::ou(0.003, 25.0), half);
    const RevivalRun& ref = ou_runs[25.0];
    double dd = 0.0;
    for (std::size_t p = 0; p < std::min(check.revivals.peaks.size(), ref.revivals.peaks.size()); ++p) {
        dd = std::max(dd, std::abs(check.revivals.peaks[p].D - ref.revivals.peaks[p].D));
    }
    info("OU xi=0.003 tau_n=25 with step 0.0025 instead of 0.005: max change of D_max " + num(dd, 3) +
         " and relative change of the BLP measure " + num(std::abs(check.blp - ref.blp) / ref.blp, 3));

    std::vector<ScalingPoint> sp;
    std::string values;
    for (const auto& [tau_n, run] : ou_runs) {
        if (tau_n > 100.0 || run.revivals.peaks.empty()) continue;
        sp.push_back({tau_n, run.revivals.peaks.front().D, std::nullopt});
        values += (values.empty() ? "" : ", ") + num(run.revivals.peaks.front().D, 5);
    }
    const ScalingFit f = fit_scaling(sp, FitModel::Linear, "tau_n");
    criterion("6b", f.r_squared >= 0.9,
              "OU xi=0.003 first-revival D_max at tau_n = 10, 25, 50, 75, 100: " + values + "; linear " + fit_text(f) +
                  " (need r^2 >= 0.9)",
              c.seconds());
}

void criterion_7() {
    Clock c;
    const ModelParams mp = model(16, 0.01, 10.0);
    SimulationOptions o;
    // 20 checkpoints spread over the ramp after the start
    for (int i = 1; i <= 20; ++i) o.integrator.grid.push_back(mp.ramp.t_i() + (mp.ramp.t_f() - mp.ramp.t_i()) * i / 20.0);
    o.integrator.grid.insert(o.integrator.grid.begin(), mp.ramp.t_i());
    o.ensemble.M = 2000;
    o.ensemble.seed = 2024;
    o.ensemble.estimator = Estimator::Abs2OfMean;
    o.ensemble.common_noise = true;
    bool pass = true;
    std::string detail;
    for (const NoiseModel& n : {NoiseModel::white(0.01), NoiseModel::ou(0.003, 50.0)}) {
        const DecoherenceSeries me = simulate(mp, n, Route::CrossOperator, o);
        const DecoherenceSeries tr = simulate(mp, n, Route::Trajectory, o);
        double worst = 0.0;
        int outside = 0;
        for (std::size_t i = 1; i < me.size(); ++i) {
            const double se = (*tr.D_err)[i];
            const double diff = std::abs(me.D[i] - tr.D[i]);
            const double z = se > 0.0 ? diff / se : (diff < 1e-12 ? 0.0 : INFINITY);
            worst = std::max(worst, z);
            if (z > 3.0) ++outside;
        }
        if (outside > 0) pass = false;
        detail += std::string(detail.empty() ? "" : "; ") + (n.kind == NoiseKind::White ? "white" : "OU") +
                  ": max |D_me - D_traj| / SE = " + num(worst, 3) + " (" + std::to_string(outside) + " of 20 beyond 3)";
    }
    criterion("7", pass, "N=16, M=2000: " + detail, c.seconds());
}

void criterion_8() {
    Clock c;
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const int N = 8 << (rng() % 4);
        const KMode mode = make_mode(1 + static_cast<int>(rng() % static_cast<unsigned>(N / 2)), N);
        const double tau_Q = 1.0 + 249.0 * u(rng);
        const BranchSpec b{rng() % 2 ? +1 : -1, rng() % 2 ? 0.01 : 0.0};
        const RampProtocol ramp(tau_Q, -5.0, 5.0);
        const double t1 = ramp.t_i() + (ramp.t_f() - ramp.t_i()) * (0.3 + 0.7 * u(rng));
        IntegratorConfig cfg;
        cfg.grid = {ramp.t_i(), t1};
        const BranchState g0 = environment_ground_state(mode, ramp.h_i);
        const BranchState ode = evolve_schrodinger(mode, b, ramp, g0, cfg).back();
        const BranchState pcf = exact_propagator_pcf(mode, b, ramp, ramp.t_i(), t1).apply(g0);
        worst = std::max(worst, std::abs(1.0 - std::norm(overlap(ode, pcf))));
    }
    criterion("8", worst < 1e-6, "20 random (k, tau_Q, delta, end time): max fidelity error " + num(worst, 3) + " (limit 1e-6)",
              c.seconds());
}

void criterion_9() {
    Clock c;
    const RampProtocol ramp(10.0, -2.0, 2.0);
    IntegratorConfig cfg;
    cfg.grid = uniform_field_grid(ramp, 201);
    const double xi = 0.05;
    double err[3] = {0.0, 0.0, 0.0};
    const double taus[3] = {0.1, 0.03, 0.01};
    for (const auto& mode : k_grid(16)) {
        for (int sign : {+1, -1}) {
            const BranchSpec b{sign, 0.01};
            const BranchSolution white = solve_white_master_equation(mode, b, ramp, xi, cfg);
            for (int j = 0; j < 3; ++j) {
                const BranchSolution ou = solve_branch_master_equation(mode, b, ramp, NoiseModel::ou(xi, taus[j]), cfg);
                for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
                    err[j] = std::max(err[j], (ou.states[i].rho - white.states[i].rho).max_abs());
                }
            }
        }
    }
    criterion("9", err[1] < err[0] && err[2] < err[1],
              "N=16, xi=0.05: max |rho_OU - rho_white| = " + num(err[0], 3) + ", " + num(err[1], 3) + ", " +
                  num(err[2], 3) + " at tau_n = 0.1, 0.03, 0.01",
              c.seconds());
}

void criterion_10() {
    Clock c;
    bool white_ok = true;
    std::string wv;
    double prev = INFINITY;
    for (const auto& [xi, run] : white_runs) {
        if (!(run.blp < prev)) white_ok = false;
        prev = run.blp;
        wv += (wv.empty() ? "" : ", ") + num(run.blp, 4);
    }
    std::vector<std::pair<double, double>> pairs;
    std::string ov;
    for (double tau_n : {25.0, 50.0, 100.0, 200.0}) {
        pairs.emplace_back(tau_n, ou_runs.at(tau_n).blp);
        ov += (ov.empty() ? "" : ", ") + num(ou_runs.at(tau_n).blp, 6);
    }
    const ScalingFit f = nonmarkov_vs_tau_n(pairs);
    const bool ou_ok = f.slope > 0.0 && f.r_squared >= 0.9;
    criterion("10", white_ok && ou_ok,
              std::string("white BLP at xi = 0.001, 0.002, 0.003, 0.005: ") + wv +
                  (white_ok ? " (decreasing)" : " (not decreasing)") + "; OU xi=0.003 BLP at tau_n = 25, 50, 100, 200: " +
                  ov + ", linear " + fit_text(f) + " (need slope > 0, r^2 >= 0.9)",
              c.seconds());
}

// The memory-kernel pair as an alternative closure, for comparison with the colored-noise trends.
void kernel_information() {
    Clock c;
    const ModelParams mp = model(500, 0.01, 250.0);
    SimulationOptions o = dense(mp);
    o.integrator.rk4_step = 0.005;
    o.master.closure = OuClosure::Kernel;
    std::vector<ScalingPoint> sp;
    std::vector<std::pair<double, double>> pairs;
    std::string dv, bv;
    for (double tau_n : {10.0, 25.0, 50.0, 75.0, 100.0, 200.0}) {
        const RevivalRun r = revival_run(NoiseModel::ou(0.003, tau_n), o);
        const double dmax = r.revivals.peaks.empty() ? 0.0 : r.revivals.peaks.front().D;
        if (tau_n <= 100.0) sp.push_back({tau_n, dmax, std::nullopt});
        dv += (dv.empty() ? "" : ", ") + num(dmax, 4);
        if (tau_n == 10.0 || tau_n == 75.0) continue;
        pairs.emplace_back(tau_n, r.blp);
        bv += (bv.empty() ? "" : ", ") + num(r.blp, 4);
    }
    info("memory-kernel closure (second order in xi, master.ou_closure = kernel) on the same grid: D_max " + dv +
         " -> linear over tau_n <= 100 " + fit_text(fit_scaling(sp, FitModel::Linear, "tau_n")) + "; BLP " + bv +
         " -> " + fit_text(nonmarkov_vs_tau_n(pairs)) + "  [" + num(c.seconds(), 3) + " s]");
}

void criterion_11() {
    Clock c;
    auto cfg = runner::load_config(std::nullopt, {"experiment=validate"}, std::nullopt, std::nullopt, std::nullopt);
    const runner::ValidationReport rep = runner::run_validation(cfg);
    std::string failed;
    for (const auto& ch : rep.checks) {
        if (!ch.passed) failed += (failed.empty() ? "" : ", ") + ch.name;
    }

    // Thread-count determinism on the trajectory and cross-operator routes.
    const ModelParams mp = model(16, 0.01, 10.0);
    SimulationOptions o;
    o.integrator.grid = uniform_field_grid(mp.ramp, 41);
    o.ensemble.M = 100;
    bool same = true;
    for (Route r : {Route::Trajectory, Route::CrossOperator}) {
        std::vector<DecoherenceSeries> runs;
        for (unsigned t : {1u, 4u, 0u}) {
            o.threads = t;
            o.ensemble.threads = t;
            runs.push_back(simulate(mp, NoiseModel::ou(0.02, 5.0), r, o));
        }
        for (const auto& s : runs) same = same && s.D == runs.front().D && s.log_D == runs.front().log_D;
    }
    criterion("11", rep.all_passed() && same,
              "validate: " + std::to_string(rep.checks.size()) + " checks, " +
                  (failed.empty() ? std::string("all passed") : "failed: " + failed) +
                  "; D identical for 1, 4 and all threads: " + (same ? "yes" : "no") +
                  " (unit suites cover the per-module invariants)",
              c.seconds());
}

} // namespace

int main(int argc, char** argv) {
    Clock total;
    try {
        criterion_1();
        criterion_2();
        criterion_3();
        criterion_4();
        criterion_5();
        criterion_6a();
        criterion_6b();
        criterion_7();
        criterion_8();
        criterion_9();
        criterion_10();
        kernel_information();
        criterion_11();
    } catch (const std::exception& e) {
        emit("acceptance aborted: %s\n", e.what());
        return 1;
    }
    emit("%d passed, %d failed  [%.0f s]\n", n_pass, n_fail, total.seconds());
    if (argc > 1) {
        std::ofstream out(argv[1]);
        out << report_text;
    }
    return 0;
}
