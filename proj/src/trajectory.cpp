#include "cqd/trajectory.hpp"

#include "cqd/parallel.hpp"
#include "cqd/schrodinger.hpp"

#include <cmath>
#include <numbers>

namespace cqd {

double default_noise_step(const RampProtocol& ramp, double delta, const NoiseModel& noise) {
    const double h_max = std::max(std::abs(ramp.h_i), std::abs(ramp.h_f));
    const double e_max = ramp.energy_scale * std::hypot(h_max + delta + 1.0, 1.0);
    double dt = std::min(ramp.tau_Q / 2000.0, std::numbers::pi / (20.0 * e_max));
    if (noise.kind == NoiseKind::OU) dt = std::min(dt, noise.tau_n / 10.0);
    return dt;
}

namespace {

// Noise realization on the uniform step grid t_j = t0 + j dt.
struct NoisePath {
    NoiseKind kind{NoiseKind::None};
    std::vector<double> s; // White: one value per step. OU: one value per node.
    double t0{0.0}, dt{1.0};

    double at(std::size_t j, double t) const noexcept {
        if (kind == NoiseKind::White) return s[j];
        if (kind == NoiseKind::OU) {
            const double w = (t - (t0 + static_cast<double>(j) * dt)) / dt;
            return s[j] + (s[j + 1] - s[j]) * w;
        }
        return 0.0;
    }
};

NoisePath draw(const NoiseModel& noise, double t0, double dt, std::size_t n_steps, std::uint64_t seed) {
    NoisePath p;
    p.kind = noise.kind;
    p.t0 = t0;
    p.dt = dt;
    if (noise.kind == NoiseKind::White) {
        p.s = sample_white_path(noise.xi, dt, n_steps, seed);
    } else if (noise.kind == NoiseKind::OU) {
        std::vector<double> nodes(n_steps + 1);
        for (std::size_t j = 0; j <= n_steps; ++j) nodes[j] = t0 + static_cast<double>(j) * dt;
        p.s = sample_ou_path(noise, nodes, seed);
    }
    return p;
}

// Within one noise step the Hamiltonian s [[a(t), dk], [dk, -a(t)]] is linear in t, so the
// fourth-order Magnus exponential is accurate and exactly unitary regardless of how fast
// the mode oscillates.
struct BranchStepper {
    double offset; // branch shift - cos k
    double dk;     // energy-scaled
    double inv_tau_q;
    double scale;

    double a_at(double t, double s) const noexcept { return -scale * (t * inv_tau_q + s + offset); }

    SpinorVec step(const SpinorVec& x, double t, double h, const NoisePath& p, std::size_t j) const noexcept {
        constexpr double c = 0.28867513459481287; // sqrt(3) / 6
        const double t1 = t + (0.5 - c) * h, t2 = t + (0.5 + c) * h;
        const double a1 = a_at(t1, p.at(j, t1)), a2 = a_at(t2, p.at(j, t2));
        // Omega = -i (az sz + ax sx + ay sy)
        const double az = 0.5 * h * (a1 + a2);
        const double ax = h * dk;
        const double ay = c * h * h * dk * (a2 - a1);
        const double th = std::sqrt(az * az + ax * ax + ay * ay);
        const double cs = std::cos(th);
        const double sn = th > 0.0 ? std::sin(th) / th : 1.0;
        const cplx U11(cs, -sn * az), U22(cs, sn * az);
        const cplx U12(-sn * ay, -sn * ax), U21(sn * ay, -sn * ax);
        const cplx v(x[0], x[1]), u(x[2], x[3]);
        const cplx v1 = U11 * v + U12 * u, u1 = U21 * v + U22 * u;
        return {v1.real(), v1.imag(), u1.real(), u1.imag()};
    }
};

// Per-trajectory samples at one checkpoint.
struct Sample {
    cplx d;
    double v2p, u2p, v2m, u2m;
    cplx vup, vum;
};

Sample sample_of(const SpinorVec& xp, const SpinorVec& xm) {
    const BranchState p = unpack(xp), m = unpack(xm);
    return {overlap(p, m), std::norm(p.v), std::norm(p.u), std::norm(m.v), std::norm(m.u),
            p.v * std::conj(p.u), m.v * std::conj(m.u)};
}

struct Jackknife {
    double estimate;
    double std_err;
};

// loo holds the leave-one-out estimates.
double jackknife_error(const std::vector<double>& loo) {
    const auto M = static_cast<double>(loo.size());
    double mean = 0.0;
    for (double x : loo) mean += x;
    mean /= M;
    double ss = 0.0;
    for (double x : loo) ss += (x - mean) * (x - mean);
    return std::sqrt((M - 1.0) / M * ss);
}

double sem(double sum, double sum2, std::size_t M) {
    const auto n = static_cast<double>(M);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum2 / n - mean * mean) * n / (n - 1.0));
    return std::sqrt(var / n);
}

} // namespace

EnsembleResult trajectory_ensemble(const std::vector<KMode>& modes, const RampProtocol& ramp, double delta,
                                   const NoiseModel& noise, const EnsembleOptions& opts,
                                   const IntegratorConfig& cfg) {
    if (opts.M < 2) throw InvalidArgument("trajectory_ensemble: ensemble size M must be >= 2");
    if (modes.empty()) throw InvalidArgument("trajectory_ensemble: no modes");
    noise.validate();
    cfg.validate_within(ramp.t_i(), ramp.t_f());
    const auto& grid = cfg.grid;
    const std::size_t n_modes = modes.size(), n_times = grid.size();
    const bool silent = noise.silent();
    const std::size_t M = silent ? 1 : opts.M;

    const double t0 = grid.front();
    const double span = grid.back() - t0;
    const double dt_max = opts.dt_noise > 0.0 ? opts.dt_noise : default_noise_step(ramp, delta, noise);
    const std::size_t n_steps = span > 0.0 ? static_cast<std::size_t>(std::ceil(span / dt_max - 1e-9)) : 0;
    const double dt = n_steps > 0 ? span / static_cast<double>(n_steps) : 1.0;

    std::vector<Sample> samples(n_modes * M * n_times);
    auto slot = [&](std::size_t mode, std::size_t traj, std::size_t time) -> Sample& {
        return samples[(mode * M + traj) * n_times + time];
    };

    parallel_for(n_modes * M, opts.threads, [&](std::size_t item) {
        const std::size_t mi = item / M, traj = item % M;
        const KMode& mode = modes[mi];
        const double h0 = field_at(t0, ramp);
        const BranchState gp = environment_ground_state(mode, h0);
        const BranchState gm = gp;

        if (silent) {
            const auto sp = evolve_schrodinger(mode, {+1, delta}, ramp, gp, cfg);
            const auto sm = evolve_schrodinger(mode, {-1, delta}, ramp, gm, cfg);
            for (std::size_t c = 0; c < n_times; ++c) slot(mi, traj, c) = sample_of(pack(sp[c]), pack(sm[c]));
            return;
        }

        const auto m_index = static_cast<std::uint64_t>(mode.m);
        const NoisePath path_p =
            draw(noise, t0, dt, n_steps, derive_seed(opts.seed, m_index, traj, opts.common_noise ? 0 : 1));
        const NoisePath path_m = opts.common_noise
                                     ? path_p
                                     : draw(noise, t0, dt, n_steps, derive_seed(opts.seed, m_index, traj, 2));
        const double sc = ramp.energy_scale;
        const BranchStepper bp{delta - mode.cos_k(), sc * mode.delta_k, 1.0 / ramp.tau_Q, sc};
        const BranchStepper bm{-delta - mode.cos_k(), sc * mode.delta_k, 1.0 / ramp.tau_Q, sc};

        SpinorVec xp = pack(gp), xm = pack(gm);
        std::size_t c = 0;
        for (std::size_t j = 0; j <= n_steps && c < n_times; ++j) {
            const double tj = t0 + static_cast<double>(j) * dt;
            const double tn = j < n_steps ? tj + dt : std::numeric_limits<double>::infinity();
            // checkpoints inside [tj, tn): partial step from the node
            while (c < n_times && (grid[c] < tn || j == n_steps)) {
                const double h = j == n_steps ? 0.0 : grid[c] - tj;
                if (h <= 0.0) {
                    slot(mi, traj, c) = sample_of(xp, xm);
                } else {
                    slot(mi, traj, c) = sample_of(bp.step(xp, tj, h, path_p, j), bm.step(xm, tj, h, path_m, j));
                }
                ++c;
            }
            if (j == n_steps) break;
            xp = bp.step(xp, tj, dt, path_p, j);
            xm = bm.step(xm, tj, dt, path_m, j);
        }
    });

    EnsembleResult res;
    res.times = grid;
    res.per_mode.assign(n_modes, std::vector<TrajectoryEstimate>(n_times));
    res.mean_coherence.assign(n_modes, std::vector<cplx>(n_times));
    res.plus.assign(n_modes, std::vector<BranchAverages>(n_times));
    res.minus = res.plus;
    res.global.assign(n_times, {});

    const double Md = static_cast<double>(M);
    std::vector<double> loo_global(M), loo(M);
    for (std::size_t c = 0; c < n_times; ++c) {
        std::fill(loo_global.begin(), loo_global.end(), 1.0);
        double global_est = 1.0;
        for (std::size_t mi = 0; mi < n_modes; ++mi) {
            cplx sum = 0.0;
            double sum_abs2 = 0.0;
            double s_v2p = 0, s_v2p2 = 0, s_u2p = 0, s_u2p2 = 0, s_v2m = 0, s_v2m2 = 0, s_u2m = 0, s_u2m2 = 0;
            cplx s_vup = 0.0, s_vum = 0.0;
            double s_vup2 = 0, s_vum2 = 0;
            for (std::size_t m = 0; m < M; ++m) {
                const Sample& s = slot(mi, m, c);
                sum += s.d;
                sum_abs2 += std::norm(s.d);
                s_v2p += s.v2p, s_v2p2 += s.v2p * s.v2p, s_u2p += s.u2p, s_u2p2 += s.u2p * s.u2p;
                s_v2m += s.v2m, s_v2m2 += s.v2m * s.v2m, s_u2m += s.u2m, s_u2m2 += s.u2m * s.u2m;
                s_vup += s.vup, s_vup2 += std::norm(s.vup), s_vum += s.vum, s_vum2 += std::norm(s.vum);
            }
            res.mean_coherence[mi][c] = sum / Md;
            double est;
            if (opts.estimator == Estimator::Abs2OfMean) {
                est = std::norm(sum / Md);
                for (std::size_t m = 0; m < M; ++m) {
                    loo[m] = M > 1 ? std::norm((sum - slot(mi, m, c).d) / (Md - 1.0)) : est;
                }
            } else {
                est = sum_abs2 / Md;
                for (std::size_t m = 0; m < M; ++m) {
                    loo[m] = M > 1 ? (sum_abs2 - std::norm(slot(mi, m, c).d)) / (Md - 1.0) : est;
                }
            }
            for (std::size_t m = 0; m < M; ++m) loo_global[m] *= loo[m];
            global_est *= est;
            res.per_mode[mi][c] = {est, M > 1 ? jackknife_error(loo) : 0.0, opts.M, opts.seed};

            auto averages = [&](double v2, double v22, double u2, double u22, cplx vu, double vu2) {
                BranchAverages a;
                a.v2 = v2 / Md;
                a.u2 = u2 / Md;
                a.vu = vu / Md;
                if (M > 1) {
                    a.v2_err = sem(v2, v22, M);
                    a.u2_err = sem(u2, u22, M);
                    a.vu_err = std::sqrt(std::max(0.0, (vu2 / Md - std::norm(a.vu)) / (Md - 1.0)));
                }
                return a;
            };
            res.plus[mi][c] = averages(s_v2p, s_v2p2, s_u2p, s_u2p2, s_vup, s_vup2);
            res.minus[mi][c] = averages(s_v2m, s_v2m2, s_u2m, s_u2m2, s_vum, s_vum2);
        }
        res.global[c] = {global_est, M > 1 ? jackknife_error(loo_global) : 0.0, opts.M, opts.seed};
    }
    return res;
}

} // namespace cqd
