#include "cqd/master.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace cqd {

std::string to_string(OuClosure c) { return c == OuClosure::Kernel ? "kernel" : "hierarchy"; }

OuClosure ou_closure_from_string(const std::string& s) {
    if (s == "kernel") return OuClosure::Kernel;
    if (s == "hierarchy") return OuClosure::Hierarchy;
    throw InvalidArgument("unknown OU closure '" + s + "' (expected kernel or hierarchy)");
}

void MasterOptions::validate() const {
    if (hierarchy_depth < 1 || hierarchy_depth > 64) {
        throw InvalidArgument("MasterOptions: hierarchy_depth must be in [1, 64]");
    }
}

namespace {

using Branch6 = std::array<double, 6>; // p, q, Re c, Im c, Re g, Im g
using Cross12 = std::array<double, 12>; // X (4 complex) then Gamma_X off-diagonals g12, g21

// rho = [[p, c], [c*, q]], Gamma = [[0, g], [-g*, 0]]
ModeDensity to_density(const Branch6& x) {
    ModeDensity d;
    d.rho = {cplx(x[0]), cplx(x[2], x[3]), cplx(x[2], -x[3]), cplx(x[1])};
    const cplx g(x[4], x[5]);
    d.gamma = {cplx(0.0), g, -std::conj(g), cplx(0.0)};
    return d;
}

Mat2 ground_projector(const KMode& mode, double h) {
    const BranchState g = environment_ground_state(mode, h);
    return {std::norm(g.v), g.v * std::conj(g.u), g.u * std::conj(g.v), std::norm(g.u)};
}

Branch6 initial_branch(const Mat2& rho0) {
    const double herm = std::max({std::abs(rho0.a11.imag()), std::abs(rho0.a22.imag()),
                                  std::abs(rho0.a12 - std::conj(rho0.a21))});
    if (herm > 1e-12) throw InvalidArgument("master equation: initial rho must be Hermitian");
    if (std::abs(rho0.trace() - 1.0) > 1e-12) throw InvalidArgument("master equation: initial rho must have unit trace");
    return {rho0.a11.real(), rho0.a22.real(), rho0.a12.real(), rho0.a12.imag(), 0.0, 0.0};
}

BranchSolution finish(const std::vector<Branch6>& xs) {
    BranchSolution sol;
    sol.states.reserve(xs.size());
    for (const auto& x : xs) {
        sol.states.push_back(to_density(x));
        sol.min_eigenvalue = std::min(sol.min_eigenvalue, hermitian_eigenvalues(sol.states.back().rho).first);
    }
    sol.positivity_warning = sol.min_eigenvalue < -1e-6;
    return sol;
}

// Coherent part of rho' for H0 = [[a, dk], [dk, -a]]:
//   p' = -2 dk Im c,  q' = 2 dk Im c,  c' = -i (2 a c + dk (q - p))
inline void coherent_branch(const double* x, double* dx, double a, double dk) noexcept {
    dx[0] = -2.0 * dk * x[3];
    dx[1] = 2.0 * dk * x[3];
    const double re = 2.0 * a * x[2] + dk * (x[1] - x[0]);
    const double im = 2.0 * a * x[3];
    dx[2] = im;
    dx[3] = -re;
}

void check_start(const IntegratorConfig& cfg, const RampProtocol& ramp) { cfg.validate_within(ramp.t_i(), ramp.t_f()); }

// Stochastic Liouville hierarchy for X' = -i(A X - X B) + noise, levels stored as 8 reals each.
using Levels = std::vector<double>;

inline cplx level_at(const Levels& x, std::size_t n, int e) noexcept {
    return {x[8 * n + 2 * e], x[8 * n + 2 * e + 1]};
}

struct HierarchyRhs {
    double s, dk, inv_tau_q, inv_tau_n, sigma, feedback_sign;
    double off_a, off_b; // A = s H_k with field offset off_a (B likewise)
    std::size_t depth;

    void operator()(const Levels& x, Levels& dx, double t) const {
        const double h = t * inv_tau_q;
        const double a = -s * (h + off_a), b = -s * (h + off_b);
        for (std::size_t n = 0; n <= depth; ++n) {
            const cplx x11 = level_at(x, n, 0), x12 = level_at(x, n, 1), x21 = level_at(x, n, 2),
                       x22 = level_at(x, n, 3);
            // A X - X B for A = [[a, dk], [dk, -a]], B = [[b, dk], [dk, -b]]
            cplx m11 = (a - b) * x11 + dk * (x21 - x12);
            cplx m12 = (a + b) * x12 + dk * (x22 - x11);
            cplx m21 = -(a + b) * x21 + dk * (x11 - x22);
            cplx m22 = (b - a) * x22 + dk * (x12 - x21);
            cplx d11 = cplx(0.0, -1.0) * m11, d12 = cplx(0.0, -1.0) * m12;
            cplx d21 = cplx(0.0, -1.0) * m21, d22 = cplx(0.0, -1.0) * m22;
            const double decay = static_cast<double>(n) * inv_tau_n;
            d11 -= decay * x11;
            d12 -= decay * x12;
            d21 -= decay * x21;
            d22 -= decay * x22;
            // -i sigma [H1, Y] with H1 = -s sigma_z touches only the off-diagonals:
            // [H1, Y]_12 = -2 s Y12, [H1, Y]_21 = 2 s Y21
            cplx y12 = 0.0, y21 = 0.0;
            if (n > 0) {
                const double w = std::sqrt(static_cast<double>(n));
                y12 += w * level_at(x, n - 1, 1);
                y21 += w * level_at(x, n - 1, 2);
            }
            if (n < depth) {
                const double w = std::sqrt(static_cast<double>(n + 1)) * (n == 0 ? feedback_sign : 1.0);
                y12 += w * level_at(x, n + 1, 1);
                y21 += w * level_at(x, n + 1, 2);
            }
            d12 += cplx(0.0, -sigma) * (-2.0 * s * y12);
            d21 += cplx(0.0, -sigma) * (2.0 * s * y21);
            const cplx d[4] = {d11, d12, d21, d22};
            for (int e = 0; e < 4; ++e) {
                dx[8 * n + 2 * e] = d[e].real();
                dx[8 * n + 2 * e + 1] = d[e].imag();
            }
        }
    }
};

// Returns (level 0, Gamma = i X_1 / sigma) per grid time.
std::vector<std::pair<Mat2, Mat2>> solve_hierarchy(const Mat2& x0, double off_a, double off_b, const KMode& mode,
                                                   const RampProtocol& ramp, const NoiseModel& noise,
                                                   const IntegratorConfig& cfg, const MasterOptions& opts) {
    opts.validate();
    const auto depth = static_cast<std::size_t>(opts.hierarchy_depth);
    const double sigma = std::sqrt(noise.stationary_variance());
    const HierarchyRhs rhs{ramp.energy_scale, ramp.energy_scale * mode.delta_k, 1.0 / ramp.tau_Q,
                           1.0 / noise.tau_n, sigma, opts.gamma_feedback_sign, off_a, off_b, depth};
    Levels init(8 * (depth + 1), 0.0);
    const cplx e[4] = {x0.a11, x0.a12, x0.a21, x0.a22};
    for (int i = 0; i < 4; ++i) {
        init[2 * i] = e[i].real();
        init[2 * i + 1] = e[i].imag();
    }
    const auto xs = integrate_rk4(rhs, init, cfg.grid, ou_step(noise, cfg));
    std::vector<std::pair<Mat2, Mat2>> out;
    out.reserve(xs.size());
    for (const auto& x : xs) {
        const Mat2 X{level_at(x, 0, 0), level_at(x, 0, 1), level_at(x, 0, 2), level_at(x, 0, 3)};
        Mat2 G{};
        if (sigma > 0.0) {
            const cplx f(0.0, 1.0 / sigma);
            G = {f * level_at(x, 1, 0), f * level_at(x, 1, 1), f * level_at(x, 1, 2), f * level_at(x, 1, 3)};
        }
        out.emplace_back(X, G);
    }
    return out;
}

} // namespace

double ou_step(const NoiseModel& noise, const IntegratorConfig& cfg) {
    return std::min(noise.tau_n / 10.0, cfg.rk4_step);
}

BranchSolution solve_branch_master_equation(const KMode& mode, const BranchSpec& branch, const RampProtocol& ramp,
                                            const NoiseModel& noise, const IntegratorConfig& cfg,
                                            const MasterOptions& opts) {
    check_start(cfg, ramp);
    return solve_branch_master_equation(mode, branch, ramp, noise, cfg, opts,
                                        ground_projector(mode, field_at(cfg.grid.front(), ramp)));
}

BranchSolution solve_branch_master_equation(const KMode& mode, const BranchSpec& branch, const RampProtocol& ramp,
                                            const NoiseModel& noise, const IntegratorConfig& cfg,
                                            const MasterOptions& opts, const Mat2& rho0) {
    if (noise.kind != NoiseKind::OU) throw InvalidArgument("solve_branch_master_equation: OU noise required");
    noise.validate();
    opts.validate();
    check_start(cfg, ramp);
    const Branch6 x0 = initial_branch(rho0);
    if (opts.closure == OuClosure::Hierarchy) {
        const double off = branch.shift() - mode.cos_k();
        BranchSolution sol;
        for (const auto& [rho, gamma] : solve_hierarchy(rho0, off, off, mode, ramp, noise, cfg, opts)) {
            sol.states.push_back({rho, gamma});
            sol.min_eigenvalue = std::min(sol.min_eigenvalue, hermitian_eigenvalues(rho).first);
        }
        sol.positivity_warning = sol.min_eigenvalue < -1e-6;
        return sol;
    }
    // H0 = s H_k(h0), H1 = -s sigma_z
    const double s = ramp.energy_scale;
    const double offset = branch.shift() - mode.cos_k();
    const double inv_tau_q = 1.0 / ramp.tau_Q;
    const double dk = s * mode.delta_k;
    const double inv_tau_n = 1.0 / noise.tau_n;
    const double feedback = opts.gamma_feedback_sign * s * noise.xi * noise.xi / noise.tau_n;
    auto rhs = [=](const Branch6& x, Branch6& dx, double t) {
        coherent_branch(x.data(), dx.data(), -s * (t * inv_tau_q + offset), dk);
        // -xi^2/(2 tau_n) [H1, Gamma] adds (s xi^2 / tau_n) g to c'
        dx[2] += feedback * x[4];
        dx[3] += feedback * x[5];
        // Gamma' = -Gamma / tau_n + [H1, rho], [H1, rho]_12 = -2 s c
        dx[4] = -inv_tau_n * x[4] - 2.0 * s * x[2];
        dx[5] = -inv_tau_n * x[5] - 2.0 * s * x[3];
    };
    return finish(integrate_rk4(rhs, x0, cfg.grid, ou_step(noise, cfg)));
}

BranchSolution solve_white_master_equation(const KMode& mode, const BranchSpec& branch, const RampProtocol& ramp,
                                           double xi, const IntegratorConfig& cfg) {
    check_start(cfg, ramp);
    return solve_white_master_equation(mode, branch, ramp, xi, cfg,
                                       ground_projector(mode, field_at(cfg.grid.front(), ramp)));
}

BranchSolution solve_white_master_equation(const KMode& mode, const BranchSpec& branch, const RampProtocol& ramp,
                                           double xi, const IntegratorConfig& cfg, const Mat2& rho0) {
    if (!(xi >= 0.0)) throw InvalidArgument("solve_white_master_equation: xi must be >= 0");
    check_start(cfg, ramp);
    const double s = ramp.energy_scale;
    const double offset = branch.shift() - mode.cos_k();
    const double inv_tau_q = 1.0 / ramp.tau_Q;
    const double dk = s * mode.delta_k;
    const double rate = 2.0 * s * s * xi * xi; // -xi^2/2 [H1,[H1,rho]] damps c at 2 s^2 xi^2
    using Branch4 = std::array<double, 4>;
    auto rhs = [=](const Branch4& x, Branch4& dx, double t) {
        coherent_branch(x.data(), dx.data(), -s * (t * inv_tau_q + offset), dk);
        dx[2] -= rate * x[2];
        dx[3] -= rate * x[3];
    };
    const Branch6 x6 = initial_branch(rho0);
    const Branch4 x0 = {x6[0], x6[1], x6[2], x6[3]};
    const auto xs = integrate_adaptive(rhs, x0, cfg);
    std::vector<Branch6> full;
    full.reserve(xs.size());
    for (const auto& x : xs) full.push_back({x[0], x[1], x[2], x[3], 0.0, 0.0});
    return finish(full);
}

BranchSolution solve_branch(const KMode& mode, const BranchSpec& branch, const RampProtocol& ramp,
                            const NoiseModel& noise, const IntegratorConfig& cfg, const MasterOptions& opts) {
    switch (noise.kind) {
    case NoiseKind::OU: return solve_branch_master_equation(mode, branch, ramp, noise, cfg, opts);
    case NoiseKind::White: return solve_white_master_equation(mode, branch, ramp, noise.xi, cfg);
    case NoiseKind::None: break;
    }
    return solve_white_master_equation(mode, branch, ramp, 0.0, cfg);
}

namespace {

// -i (H- X - X H+) with a- = a+ + 2 delta, written out elementwise.
inline void coherent_cross(const double* x, double* dx, double ap, double am, double dk) noexcept {
    const cplx x11(x[0], x[1]), x12(x[2], x[3]), x21(x[4], x[5]), x22(x[6], x[7]);
    const cplx m11 = (am - ap) * x11 + dk * (x21 - x12);
    const cplx m12 = (am + ap) * x12 + dk * (x22 - x11);
    const cplx m21 = -(am + ap) * x21 + dk * (x11 - x22);
    const cplx m22 = -(am - ap) * x22 + dk * (x12 - x21);
    // -i m = (Im m, -Re m)
    dx[0] = m11.imag();
    dx[1] = -m11.real();
    dx[2] = m12.imag();
    dx[3] = -m12.real();
    dx[4] = m21.imag();
    dx[5] = -m21.real();
    dx[6] = m22.imag();
    dx[7] = -m22.real();
}

CrossSolution finish_cross(const std::vector<Cross12>& xs) {
    CrossSolution sol;
    sol.states.reserve(xs.size());
    sol.coherence.reserve(xs.size());
    for (const auto& x : xs) {
        CrossOperator c;
        c.X = {cplx(x[0], x[1]), cplx(x[2], x[3]), cplx(x[4], x[5]), cplx(x[6], x[7])};
        c.gammaX = {cplx(0.0), cplx(x[8], x[9]), cplx(x[10], x[11]), cplx(0.0)};
        sol.coherence.push_back(c.X.trace());
        sol.states.push_back(c);
    }
    return sol;
}

} // namespace

CrossSolution solve_cross_master_equation(const KMode& mode, const RampProtocol& ramp, double delta,
                                          const NoiseModel& noise, const IntegratorConfig& cfg,
                                          const MasterOptions& opts) {
    noise.validate();
    opts.validate();
    if (!(delta >= 0.0)) throw InvalidArgument("solve_cross_master_equation: delta must be >= 0");
    check_start(cfg, ramp);
    const double h0 = field_at(cfg.grid.front(), ramp);
    const BranchState gp = environment_ground_state(mode, h0);
    const BranchState gm = gp;
    // X = |g-><g+|
    Cross12 x0{};
    const cplx X[4] = {gm.v * std::conj(gp.v), gm.v * std::conj(gp.u), gm.u * std::conj(gp.v),
                       gm.u * std::conj(gp.u)};
    for (int i = 0; i < 4; ++i) {
        x0[2 * i] = X[i].real();
        x0[2 * i + 1] = X[i].imag();
    }

    const double s = ramp.energy_scale;
    const double inv_tau_q = 1.0 / ramp.tau_Q;
    const double cosk = mode.cos_k();
    const double dk = s * mode.delta_k;

    if (noise.kind == NoiseKind::OU && opts.closure == OuClosure::Hierarchy) {
        const Mat2 m0{X[0], X[1], X[2], X[3]};
        CrossSolution sol;
        for (const auto& [x, g] : solve_hierarchy(m0, -delta - cosk, delta - cosk, mode, ramp, noise, cfg, opts)) {
            sol.states.push_back({x, g});
            sol.coherence.push_back(x.trace());
        }
        return sol;
    }

    if (noise.kind == NoiseKind::OU) {
        const double inv_tau_n = 1.0 / noise.tau_n;
        const double kappa2 = opts.gamma_feedback_sign * s * noise.xi * noise.xi / noise.tau_n;
        auto rhs = [=](const Cross12& x, Cross12& dx, double t) {
            const double h = t * inv_tau_q;
            const double ap = -s * (h + delta - cosk);
            const double am = -s * (h - delta - cosk);
            coherent_cross(x.data(), dx.data(), ap, am, dk);
            // -kappa [H1, Gamma_X] with [H1, G]_12 = -2 s g12, [H1, G]_21 = 2 s g21
            dx[2] += kappa2 * x[8];
            dx[3] += kappa2 * x[9];
            dx[4] -= kappa2 * x[10];
            dx[5] -= kappa2 * x[11];
            dx[8] = -inv_tau_n * x[8] - 2.0 * s * x[2];
            dx[9] = -inv_tau_n * x[9] - 2.0 * s * x[3];
            dx[10] = -inv_tau_n * x[10] + 2.0 * s * x[4];
            dx[11] = -inv_tau_n * x[11] + 2.0 * s * x[5];
        };
        return finish_cross(integrate_rk4(rhs, x0, cfg.grid, ou_step(noise, cfg)));
    }

    const double rate = noise.kind == NoiseKind::White ? 2.0 * s * s * noise.xi * noise.xi : 0.0;
    using Cross8 = std::array<double, 8>;
    auto rhs = [=](const Cross8& x, Cross8& dx, double t) {
        const double h = t * inv_tau_q;
        coherent_cross(x.data(), dx.data(), -s * (h + delta - cosk), -s * (h - delta - cosk), dk);
        for (int i = 2; i < 6; ++i) dx[i] -= rate * x[i];
    };
    Cross8 y0;
    std::copy_n(x0.begin(), 8, y0.begin());
    const auto ys = integrate_adaptive(rhs, y0, cfg);
    std::vector<Cross12> full;
    full.reserve(ys.size());
    for (const auto& y : ys) {
        Cross12 z{};
        std::copy(y.begin(), y.end(), z.begin());
        full.push_back(z);
    }
    return finish_cross(full);
}

} // namespace cqd
