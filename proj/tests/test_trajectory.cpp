#include "doctest.h"

#include "cqd/decoherence.hpp"
#include "cqd/errors.hpp"
#include "cqd/schrodinger.hpp"
#include "cqd/trajectory.hpp"

#include <cmath>
#include <numbers>

using namespace cqd;
using std::numbers::pi;

namespace {

IntegratorConfig grid_cfg(const RampProtocol& ramp, std::size_t n) {
    IntegratorConfig c;
    c.grid = uniform_field_grid(ramp, n);
    return c;
}

double mean_se(const KMode& mode, const RampProtocol& ramp, const NoiseModel& noise, std::size_t M) {
    const auto cfg = grid_cfg(ramp, 5);
    double sum = 0.0;
    for (std::uint64_t rep = 0; rep < 10; ++rep) {
        EnsembleOptions o;
        o.M = M;
        o.seed = 100 + rep;
        o.threads = 1;
        sum += trajectory_ensemble({mode}, ramp, 0.01, noise, o, cfg).per_mode[0].back().std_err;
    }
    return sum / 10.0;
}

} // namespace

TEST_SUITE("trajectory") {

TEST_CASE("silent noise reproduces the pure-state overlap exactly") {
    const RampProtocol ramp(10.0, -3.0, 3.0);
    const auto cfg = grid_cfg(ramp, 31);
    const auto modes = k_grid(8);
    const double h0 = field_at(cfg.grid.front(), ramp);
    for (Estimator est : {Estimator::Abs2OfMean, Estimator::MeanOfAbs2}) {
        for (const NoiseModel& n : {NoiseModel::none(), NoiseModel::white(0.0), NoiseModel::ou(0.0, 3.0)}) {
            EnsembleOptions o;
            o.M = 16;
            o.estimator = est;
            const auto res = trajectory_ensemble(modes, ramp, 0.05, n, o, cfg);
            for (std::size_t mi = 0; mi < modes.size(); ++mi) {
                const auto p = evolve_schrodinger(modes[mi], {+1, 0.05}, ramp, environment_ground_state(modes[mi], h0), cfg);
                const auto m = evolve_schrodinger(modes[mi], {-1, 0.05}, ramp, environment_ground_state(modes[mi], h0), cfg);
                const auto ref = mode_factor_noiseless(p, m);
                for (std::size_t c = 0; c < cfg.grid.size(); ++c) {
                    CHECK(res.per_mode[mi][c].mean == ref.F[c]);
                    CHECK(res.per_mode[mi][c].std_err == 0.0);
                }
            }
        }
    }
}

TEST_CASE("standard error shrinks as one over sqrt(M)") {
    const KMode mode = make_mode(3, 8);
    const RampProtocol ramp(10.0, -1.0, 1.0);
    const NoiseModel noise = NoiseModel::white(0.05);
    const double se1 = mean_se(mode, ramp, noise, 200);
    const double se2 = mean_se(mode, ramp, noise, 400);
    REQUIRE(se1 > 0.0);
    CHECK(se1 / se2 == doctest::Approx(std::sqrt(2.0)).epsilon(0.2));
}

TEST_CASE("results do not depend on the thread count") {
    const RampProtocol ramp(10.0, -1.0, 1.0);
    const auto cfg = grid_cfg(ramp, 11);
    const auto modes = k_grid(8);
    for (const NoiseModel& n : {NoiseModel::white(0.05), NoiseModel::ou(0.05, 2.0)}) {
        EnsembleOptions o;
        o.M = 40;
        o.seed = 9;
        o.threads = 1;
        const auto a = trajectory_ensemble(modes, ramp, 0.01, n, o, cfg);
        o.threads = 3;
        const auto b = trajectory_ensemble(modes, ramp, 0.01, n, o, cfg);
        for (std::size_t c = 0; c < cfg.grid.size(); ++c) {
            CHECK(a.global[c].mean == b.global[c].mean);
            CHECK(a.global[c].std_err == b.global[c].std_err);
            for (std::size_t mi = 0; mi < modes.size(); ++mi) {
                CHECK(a.per_mode[mi][c].mean == b.per_mode[mi][c].mean);
                CHECK(a.mean_coherence[mi][c] == b.mean_coherence[mi][c]);
            }
        }
        o.seed = 10;
        const auto other = trajectory_ensemble(modes, ramp, 0.01, n, o, cfg);
        CHECK(other.global.back().mean != a.global.back().mean);
    }
}

TEST_CASE("noise does not raise D beyond the statistical error") {
    ModelParams mp;
    mp.N = 8;
    mp.delta = 0.01;
    mp.ramp = RampProtocol(10.0, -3.0, 3.0);
    SimulationOptions o;
    o.integrator.grid = uniform_field_grid(mp.ramp, 13);
    o.ensemble.M = 400;
    o.ensemble.seed = 5;
    const auto quiet = simulate(mp, NoiseModel::none(), Route::Noiseless, o);
    for (const NoiseModel& n : {NoiseModel::white(0.05), NoiseModel::ou(0.05, 2.0)}) {
        const auto noisy = simulate(mp, n, Route::Trajectory, o);
        REQUIRE(noisy.D_err.has_value());
        for (std::size_t i = 0; i < noisy.size(); ++i) {
            if (noisy.fields[i] < -1.0) continue;
            CHECK(noisy.D[i] <= quiet.D[i] + 3.0 * (*noisy.D_err)[i] + 1e-12);
        }
    }
}

TEST_CASE("branch averages are density matrices") {
    const RampProtocol ramp(10.0, -1.0, 1.0);
    const auto cfg = grid_cfg(ramp, 6);
    EnsembleOptions o;
    o.M = 50;
    const auto res = trajectory_ensemble(k_grid(8), ramp, 0.01, NoiseModel::white(0.1), o, cfg);
    for (const auto& per_mode : res.plus) {
        for (const auto& a : per_mode) {
            CHECK(a.v2 + a.u2 == doctest::Approx(1.0).epsilon(1e-8));
            CHECK(std::norm(a.vu) <= a.v2 * a.u2 + 1e-10);
        }
    }
}

TEST_CASE("independent branch noise decoheres even at zero coupling") {
    const RampProtocol ramp(10.0, -1.0, 1.0);
    const auto cfg = grid_cfg(ramp, 3);
    const KMode mode = make_mode(2, 8);
    EnsembleOptions o;
    o.M = 200;
    const auto common = trajectory_ensemble({mode}, ramp, 0.0, NoiseModel::white(0.1), o, cfg);
    CHECK(common.per_mode[0].back().mean == doctest::Approx(1.0).epsilon(1e-8));
    o.common_noise = false;
    const auto split = trajectory_ensemble({mode}, ramp, 0.0, NoiseModel::white(0.1), o, cfg);
    CHECK(split.per_mode[0].back().mean < 1.0 - 5.0 * split.per_mode[0].back().std_err);
}

TEST_CASE("ensemble arguments are checked") {
    const RampProtocol ramp(10.0, -1.0, 1.0);
    const auto cfg = grid_cfg(ramp, 3);
    EnsembleOptions o;
    o.M = 1;
    CHECK_THROWS_AS(trajectory_ensemble(k_grid(4), ramp, 0.01, NoiseModel::white(0.1), o, cfg), InvalidArgument);
    o.M = 10;
    CHECK_THROWS_AS(trajectory_ensemble({}, ramp, 0.01, NoiseModel::white(0.1), o, cfg), InvalidArgument);
    IntegratorConfig outside;
    outside.grid = {-20.0, 0.0};
    CHECK_THROWS(trajectory_ensemble(k_grid(4), ramp, 0.01, NoiseModel::white(0.1), o, outside));
    CHECK(default_noise_step(ramp, 0.01, NoiseModel::ou(0.1, 0.01)) <= 0.001 + 1e-15);
    CHECK(default_noise_step(ramp, 0.01, NoiseModel::white(0.1)) <= 10.0 / 2000.0 + 1e-15);
}

} // TEST_SUITE
