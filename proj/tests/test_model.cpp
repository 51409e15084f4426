#include "doctest.h"

#include "cqd/errors.hpp"
#include "cqd/model.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace cqd;
using std::numbers::pi;

namespace {

// Lower eigenpair of a real symmetric 2x2 matrix by the textbook route: eigenvalue from
// the characteristic polynomial, eigenvector from the second row of (H - E).
struct Eig2 {
    double lo, hi;
    double x, y;
};

Eig2 dense_eig(double a, double b, double d) {
    const double tr = a + d, det = a * d - b * b;
    const double disc = std::sqrt(tr * tr / 4.0 - det);
    const double lo = tr / 2.0 - disc, hi = tr / 2.0 + disc;
    double x = b, y = lo - a;
    if (std::abs(x) + std::abs(y) < 1e-300) {
        x = lo - d;
        y = b;
    }
    const double n = std::hypot(x, y);
    return {lo, hi, x / n, y / n};
}

} // namespace

TEST_SUITE("model") {

TEST_CASE("k grid for small chains") {
    const auto g4 = k_grid(4);
    REQUIRE(g4.size() == 2);
    CHECK(g4[0].k == doctest::Approx(pi / 4).epsilon(1e-15));
    CHECK(g4[1].k == doctest::Approx(3 * pi / 4).epsilon(1e-15));

    const auto g2 = k_grid(2);
    REQUIRE(g2.size() == 1);
    CHECK(g2[0].k == doctest::Approx(pi / 2).epsilon(1e-15));
    CHECK(g2[0].delta_k == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("k grid endpoints and ordering for N=500") {
    const auto g = k_grid(500);
    REQUIRE(g.size() == 250);
    CHECK(g.front().k == doctest::Approx(pi / 500).epsilon(1e-14));
    CHECK(g.back().k == doctest::Approx(499 * pi / 500).epsilon(1e-14));
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(g[i].m == static_cast<int>(i) + 1);
        CHECK(g[i].k > 0.0);
        CHECK(g[i].k < pi);
        CHECK(g[i].delta_k > 0.0);
        CHECK(g[i].delta_k <= 1.0);
        if (i > 0) CHECK(g[i].k > g[i - 1].k);
    }
}

TEST_CASE("k grid rejects odd and non-positive lengths") {
    CHECK_THROWS_AS(k_grid(3), InvalidArgument);
    CHECK_THROWS_AS(k_grid(0), InvalidArgument);
    CHECK_THROWS_AS(k_grid(-4), InvalidArgument);
    CHECK_THROWS_AS(make_mode(0, 4), InvalidArgument);
    CHECK_THROWS_AS(make_mode(3, 4), InvalidArgument);
}

TEST_CASE("gap parameter is symmetric under k -> pi - k") {
    const auto g = k_grid(64);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(g[i].delta_k == doctest::Approx(g[g.size() - 1 - i].delta_k).epsilon(1e-14));
    }
}

TEST_CASE("bloch hamiltonian examples") {
    const KMode half = make_mode(1, 2); // k = pi/2
    auto H = bloch_hamiltonian(half, 0.0, {+1, 0.0});
    CHECK(H.hk == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(std::abs(H.hk) < 1e-15);
    CHECK(H.dk == doctest::Approx(1.0));

    H = bloch_hamiltonian(half, 1.0, {+1, 0.01});
    CHECK(H.hk == doctest::Approx(-1.01).epsilon(1e-14));
    CHECK(H.dk == doctest::Approx(1.0));

    H = bloch_hamiltonian(half, 1.0, {-1, 0.01});
    CHECK(H.hk == doctest::Approx(-0.99).epsilon(1e-14));
}

TEST_CASE("gap closes at k = pi, h = -1") {
    KMode edge;
    edge.m = 1;
    edge.N = 2;
    edge.k = pi;
    edge.delta_k = 0.0;
    const auto H = bloch_hamiltonian(edge, -1.0, {+1, 0.0});
    CHECK(std::abs(H.hk) < 1e-15);
    CHECK(H.dk == 0.0);
    CHECK(H.gap() < 1e-15);
    CHECK_THROWS_AS(ground_state(edge, -1.0, {+1, 0.0}), DegenerateHamiltonian);
}

TEST_CASE("eigenvalues match a dense 2x2 solver") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> field(-6.0, 6.0), coupling(0.0, 0.05);
    for (int N : {2, 8, 64, 500}) {
        for (const auto& mode : k_grid(N)) {
            const double h = field(rng);
            const BranchSpec b{(mode.m % 2) ? +1 : -1, coupling(rng)};
            const auto H = bloch_hamiltonian(mode, h, b);
            const Eig2 e = dense_eig(H.hk, H.dk, -H.hk);
            CHECK(e.lo == doctest::Approx(-H.gap()).epsilon(1e-12));
            CHECK(e.hi == doctest::Approx(H.gap()).epsilon(1e-12));
        }
    }
}

TEST_CASE("ground state at k = pi/2, h = 0") {
    const auto g = ground_state(make_mode(1, 2), 0.0, {+1, 0.0});
    CHECK(g.v.real() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(g.u.real() == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(g.v.imag() == 0.0);
    CHECK(g.u.imag() == 0.0);
}

TEST_CASE("ground state overlaps the dense eigenvector") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> field(-8.0, 8.0);
    std::vector<std::pair<KMode, double>> cases{{make_mode(1, 2), -5.0}};
    for (int i = 0; i < 200; ++i) cases.emplace_back(make_mode(1 + i % 32, 64), field(rng));
    for (const auto& [mode, h] : cases) {
        const auto H = bloch_hamiltonian(mode, h, {+1, 0.0});
        const Eig2 e = dense_eig(H.hk, H.dk, -H.hk);
        const auto g = ground_state(mode, h, {+1, 0.0});
        CHECK(g.norm2() == doctest::Approx(1.0).epsilon(1e-14));
        const double fid = std::abs(g.v * e.x + g.u * e.y);
        CHECK(fid == doctest::Approx(1.0).epsilon(1e-12));
        // phase convention: first nonzero component real and positive
        if (std::abs(g.v) > 0.0) {
            CHECK(g.v.real() > 0.0);
            CHECK(g.v.imag() == 0.0);
        } else {
            CHECK(g.u.real() > 0.0);
        }
    }
}

TEST_CASE("ground state approaches a basis vector far from the critical region") {
    const KMode mode = make_mode(3, 8);
    const auto lo = ground_state(mode, -1e6, {+1, 0.0});
    CHECK(std::norm(lo.u) == doctest::Approx(1.0).epsilon(1e-10));
    const auto hi = ground_state(mode, 1e6, {+1, 0.0});
    CHECK(std::norm(hi.v) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("coupling is exactly a field shift") {
    for (const auto& mode : k_grid(16)) {
        for (double h : {-5.0, -1.0, 0.3, 2.0}) {
            for (int sign : {+1, -1}) {
                const auto a = ground_state(mode, h, {sign, 0.01});
                const auto b = ground_state(mode, h + sign * 0.01, {+1, 0.0});
                CHECK(a.v == b.v);
                CHECK(a.u == b.u);
            }
        }
    }
}

TEST_CASE("no degeneracy on grid modes at any field") {
    for (int N : {2, 16, 500}) {
        for (const auto& mode : k_grid(N)) {
            for (double h = -6.0; h <= 6.0; h += 0.25) {
                CHECK_NOTHROW(ground_state(mode, h, {+1, 0.01}));
                CHECK_NOTHROW(ground_state(mode, h, {-1, 0.01}));
            }
            CHECK_NOTHROW(ground_state(mode, -1.0, {+1, 0.0}));
            CHECK_NOTHROW(ground_state(mode, mode.cos_k(), {+1, 0.0}));
        }
    }
}

TEST_CASE("linear ramp field") {
    const RampProtocol ramp(250.0, -5.0, 5.0);
    CHECK(field_at(0.0, ramp) == 0.0);
    CHECK(field_at(250.0, ramp) == 1.0);
    CHECK(field_at(-250.0, ramp) == -1.0);
    CHECK(field_at(ramp.t_i(), ramp) == ramp.h_i);
    CHECK(field_at(ramp.t_f(), ramp) == ramp.h_f);
    const RampProtocol odd(3.7, -4.3, 2.9);
    CHECK(field_at(odd.t_i(), odd) == -4.3);
    CHECK(field_at(odd.t_f(), odd) == 2.9);
}

TEST_CASE("ramp protocol rejects bad parameters") {
    CHECK_THROWS_AS(RampProtocol(0.0, -5.0, 5.0), InvalidArgument);
    CHECK_THROWS_AS(RampProtocol(-1.0, -5.0, 5.0), InvalidArgument);
    CHECK_THROWS_AS(RampProtocol(10.0, 5.0, -5.0), InvalidArgument);
    CHECK_THROWS_AS(RampProtocol(10.0, 1.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(RampProtocol(10.0, -1.0, 1.0, 0.0), InvalidArgument);
}

} // TEST_SUITE
