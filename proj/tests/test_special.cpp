#include "doctest.h"

#include "cqd/errors.hpp"
#include "cqd/special.hpp"

#include <cmath>
#include <numbers>

using namespace cqd;
using cqd::special::cplx;
using std::numbers::pi;

namespace {

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

} // namespace

TEST_SUITE("special") {

TEST_CASE("log gamma agrees with the real library function") {
    for (double x : {0.1, 0.5, 1.0, 1.5, 2.0, 3.3, 7.0, 20.5, 100.0}) {
        CHECK(special::lgamma(cplx(x, 0.0)).real() == doctest::Approx(std::lgamma(x)).epsilon(1e-13));
    }
    // negative non-integers: |Gamma| from the real library, imaginary part a multiple of pi
    for (double x : {-0.5, -1.5, -2.7}) {
        const cplx g = special::lgamma(cplx(x, 0.0));
        CHECK(g.real() == doctest::Approx(std::lgamma(x)).epsilon(1e-12));
        const double m = g.imag() / pi;
        CHECK(std::abs(m - std::round(m)) < 1e-10);
    }
}

TEST_CASE("gamma special values") {
    CHECK(std::abs(std::exp(special::lgamma(cplx(0.5))) - std::sqrt(pi)) < 1e-13);
    CHECK(std::abs(std::exp(special::lgamma(cplx(1.0)))) == doctest::Approx(1.0).epsilon(1e-14));
    // |Gamma(i y)|^2 = pi / (y sinh(pi y))
    for (double y : {0.3, 1.0, 4.0}) {
        const double lhs = std::exp(2.0 * special::lgamma(cplx(0.0, y)).real());
        CHECK(lhs == doctest::Approx(pi / (y * std::sinh(pi * y))).epsilon(1e-12));
    }
}

TEST_CASE("gamma recurrence and reflection for complex argument") {
    for (cplx z : {cplx(0.3, 0.7), cplx(-2.4, 1.1), cplx(5.0, -3.0), cplx(0.5, 12.0)}) {
        const cplx up = std::exp(special::lgamma(z + 1.0) - special::lgamma(z));
        CHECK(rel(up, z) < 1e-12);
        const cplx refl = std::exp(special::lgamma(z) + special::lgamma(1.0 - z));
        CHECK(rel(refl, pi / std::sin(pi * z)) < 1e-11);
    }
}

TEST_CASE("gamma poles") {
    for (double n : {0.0, -1.0, -2.0, -7.0}) {
        CHECK_THROWS_AS(special::lgamma(cplx(n, 0.0)), DomainError);
        CHECK(special::rgamma(cplx(n, 0.0)) == cplx(0.0));
    }
    CHECK(std::abs(special::rgamma(cplx(3.0)) - 0.5) < 1e-14);
}

TEST_CASE("parabolic cylinder functions of integer order") {
    for (cplx z : {cplx(0.0), cplx(0.7), cplx(-1.3), cplx(2.0, -2.0), cplx(1.5, 0.5)}) {
        const cplx g = std::exp(-z * z / 4.0);
        CHECK(rel(special::pcf(cplx(0.0), z).scaled_value(), g) < 1e-11);
        CHECK(std::abs(special::pcf(cplx(0.0), z).scaled_derivative() + z / 2.0 * g) < 1e-11);
        if (std::abs(z) > 0.0) CHECK(rel(special::pcf(cplx(1.0), z).scaled_value(), z * g) < 1e-11);
        CHECK(rel(special::pcf(cplx(2.0), z).scaled_value(), (z * z - 1.0) * g) < 1e-11);
    }
}

TEST_CASE("order -1 against the complementary error function") {
    for (double x : {-1.0, 0.0, 0.8, 2.5}) {
        const double exact = std::exp(x * x / 4.0) * std::sqrt(pi / 2.0) * std::erfc(x / std::sqrt(2.0));
        CHECK(special::pcf(cplx(-1.0), cplx(x)).scaled_value().real() == doctest::Approx(exact).epsilon(1e-11));
        CHECK(std::abs(special::pcf(cplx(-1.0), cplx(x)).scaled_value().imag()) < 1e-12);
    }
}

TEST_CASE("value at the origin and the three-term recurrence for complex order") {
    for (cplx nu : {cplx(0.0, 0.5), cplx(0.0, 3.0), cplx(-0.3, 1.7)}) {
        const cplx d0 = std::pow(cplx(2.0), nu / 2.0) * std::sqrt(pi) * special::rgamma((1.0 - nu) / 2.0);
        CHECK(rel(special::pcf(nu, cplx(0.0)).scaled_value(), d0) < 1e-12);
        // D_{nu+1} - z D_nu + nu D_{nu-1} = 0
        for (cplx z : {cplx(0.9, -0.9), cplx(-2.1, 2.1), cplx(3.0, 0.4)}) {
            const cplx a = special::pcf(nu + 1.0, z).scaled_value();
            const cplx b = special::pcf(nu, z).scaled_value();
            const cplx c = special::pcf(nu - 1.0, z).scaled_value();
            const double scale = std::abs(a) + std::abs(z * b) + std::abs(nu * c);
            CHECK(std::abs(a - z * b + nu * c) / scale < 1e-10);
        }
    }
}

} // TEST_SUITE
