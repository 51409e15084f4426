// mat2.hpp: minimal 2x2 complex matrix value type

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>

namespace cqd {

struct Mat2 {
    using cplx = std::complex<double>;
    cplx a11{0.0}, a12{0.0}, a21{0.0}, a22{0.0};

    cplx trace() const noexcept { return a11 + a22; }
    Mat2 adjoint() const noexcept { return {std::conj(a11), std::conj(a21), std::conj(a12), std::conj(a22)}; }

    friend Mat2 operator-(const Mat2& x, const Mat2& y) noexcept {
        return {x.a11 - y.a11, x.a12 - y.a12, x.a21 - y.a21, x.a22 - y.a22};
    }
    friend Mat2 operator*(const Mat2& x, const Mat2& y) noexcept {
        return {x.a11 * y.a11 + x.a12 * y.a21, x.a11 * y.a12 + x.a12 * y.a22,
                x.a21 * y.a11 + x.a22 * y.a21, x.a21 * y.a12 + x.a22 * y.a22};
    }

    double max_abs() const noexcept {
        return std::max({std::abs(a11), std::abs(a12), std::abs(a21), std::abs(a22)});
    }
    // Largest singular value.
    double spectral_norm() const noexcept {
        const double f = std::norm(a11) + std::norm(a12) + std::norm(a21) + std::norm(a22);
        const double det = std::abs(a11 * a22 - a12 * a21);
        const double disc = std::sqrt(std::max(0.0, f * f - 4.0 * det * det));
        return std::sqrt(0.5 * (f + disc));
    }
};

// Eigenvalues of a Hermitian 2x2 matrix, ascending.
inline std::pair<double, double> hermitian_eigenvalues(const Mat2& m) noexcept {
    const double mean = 0.5 * (m.a11.real() + m.a22.real());
    const double half = 0.5 * (m.a11.real() - m.a22.real());
    const double r = std::hypot(half, std::abs(m.a12));
    return {mean - r, mean + r};
}

} // namespace cqd
