#include "cqd/special.hpp"

#include "cqd/errors.hpp"
#include "cqd/integrator.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace cqd::special {

namespace {

// Lanczos approximation, g = 607/128, 15 terms (relative error ~1e-15 for Re z >= 1/2).
constexpr double kLanczosG = 607.0 / 128.0;
constexpr std::array<double, 15> kLanczos = {
    0.99999999999999709182,     57.156235665862923517,     -59.597960355475491248,
    14.136097974741747174,      -0.49191381609762019978,   0.33994649984811888699e-4,
    0.46523628927048575665e-4,  -0.98374475304879564677e-4, 0.15808870322491248884e-3,
    -0.21026444172410488319e-3, 0.21743961811521264320e-3, -0.16431810653676389022e-3,
    0.84418223983852743293e-4,  -0.26190838401581408670e-4, 0.36899182659531622704e-5};

bool is_pole(cplx z) {
    return z.imag() == 0.0 && z.real() <= 0.0 && std::floor(z.real()) == z.real();
}

cplx lgamma_right(cplx z) {
    // Re z >= 1/2
    z -= 1.0;
    cplx x = kLanczos[0];
    for (std::size_t i = 1; i < kLanczos.size(); ++i) x += kLanczos[i] / (z + static_cast<double>(i));
    const cplx t = z + kLanczosG + 0.5;
    return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

} // namespace

cplx lgamma(cplx z) {
    if (is_pole(z)) {
        std::ostringstream os;
        os << "lgamma: pole at z = " << z;
        throw DomainError(os.str());
    }
    cplx shift = 0.0;
    while (z.real() < 0.5) {
        shift -= std::log(z);
        z += 1.0;
    }
    return lgamma_right(z) + shift;
}

cplx rgamma(cplx z) {
    if (is_pole(z)) return 0.0;
    return std::exp(-lgamma(z));
}

PcfResult pcf(cplx nu, cplx z, double rel_tol) {
    const double ln2 = std::numbers::ln2;
    const double half_ln_pi = 0.5 * std::log(std::numbers::pi);

    // D(0) = 2^(nu/2) sqrt(pi) / Gamma((1-nu)/2),  D'(0) = -2^((nu+1)/2) sqrt(pi) / Gamma(-nu/2)
    const cplx a0 = 0.5 * (1.0 - nu);
    const cplx a1 = -0.5 * nu;
    const bool zero_value = is_pole(a0);
    const bool zero_slope = is_pole(a1);
    const cplx log_v0 = zero_value ? cplx(0.0) : 0.5 * nu * ln2 + half_ln_pi - lgamma(a0);
    const cplx log_d0 = zero_slope ? cplx(0.0) : 0.5 * (nu + 1.0) * ln2 + half_ln_pi - lgamma(a1);

    double scale = -std::numeric_limits<double>::infinity();
    if (!zero_value) scale = std::max(scale, log_v0.real());
    if (!zero_slope) scale = std::max(scale, log_d0.real());
    if (!std::isfinite(scale)) scale = 0.0;

    PcfResult res;
    res.log_scale = scale;
    res.value = zero_value ? cplx(0.0) : std::exp(log_v0 - scale);
    res.derivative = zero_slope ? cplx(0.0) : -std::exp(log_d0 - scale);

    const double r = std::abs(z);
    if (r == 0.0) return res;

    const cplx dir = z / r;
    const cplx c = nu + 0.5;
    // w(s) = D(s dir), state (Re w, Im w, Re w', Im w'), s in [0, r]
    auto rhs = [dir, c](const std::array<double, 4>& x, std::array<double, 4>& dx, double s) {
        const cplx w(x[0], x[1]);
        const cplx wp(x[2], x[3]);
        const cplx zz = s * dir;
        const cplx dw = dir * wp;
        const cplx dwp = dir * (0.25 * zz * zz - c) * w;
        dx = {dw.real(), dw.imag(), dwp.real(), dwp.imag()};
    };
    IntegratorConfig cfg;
    cfg.rel_tol = rel_tol;
    cfg.abs_tol = rel_tol * 1e-3;
    cfg.max_step = std::max(r / 8.0, 1e-3);
    cfg.min_step = 1e-14 * std::max(1.0, r);
    cfg.grid = {0.0, r};
    const std::array<double, 4> x0 = {res.value.real(), res.value.imag(), res.derivative.real(),
                                      res.derivative.imag()};
    const auto path = integrate_adaptive(rhs, x0, cfg);
    const auto& xf = path.back();
    res.value = cplx(xf[0], xf[1]);
    res.derivative = cplx(xf[2], xf[3]);
    return res;
}

} // namespace cqd::special
