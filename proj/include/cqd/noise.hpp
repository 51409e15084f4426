// noise.hpp: classical field noise S(t) and deterministic seeding

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cqd {

enum class NoiseKind { None, White, OU };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& s);

// <S(t)S(t')> = xi^2 delta(t-t')                          (White)
// <S(t)S(t')> = xi^2 / (2 tau_n) exp(-|t-t'| / tau_n)     (OU)
struct NoiseModel {
    NoiseKind kind{NoiseKind::None};
    double xi{0.0};
    double tau_n{0.0};

    static NoiseModel none() { return {}; }
    static NoiseModel white(double xi);
    static NoiseModel ou(double xi, double tau_n);

    void validate() const;
    double stationary_variance() const; // OU only
    double autocorrelation(double lag) const; // OU only
    bool silent() const noexcept { return kind == NoiseKind::None || xi == 0.0; }
};

// splitmix64 finalizer chained over the work-item coordinates; order-independent
// streams for (master seed, mode, trajectory, branch).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t mode_index, std::uint64_t trajectory,
                          std::uint64_t branch = 0) noexcept;

// Exact OU update on a uniform grid: S_{n+1} = S_n e^{-dt/tau} + sigma_step N(0,1),
// S_0 drawn from the stationary law.
std::vector<double> sample_ou_path(const NoiseModel& noise, std::span<const double> grid, std::uint64_t seed);

// Piecewise-constant white noise: n values, each N(0, xi^2 / dt).
std::vector<double> sample_white_path(double xi, double dt, std::size_t n, std::uint64_t seed);

} // namespace cqd
