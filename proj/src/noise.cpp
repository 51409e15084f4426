#include "cqd/noise.hpp"

#include "cqd/errors.hpp"

#include <cmath>
#include <random>

namespace cqd {

std::string to_string(NoiseKind kind) {
    switch (kind) {
    case NoiseKind::None: return "none";
    case NoiseKind::White: return "white";
    case NoiseKind::OU: return "ou";
    }
    return "none";
}

NoiseKind noise_kind_from_string(const std::string& s) {
    if (s == "none") return NoiseKind::None;
    if (s == "white") return NoiseKind::White;
    if (s == "ou") return NoiseKind::OU;
    throw InvalidArgument("unknown noise kind '" + s + "' (expected none, white or ou)");
}

NoiseModel NoiseModel::white(double xi) {
    NoiseModel n{NoiseKind::White, xi, 0.0};
    n.validate();
    return n;
}

NoiseModel NoiseModel::ou(double xi, double tau_n) {
    NoiseModel n{NoiseKind::OU, xi, tau_n};
    n.validate();
    return n;
}

void NoiseModel::validate() const {
    if (!(xi >= 0.0) || !std::isfinite(xi)) throw InvalidArgument("noise: xi must be finite and >= 0");
    if (kind == NoiseKind::OU && (!(tau_n > 0.0) || !std::isfinite(tau_n))) {
        throw InvalidArgument("noise: OU correlation time tau_n must be positive");
    }
}

double NoiseModel::stationary_variance() const {
    if (kind != NoiseKind::OU) throw InvalidArgument("stationary_variance: OU noise only");
    return xi * xi / (2.0 * tau_n);
}

double NoiseModel::autocorrelation(double lag) const {
    return stationary_variance() * std::exp(-std::abs(lag) / tau_n);
}

namespace {

constexpr std::uint64_t splitmix(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t mode_index, std::uint64_t trajectory,
                          std::uint64_t branch) noexcept {
    std::uint64_t h = splitmix(master);
    h = splitmix(h ^ splitmix(mode_index + 0x1000));
    h = splitmix(h ^ splitmix(trajectory + 0x2000000));
    h = splitmix(h ^ splitmix(branch + 0x30000000000ULL));
    return h;
}

std::vector<double> sample_ou_path(const NoiseModel& noise, std::span<const double> grid, std::uint64_t seed) {
    if (noise.kind != NoiseKind::OU) throw InvalidArgument("sample_ou_path: OU noise model required");
    noise.validate();
    std::vector<double> path(grid.size(), 0.0);
    if (grid.empty()) return path;
    if (grid.size() > 1) {
        const double dt = grid[1] - grid[0];
        if (!(dt > 0.0)) throw InvalidArgument("sample_ou_path: grid spacing must be positive");
        for (std::size_t i = 2; i < grid.size(); ++i) {
            if (std::abs((grid[i] - grid[i - 1]) - dt) > 1e-9 * std::max(1.0, std::abs(dt))) {
                throw InvalidArgument("sample_ou_path: grid is not uniform");
            }
        }
    }
    if (noise.xi == 0.0) return path;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double var = noise.stationary_variance();
    path[0] = std::sqrt(var) * normal(rng);
    if (grid.size() == 1) return path;
    const double dt = grid[1] - grid[0];
    const double decay = std::exp(-dt / noise.tau_n);
    const double sigma_step = std::sqrt(var * (1.0 - decay * decay));
    for (std::size_t i = 1; i < path.size(); ++i) {
        path[i] = path[i - 1] * decay + sigma_step * normal(rng);
    }
    return path;
}

std::vector<double> sample_white_path(double xi, double dt, std::size_t n, std::uint64_t seed) {
    if (!(dt > 0.0)) throw InvalidArgument("sample_white_path: dt must be positive");
    if (!(xi >= 0.0)) throw InvalidArgument("sample_white_path: xi must be >= 0");
    std::vector<double> path(n, 0.0);
    if (xi == 0.0) return path;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, xi / std::sqrt(dt));
    for (auto& s : path) s = normal(rng);
    return path;
}

} // namespace cqd
