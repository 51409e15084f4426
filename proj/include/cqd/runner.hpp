// runner.hpp: configuration-driven experiments behind the cqd command line
//
// A configuration is one JSON document. Every key has a default (default_config_json),
// user documents are merged over the defaults, unknown keys are rejected, and
// `--set path=value` overrides are applied last. The resolved document is echoed into
// manifest.json and can be fed back verbatim to reproduce a run.

#pragma once

#include "cqd/decoherence.hpp"
#include "cqd/observables.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cqd::runner {

using json = nlohmann::json;

inline constexpr const char* tool_version = "1.0.0";

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_numeric = 3, exit_validation = 4 };

// Malformed or out-of-range configuration; the message names the offending field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A validate run whose checks did not all pass.
class ValidationFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Abscissa { N, Xi, Xi2, TauN, NXi2, NXi2OverTauN };

std::string to_string(Abscissa a);
Abscissa abscissa_from_string(const std::string& s);

// Quantity collected per sweep point for a fit.
enum class Ordinate { DCriticalMinus, DCriticalPlus, DMax, NonMarkov };

std::string to_string(Ordinate o);
Ordinate ordinate_from_string(const std::string& s);

struct FitSpec {
    std::string name;
    Abscissa x{Abscissa::NXi2};
    Ordinate y{Ordinate::DCriticalPlus};
    FitModel model{FitModel::Exponential};
    int peak{0}; // DMax: which revival (0 = first in the window)
    std::optional<double> tau_n_min;
    std::optional<double> tau_n_max;
};

struct SweepAxis {
    std::string path; // dotted config path, e.g. "noise.xi"
    std::vector<json> values;
};

struct ExperimentConfig {
    std::string experiment{"noiseless"}; // noiseless | white | ou | sweep | validate | nonmarkov
    ModelParams model{};
    NoiseModel noise{};
    Route route{Route::CrossOperator};
    EnsembleOptions ensemble{};
    IntegratorConfig integrator{}; // grid built from grid_points
    std::size_t grid_points{2000};
    MasterOptions master{};

    double revival_h_lo{-1.0};
    double revival_h_hi{1.0};
    int peak_window{5};
    std::vector<double> snapshot_h{-1.0, 0.0, 1.0};
    bool compute_nonmarkov{false};
    bool compare_factorized{true};
    bool convergence_check{false};
    double convergence_h_i{-8.0};

    std::vector<SweepAxis> axes;
    std::size_t budget{64};
    std::vector<FitSpec> fits; // empty: chosen from the axes

    std::vector<double> nonmarkov_white_xi{0.001, 0.002, 0.003, 0.005};
    std::vector<double> nonmarkov_tau_n{25.0, 50.0, 100.0, 200.0};
    double nonmarkov_ou_xi{0.003};

    int validate_N{8};
    std::size_t validate_M{4000};
    std::string inject_fault; // "" or "gamma_feedback_sign"

    unsigned threads{0};
    std::string output_dir{"cqd-out"};

    json source; // resolved document this config was parsed from
};

json default_config_json();

// Recursively merges `user` over `base`; keys absent from `base` are errors.
json merge_config(const json& base, const json& user);

// Applies one "dotted.path=value" override; value is parsed as JSON, else kept as a string.
void apply_override(json& doc, const std::string& assignment);

// Parses text, reporting the line and column of syntax errors.
json parse_config_text(const std::string& text, const std::string& origin);

// Typed view with field-level validation. Throws ConfigError.
ExperimentConfig parse_config(const json& resolved);

// Convenience: defaults <- file (optional) <- overrides <- seed/threads/output flags.
ExperimentConfig load_config(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides,
                             const std::optional<std::uint64_t>& seed, const std::optional<unsigned>& threads,
                             const std::optional<std::string>& output_dir);

// Simulation of one parameter point as configured (noise kind decided by the experiment).
struct PointResult {
    DecoherenceSeries series;
    std::optional<DecoherenceSeries> factorized; // companion columns on noisy cross-operator runs
    std::optional<double> convergence_max_abs_dD;
    std::vector<std::string> warnings;
};

NoiseModel effective_noise(const ExperimentConfig& cfg);
PointResult simulate_point(const ExperimentConfig& cfg);

struct ValidationCheck {
    std::string name;
    double measured{0.0};
    double threshold{0.0};
    bool passed{false};
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    bool all_passed() const;
};

ValidationReport run_validation(const ExperimentConfig& cfg);

// White-limit convergence check on its own, exposed for the mutation test.
ValidationCheck white_limit_check(const ExperimentConfig& cfg, const MasterOptions& master);

// Entry points used by the command line. Each writes its files into cfg.output_dir and
// returns the list of files written; on any exception nothing is left behind.
std::vector<std::filesystem::path> command_run(const ExperimentConfig& cfg);
std::vector<std::filesystem::path> command_sweep(const ExperimentConfig& cfg);
std::vector<std::filesystem::path> command_validate(const ExperimentConfig& cfg, ValidationReport& report);
std::vector<std::filesystem::path> command_nonmarkov(const ExperimentConfig& cfg);

// Number of runs a sweep would perform.
std::size_t sweep_run_count(const ExperimentConfig& cfg);

std::string sha256_file(const std::filesystem::path& p);

// Maps an exception thrown by a command to the process exit code.
int exit_code_for(const std::exception& e);

} // namespace cqd::runner
