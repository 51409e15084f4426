// Internal helpers shared by the runner sources.

#pragma once

#include "cqd/runner.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace cqd::runner::detail {

// %.17g, with inf/nan spelled out.
std::string fmt(double x);

std::string iso_timestamp();

// Files are written into a private staging directory next to the target and moved into
// place by commit(). If commit() is never reached the staging directory is removed.
class OutputStage {
public:
    explicit OutputStage(const std::filesystem::path& target);
    ~OutputStage();
    OutputStage(const OutputStage&) = delete;
    OutputStage& operator=(const OutputStage&) = delete;

    std::filesystem::path path(const std::string& name);
    void write(const std::string& name, const std::string& content);
    // Writes manifest.json (adding the checksums of all staged files) and moves everything
    // into the target directory. Returns the final paths.
    std::vector<std::filesystem::path> commit(json manifest);

private:
    std::filesystem::path target_;
    std::filesystem::path staging_;
    std::vector<std::string> files_;
    bool committed_{false};
};

json manifest_base(const ExperimentConfig& cfg, const std::string& command, const std::string& started);

std::string series_csv(const PointResult& r);
std::string modes_csv(const DecoherenceSeries& s, const std::vector<double>& snapshot_h);

// Resolved document with `path` replaced by `value`.
json with_value(const json& doc, const std::string& path, const json& value);

Route effective_route(const ExperimentConfig& cfg, const NoiseModel& noise);
SimulationOptions simulation_options(const ExperimentConfig& cfg);

} // namespace cqd::runner::detail
