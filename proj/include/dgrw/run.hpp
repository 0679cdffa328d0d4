#pragma once

#include "dgrw/params.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>

namespace dgrw {

struct TimeGridSpec {
    double start = 0.0;
    double stop = 0.0;
    int points = 0;
    bool log_spacing = false;
};

// One fully-specified invocation. The manifest written next to each run's
// CSV is exactly this structure plus derived values and provenance, so any
// run can be re-executed bit for bit from its manifest alone.
struct RunConfig {
    std::string subcommand;
    ModelParams params;
    std::uint64_t seed = 1;
    std::uint64_t n_traj = 1000;
    TimeGridSpec t_grid;
    int threads = 0;
    std::string out_csv;      // empty: stdout
    std::string out_manifest; // empty: no manifest
    nlohmann::json options;   // subcommand-specific
};

std::vector<double> build_time_grid(const TimeGridSpec& g);

// JSON <-> double that survives inf/nan round trips (non-finite values are
// stored as strings, since JSON has no literal for them).
nlohmann::json json_number(double v);
double number_from_json(const nlohmann::json& j, const char* what);

nlohmann::json params_to_json(const ModelParams& p);
ModelParams params_from_json(const nlohmann::json& j);
nlohmann::json derived_to_json(const DerivedParams& d);

// Executes one run, writing CSV/JSON artifacts. Throws on failure:
// std::invalid_argument / std::domain_error for configuration problems,
// io_error for file problems, std::runtime_error for numerical guards.
void run_command(const RunConfig& cfg);

RunConfig config_from_manifest(const std::string& path);

} // namespace dgrw
