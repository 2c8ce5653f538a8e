#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ted {

inline constexpr const char* kToolVersion = "0.1.0";

struct Scenario {
    std::string name;
    nlohmann::json config;
};

// Parses and structurally validates a scenario file; throws ConfigError with
// the offending field path.
Scenario load_scenario_file(const std::string& path);
Scenario load_scenario_json(const nlohmann::json& j);

// Shipped scenarios, resolvable by run() through their names.
Scenario builtin_scenario(const std::string& name);
std::vector<std::pair<std::string, std::string>> list_scenarios();

struct RunOptions {
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

// Executes the requested pipeline, writes report.json and the CSV tables
// into out_dir. Returns the process exit code: 0 pass, 2 numeric failure
// (DetectionFailure / NoGap / NoConvergence / failed certificate), 1 input
// error.
int run_scenario(const Scenario& scenario, const RunOptions& opt);

}  // namespace ted
