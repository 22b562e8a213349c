#pragma once

// Scenario files (JSON) and the built-in case-study configuration.
//
//   {
//     "L_km": 10, "n": 5, "delta_s": 30, "T": 20,
//     "gamma": [40, 60, 80, 100, 120], "pi": 1,
//     "epsilon": 0.985, "beta": 0.95, "eta_bar": 0,
//     "segments": [ {"f_bar": 31000, "rho_bar": 1050, "u_bar": 140,
//                    "f_U": 31000, "rho_U": 1050}, ... ],
//     "generator": {"seed": 1, "N": 3,
//                   "rho0_lo": 260, "rho0_hi": 260,
//                   "omega_lo": [20000, -1500, ...], "omega_hi": [...]}
//   }
//
// f_U and rho_U default to f_bar and rho_bar; eta_bar <= 0 or absent picks
// the default. Generator bounds accept a scalar or one value per edge.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "vsl/network_model.hpp"
#include "vsl/scenario_sampling.hpp"

namespace vsl {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GeneratorConfig {
  GeneratorSpec spec;
  std::uint64_t seed = 1;
  int N = 3;
};

struct RunConfig {
  ScenarioParams params;
  std::optional<GeneratorConfig> generator;
};

// Throws ConfigError naming the offending key path.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

// Builds the scenario; model validation failures become ConfigError.
HighwayScenario make_scenario(const RunConfig& config);

// Five 2 km segments, 30 s slots over 10 minutes, an incident capping the
// capacity of edge 4 at 2.7e4 veh/h, and the case-study sample generator.
RunConfig case_study_config();

std::string to_json(const RunConfig& config);

}  // namespace vsl
