#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "riskdp/csv.hpp"
#include "riskdp/mdp.hpp"
#include "riskdp/utility.hpp"

namespace riskdp {

enum class Algorithm { kSolve, kVigu, kUcb, kSweep };

std::string to_string(Algorithm algorithm);
Algorithm parse_algorithm(const std::string& name);

/// Fully validated experiment description.
///
/// Config JSON (unknown fields anywhere are rejected):
///   {
///     "algorithm": "solve" | "vigu" | "ucb" | "sweep",
///     "mdp": {"kind": "chain"|"random"|"safe_risky_bandit", "seed", "H", ...}
///            or {"S", "A", "H", "trans": [h][s][a][s'], "rewards": [h][s][a]},
///     "utility": {"kind": "exponential", "beta": 2.0},
///     "grid_m": 16 | "auto",
///     "n": 1000, "episodes": 5000, "p": 0.1, "seeds": [0, 1],
///     "sweep": {"algorithm": "vigu" | "ucb", "values": [250, 1000]},
///     "fine_grid_multiplier": 64, "mc_trials": 100000, "mc_every": 0,
///     "initial_distribution": [0.5, 0.5], "timing": false,
///     "out": "result.csv", "values_out": "values.csv"
///   }
struct ExperimentConfig {
  Algorithm algorithm = Algorithm::kSolve;
  TabularRSMDP mdp;
  UtilitySpec utility;
  std::optional<int> grid_m;  // nullopt: "auto" (recommended resolution)
  std::int64_t n = 1000;
  std::int64_t episodes = 1000;
  double p = 0.1;
  std::vector<std::uint64_t> seeds;
  Algorithm sweep_algorithm = Algorithm::kVigu;
  std::vector<std::int64_t> sweep_values;
  int fine_multiplier = 64;
  std::int64_t mc_trials = 100000;
  std::int64_t mc_every = 0;
  std::vector<double> initial_distribution;
  bool timing = false;
  std::string out;
  std::string values_out;

  nlohmann::json source;  // effective JSON after overrides
  std::string hash;       // FNV-1a 64 of source.dump(), hex
};

/// Reads and parses a JSON file. Parse failures throw ConfigError carrying
/// the line and column.
nlohmann::json read_config_json(const std::string& path);

/// Validates a config document. Throws ConfigError naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& doc);

ExperimentConfig load_config(const std::string& path);

/// Parsers for the embedded specs; shared by the Python bindings.
UtilitySpec parse_utility_spec(const nlohmann::json& doc);
TabularRSMDP parse_mdp(const nlohmann::json& doc);
RewardDist parse_reward_dist(const nlohmann::json& doc);

std::string config_hash(const nlohmann::json& doc);

/// Grid resolution for `episodes` (used when grid_m is "auto").
int resolve_grid_m(const ExperimentConfig& cfg, std::int64_t episodes);

using ResultRow = std::vector<CsvCell>;

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<ResultRow> rows;
};

/// Runs every (seed, parameter) cell on a bounded worker pool (RISKDP_THREADS
/// caps its size) and returns rows ordered by (seed, parameter) regardless of
/// completion order.
ResultTable run_experiment(const ExperimentConfig& cfg);

/// RFC-4180 CSV with a header row, 17 significant digits for doubles and LF
/// line endings.
void write_csv(const ResultTable& table, const std::string& path);
void write_csv(const ResultTable& table, std::ostream& os);

/// Worker count from RISKDP_THREADS, defaulting to the hardware concurrency.
int worker_count();

}  // namespace riskdp
