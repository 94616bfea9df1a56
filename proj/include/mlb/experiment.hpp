#pragma once

#include "mlb/cdql/agent.hpp"
#include "mlb/env.hpp"
#include "mlb/metrics.hpp"
#include "mlb/sim.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mlb {

enum class Algorithm { Cdql, A3, Rebuha };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);

struct ExperimentPlan {
  std::vector<Algorithm> algorithms{Algorithm::Cdql};
  std::vector<int> ue_counts{30, 35, 40, 45, 50};
  double mobility_fraction = 0.0;
  double speed_mps = 20.0;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
  int episodes = 150;
  int steps_per_episode = 50;
  std::string output_dir = "results";
  int jobs = 1;
  bool save_agent = false;

  std::size_t replications() const { return seeds.size(); }
  void validate() const;
  /// 3 seeds, 40 episodes, 30 UEs.
  void apply_quick_profile();
};

struct ExperimentConfig {
  SimConfig sim;
  cdql::AgentConfig agent;
  RewardConfig reward;
  std::vector<double> cio_values{-9, -6, -3, 0, 3, 6, 9};
  ActionMode action_mode = ActionMode::Permutations;
  int step_ms = 1000;
  ExperimentPlan plan;

  void validate() const;
  ActionSpace action_space() const { return ActionSpace(cio_values, sim.n_cells, action_mode); }
};

/// Parses a JSON document with optional sections radio, handover, sim,
/// traffic, reward, agent, actions and plan. Omitted keys keep their
/// defaults; unknown keys and invalid values raise InvalidInput naming the key.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Fully resolved configuration as JSON (the run manifest body).
std::string config_to_json(const ExperimentConfig& cfg);

/// Per-scenario configuration: algorithm, UE count and seed applied.
struct Scenario {
  Algorithm algorithm = Algorithm::Cdql;
  int n_ues = 30;
  double mobility_fraction = 0.0;
  std::uint64_t seed = 1;
  std::string dir_name() const;
};

/// Aggregate of the greedy evaluation episode.
struct FinalKpi {
  double throughput_bps = 0.0;
  double mean_ue_throughput_bps = 0.0;
  double mean_delay_ms = 0.0;
  double jitter_ms = 0.0;
  double plr = 0.0;
  double reward = 0.0;
  Vector rbu;
  Vector attachment;
};

struct ScenarioResult {
  Scenario scenario;
  std::vector<EpisodeLog> rewards;  // cdql only
  FinalKpi final_kpi;
};

/// Trains (cdql) or simulates (baselines) for episodes x steps, then runs
/// one evaluation episode with a greedy policy / the plain baseline.
ScenarioResult run_scenario(const ExperimentConfig& cfg, const Scenario& sc,
                            const std::filesystem::path& scenario_dir = {});

/// Runs every (algorithm, ue_count, seed) combination, writing one
/// directory per scenario plus summary.csv under plan.output_dir.
std::vector<ScenarioResult> run_experiment(const ExperimentConfig& cfg);

struct SummaryRow {
  std::string algorithm;
  int n_ues = 0;
  double mobility = 0.0;
  ConfidenceInterval throughput_bps, mean_delay_ms, jitter_ms, plr;
  bool single_seed = false;
  // Relative improvement of cdql over a baseline in percent (positive is
  // better: higher throughput, lower delay/jitter/PLR). Set on cdql rows.
  std::optional<double> gain_throughput_vs_a3, gain_delay_vs_a3, gain_jitter_vs_a3, gain_plr_vs_a3;
  std::optional<double> gain_throughput_vs_rebuha, gain_delay_vs_rebuha, gain_jitter_vs_rebuha,
      gain_plr_vs_rebuha;
};

struct SummaryTable {
  std::vector<SummaryRow> rows;
  std::vector<std::string> warnings;
};

/// Percentage improvement; `higher_is_better` selects the direction.
double relative_gain_pct(double candidate, double baseline, bool higher_is_better);

/// Reads every scenario directory under `result_dir` and aggregates the
/// final rows with 90% Student-t intervals across seeds.
SummaryTable summarize(const std::filesystem::path& result_dir);
void write_summary_csv(const SummaryTable& table, const std::filesystem::path& path);

// CSV headers, fixed column order.
std::string kpi_csv_header(int n_cells);
std::string rewards_csv_header();
std::string summary_csv_header();

}  // namespace mlb
