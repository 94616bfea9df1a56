#pragma once

#include "mlb/cdql/agent.hpp"
#include "mlb/metrics.hpp"
#include "mlb/sim.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace mlb {

enum class ActionMode { Permutations, Product };

/// Discrete CIO actions: every ordered selection of `k` distinct values
/// (permutations mode, l!/(l-k)! actions) or every k-tuple (product mode, l^k).
/// Indices enumerate tuples lexicographically by value position.
class ActionSpace {
 public:
  ActionSpace(std::vector<double> cio_values, int k, ActionMode mode = ActionMode::Permutations);

  /// {-9, -6, -3, 0, 3, 6, 9} dB over k cells.
  static ActionSpace standard(int k = 3, ActionMode mode = ActionMode::Permutations);

  std::size_t size() const { return size_; }
  int k() const { return k_; }
  ActionMode mode() const { return mode_; }
  const std::vector<double>& values() const { return values_; }

  std::vector<double> decode(std::size_t index) const;
  std::size_t encode(std::span<const double> cio) const;

 private:
  std::size_t value_position(double v) const;

  std::vector<double> values_;
  int k_;
  ActionMode mode_;
  std::size_t size_;
};

struct RewardConfig {
  double w1 = 1.0;
  double w2 = 1.0;
  double w3 = 1.0;
  double c = -2.0;       // sigmoid bound
  double o = 75.0;       // delay slope, per second
  double pdb_ms = 150.0;
  double a = 20.0;       // utilization slope
  double d_target = 0.6;
  /// CQI 6 scores +1 (falls through to "otherwise") instead of -1.
  bool literal_cqi_bands = false;

  void validate() const;
  /// Target delay F = 2/3 * PDB, in seconds.
  double target_delay_s() const { return 2.0 / 3.0 * pdb_ms / 1000.0; }
};

struct RewardBreakdown {
  double r_delay = 0.0;
  double r_rbu = 0.0;
  double r_cqi = 0.0;
  double total = 0.0;
};

struct UeDelaySample {
  bool connected = true;
  double d_avg_s = 0.0;
};

/// [attachment ratios | per-cell RBU].
Vector build_state(const KpiWindow& kpi);

/// Sigmoid 1 + c / (1 + exp(-slope * (x - centre))).
double bounded_sigmoid(double x, double c, double slope, double centre);

/// Mean per-UE term: -1 when disconnected, sigmoid of the mean delay otherwise.
double reward_delay(std::span<const UeDelaySample> per_ue, const RewardConfig& cfg);

/// Sigmoid of the most loaded cell's utilization.
double reward_rbu(const Vector& rbu, const RewardConfig& cfg);

/// Mean per-UE CQI band: -1 for CQI <= 6, 0 for 7..9, +1 for >= 10.
double cqi_band(int cqi, const RewardConfig& cfg);
double reward_cqi(std::span<const int> cqis, const RewardConfig& cfg);

RewardBreakdown compute_reward(const KpiWindow& kpi, const RewardConfig& cfg);

struct StepResult {
  Vector state;
  RewardBreakdown reward;
  KpiWindow kpi;
  std::vector<double> cio_db;
};

/// Couples the simulator with the state/action/reward definitions.
class BalancerEnv {
 public:
  BalancerEnv(SimConfig sim, RewardConfig reward, ActionSpace actions, std::uint64_t seed,
              int step_ms = 1000);

  /// Restarts the simulator for `episode`; the initial state carries the
  /// attachment ratios and zero utilization.
  Vector reset(std::uint64_t episode);

  /// Applies the decoded CIO vector and advances one agent step.
  StepResult step(std::size_t action);

  /// Advances one agent step leaving the offsets untouched (baselines).
  StepResult step_passive();

  int state_size() const { return 2 * sim_.config().n_cells; }
  const ActionSpace& actions() const { return actions_; }
  const RewardConfig& reward_config() const { return reward_; }
  Simulation& sim() { return sim_; }
  const Simulation& sim() const { return sim_; }

 private:
  StepResult advance();

  Simulation sim_;
  RewardConfig reward_;
  ActionSpace actions_;
  int step_ms_;
};

struct EpisodeLog {
  int episode = 0;
  double cumulative_reward = 0.0;
  double epsilon = 0.0;
  double mean_r_delay = 0.0;
  double mean_r_rbu = 0.0;
  double mean_r_cqi = 0.0;
};

using StepObserver = std::function<void(int episode, int step, const StepResult&)>;

/// Outer learning loop: act, step, store, one update, decay epsilon.
std::vector<EpisodeLog> run_training(BalancerEnv& env, cdql::CdqlAgent& agent, int episodes,
                                     int steps, const StepObserver& observer = {});

/// An action chooser for evaluation; nullopt leaves the offsets unchanged.
using Policy = std::function<std::optional<std::size_t>(const Vector& state)>;

EpisodeLog run_episode(BalancerEnv& env, const Policy& policy, int episode, int steps,
                       const StepObserver& observer = {});

}  // namespace mlb
