#pragma once

#include "mlb/cdql/mlp.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace mlb::cdql {

struct AgentConfig {
  double gamma = 0.95;
  double epsilon = 1.0;
  double epsilon_min = 0.001;
  double epsilon_decay = 0.995;
  double tau = 0.005;
  double lr = 1e-3;
  int batch = 32;
  double huber_delta = 1.0;
  std::vector<int> hidden{64, 64};
  std::size_t buffer_capacity = 10000;
  /// Exploit when epsilon >= x ~ U(0,1), as Algorithm-style pseudocode
  /// literally reads. Off: explore with probability epsilon.
  bool literal_epsilon = false;

  void validate() const;
};

struct Transition {
  Vector state;
  int action = 0;
  double reward = 0.0;
  Vector next_state;
};

/// Fixed-capacity ring; once full, each insert overwrites the oldest entry.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 10000);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t cursor() const { return cursor_; }
  const Transition& at(std::size_t slot) const { return items_.at(slot); }

  /// Oldest to newest.
  std::vector<Transition> ordered() const;

  /// Uniform sampling with replacement.
  std::vector<const Transition*> sample(std::size_t n, Rng& rng) const;

  /// Restores a ring exactly (slots and cursor), e.g. from a checkpoint.
  void restore(std::vector<Transition> slots, std::size_t cursor);

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::vector<Transition> items_;
};

double huber(double error, double delta = 1.0);

/// Index of the largest entry; ties resolve to the lowest index.
int argmax(const Vector& q);

struct CdqlTarget {
  double y = 0.0;
  std::array<int, 2> greedy_action{};  // each network's own argmax on s'
  std::array<double, 2> greedy_value{};
  int min_net = 0;  // which network supplied the minimum
};

/// y = r + gamma * min_i Q_i(s', argmax_a Q_i(s', a)); no terminal cut-off.
CdqlTarget cdql_target(double reward, const Vector& next_state, const MlpD& q1, const MlpD& q2,
                       double gamma);

/// Epsilon-greedy over `net`'s q-values.
int select_action(const MlpD& net, const Vector& state, double epsilon, Rng& rng,
                  bool literal = false);

/// epsilon * decay while above the floor, never below epsilon_min.
double decay_epsilon(double epsilon, const AgentConfig& cfg);

struct LossPair {
  double first = 0.0;
  double second = 0.0;
};

/// Twin online networks, their target copies, per-network Adam state,
/// replay buffer and exploration schedule.
class CdqlAgent {
 public:
  CdqlAgent(int state_size, int n_actions, AgentConfig cfg, std::uint64_t seed);

  int act(const Vector& state);
  int greedy(const Vector& state) const { return argmax(online_[0].forward(state)); }
  void observe(Transition t) { buffer_.push(std::move(t)); }

  /// One gradient step per network on a sampled batch, then Polyak-averages
  /// both targets. Empty when the buffer holds fewer than `batch` entries.
  std::optional<LossPair> update();

  void decay_epsilon() { epsilon_ = cdql::decay_epsilon(epsilon_, cfg_); }
  double epsilon() const { return epsilon_; }
  void set_epsilon(double e) { epsilon_ = e; }

  const AgentConfig& config() const { return cfg_; }
  int state_size() const { return online_[0].input_size(); }
  int n_actions() const { return online_[0].output_size(); }
  const MlpD& online(int i) const { return online_.at(i); }
  const MlpD& target(int i) const { return target_.at(i); }
  MlpD& online(int i) { return online_.at(i); }
  MlpD& target(int i) { return target_.at(i); }
  const ReplayBuffer& buffer() const { return buffer_; }

  /// Text checkpoint (JSON): format tag, version, config, all parameters of
  /// the four networks, Adam moments, epsilon, buffer slots and cursor.
  void save(const std::filesystem::path& path) const;
  static CdqlAgent load(const std::filesystem::path& path);

 private:
  AgentConfig cfg_;
  std::array<MlpD, 2> online_;
  std::array<MlpD, 2> target_;
  std::array<AdamD, 2> adam_;
  ReplayBuffer buffer_;
  double epsilon_;
  Rng rng_;
  std::uint64_t seed_;
};

}  // namespace mlb::cdql
