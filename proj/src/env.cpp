#include "mlb/env.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mlb {

ActionSpace::ActionSpace(std::vector<double> cio_values, int k, ActionMode mode)
    : values_(std::move(cio_values)), k_(k), mode_(mode), size_(1) {
  if (values_.empty()) throw InvalidInput("ActionSpace: empty CIO value set");
  if (k_ < 1) throw InvalidInput("ActionSpace: k must be >= 1");
  std::sort(values_.begin(), values_.end());
  if (std::adjacent_find(values_.begin(), values_.end()) != values_.end())
    throw InvalidInput("ActionSpace: CIO values must be distinct");
  const auto l = values_.size();
  if (mode_ == ActionMode::Permutations) {
    if (static_cast<std::size_t>(k_) > l)
      throw InvalidInput("ActionSpace: permutations need k <= number of values");
    for (std::size_t i = 0; i < static_cast<std::size_t>(k_); ++i) size_ *= l - i;
  } else {
    for (int i = 0; i < k_; ++i) size_ *= l;
  }
}

ActionSpace ActionSpace::standard(int k, ActionMode mode) {
  return ActionSpace({-9, -6, -3, 0, 3, 6, 9}, k, mode);
}

std::vector<double> ActionSpace::decode(std::size_t index) const {
  if (index >= size_)
    throw InvalidInput("decode_action: index " + std::to_string(index) + " out of range [0, " +
                       std::to_string(size_) + ")");
  const std::size_t l = values_.size();
  std::vector<double> out(static_cast<std::size_t>(k_));
  if (mode_ == ActionMode::Product) {
    for (int p = k_; p-- > 0;) {
      out[static_cast<std::size_t>(p)] = values_[index % l];
      index /= l;
    }
    return out;
  }
  std::vector<double> remaining = values_;
  std::size_t block = size_;
  for (int p = 0; p < k_; ++p) {
    block /= remaining.size();
    const std::size_t d = index / block;
    index %= block;
    out[static_cast<std::size_t>(p)] = remaining[d];
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(d));
  }
  return out;
}

std::size_t ActionSpace::value_position(double v) const {
  const auto it = std::find(values_.begin(), values_.end(), v);
  if (it == values_.end()) throw InvalidInput("encode_action: value not in the CIO set");
  return static_cast<std::size_t>(it - values_.begin());
}

std::size_t ActionSpace::encode(std::span<const double> cio) const {
  if (static_cast<int>(cio.size()) != k_) throw InvalidInput("encode_action: wrong tuple length");
  const std::size_t l = values_.size();
  std::size_t index = 0;
  if (mode_ == ActionMode::Product) {
    for (double v : cio) index = index * l + value_position(v);
    return index;
  }
  std::vector<double> remaining = values_;
  std::size_t block = size_;
  for (double v : cio) {
    block /= remaining.size();
    const auto it = std::find(remaining.begin(), remaining.end(), v);
    if (it == remaining.end()) throw InvalidInput("encode_action: repeated or unknown value");
    index += static_cast<std::size_t>(it - remaining.begin()) * block;
    remaining.erase(it);
  }
  return index;
}

void RewardConfig::validate() const {
  if (!(pdb_ms > 0.0)) throw InvalidInput("reward.pdb_ms must be > 0");
  for (double w : {w1, w2, w3, c, o, a, d_target})
    if (!std::isfinite(w)) throw InvalidInput("reward weights and shape constants must be finite");
}

Vector build_state(const KpiWindow& kpi) {
  const Index m = static_cast<Index>(kpi.cells.size());
  Vector s(2 * m);
  s << kpi.attachment_vector(), kpi.rbu_vector();
  return s;
}

double bounded_sigmoid(double x, double c, double slope, double centre) {
  return 1.0 + c / (1.0 + std::exp(-slope * (x - centre)));
}

double reward_delay(std::span<const UeDelaySample> per_ue, const RewardConfig& cfg) {
  if (per_ue.empty()) throw InvalidInput("reward_delay: no UEs");
  double sum = 0.0;
  for (const auto& u : per_ue)
    sum += u.connected ? bounded_sigmoid(u.d_avg_s, cfg.c, cfg.o, cfg.target_delay_s()) : -1.0;
  return sum / static_cast<double>(per_ue.size());
}

double reward_rbu(const Vector& rbu, const RewardConfig& cfg) {
  if (rbu.size() == 0) throw InvalidInput("reward_rbu: no cells");
  return bounded_sigmoid(rbu.maxCoeff(), cfg.c, cfg.a, cfg.d_target);
}

double cqi_band(int cqi, const RewardConfig& cfg) {
  if (cfg.literal_cqi_bands) {
    if (cqi < 6) return -1.0;
    if (cqi >= 7 && cqi <= 9) return 0.0;
    return 1.0;
  }
  if (cqi <= 6) return -1.0;
  if (cqi <= 9) return 0.0;
  return 1.0;
}

double reward_cqi(std::span<const int> cqis, const RewardConfig& cfg) {
  if (cqis.empty()) throw InvalidInput("reward_cqi: no UEs");
  double sum = 0.0;
  for (int q : cqis) sum += cqi_band(q, cfg);
  return sum / static_cast<double>(cqis.size());
}

RewardBreakdown compute_reward(const KpiWindow& kpi, const RewardConfig& cfg) {
  std::vector<UeDelaySample> delays;
  delays.reserve(kpi.ues.size());
  for (const auto& u : kpi.ues) delays.push_back({u.connected, u.mean_delay_ms / 1000.0});
  RewardBreakdown r;
  r.r_delay = reward_delay(delays, cfg);
  r.r_rbu = reward_rbu(kpi.rbu_vector(), cfg);
  r.r_cqi = reward_cqi(kpi.cqi_list(), cfg);
  r.total = cfg.w1 * r.r_delay + cfg.w2 * r.r_rbu + cfg.w3 * r.r_cqi;
  return r;
}

BalancerEnv::BalancerEnv(SimConfig sim, RewardConfig reward, ActionSpace actions,
                         std::uint64_t seed, int step_ms)
    : sim_(std::move(sim), seed), reward_(reward), actions_(std::move(actions)), step_ms_(step_ms) {
  reward_.validate();
  if (actions_.k() != sim_.config().n_cells)
    throw InvalidInput("BalancerEnv: action tuple length must equal the number of cells");
  if (step_ms_ < 1) throw InvalidInput("BalancerEnv: step must be >= 1 ms");
}

Vector BalancerEnv::reset(std::uint64_t episode) {
  sim_.reset(episode);
  const int m = sim_.config().n_cells;
  std::vector<int> counts(m);
  for (int c = 0; c < m; ++c) counts[c] = static_cast<int>(sim_.cells()[c].attached_ues.size());
  Vector s = Vector::Zero(2 * m);
  s.head(m) = attachment_ratios(counts, sim_.config().n_ues);
  return s;
}

StepResult BalancerEnv::step(std::size_t action) {
  const auto cio = actions_.decode(action);
  sim_.set_cio(cio);
  return advance();
}

StepResult BalancerEnv::step_passive() { return advance(); }

StepResult BalancerEnv::advance() {
  StepResult r;
  r.cio_db = sim_.config().handover.cio_db;
  r.kpi = sim_.run_agent_step(step_ms_);
  r.state = build_state(r.kpi);
  r.reward = compute_reward(r.kpi, reward_);
  return r;
}

namespace {

struct EpisodeAccumulator {
  EpisodeLog log;
  int n = 0;
  void add(const RewardBreakdown& r) {
    log.cumulative_reward += r.total;
    log.mean_r_delay += r.r_delay;
    log.mean_r_rbu += r.r_rbu;
    log.mean_r_cqi += r.r_cqi;
    ++n;
  }
  EpisodeLog finish() {
    if (n > 0) {
      log.mean_r_delay /= n;
      log.mean_r_rbu /= n;
      log.mean_r_cqi /= n;
    }
    return log;
  }
};

}  // namespace

std::vector<EpisodeLog> run_training(BalancerEnv& env, cdql::CdqlAgent& agent, int episodes,
                                     int steps, const StepObserver& observer) {
  if (agent.state_size() != env.state_size() ||
      static_cast<std::size_t>(agent.n_actions()) != env.actions().size())
    throw InvalidInput("run_training: agent and environment dimensions differ");
  std::vector<EpisodeLog> logs;
  for (int ep = 0; ep < episodes; ++ep) {
    EpisodeAccumulator acc;
    acc.log.episode = ep;
    Vector state = env.reset(static_cast<std::uint64_t>(ep));
    for (int t = 0; t < steps; ++t) {
      const int action = agent.act(state);
      StepResult res = env.step(static_cast<std::size_t>(action));
      agent.observe({state, action, res.reward.total, res.state});
      agent.update();
      agent.decay_epsilon();
      acc.add(res.reward);
      if (observer) observer(ep, t, res);
      state = std::move(res.state);
    }
    acc.log.epsilon = agent.epsilon();
    logs.push_back(acc.finish());
  }
  return logs;
}

EpisodeLog run_episode(BalancerEnv& env, const Policy& policy, int episode, int steps,
                       const StepObserver& observer) {
  EpisodeAccumulator acc;
  acc.log.episode = episode;
  Vector state = env.reset(static_cast<std::uint64_t>(episode));
  for (int t = 0; t < steps; ++t) {
    const auto action = policy ? policy(state) : std::nullopt;
    StepResult res = action ? env.step(*action) : env.step_passive();
    acc.add(res.reward);
    if (observer) observer(episode, t, res);
    state = std::move(res.state);
  }
  return acc.finish();
}

}  // namespace mlb
