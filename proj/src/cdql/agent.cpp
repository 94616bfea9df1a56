#include "mlb/cdql/agent.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace mlb::cdql {

void AgentConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidInput("agent.gamma must lie in (0, 1)");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidInput("agent.epsilon must lie in [0, 1]");
  if (!(epsilon_min >= 0.0 && epsilon_min <= 1.0))
    throw InvalidInput("agent.epsilon_min must lie in [0, 1]");
  if (!(epsilon_decay > 0.0 && epsilon_decay < 1.0))
    throw InvalidInput("agent.epsilon_decay must lie in (0, 1)");
  if (!(tau > 0.0 && tau <= 1.0)) throw InvalidInput("agent.tau must lie in (0, 1]");
  if (!(lr > 0.0)) throw InvalidInput("agent.lr must be > 0");
  if (batch < 1) throw InvalidInput("agent.batch must be >= 1");
  if (!(huber_delta > 0.0)) throw InvalidInput("agent.huber_delta must be > 0");
  if (hidden.empty()) throw InvalidInput("agent.hidden must list at least one width");
  for (int h : hidden)
    if (h < 1) throw InvalidInput("agent.hidden widths must be >= 1");
  if (buffer_capacity < 1) throw InvalidInput("agent.buffer_capacity must be >= 1");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw InvalidInput("ReplayBuffer: capacity must be >= 1");
  items_.reserve(std::min<std::size_t>(capacity_, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_)
    items_.push_back(std::move(t));
  else
    items_[cursor_] = std::move(t);
  cursor_ = (cursor_ + 1) % capacity_;
}

std::vector<Transition> ReplayBuffer::ordered() const {
  std::vector<Transition> out;
  out.reserve(items_.size());
  const std::size_t start = items_.size() < capacity_ ? 0 : cursor_;
  for (std::size_t i = 0; i < items_.size(); ++i) out.push_back(items_[(start + i) % items_.size()]);
  return out;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (items_.empty()) throw InvalidInput("ReplayBuffer::sample: buffer is empty");
  std::vector<const Transition*> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(&items_[rng.index(items_.size())]);
  return out;
}

void ReplayBuffer::restore(std::vector<Transition> slots, std::size_t cursor) {
  if (slots.size() > capacity_ || (slots.size() < capacity_ && cursor != slots.size() % capacity_) ||
      cursor >= capacity_)
    throw InvalidInput("ReplayBuffer::restore: inconsistent slots/cursor");
  items_ = std::move(slots);
  cursor_ = cursor;
}

double huber(double error, double delta) {
  const double a = std::abs(error);
  return a <= delta ? 0.5 * error * error : delta * (a - 0.5 * delta);
}

int argmax(const Vector& q) {
  if (q.size() == 0) throw InvalidInput("argmax: empty vector");
  Index best = 0;
  for (Index i = 1; i < q.size(); ++i)
    if (q[i] > q[best]) best = i;
  return static_cast<int>(best);
}

CdqlTarget cdql_target(double reward, const Vector& next_state, const MlpD& q1, const MlpD& q2,
                       double gamma) {
  CdqlTarget t;
  const std::array<const MlpD*, 2> nets{&q1, &q2};
  for (int i = 0; i < 2; ++i) {
    const Vector q = nets[i]->forward(next_state);
    t.greedy_action[i] = argmax(q);
    t.greedy_value[i] = q[t.greedy_action[i]];
  }
  t.min_net = t.greedy_value[1] < t.greedy_value[0] ? 1 : 0;
  t.y = reward + gamma * t.greedy_value[t.min_net];
  return t;
}

int select_action(const MlpD& net, const Vector& state, double epsilon, Rng& rng, bool literal) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw InvalidInput("select_action: epsilon must lie in [0, 1]");
  const double x = rng.uniform();
  const bool explore = literal ? !(epsilon >= x) : x < epsilon;
  if (explore) return static_cast<int>(rng.index(static_cast<std::size_t>(net.output_size())));
  return argmax(net.forward(state));
}

double decay_epsilon(double epsilon, const AgentConfig& cfg) {
  if (epsilon > cfg.epsilon_min) epsilon *= cfg.epsilon_decay;
  return std::max(epsilon, cfg.epsilon_min);
}

CdqlAgent::CdqlAgent(int state_size, int n_actions, AgentConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), buffer_(cfg_.buffer_capacity), rng_{seed, 0xa9e17ull}, seed_(seed) {
  cfg_.validate();
  if (state_size < 1 || n_actions < 1) throw InvalidInput("CdqlAgent: empty state or action space");
  std::vector<int> sizes{state_size};
  sizes.insert(sizes.end(), cfg_.hidden.begin(), cfg_.hidden.end());
  sizes.push_back(n_actions);
  Rng init{seed, 0x1417ull};
  const AdamD::Options opt{cfg_.lr, 0.9, 0.999, 1e-8};
  for (int i = 0; i < 2; ++i) {
    online_[i] = MlpD::glorot(sizes, init);
    target_[i] = online_[i];
    adam_[i] = AdamD(online_[i], opt);
  }
  epsilon_ = cfg_.epsilon;
}

int CdqlAgent::act(const Vector& state) {
  return select_action(online_[0], state, epsilon_, rng_, cfg_.literal_epsilon);
}

std::optional<LossPair> CdqlAgent::update() {
  const auto b = static_cast<std::size_t>(cfg_.batch);
  if (buffer_.size() < b) return std::nullopt;
  const auto batch = buffer_.sample(b, rng_);
  const int n_in = state_size();
  Matrix states(n_in, cfg_.batch), next(n_in, cfg_.batch);
  std::vector<int> actions(b);
  Vector rewards(cfg_.batch);
  for (std::size_t j = 0; j < b; ++j) {
    states.col(static_cast<Index>(j)) = batch[j]->state;
    next.col(static_cast<Index>(j)) = batch[j]->next_state;
    actions[j] = batch[j]->action;
    rewards[static_cast<Index>(j)] = batch[j]->reward;
  }

  // Shared clipped target from the target copies, each network on its own argmax.
  const Matrix q1 = target_[0].forward_batch(next);
  const Matrix q2 = target_[1].forward_batch(next);
  Vector y(cfg_.batch);
  for (Index j = 0; j < y.size(); ++j) {
    const double v1 = q1.col(j)[argmax(q1.col(j))];
    const double v2 = q2.col(j)[argmax(q2.col(j))];
    y[j] = rewards[j] + cfg_.gamma * std::min(v1, v2);
  }

  LossPair loss;
  std::array<double*, 2> out{&loss.first, &loss.second};
  for (int i = 0; i < 2; ++i) {
    MlpD::Gradients grad;
    *out[i] = online_[i].huber_loss(states, actions, y, cfg_.huber_delta, &grad);
    adam_[i].step(online_[i], grad);
  }
  for (int i = 0; i < 2; ++i) polyak(target_[i], online_[i], cfg_.tau);
  return loss;
}

namespace {

using nlohmann::json;
constexpr const char* kFormat = "mlb-cdql-checkpoint";
constexpr int kVersion = 1;

json to_json(const Vector& v) { return std::vector<double>(v.begin(), v.end()); }

Vector vector_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

json layers_json(const MlpD::Gradients& layers) {
  json out = json::array();
  for (const auto& l : layers) {
    out.push_back({{"rows", l.weight.rows()},
                   {"cols", l.weight.cols()},
                   {"weight", to_json(l.weight.reshaped())},
                   {"bias", to_json(l.bias)}});
  }
  return out;
}

void load_layers(const json& j, MlpD::Gradients& layers) {
  if (j.size() != layers.size()) throw InvalidInput("checkpoint: layer count mismatch");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& e = j[l];
    if (e.at("rows").get<Index>() != layers[l].weight.rows() ||
        e.at("cols").get<Index>() != layers[l].weight.cols())
      throw InvalidInput("checkpoint: layer shape mismatch");
    const Vector w = vector_from(e.at("weight"));
    const Vector b = vector_from(e.at("bias"));
    if (w.size() != layers[l].weight.size() || b.size() != layers[l].bias.size())
      throw InvalidInput("checkpoint: parameter count mismatch");
    layers[l].weight.reshaped() = w;
    layers[l].bias = b;
  }
}

}  // namespace

void CdqlAgent::save(const std::filesystem::path& path) const {
  json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["seed"] = seed_;
  j["config"] = {{"gamma", cfg_.gamma},
                 {"epsilon", cfg_.epsilon},
                 {"epsilon_min", cfg_.epsilon_min},
                 {"epsilon_decay", cfg_.epsilon_decay},
                 {"tau", cfg_.tau},
                 {"lr", cfg_.lr},
                 {"batch", cfg_.batch},
                 {"huber_delta", cfg_.huber_delta},
                 {"hidden", cfg_.hidden},
                 {"buffer_capacity", cfg_.buffer_capacity},
                 {"literal_epsilon", cfg_.literal_epsilon}};
  j["state_size"] = state_size();
  j["n_actions"] = n_actions();
  j["epsilon"] = epsilon_;
  std::ostringstream rng_state;
  rng_state << rng_.engine();
  j["rng"] = rng_state.str();
  for (int i = 0; i < 2; ++i) {
    j["online"].push_back(layers_json(online_[i].layers()));
    j["target"].push_back(layers_json(target_[i].layers()));
    j["adam"].push_back({{"steps", adam_[i].steps()},
                         {"m", layers_json(adam_[i].first_moment())},
                         {"v", layers_json(adam_[i].second_moment())}});
  }
  j["buffer"]["cursor"] = buffer_.cursor();
  j["buffer"]["slots"] = json::array();
  for (std::size_t s = 0; s < buffer_.size(); ++s) {
    const auto& t = buffer_.at(s);
    j["buffer"]["slots"].push_back({{"s", to_json(t.state)},
                                    {"a", t.action},
                                    {"r", t.reward},
                                    {"s_next", to_json(t.next_state)}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << j.dump();
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

CdqlAgent CdqlAgent::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  const json j = json::parse(in);
  if (j.at("format") != kFormat) throw InvalidInput("checkpoint: unknown format tag");
  if (j.at("version").get<int>() != kVersion)
    throw InvalidInput("checkpoint: unsupported version " + j.at("version").dump());
  AgentConfig cfg;
  const auto& c = j.at("config");
  cfg.gamma = c.at("gamma");
  cfg.epsilon = c.at("epsilon");
  cfg.epsilon_min = c.at("epsilon_min");
  cfg.epsilon_decay = c.at("epsilon_decay");
  cfg.tau = c.at("tau");
  cfg.lr = c.at("lr");
  cfg.batch = c.at("batch");
  cfg.huber_delta = c.at("huber_delta");
  cfg.hidden = c.at("hidden").get<std::vector<int>>();
  cfg.buffer_capacity = c.at("buffer_capacity");
  cfg.literal_epsilon = c.at("literal_epsilon");
  CdqlAgent agent(j.at("state_size"), j.at("n_actions"), cfg, j.at("seed"));
  agent.epsilon_ = j.at("epsilon");
  std::istringstream rng_state(j.at("rng").get<std::string>());
  rng_state >> agent.rng_.engine();
  for (int i = 0; i < 2; ++i) {
    load_layers(j.at("online")[i], agent.online_[i].layers());
    load_layers(j.at("target")[i], agent.target_[i].layers());
    load_layers(j.at("adam")[i].at("m"), agent.adam_[i].first_moment());
    load_layers(j.at("adam")[i].at("v"), agent.adam_[i].second_moment());
    agent.adam_[i].set_steps(j.at("adam")[i].at("steps"));
  }
  std::vector<Transition> slots;
  for (const auto& e : j.at("buffer").at("slots"))
    slots.push_back({vector_from(e.at("s")), e.at("a"), e.at("r"), vector_from(e.at("s_next"))});
  agent.buffer_.restore(std::move(slots), j.at("buffer").at("cursor"));
  return agent;
}

}  // namespace mlb::cdql
