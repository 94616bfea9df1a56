#include "mlb/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace mlb {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Cdql: return "cdql";
    case Algorithm::A3: return "a3";
    case Algorithm::Rebuha: return "rebuha";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "cdql") return Algorithm::Cdql;
  if (name == "a3") return Algorithm::A3;
  if (name == "rebuha") return Algorithm::Rebuha;
  throw InvalidInput("unknown algorithm '" + std::string(name) + "' (expected cdql, a3 or rebuha)");
}

void ExperimentPlan::validate() const {
  if (algorithms.empty()) throw InvalidInput("plan.algorithms must not be empty");
  if (ue_counts.empty()) throw InvalidInput("plan.ue_counts must not be empty");
  for (int n : ue_counts)
    if (n < 1) throw InvalidInput("plan.ue_counts entries must be >= 1");
  if (!(mobility_fraction >= 0.0 && mobility_fraction <= 1.0))
    throw InvalidInput("plan.mobility_fraction must lie in [0, 1]");
  if (!(speed_mps >= 0.0)) throw InvalidInput("plan.speed_mps must be >= 0");
  if (seeds.empty()) throw InvalidInput("plan.seeds must not be empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw InvalidInput("plan.seeds must be distinct");
  if (episodes < 1) throw InvalidInput("plan.episodes must be >= 1");
  if (steps_per_episode < 1) throw InvalidInput("plan.steps_per_episode must be >= 1");
  if (output_dir.empty()) throw InvalidInput("plan.output_dir must not be empty");
  if (jobs < 1) throw InvalidInput("plan.jobs must be >= 1");
}

void ExperimentPlan::apply_quick_profile() {
  seeds = {1, 2, 3};
  episodes = 40;
  ue_counts = {30};
}

void ExperimentConfig::validate() const {
  SimConfig probe = sim;
  probe.n_ues = plan.ue_counts.empty() ? sim.n_ues : plan.ue_counts.front();
  probe.mobility_fraction = plan.mobility_fraction;
  probe.speed_mps = plan.speed_mps;
  probe.validate();
  agent.validate();
  reward.validate();
  plan.validate();
  if (step_ms < 1) throw InvalidInput("sim.step_ms must be >= 1");
  for (double v : cio_values)
    if (!(v >= sim.handover.cio_min_db && v <= sim.handover.cio_max_db))
      throw InvalidInput("actions.cio_values entry " + std::to_string(v) +
                         " outside [handover.cio_min_db, handover.cio_max_db]");
  action_space();
}

namespace {

// Reads typed keys out of one JSON object and rejects anything not read.
class Section {
 public:
  Section(const json& root, std::string name) : name_(std::move(name)) {
    if (root.contains(name_)) {
      node_ = &root.at(name_);
      if (!node_->is_object()) throw InvalidInput("config section '" + name_ + "' must be an object");
    }
  }

  template <class T>
  Section& get(const char* key, T& out) {
    allowed_.insert(key);
    if (node_ && node_->contains(key)) {
      try {
        out = node_->at(key).get<T>();
      } catch (const json::exception&) {
        throw InvalidInput("config key " + name_ + "." + key + " has an invalid value: " +
                           node_->at(key).dump());
      }
    }
    return *this;
  }

  template <class T>
  Section& get_optional(const char* key, std::optional<T>& out) {
    T tmp{};
    const bool present = node_ && node_->contains(key) && !node_->at(key).is_null();
    get(key, tmp);
    if (present) out = tmp;
    return *this;
  }

  bool has(const char* key) const { return node_ && node_->contains(key); }
  const json& at(const char* key) const { return node_->at(key); }

  void finish() const {
    if (!node_) return;
    for (const auto& item : node_->items())
      if (!allowed_.count(item.key()))
        throw InvalidInput("unknown config key " + name_ + "." + item.key());
  }

 private:
  std::string name_;
  const json* node_ = nullptr;
  std::set<std::string> allowed_;
};

}  // namespace

ExperimentConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json_text.empty() ? json::object() : json::parse(json_text);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw InvalidInput("config root must be a JSON object");
  static const std::set<std::string> sections{"radio", "handover", "sim",     "traffic",
                                              "reward", "agent",   "actions", "plan"};
  for (const auto& item : root.items())
    if (!sections.count(item.key())) throw InvalidInput("unknown config section " + item.key());

  ExperimentConfig cfg;
  auto& r = cfg.sim.radio;
  Section(root, "radio")
      .get("tx_power_dbm", r.tx_power_dbm)
      .get("n_rb", r.n_rb)
      .get("noise_figure_db", r.noise_figure_db)
      .get("pathloss_intercept_db", r.pathloss_intercept_db)
      .get("pathloss_slope", r.pathloss_slope)
      .get("rlf_sinr_db", r.rlf_sinr_db)
      .finish();

  auto& h = cfg.sim.handover;
  Section(root, "handover")
      .get("hysteresis_db", h.hysteresis_db)
      .get("ttt_ms", h.ttt_ms)
      .get("cio_min_db", h.cio_min_db)
      .get("cio_max_db", h.cio_max_db)
      .finish();

  auto& s = cfg.sim;
  Section(root, "sim")
      .get("n_cells", s.n_cells)
      .get("isd_m", s.isd_m)
      .get("edge_fraction", s.edge_fraction)
      .get("edge_disc_radius_m", s.edge_disc_radius_m)
      .get_optional("edge_disc_offset_m", s.edge_disc_offset_m)
      .get("queue_capacity", s.queue_capacity)
      .get("heading_period_ms", s.heading_period_ms)
      .get("step_ms", cfg.step_ms)
      .finish();

  Section(root, "traffic")
      .get("n_cbr", s.n_cbr)
      .get("cbr_payload_bytes", s.cbr.payload_bytes)
      .get("cbr_interval_ms", s.cbr.interval_ms)
      .get("poisson_payload_bytes", s.poisson.payload_bytes)
      .get("poisson_rate_bps", s.poisson.rate_bps)
      .finish();

  auto& w = cfg.reward;
  Section(root, "reward")
      .get("w1", w.w1)
      .get("w2", w.w2)
      .get("w3", w.w3)
      .get("c", w.c)
      .get("o", w.o)
      .get("pdb_ms", w.pdb_ms)
      .get("a", w.a)
      .get("d_target", w.d_target)
      .get("gamma_rb", s.gamma_rb)
      .get("literal_cqi_bands", w.literal_cqi_bands)
      .finish();

  auto& ag = cfg.agent;
  Section(root, "agent")
      .get("gamma", ag.gamma)
      .get("epsilon", ag.epsilon)
      .get("epsilon_min", ag.epsilon_min)
      .get("epsilon_decay", ag.epsilon_decay)
      .get("tau", ag.tau)
      .get("lr", ag.lr)
      .get("batch", ag.batch)
      .get("huber_delta", ag.huber_delta)
      .get("hidden", ag.hidden)
      .get("buffer_capacity", ag.buffer_capacity)
      .get("literal_epsilon", ag.literal_epsilon)
      .finish();

  std::string mode = "permutations";
  Section(root, "actions").get("cio_values", cfg.cio_values).get("mode", mode).finish();
  if (mode == "permutations")
    cfg.action_mode = ActionMode::Permutations;
  else if (mode == "product")
    cfg.action_mode = ActionMode::Product;
  else
    throw InvalidInput("config key actions.mode must be 'permutations' or 'product'");

  auto& p = cfg.plan;
  bool quick = false;
  std::vector<std::string> algos;
  Section plan(root, "plan");
  plan.get("quick", quick);
  if (quick) p.apply_quick_profile();
  if (plan.has("algorithms") && plan.at("algorithms").is_string()) {
    std::string single;
    plan.get("algorithms", single);
    algos.push_back(single);
  } else {
    plan.get("algorithms", algos);
  }
  plan.get("ue_counts", p.ue_counts)
      .get("mobility_fraction", p.mobility_fraction)
      .get("speed_mps", p.speed_mps)
      .get("seeds", p.seeds)
      .get("episodes", p.episodes)
      .get("steps_per_episode", p.steps_per_episode)
      .get("output_dir", p.output_dir)
      .get("jobs", p.jobs)
      .get("save_agent", p.save_agent)
      .finish();
  if (!algos.empty()) {
    p.algorithms.clear();
    for (const auto& a : algos) p.algorithms.push_back(parse_algorithm(a));
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

json config_json(const ExperimentConfig& cfg) {
  const auto& r = cfg.sim.radio;
  const auto& h = cfg.sim.handover;
  const auto& s = cfg.sim;
  const auto& w = cfg.reward;
  const auto& a = cfg.agent;
  const auto& p = cfg.plan;
  json j;
  j["radio"] = {{"tx_power_dbm", r.tx_power_dbm},
                {"n_rb", r.n_rb},
                {"noise_figure_db", r.noise_figure_db},
                {"pathloss_intercept_db", r.pathloss_intercept_db},
                {"pathloss_slope", r.pathloss_slope},
                {"rlf_sinr_db", r.rlf_sinr_db}};
  j["handover"] = {{"hysteresis_db", h.hysteresis_db},
                   {"ttt_ms", h.ttt_ms},
                   {"cio_min_db", h.cio_min_db},
                   {"cio_max_db", h.cio_max_db}};
  j["sim"] = {{"n_cells", s.n_cells},
              {"isd_m", s.isd_m},
              {"edge_fraction", s.edge_fraction},
              {"edge_disc_radius_m", s.edge_disc_radius_m},
              {"edge_disc_offset_m", s.edge_offset()},
              {"queue_capacity", s.queue_capacity},
              {"heading_period_ms", s.heading_period_ms},
              {"step_ms", cfg.step_ms}};
  j["traffic"] = {{"n_cbr", s.n_cbr},
                  {"cbr_payload_bytes", s.cbr.payload_bytes},
                  {"cbr_interval_ms", s.cbr.interval_ms},
                  {"poisson_payload_bytes", s.poisson.payload_bytes},
                  {"poisson_rate_bps", s.poisson.rate_bps}};
  j["reward"] = {{"w1", w.w1},         {"w2", w.w2},
                 {"w3", w.w3},         {"c", w.c},
                 {"o", w.o},           {"pdb_ms", w.pdb_ms},
                 {"a", w.a},           {"d_target", w.d_target},
                 {"gamma_rb", s.gamma_rb}, {"literal_cqi_bands", w.literal_cqi_bands}};
  j["agent"] = {{"gamma", a.gamma},
                {"epsilon", a.epsilon},
                {"epsilon_min", a.epsilon_min},
                {"epsilon_decay", a.epsilon_decay},
                {"tau", a.tau},
                {"lr", a.lr},
                {"batch", a.batch},
                {"huber_delta", a.huber_delta},
                {"hidden", a.hidden},
                {"buffer_capacity", a.buffer_capacity},
                {"literal_epsilon", a.literal_epsilon}};
  j["actions"] = {{"cio_values", cfg.cio_values},
                  {"mode", cfg.action_mode == ActionMode::Permutations ? "permutations" : "product"}};
  std::vector<std::string> algos;
  for (auto al : p.algorithms) algos.push_back(to_string(al));
  j["plan"] = {{"algorithms", algos},
               {"ue_counts", p.ue_counts},
               {"mobility_fraction", p.mobility_fraction},
               {"speed_mps", p.speed_mps},
               {"seeds", p.seeds},
               {"episodes", p.episodes},
               {"steps_per_episode", p.steps_per_episode},
               {"output_dir", p.output_dir},
               {"jobs", p.jobs},
               {"save_agent", p.save_agent}};
  return j;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string mobility_tag(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", f);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void check_written(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& cfg) { return config_json(cfg).dump(2); }

std::string Scenario::dir_name() const {
  return to_string(algorithm) + "-ues" + std::to_string(n_ues) + "-mob" +
         mobility_tag(mobility_fraction) + "-seed" + std::to_string(seed);
}

std::string kpi_csv_header(int n_cells) {
  std::string h =
      "algorithm,seed,n_ues,mobility,phase,episode,step,throughput_bps,mean_ue_throughput_bps,"
      "mean_delay_ms,jitter_ms,"
      "plr,handovers,reattachments,connected_ues,reward_total,r_delay,r_rbu,r_cqi";
  for (const char* prefix : {"rbu_", "u_", "cio_"})
    for (int c = 0; c < n_cells; ++c) h += std::string(",") + prefix + std::to_string(c);
  return h;
}

std::string rewards_csv_header() {
  return "algorithm,seed,episode,cumulative_reward,epsilon,mean_r_delay,mean_r_rbu,mean_r_cqi";
}

std::string summary_csv_header() {
  std::string h =
      "algorithm,n_ues,mobility,n_seeds,throughput_bps_mean,throughput_bps_ci90,"
      "mean_delay_ms_mean,mean_delay_ms_ci90,jitter_ms_mean,jitter_ms_ci90,plr_mean,plr_ci90,flag";
  for (const char* base : {"a3", "rebuha"})
    for (const char* m : {"throughput", "delay", "jitter", "plr"})
      h += std::string(",gain_") + m + "_vs_" + base + "_pct";
  return h;
}

ScenarioResult run_scenario(const ExperimentConfig& cfg, const Scenario& sc,
                            const fs::path& scenario_dir) {
  SimConfig sim = cfg.sim;
  sim.n_ues = sc.n_ues;
  sim.mobility_fraction = sc.mobility_fraction;
  sim.speed_mps = cfg.plan.speed_mps;
  sim.mode = sc.algorithm == Algorithm::Rebuha ? HandoverMode::Rebuha : HandoverMode::A3;
  BalancerEnv env(sim, cfg.reward, cfg.action_space(), sc.seed, cfg.step_ms);
  const int n_cells = sim.n_cells;
  const int episodes = cfg.plan.episodes;
  const int steps = cfg.plan.steps_per_episode;

  const bool write = !scenario_dir.empty();
  std::ofstream kpis;
  const fs::path kpi_path = scenario_dir / "kpis.csv";
  if (write) {
    fs::create_directories(scenario_dir);
    kpis = open_out(kpi_path);
    kpis << kpi_csv_header(n_cells) << '\n';
  }
  const std::string prefix = to_string(sc.algorithm) + ',' + std::to_string(sc.seed) + ',' +
                             std::to_string(sc.n_ues) + ',' + mobility_tag(sc.mobility_fraction);

  auto writer = [&](const char* phase) {
    return [&, phase](int ep, int t, const StepResult& r) {
      if (!write) return;
      int connected = 0;
      for (const auto& u : r.kpi.ues) connected += u.connected;
      kpis << prefix << ',' << phase << ',' << ep << ',' << t << ',' << num(r.kpi.throughput_bps)
           << ',' << num(r.kpi.mean_ue_throughput_bps()) << ',' << num(r.kpi.mean_delay_ms) << ',' << num(r.kpi.jitter_ms) << ','
           << num(r.kpi.plr) << ',' << r.kpi.handovers << ',' << r.kpi.reattachments << ','
           << connected << ',' << num(r.reward.total) << ',' << num(r.reward.r_delay) << ','
           << num(r.reward.r_rbu) << ',' << num(r.reward.r_cqi);
      for (const auto& c : r.kpi.cells) kpis << ',' << num(c.rbu);
      for (const auto& c : r.kpi.cells) kpis << ',' << num(c.attached_ratio);
      for (double c : r.cio_db) kpis << ',' << num(c);
      kpis << '\n';
    };
  };

  ScenarioResult result;
  result.scenario = sc;
  Policy policy;
  std::optional<cdql::CdqlAgent> agent;
  if (sc.algorithm == Algorithm::Cdql) {
    agent.emplace(env.state_size(), static_cast<int>(env.actions().size()), cfg.agent, sc.seed);
    result.rewards = run_training(env, *agent, episodes, steps, writer("train"));
    policy = [&](const Vector& s) { return std::optional<std::size_t>(agent->greedy(s)); };
  } else {
    for (int ep = 0; ep < episodes; ++ep) run_episode(env, {}, ep, steps, writer("train"));
  }

  // Evaluation episode on a fresh traffic stream.
  FinalKpi& f = result.final_kpi;
  f.rbu = Vector::Zero(n_cells);
  f.attachment = Vector::Zero(n_cells);
  int eval_handovers = 0, eval_reattach = 0;
  double eval_connected = 0.0;
  StepResult last;
  auto eval_writer = writer("eval");
  const auto eval = run_episode(env, policy, episodes, steps, [&](int ep, int t, const StepResult& r) {
    eval_writer(ep, t, r);
    f.throughput_bps += r.kpi.throughput_bps / steps;
    f.mean_ue_throughput_bps += r.kpi.mean_ue_throughput_bps() / steps;
    f.mean_delay_ms += r.kpi.mean_delay_ms / steps;
    f.jitter_ms += r.kpi.jitter_ms / steps;
    f.plr += r.kpi.plr / steps;
    f.rbu += r.kpi.rbu_vector() / steps;
    f.attachment += r.kpi.attachment_vector() / steps;
    eval_handovers += r.kpi.handovers;
    eval_reattach += r.kpi.reattachments;
    for (const auto& u : r.kpi.ues) eval_connected += static_cast<double>(u.connected) / steps;
    last = r;
  });
  f.reward = eval.cumulative_reward;

  if (write) {
    kpis << prefix << ",final," << episodes << ",-1," << num(f.throughput_bps) << ','
         << num(f.mean_ue_throughput_bps) << ',' << num(f.mean_delay_ms) << ',' << num(f.jitter_ms) << ',' << num(f.plr) << ','
         << eval_handovers << ',' << eval_reattach << ',' << num(eval_connected) << ','
         << num(eval.cumulative_reward / steps) << ',' << num(eval.mean_r_delay) << ','
         << num(eval.mean_r_rbu) << ',' << num(eval.mean_r_cqi);
    for (Index c = 0; c < n_cells; ++c) kpis << ',' << num(f.rbu[c]);
    for (Index c = 0; c < n_cells; ++c) kpis << ',' << num(f.attachment[c]);
    for (double c : last.cio_db) kpis << ',' << num(c);
    kpis << '\n';
    check_written(kpis, kpi_path);

    if (sc.algorithm == Algorithm::Cdql) {
      const fs::path rp = scenario_dir / "rewards.csv";
      auto rewards = open_out(rp);
      rewards << rewards_csv_header() << '\n';
      for (const auto& l : result.rewards)
        rewards << "cdql," << sc.seed << ',' << l.episode << ',' << num(l.cumulative_reward)
                << ',' << num(l.epsilon) << ',' << num(l.mean_r_delay) << ','
                << num(l.mean_r_rbu) << ',' << num(l.mean_r_cqi) << '\n';
      check_written(rewards, rp);
      if (cfg.plan.save_agent) agent->save(scenario_dir / "agent.json");
    }

    json manifest;
    manifest["scenario"] = {{"algorithm", to_string(sc.algorithm)},
                            {"n_ues", sc.n_ues},
                            {"mobility_fraction", sc.mobility_fraction},
                            {"seed", sc.seed}};
    manifest["config"] = config_json(cfg);
    // Where and how wide the plan ran does not affect the results.
    manifest["config"]["plan"].erase("output_dir");
    manifest["config"]["plan"].erase("jobs");
    const fs::path mp = scenario_dir / "manifest.json";
    auto m = open_out(mp);
    m << manifest.dump(2) << '\n';
    check_written(m, mp);
  }
  return result;
}

std::vector<ScenarioResult> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const fs::path out = cfg.plan.output_dir;
  fs::create_directories(out);
  std::vector<Scenario> scenarios;
  for (auto algo : cfg.plan.algorithms)
    for (int n : cfg.plan.ue_counts)
      for (auto seed : cfg.plan.seeds)
        scenarios.push_back({algo, n, cfg.plan.mobility_fraction, seed});

  std::vector<ScenarioResult> results(scenarios.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      try {
        results[i] = run_scenario(cfg, scenarios[i], out / scenarios[i].dir_name());
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int jobs = std::min<int>(cfg.plan.jobs, static_cast<int>(scenarios.size()));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  const auto table = summarize(out);
  write_summary_csv(table, out / "summary.csv");
  return results;
}

double relative_gain_pct(double candidate, double baseline, bool higher_is_better) {
  if (baseline == 0.0)
    return candidate == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
  const double diff = higher_is_better ? candidate - baseline : baseline - candidate;
  return 100.0 * diff / std::abs(baseline);
}

SummaryTable summarize(const fs::path& result_dir) {
  SummaryTable table;
  if (!fs::is_directory(result_dir))
    throw std::runtime_error("result directory not found: " + result_dir.string());

  struct Key {
    int algo_rank;
    std::string algorithm;
    int n_ues;
    std::string mobility;
    auto operator<=>(const Key&) const = default;
  };
  struct Samples {
    std::vector<double> thr, delay, jitter, plr;
  };
  std::map<Key, Samples> groups;

  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(result_dir))
    if (e.is_directory()) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());

  for (const auto& dir : dirs) {
    const fs::path manifest = dir / "manifest.json";
    const fs::path kpi = dir / "kpis.csv";
    if (!fs::exists(manifest) || !fs::exists(kpi)) {
      table.warnings.push_back("incomplete scenario directory skipped: " + dir.string());
      continue;
    }
    std::ifstream in(kpi);
    std::string header, line, final_line;
    std::getline(in, header);
    const auto cols = split(header);
    while (std::getline(in, line))
      if (line.find(",final,") != std::string::npos) final_line = line;
    if (final_line.empty()) {
      table.warnings.push_back("no final KPI row in " + kpi.string());
      continue;
    }
    const auto fields = split(final_line);
    auto field = [&](const std::string& name) -> const std::string& {
      const auto it = std::find(cols.begin(), cols.end(), name);
      if (it == cols.end() || static_cast<std::size_t>(it - cols.begin()) >= fields.size())
        throw std::runtime_error("column " + name + " missing in " + kpi.string());
      return fields[static_cast<std::size_t>(it - cols.begin())];
    };
    const std::string algo = field("algorithm");
    const int rank = static_cast<int>(parse_algorithm(algo));
    Key key{rank, algo, std::stoi(field("n_ues")), field("mobility")};
    auto& g = groups[key];
    g.thr.push_back(std::stod(field("throughput_bps")));
    g.delay.push_back(std::stod(field("mean_delay_ms")));
    g.jitter.push_back(std::stod(field("jitter_ms")));
    g.plr.push_back(std::stod(field("plr")));
  }

  for (const auto& [key, s] : groups) {
    SummaryRow row;
    row.algorithm = key.algorithm;
    row.n_ues = key.n_ues;
    row.mobility = std::stod(key.mobility);
    row.throughput_bps = mean_ci(s.thr);
    row.mean_delay_ms = mean_ci(s.delay);
    row.jitter_ms = mean_ci(s.jitter);
    row.plr = mean_ci(s.plr);
    row.single_seed = s.thr.size() < 2;
    table.rows.push_back(row);
  }

  for (auto& row : table.rows) {
    if (row.algorithm != "cdql") continue;
    bool have_baseline = false;
    for (const auto& base : table.rows) {
      if (base.n_ues != row.n_ues || base.mobility != row.mobility) continue;
      auto set = [&](std::optional<double>& thr, std::optional<double>& del,
                     std::optional<double>& jit, std::optional<double>& loss) {
        thr = relative_gain_pct(row.throughput_bps.mean, base.throughput_bps.mean, true);
        del = relative_gain_pct(row.mean_delay_ms.mean, base.mean_delay_ms.mean, false);
        jit = relative_gain_pct(row.jitter_ms.mean, base.jitter_ms.mean, false);
        loss = relative_gain_pct(row.plr.mean, base.plr.mean, false);
        have_baseline = true;
      };
      if (base.algorithm == "a3")
        set(row.gain_throughput_vs_a3, row.gain_delay_vs_a3, row.gain_jitter_vs_a3,
            row.gain_plr_vs_a3);
      else if (base.algorithm == "rebuha")
        set(row.gain_throughput_vs_rebuha, row.gain_delay_vs_rebuha, row.gain_jitter_vs_rebuha,
            row.gain_plr_vs_rebuha);
    }
    if (!have_baseline)
      table.warnings.push_back("no baseline runs for cdql with " + std::to_string(row.n_ues) +
                               " UEs; gains left empty");
  }
  return table;
}

void write_summary_csv(const SummaryTable& table, const fs::path& path) {
  auto out = open_out(path);
  out << summary_csv_header() << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
  for (const auto& r : table.rows) {
    out << r.algorithm << ',' << r.n_ues << ',' << mobility_tag(r.mobility) << ','
        << r.throughput_bps.n << ',' << num(r.throughput_bps.mean) << ','
        << num(r.throughput_bps.half_width) << ',' << num(r.mean_delay_ms.mean) << ','
        << num(r.mean_delay_ms.half_width) << ',' << num(r.jitter_ms.mean) << ','
        << num(r.jitter_ms.half_width) << ',' << num(r.plr.mean) << ','
        << num(r.plr.half_width) << ',' << (r.single_seed ? "single-seed-ci-zero" : "") << ','
        << opt(r.gain_throughput_vs_a3) << ',' << opt(r.gain_delay_vs_a3) << ','
        << opt(r.gain_jitter_vs_a3) << ',' << opt(r.gain_plr_vs_a3) << ','
        << opt(r.gain_throughput_vs_rebuha) << ',' << opt(r.gain_delay_vs_rebuha) << ','
        << opt(r.gain_jitter_vs_rebuha) << ',' << opt(r.gain_plr_vs_rebuha) << '\n';
  }
  check_written(out, path);
}

}  // namespace mlb
