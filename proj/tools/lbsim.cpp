// lbsim: run load-balancing experiments and summarize their results.

#include "mlb/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace {

template <class T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::stringstream conv(item);
    T v{};
    if (!(conv >> v) || !conv.eof())
      throw mlb::InvalidInput(std::string(flag) + ": cannot parse '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw mlb::InvalidInput(std::string(flag) + " needs at least one value");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-cell load balancing simulator (CDQL, A3, ReBUHA)"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment plan and write CSV results");
  std::string config_path, algos, ues, seeds, out;
  std::optional<double> mobility, speed;
  std::optional<int> episodes, steps, jobs;
  bool quick = false, save_agent = false;
  run->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  run->add_option("--algo", algos, "cdql|a3|rebuha, comma separated");
  run->add_option("--ues", ues, "UE counts, e.g. 30,35,40");
  run->add_option("--mobility-fraction", mobility, "share of mobile UEs in [0,1]");
  run->add_option("--speed", speed, "mobile UE speed in m/s");
  run->add_option("--seeds", seeds, "replication seeds, e.g. 1,2,3");
  run->add_option("--episodes", episodes, "training episodes per run");
  run->add_option("--steps", steps, "agent steps per episode");
  run->add_option("--out", out, "output directory");
  run->add_option("--jobs", jobs, "parallel scenario workers");
  run->add_flag("--quick", quick, "3 seeds, 40 episodes, 30 UEs");
  run->add_flag("--save-agent", save_agent, "write agent.json checkpoints for cdql runs");

  auto* sum = app.add_subcommand("summarize", "Aggregate a result directory into summary.csv");
  std::string result_dir;
  sum->add_option("dir", result_dir, "result directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      auto cfg = config_path.empty() ? mlb::parse_config("") : mlb::load_config(config_path);
      auto& plan = cfg.plan;
      if (quick) plan.apply_quick_profile();
      if (!algos.empty()) {
        plan.algorithms.clear();
        for (const auto& a : parse_list<std::string>(algos, "--algo"))
          plan.algorithms.push_back(mlb::parse_algorithm(a));
      }
      if (!ues.empty()) plan.ue_counts = parse_list<int>(ues, "--ues");
      if (!seeds.empty()) plan.seeds = parse_list<std::uint64_t>(seeds, "--seeds");
      if (mobility) plan.mobility_fraction = *mobility;
      if (speed) plan.speed_mps = *speed;
      if (episodes) plan.episodes = *episodes;
      if (steps) plan.steps_per_episode = *steps;
      if (jobs) plan.jobs = *jobs;
      if (!out.empty()) plan.output_dir = out;
      if (save_agent) plan.save_agent = true;
      cfg.validate();

      const auto results = mlb::run_experiment(cfg);
      std::cout << "completed " << results.size() << " scenario(s) in " << plan.output_dir << '\n';
      const auto table = mlb::summarize(plan.output_dir);
      for (const auto& w : table.warnings) std::cerr << "warning: " << w << '\n';
    } else if (sum->parsed()) {
      const auto table = mlb::summarize(result_dir);
      for (const auto& w : table.warnings) std::cerr << "warning: " << w << '\n';
      const auto path = std::filesystem::path(result_dir) / "summary.csv";
      mlb::write_summary_csv(table, path);
      std::cout << "wrote " << path.string() << " (" << table.rows.size() << " rows)\n";
    }
  } catch (const mlb::InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
