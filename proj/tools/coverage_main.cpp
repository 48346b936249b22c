// Command-line front end.
//   coverage run [config.yaml] [--preset NAME] [--learner KIND] [--out DIR] ...
//   coverage bench [--learners gp,rfgp,orfgp] [--points 100,200,400,800]
//   coverage oracle [config.yaml] [--preset NAME] [--out DIR]
//   coverage validate [config.yaml] [--preset NAME]
// Precedence: preset defaults < config file < command-line flags.
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cov/runner.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string preset;
  std::string learner;
  std::uint64_t seed_noise = 0, seed_features = 0, seed_init = 0,
                seed_oracle = 0;
  int steps = 0;
  double grid_h = 0.0;
  std::string data_window;
  std::string out_dir;
  bool emit_timing = false;
  bool progress = false;
};

void add_config_options(CLI::App* cmd, CommonOpts& o, bool with_run_flags) {
  cmd->add_option("config", o.config_path, "YAML configuration file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--preset", o.preset, "built-in scenario preset")
      ->check(CLI::IsMember(cov::preset_names()));
  cmd->add_option("--learner", o.learner, "learner kind")
      ->check(CLI::IsMember({"gp", "rfgp", "orfgp", "known"}));
  cmd->add_option("--seed-noise", o.seed_noise, "measurement noise seed");
  cmd->add_option("--seed-features", o.seed_features, "feature draw seed");
  cmd->add_option("--seed-init", o.seed_init, "initial placement seed");
  cmd->add_option("--seed-oracle", o.seed_oracle, "oracle restart seed");
  if (with_run_flags) {
    cmd->add_option("--steps", o.steps, "number of simulation steps")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--grid-h", o.grid_h, "grid cell size")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--data-window", o.data_window, "all | current")
        ->check(CLI::IsMember({"all", "current"}));
    cmd->add_flag("--emit-timing", o.emit_timing,
                  "record learner update wall time in the CSV");
    cmd->add_flag("--progress", o.progress, "print progress to stderr");
  }
  cmd->add_option("--out", o.out_dir, "output directory");
}

bool given(const CLI::App* cmd, const std::string& name) {
  const CLI::Option* opt =
      const_cast<CLI::App*>(cmd)->get_option_no_throw(name);
  return opt && opt->count() > 0;
}

cov::ScenarioConfig resolve_config(const CLI::App* cmd, const CommonOpts& o) {
  std::string kind = "orfgp";
  if (!o.learner.empty())
    kind = o.learner;
  else if (!o.config_path.empty())
    kind = cov::peek_learner_kind(o.config_path, kind);

  cov::ScenarioConfig cfg = o.preset.empty()
                                ? cov::default_config(kind)
                                : cov::preset_config(o.preset, kind);
  if (!o.config_path.empty()) cov::overlay_yaml_file(cfg, o.config_path);
  if (!o.learner.empty() && o.learner != "known") cfg.learner = o.learner;
  if (o.learner == "known") cfg.learner = "known";

  if (given(cmd, "--seed-noise")) cfg.seeds.noise = o.seed_noise;
  if (given(cmd, "--seed-features")) cfg.seeds.features = o.seed_features;
  if (given(cmd, "--seed-init")) cfg.seeds.init = o.seed_init;
  if (given(cmd, "--seed-oracle")) cfg.seeds.oracle = o.seed_oracle;
  if (given(cmd, "--steps")) cfg.steps = o.steps;
  if (given(cmd, "--grid-h")) cfg.h = o.grid_h;
  if (given(cmd, "--data-window")) cfg.data_window = o.data_window;
  if (given(cmd, "--emit-timing")) cfg.emit_timing = true;
  return cfg;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    out.push_back(std::stoi(s.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return out;
}

std::vector<std::string> parse_str_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    out.push_back(s.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-robot coverage with online density learning"};
  app.require_subcommand(1);

  CommonOpts run_o, oracle_o, validate_o;
  CLI::App* run_cmd = app.add_subcommand("run", "simulate a scenario");
  add_config_options(run_cmd, run_o, true);

  CLI::App* bench_cmd =
      app.add_subcommand("bench", "time learner updates vs history size");
  std::string bench_learners = "gp,rfgp,orfgp";
  std::string bench_points = "100,200,400,800";
  std::string bench_out;
  bench_cmd->add_option("--learners", bench_learners,
                        "comma-separated learner kinds");
  bench_cmd->add_option("--points", bench_points,
                        "comma-separated history sizes");
  bench_cmd->add_option("--out", bench_out, "also write the table to a file");

  CLI::App* oracle_cmd = app.add_subcommand(
      "oracle", "precompute the reference coverage optimum");
  add_config_options(oracle_cmd, oracle_o, false);

  CLI::App* validate_cmd =
      app.add_subcommand("validate", "check a configuration and print its hash");
  add_config_options(validate_cmd, validate_o, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      cov::ScenarioConfig cfg = resolve_config(run_cmd, run_o);
      cov::RunOptions opts;
      opts.out_dir = run_o.out_dir;
      opts.echo_progress = run_o.progress;
      cov::RunOutcome out = cov::run_scenario(cfg, opts);
      const cov::StepRecord& last = out.records.back();
      std::printf("steps=%zu final_cost=%.6g final_mse=%.6g gamma=%.6g%s\n",
                  out.records.size(), last.cost_true, last.mse, last.gamma,
                  out.clean ? "" : " [nonfinite metrics]");
      if (!run_o.out_dir.empty())
        std::printf("wrote %s/{run.csv,manifest.json,state.json}\n",
                    run_o.out_dir.c_str());
      return out.clean ? 0 : 2;
    }
    if (*bench_cmd) {
      cov::ScenarioConfig base = cov::default_config("orfgp");
      std::vector<cov::BenchSeries> series = cov::bench_scaling(
          parse_str_list(bench_learners), parse_int_list(bench_points), base);
      std::string table = cov::bench_table(series);
      std::fputs(table.c_str(), stdout);
      if (!bench_out.empty()) {
        std::ofstream f(bench_out, std::ios::binary);
        f << table;
      }
      return 0;
    }
    if (*oracle_cmd) {
      cov::ScenarioConfig cfg = resolve_config(oracle_cmd, oracle_o);
      cov::validate(cfg);
      cov::CvtReference ref = cov::compute_oracle(cfg);
      nlohmann::json j;
      j["cost"] = ref.cost;
      nlohmann::json pos = nlohmann::json::array();
      for (const cov::Point2& p : ref.positions) pos.push_back({p.x, p.y});
      j["positions"] = pos;
      j["best_restart"] = ref.best_restart;
      j["all_converged"] = ref.all_converged;
      j["config_hash"] = cov::config_hash(cfg);
      std::string body = j.dump(2) + "\n";
      std::fputs(body.c_str(), stdout);
      if (!oracle_o.out_dir.empty()) {
        std::filesystem::create_directories(oracle_o.out_dir);
        std::ofstream f(std::filesystem::path(oracle_o.out_dir) /
                            "oracle.json",
                        std::ios::binary);
        f << body;
      }
      return 0;
    }
    if (*validate_cmd) {
      cov::ScenarioConfig cfg = resolve_config(validate_cmd, validate_o);
      cov::validate(cfg);
      std::printf("valid; config hash %s\n", cov::config_hash(cfg).c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
