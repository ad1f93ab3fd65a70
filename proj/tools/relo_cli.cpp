// relo: command-line driver for prioritized-replay experiments.
//
//   relo run    --env noisy_chain --scheme relo --mapping clip --seed 3 --steps 30000 --out runs/
//   relo sweep  --config sweep.ini --out results/
//   relo report --in results/ --out summary.csv
//
// Exit codes: 0 success, 1 configuration error, 2 divergence in at least one
// run.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "relo/errors.hpp"
#include "relo/experiment.hpp"
#include "relo/settings.hpp"

namespace fs = std::filesystem;
using namespace relo::experiment;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kDiverged = 2;

// Flags that map one-to-one onto config keys. Values given on the command
// line override the config file.
struct Overrides {
  std::optional<std::string> env, scheme, mapping, seed, steps, sigma, length, eval_every,
      eval_episodes, schemes, seeds, jobs;
  std::vector<std::string> sets;

  void add_to(CLI::App& app, bool sweep) {
    app.add_option("--env", env, "noisy_chain | windy_grid");
    app.add_option("--mapping", mapping, "ReLo mapping: clip | explinear");
    app.add_option("--steps", steps, "Environment steps per run");
    app.add_option("--sigma", sigma, "Reward noise std on the chain");
    app.add_option("--length", length, "Chain length");
    app.add_option("--eval-every", eval_every, "Steps between evaluation points");
    app.add_option("--eval-episodes", eval_episodes, "Greedy episodes per evaluation");
    if (sweep) {
      app.add_option("--schemes", schemes, "Comma list, e.g. uniform,per,relo");
      app.add_option("--seeds", seeds, "Comma list or range, e.g. 0-4");
      app.add_option("--jobs", jobs, "Runs executed in parallel");
    } else {
      app.add_option("--scheme", scheme, "uniform | per | relo");
      app.add_option("--seed", seed, "Run seed");
    }
    app.add_option("--set", sets, "Extra key=value overrides (repeatable)");
  }

  void append(Settings& s) const {
    auto put = [&](const char* key, const std::optional<std::string>& v) {
      if (v) s.emplace_back(key, *v);
    };
    put("env", env);
    put("scheme", scheme);
    put("mapping", mapping);
    put("seed", seed);
    put("steps", steps);
    put("sigma", sigma);
    put("length", length);
    put("eval_every", eval_every);
    put("eval_episodes", eval_episodes);
    put("schemes", schemes);
    put("seeds", seeds);
    put("jobs", jobs);
    for (const std::string& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw relo::ConfigError("--set expects key=value, got " + kv);
      s.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
  }
};

Settings gather(const std::optional<std::string>& config_path, const Overrides& o) {
  Settings s;
  if (config_path) s = read_ini_file(*config_path);
  o.append(s);
  return s;
}

int do_run(const std::optional<std::string>& config_path, const Overrides& o,
           const std::string& out_dir) {
  const RunConfig cfg = run_config_from(gather(config_path, o));
  const RunResult result = run(cfg);
  fs::create_directories(out_dir);
  const fs::path path = fs::path(out_dir) / run_file_name(cfg);
  std::ofstream f(path);
  write_run_csv(f, result.records);
  std::cout << "wrote " << path.string() << " (" << result.records.size() << " rows)\n";
  if (result.diverged) {
    std::cerr << "run diverged: " << result.error << '\n';
    return kDiverged;
  }
  if (!result.records.empty()) {
    const RunRecord& last = result.records.back();
    std::cout << "final eval_return " << last.eval_return << ", td_loss " << last.td_loss
              << ", prio noisy/clean " << last.prio_noisy_mean << " / " << last.prio_clean_mean
              << '\n';
  }
  return kOk;
}

int do_sweep(const std::optional<std::string>& config_path, const Overrides& o,
             const std::string& out_dir) {
  const SweepSpec spec = sweep_spec_from(gather(config_path, o));
  const SweepResult result = sweep(spec, out_dir);
  write_summary_text(std::cout, result.summary);
  for (const std::string& f : result.failures) std::cerr << "diverged: " << f << '\n';
  return result.failures.empty() ? kOk : kDiverged;
}

int do_report(const std::string& in_dir, const std::string& out_path) {
  const auto rows = report(in_dir);
  std::ofstream f(out_path);
  if (!f) throw relo::ConfigError("cannot write " + out_path);
  write_summary_csv(f, rows);
  write_summary_text(std::cout, rows);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prioritized experience replay experiments (uniform, PER, reducible loss)"};
  app.require_subcommand(1);

  std::optional<std::string> run_config, sweep_config;
  std::string run_out = "runs", sweep_out = "results", report_in = "results",
              report_out = "summary.csv";
  Overrides run_o, sweep_o;

  auto* run_cmd = app.add_subcommand("run", "Train one configuration and write its CSV");
  run_cmd->add_option("--config", run_config, "INI file with run settings");
  run_cmd->add_option("--out", run_out, "Output directory");
  run_o.add_to(*run_cmd, false);

  auto* sweep_cmd = app.add_subcommand("sweep", "Run schemes x seeds and aggregate");
  sweep_cmd->add_option("--config", sweep_config, "INI file with sweep settings");
  sweep_cmd->add_option("--out", sweep_out, "Output directory");
  sweep_o.add_to(*sweep_cmd, true);

  auto* report_cmd = app.add_subcommand("report", "Summarize a sweep directory");
  report_cmd->add_option("--in", report_in, "Sweep output directory");
  report_cmd->add_option("--out", report_out, "Summary CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run_cmd) return do_run(run_config, run_o, run_out);
    if (*sweep_cmd) return do_sweep(sweep_config, sweep_o, sweep_out);
    if (*report_cmd) return do_report(report_in, report_out);
  } catch (const relo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const relo::InvalidInput& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}
