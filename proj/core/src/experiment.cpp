#include "relo/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "relo/errors.hpp"
#include "relo/metrics.hpp"

namespace relo::experiment {

namespace fs = std::filesystem;

RunConfig::RunConfig() {
  // Tie the beta ramp to the run length unless configured otherwise.
  replay.beta.horizon = 0;
}

void RunConfig::validate() const {
  scheme.validate();
  agent.validate();
  if (total_env_steps <= 0 || eval_every <= 0 || eval_episodes == 0) {
    throw ConfigError("steps, eval_every and eval_episodes must be positive");
  }
  if (replay.capacity == 0) throw ConfigError("capacity must be positive");
  if (!(replay.alpha >= 0.0 && replay.alpha < 1.0)) throw ConfigError("alpha must lie in [0, 1)");
  if (replay.epsilon != scheme.epsilon) throw ConfigError("scheme and buffer epsilon differ");
  if (replay.capacity < agent.train_start) throw ConfigError("capacity is below train_start");
}

void RunConfig::set_epsilon(double eps) {
  scheme.epsilon = eps;
  replay.epsilon = eps;
}

std::string format_double(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

namespace {

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    // from_chars does not accept "nan"/"inf" spellings from every producer.
    if (text == "nan" || text == "-nan") return std::numeric_limits<double>::quiet_NaN();
    throw InvalidInput("not a number: '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <std::size_t N>
void write_header(std::ostream& out, const std::array<std::string_view, N>& columns) {
  for (std::size_t i = 0; i < N; ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
}

template <std::size_t N>
void expect_header(std::istream& in, const std::array<std::string_view, N>& columns,
                   const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput(std::string(what) + ": missing header");
  const auto cells = split_csv_line(line);
  bool ok = cells.size() == N;
  for (std::size_t i = 0; ok && i < N; ++i) ok = cells[i] == columns[i];
  if (!ok) throw InvalidInput(std::string(what) + ": unexpected header '" + line + "'");
}

}  // namespace

double evaluate(const agent::LearnerState& learner, envs::Environment& env, std::size_t episodes,
                Rng& rng) {
  double total = 0.0;
  for (std::size_t e = 0; e < episodes; ++e) {
    std::vector<double> obs = env.reset(rng);
    while (true) {
      const std::size_t a = agent::argmax(learner.online.forward(obs));
      envs::EnvStep s = env.step(a, rng);
      total += s.reward;
      if (s.episode_over()) break;
      obs = std::move(s.next_obs);
    }
  }
  return total / static_cast<double>(episodes);
}

RunResult run(const RunConfig& cfg_in, std::ostream* trace) {
  RunConfig cfg = cfg_in;
  if (cfg.replay.beta.horizon <= 0) cfg.replay.beta.horizon = cfg.total_env_steps;
  cfg.validate();

  Rng env_rng = make_stream(cfg.seed, "env");
  Rng explore_rng = make_stream(cfg.seed, "explore");
  Rng buffer_rng = make_stream(cfg.seed, "buffer");
  Rng init_rng = make_stream(cfg.seed, "init");
  Rng eval_rng = make_stream(cfg.seed, "eval");

  auto env = envs::make_environment(cfg.env);
  auto eval_env = env->clone();
  agent::LearnerState learner =
      agent::make_learner(env->observation_dim(), env->action_count(), cfg.agent, init_rng);
  PrioritizedBuffer buffer(cfg.replay);
  buffer.set_trace(trace);

  using Clock = std::chrono::steady_clock;
  RunResult result;
  double loss_sum = 0.0;
  std::int64_t loss_count = 0;
  Clock::duration busy{};
  std::int64_t window_steps = 0;

  std::vector<double> obs = env->reset(env_rng);
  try {
    for (std::int64_t t = 0; t < cfg.total_env_steps; ++t) {
      const auto tick = Clock::now();
      buffer.set_trace_step(t);
      const std::size_t action = agent::act(learner, obs, t, cfg.agent, explore_rng);
      envs::EnvStep s = env->step(action, env_rng);
      const bool over = s.episode_over();
      std::vector<double> next = s.next_obs;
      buffer.push(Transition{std::move(obs), static_cast<int>(action), s.reward,
                             std::move(s.next_obs), s.done, s.tag});
      obs = over ? env->reset(env_rng) : std::move(next);
      learner.env_step = t + 1;

      if (buffer.size() >= cfg.agent.train_start) {
        for (std::size_t g = 0; g < cfg.agent.grad_steps_per_env_step; ++g) {
          const agent::StepReport report =
              agent::train_on_batch(learner, buffer, cfg.agent, cfg.scheme, buffer_rng);
          loss_sum += report.mean_td_loss;
          ++loss_count;
          agent::maybe_update_target(learner, cfg.agent);
        }
      }
      busy += Clock::now() - tick;
      ++window_steps;

      if ((t + 1) % cfg.eval_every == 0) {
        RunRecord r;
        r.step = t + 1;
        r.eval_return = evaluate(learner, *eval_env, cfg.eval_episodes, eval_rng);
        r.td_loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
        r.prio_noisy_mean = buffer.mean_raw_priority(Tag::noisy);
        r.prio_clean_mean = buffer.mean_raw_priority(Tag::clean);
        if (cfg.record_timing) {
          const double ms = std::chrono::duration<double, std::milli>(busy).count();
          r.ms_per_1k = ms * 1000.0 / static_cast<double>(window_steps);
        }
        result.records.push_back(r);
        loss_sum = 0.0;
        loss_count = 0;
        busy = {};
        window_steps = 0;
      }
    }
  } catch (const TrainingDiverged& e) {
    result.diverged = true;
    result.error = e.what();
  }
  return result;
}

void write_run_csv(std::ostream& out, std::span<const RunRecord> records) {
  write_header(out, kRunCsvColumns);
  for (const RunRecord& r : records) {
    out << r.step << ',' << format_double(r.eval_return) << ',' << format_double(r.td_loss) << ','
        << format_double(r.prio_noisy_mean) << ',' << format_double(r.prio_clean_mean) << ','
        << format_double(r.ms_per_1k) << '\n';
  }
}

std::vector<RunRecord> read_run_csv(std::istream& in) {
  expect_header(in, kRunCsvColumns, "run csv");
  std::vector<RunRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split_csv_line(line);
    if (c.size() != kRunCsvColumns.size()) throw InvalidInput("run csv: bad row '" + line + "'");
    RunRecord r;
    r.step = static_cast<std::int64_t>(parse_double(c[0]));
    r.eval_return = parse_double(c[1]);
    r.td_loss = parse_double(c[2]);
    r.prio_noisy_mean = parse_double(c[3]);
    r.prio_clean_mean = parse_double(c[4]);
    r.ms_per_1k = parse_double(c[5]);
    out.push_back(r);
  }
  return out;
}

std::string run_file_name(const RunConfig& cfg) {
  return envs::make_environment(cfg.env)->name() + "_" + cfg.scheme.name() + "_seed" +
         std::to_string(cfg.seed) + ".csv";
}

AggregateRow aggregate_row(const RunConfig& cfg, std::span<const RunRecord> records) {
  AggregateRow row;
  row.scheme = cfg.scheme.name();
  row.env = envs::make_environment(cfg.env)->name();
  row.seed = cfg.seed;
  if (records.empty()) {
    row.final_return = row.final_td_loss = row.auc_return = std::numeric_limits<double>::quiet_NaN();
    return row;
  }
  row.final_return = records.back().eval_return;
  row.final_td_loss = records.back().td_loss;
  double sum = 0.0;
  for (const RunRecord& r : records) sum += r.eval_return;
  row.auc_return = sum / static_cast<double>(records.size());
  return row;
}

void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows) {
  write_header(out, kAggregateCsvColumns);
  for (const AggregateRow& r : rows) {
    out << r.scheme << ',' << r.env << ',' << r.seed << ',' << format_double(r.final_return) << ','
        << format_double(r.final_td_loss) << ',' << format_double(r.auc_return) << '\n';
  }
}

std::vector<AggregateRow> read_aggregate_csv(std::istream& in) {
  expect_header(in, kAggregateCsvColumns, "aggregate csv");
  std::vector<AggregateRow> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split_csv_line(line);
    if (c.size() != kAggregateCsvColumns.size()) {
      throw InvalidInput("aggregate csv: bad row '" + line + "'");
    }
    out.push_back({c[0], c[1], static_cast<std::uint64_t>(std::stoull(c[2])), parse_double(c[3]),
                   parse_double(c[4]), parse_double(c[5])});
  }
  return out;
}

void write_references_csv(std::ostream& out, std::span<const EnvReference> refs) {
  out << "env,low,high\n";
  for (const EnvReference& r : refs) {
    out << r.env << ',' << format_double(r.low) << ',' << format_double(r.high) << '\n';
  }
}

std::vector<EnvReference> read_references_csv(std::istream& in) {
  expect_header(in, std::array<std::string_view, 3>{"env", "low", "high"}, "references csv");
  std::vector<EnvReference> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split_csv_line(line);
    if (c.size() != 3) throw InvalidInput("references csv: bad row '" + line + "'");
    out.push_back({c[0], parse_double(c[1]), parse_double(c[2])});
  }
  return out;
}

std::vector<SummaryRow> summarize(std::span<const AggregateRow> rows,
                                  std::span<const EnvReference> refs,
                                  std::uint64_t bootstrap_seed) {
  std::map<std::string, EnvReference> ref_by_env;
  for (const EnvReference& r : refs) ref_by_env[r.env] = r;

  std::vector<std::string> order;
  std::map<std::string, std::vector<const AggregateRow*>> by_scheme;
  for (const AggregateRow& r : rows) {
    if (!by_scheme.contains(r.scheme)) order.push_back(r.scheme);
    by_scheme[r.scheme].push_back(&r);
  }

  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<SummaryRow> out;
  for (const std::string& scheme : order) {
    std::vector<double> scores;
    double td_sum = 0.0;
    for (const AggregateRow* r : by_scheme[scheme]) {
      if (std::isnan(r->final_return)) continue;
      const auto it = ref_by_env.find(r->env);
      if (it == ref_by_env.end()) throw InvalidInput("summary: no reference for env " + r->env);
      scores.push_back(metrics::normalized_score(r->final_return, it->second.low, it->second.high));
      td_sum += r->final_td_loss;
    }
    SummaryRow s;
    s.scheme = scheme;
    s.runs = scores.size();
    s.iqm = s.iqm_low = s.iqm_high = s.mean_low = s.mean_high = nan;
    s.median = s.mean = s.optimality_gap = s.mean_final_td_loss = nan;
    if (!scores.empty()) {
      s.median = metrics::median(scores);
      s.mean = metrics::mean(scores);
      s.optimality_gap = metrics::optimality_gap(std::span<const double>(scores));
      s.mean_final_td_loss = td_sum / static_cast<double>(scores.size());
    }
    if (scores.size() >= 4) s.iqm = metrics::iqm(scores);
    if (scores.size() >= 2) {
      Rng rng = make_stream(bootstrap_seed, "bootstrap:" + scheme);
      const auto mean_ci = metrics::bootstrap_ci(
          scores, [](std::span<const double> x) { return metrics::mean(x); }, rng);
      s.mean_low = mean_ci.low;
      s.mean_high = mean_ci.high;
      if (scores.size() >= 4) {
        const auto iqm_ci = metrics::bootstrap_ci(
            scores, [](std::span<const double> x) { return metrics::iqm(x); }, rng);
        s.iqm_low = iqm_ci.low;
        s.iqm_high = iqm_ci.high;
      }
    }
    out.push_back(s);
  }
  return out;
}

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows) {
  out << "scheme,runs,iqm,iqm_low,iqm_high,median,mean,mean_low,mean_high,optimality_gap,"
         "mean_final_td_loss\n";
  for (const SummaryRow& s : rows) {
    out << s.scheme << ',' << s.runs << ',' << format_double(s.iqm) << ','
        << format_double(s.iqm_low) << ',' << format_double(s.iqm_high) << ','
        << format_double(s.median) << ',' << format_double(s.mean) << ','
        << format_double(s.mean_low) << ',' << format_double(s.mean_high) << ','
        << format_double(s.optimality_gap) << ',' << format_double(s.mean_final_td_loss) << '\n';
  }
}

void write_summary_text(std::ostream& out, std::span<const SummaryRow> rows) {
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %4s %8s %19s %8s %8s %8s %10s\n", "scheme", "runs", "IQM",
                "IQM 95% CI", "median", "mean", "opt.gap", "td_loss");
  out << line;
  for (const SummaryRow& s : rows) {
    std::snprintf(line, sizeof line, "%-16s %4zu %8.4f [%8.4f, %8.4f] %8.4f %8.4f %8.4f %10.5f\n",
                  s.scheme.c_str(), s.runs, s.iqm, s.iqm_low, s.iqm_high, s.median, s.mean,
                  s.optimality_gap, s.mean_final_td_loss);
    out << line;
  }
}

double report_timing(std::span<const RunRecord> candidate, std::span<const RunRecord> baseline) {
  auto median_ms = [](std::span<const RunRecord> records) {
    std::vector<double> ms;
    for (const RunRecord& r : records) ms.push_back(r.ms_per_1k);
    return metrics::median(ms);
  };
  const double base = median_ms(baseline);
  if (!(base > 0.0)) throw InvalidInput("report_timing: baseline has no timing data");
  return median_ms(candidate) / base;
}

SweepResult sweep(const SweepSpec& spec, const fs::path& out) {
  if (spec.schemes.empty() || spec.seeds.empty()) {
    throw ConfigError("sweep: schemes and seeds must be non-empty");
  }
  fs::create_directories(out / "runs");

  std::vector<RunConfig> configs;
  for (const SchemeConfig& scheme : spec.schemes) {
    for (std::uint64_t seed : spec.seeds) {
      RunConfig cfg = spec.base;
      cfg.scheme = scheme;
      cfg.scheme.epsilon = spec.base.replay.epsilon;
      cfg.seed = seed;
      cfg.validate();
      configs.push_back(std::move(cfg));
    }
  }

  std::vector<RunResult> results(configs.size());
  std::size_t next = 0;
  std::mutex mu;
  auto worker = [&] {
    while (true) {
      std::size_t i;
      {
        std::lock_guard lock(mu);
        if (next >= configs.size()) return;
        i = next++;
      }
      results[i] = run(configs[i]);
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(spec.jobs, configs.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  SweepResult res;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    std::ofstream f(out / "runs" / run_file_name(configs[i]));
    write_run_csv(f, results[i].records);
    if (results[i].diverged) {
      res.failures.push_back(run_file_name(configs[i]) + ": " + results[i].error);
    }
    res.rows.push_back(aggregate_row(configs[i], results[i].records));
  }

  auto env = envs::make_environment(spec.base.env);
  const std::vector<EnvReference> refs = {
      {env->name(), env->failure_return(), env->optimal_return()}};
  {
    std::ofstream f(out / "aggregate.csv");
    write_aggregate_csv(f, res.rows);
  }
  {
    std::ofstream f(out / "references.csv");
    write_references_csv(f, refs);
  }
  res.summary = summarize(res.rows, refs);
  {
    std::ofstream f(out / "summary.csv");
    write_summary_csv(f, res.summary);
  }
  {
    std::ofstream f(out / "summary.txt");
    write_summary_text(f, res.summary);
  }
  return res;
}

std::vector<SummaryRow> report(const fs::path& in) {
  std::ifstream agg(in / "aggregate.csv");
  if (!agg) throw ConfigError("report: cannot open " + (in / "aggregate.csv").string());
  std::ifstream refs(in / "references.csv");
  if (!refs) throw ConfigError("report: cannot open " + (in / "references.csv").string());
  const auto rows = read_aggregate_csv(agg);
  const auto references = read_references_csv(refs);
  return summarize(rows, references);
}

}  // namespace relo::experiment
