#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relo/agent.hpp"
#include "relo/envs.hpp"
#include "relo/priority.hpp"
#include "relo/replay.hpp"

namespace relo::experiment {

struct RunConfig {
  envs::EnvConfig env;
  SchemeConfig scheme;
  agent::AgentConfig agent;
  ReplayConfig replay;
  std::int64_t total_env_steps = 30000;
  std::int64_t eval_every = 1000;
  std::size_t eval_episodes = 10;
  std::uint64_t seed = 0;
  // When false the ms_per_1k column is written as 0 so that the whole CSV is
  // reproducible byte for byte.
  bool record_timing = true;

  RunConfig();

  // Throws ConfigError.
  void validate() const;
  // Sets epsilon on both the scheme and the buffer.
  void set_epsilon(double eps);
};

// One row per evaluation point.
struct RunRecord {
  std::int64_t step = 0;
  double eval_return = 0.0;
  double td_loss = 0.0;  // mean batch TD loss over the window since the previous row
  double prio_noisy_mean = 0.0;
  double prio_clean_mean = 0.0;
  double ms_per_1k = 0.0;

  bool operator==(const RunRecord&) const = default;
};

struct RunResult {
  std::vector<RunRecord> records;
  bool diverged = false;
  std::string error;
};

// Runs the act / store / sample / train / reprioritize / target-update loop.
// Every random draw comes from a named sub-stream of cfg.seed. Divergence is
// caught and reported with the records gathered so far. `trace`, if given,
// receives the buffer trace.
RunResult run(const RunConfig& cfg, std::ostream* trace = nullptr);

// Mean undiscounted return of `episodes` greedy episodes.
double evaluate(const agent::LearnerState& learner, envs::Environment& env, std::size_t episodes,
                Rng& rng);

inline constexpr std::array<std::string_view, 6> kRunCsvColumns = {
    "step", "eval_return", "td_loss", "prio_noisy_mean", "prio_clean_mean", "ms_per_1k"};
inline constexpr std::array<std::string_view, 6> kAggregateCsvColumns = {
    "scheme", "env", "seed", "final_return", "final_td_loss", "auc_return"};

void write_run_csv(std::ostream& out, std::span<const RunRecord> records);
std::vector<RunRecord> read_run_csv(std::istream& in);

// File name used for a run inside a sweep's runs/ directory.
std::string run_file_name(const RunConfig& cfg);

struct AggregateRow {
  std::string scheme;
  std::string env;
  std::uint64_t seed = 0;
  double final_return = 0.0;
  double final_td_loss = 0.0;
  double auc_return = 0.0;  // mean eval return over all evaluation points
};

AggregateRow aggregate_row(const RunConfig& cfg, std::span<const RunRecord> records);
void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows);
std::vector<AggregateRow> read_aggregate_csv(std::istream& in);

// Normalization constants per environment: failure return and optimal
// return.
struct EnvReference {
  std::string env;
  double low = 0.0;
  double high = 1.0;
};

void write_references_csv(std::ostream& out, std::span<const EnvReference> refs);
std::vector<EnvReference> read_references_csv(std::istream& in);

struct SummaryRow {
  std::string scheme;
  std::size_t runs = 0;
  double iqm = 0.0;
  double iqm_low = 0.0;
  double iqm_high = 0.0;
  double median = 0.0;
  double mean = 0.0;
  double mean_low = 0.0;
  double mean_high = 0.0;
  double optimality_gap = 0.0;
  double mean_final_td_loss = 0.0;
};

// Statistics over normalized final returns, one row per scheme in first
// appearance order. IQM fields are NaN with fewer than 4 runs, interval
// fields with fewer than 2.
std::vector<SummaryRow> summarize(std::span<const AggregateRow> rows,
                                  std::span<const EnvReference> refs,
                                  std::uint64_t bootstrap_seed = 0);
void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows);
void write_summary_text(std::ostream& out, std::span<const SummaryRow> rows);

// Median ms_per_1k of `candidate` divided by that of `baseline`.
double report_timing(std::span<const RunRecord> candidate, std::span<const RunRecord> baseline);

struct SweepSpec {
  RunConfig base;
  std::vector<SchemeConfig> schemes;
  std::vector<std::uint64_t> seeds;
  std::size_t jobs = 1;
};

struct SweepResult {
  std::vector<AggregateRow> rows;
  std::vector<SummaryRow> summary;
  std::vector<std::string> failures;
};

// Writes runs/<run>.csv for each (scheme, seed), aggregate.csv,
// references.csv, summary.csv and summary.txt under `out`.
SweepResult sweep(const SweepSpec& spec, const std::filesystem::path& out);

// Recomputes the summary from a sweep directory's aggregate.csv and
// references.csv.
std::vector<SummaryRow> report(const std::filesystem::path& in);

// Printable double that parses back to the identical value.
std::string format_double(double x);

}  // namespace relo::experiment
