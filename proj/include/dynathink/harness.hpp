#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynathink/backends.hpp"
#include "dynathink/datasets.hpp"
#include "dynathink/orchestrator.hpp"
#include "dynathink/types.hpp"

namespace dynathink {

/// Invalid run configuration; `field()` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class BackendKind { Http, Fixture, Synthetic };
enum class Command { Run, Baseline, Sweep };

std::string to_string(BackendKind kind);
BackendKind parse_backend_kind(const std::string& text);

struct SweepGrid {
  std::vector<ThresholdMode> threshold_modes = {ThresholdMode::Plurality, ThresholdMode::StrictMajority,
                                                ThresholdMode::Unanimous};
  std::vector<VerificationOrder> verification_orders = {VerificationOrder::ConsistencyThenSteps,
                                                        VerificationOrder::StepsThenConsistency};
  std::vector<int> budget_caps = {5, 7, 10};
  // Adds one self-consistency row per cap.
  bool with_baseline = false;
};

struct RunConfig {
  std::optional<std::string> dataset;
  AnswerKind dataset_format = AnswerKind::Numeric;
  BackendKind backend = BackendKind::Fixture;
  std::string fixture;
  std::string profile;
  std::optional<std::uint64_t> seed;
  HttpBackendConfig http;
  PolicyConfig policy;
  RunOptions options;
  std::optional<std::string> prompt_prefix_file;
  std::string out_dir = "out";
  // Wall time varies run to run, so the summary's wall_time column is left
  // empty unless asked for. The ledger file always records it.
  bool record_wall_time = false;
  SweepGrid sweep;
};

/// Config document (JSON) with optional sections "backend", "policy",
/// "sweep"; keys mirror the RunConfig / PolicyConfig field names.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
void validate(const RunConfig& config, Command command);

struct CliInvocation {
  Command command = Command::Run;
  RunConfig config;
};

/// Parses `dynathink <run|baseline|sweep> [flags]`. Flags override values
/// from --config. Throws ConfigError on invalid values; returns nullopt
/// after printing help.
std::optional<CliInvocation> parse_cli(const std::vector<std::string>& args, std::ostream& out);

std::unique_ptr<Backend> make_backend(const RunConfig& config);
/// Dataset questions, or the synthetic profile's questions when no dataset is set.
std::vector<Question> resolve_questions(const RunConfig& config, const Backend& backend);

struct SummaryRow {
  std::string policy;  // "dynathink" or "sc-baseline"
  std::optional<ThresholdMode> threshold_mode;
  std::optional<VerificationOrder> verification_order;
  int initial_n = 0;
  int increment = 0;
  int budget_cap = 0;
  double accuracy = 0;
  std::size_t fast_count = 0;
  std::size_t slow_count = 0;
  std::size_t total_queries = 0;
  std::optional<double> wall_time;
  int rounds = 0;
  std::map<std::size_t, Tally> buckets;
};

struct CellResult {
  RunResult result;
  AccuracyReport report;
  SummaryRow row;
};

CellResult run_cell(std::span<const Question> questions, Backend& backend, const PolicyConfig& policy,
                    const RunOptions& options);
CellResult baseline_cell(std::span<const Question> questions, Backend& backend, int n,
                         const RunOptions& options);
/// Grid order: threshold mode, then verification order, then cap, then
/// the optional baseline row for that cap after the last mode.
std::vector<CellResult> sweep(std::span<const Question> questions, Backend& backend,
                              const RunConfig& config);

std::string summary_csv_header();
std::string summary_csv_line(const SummaryRow& row);
std::string buckets_csv_header();
std::string buckets_csv_lines(const SummaryRow& row);

/// Subcommands. Each writes its artifacts under config.out_dir and returns
/// the process exit status. Throws ConfigError, DatasetError, BackendError;
/// RunAborted is rethrown after the partial ledger is written.
int cmd_run(const RunConfig& config, std::ostream& log);
int cmd_baseline(const RunConfig& config, std::ostream& log);
int cmd_sweep(const RunConfig& config, std::ostream& log);

/// Entry point shared by the CLI binary: parse, dispatch, map errors to
/// exit codes (2 config, 3 backend abort, 1 other).
int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dynathink
