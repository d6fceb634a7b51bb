#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynathink/backends.hpp"
#include "dynathink/types.hpp"

namespace dynathink {

struct RunOptions {
  std::optional<std::string> prompt_prefix;
  double temperature = 0.7;
  int max_tokens = 1024;
  std::string model_id;
  // Generation calls in flight per round; 1 runs the round sequentially.
  std::size_t max_parallel = 1;
};

/// Loop state between rounds: every pending pool holds exactly n samples.
struct RoundState {
  int round = 1;
  std::size_t n = 0;
  std::set<std::string> pending;
  std::map<std::string, std::vector<ParsedSample>> pools;
};

struct RunResult {
  std::map<std::string, QuestionVerdict> verdicts;
  CostLedger ledger;
  // Classification rounds executed; slow-resolution top-up is not a round.
  int rounds = 0;
};

/// A backend failed mid-run. Carries the ledger as of the failure; no
/// verdicts are produced.
class RunAborted : public std::runtime_error {
 public:
  RunAborted(const std::string& what, CostLedger partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const CostLedger& partial_ledger() const { return partial_; }

 private:
  CostLedger partial_;
};

/// Adaptive fast/slow classification loop. Each round tops every pending
/// pool up to n samples, moves questions passing both checks to the fast
/// set, and grows n by the increment while the round produced any fast
/// question and n is below the cap. Survivors are resolved by
/// self-consistency over a pool topped up to budget_cap.
RunResult run(std::span<const Question> questions, Backend& backend, const PolicyConfig& policy,
              const RunOptions& options = {});

/// Plain self-consistency: n samples per question, answer by resolve_by_vote.
/// Every verdict is Slow with a single audit entry.
RunResult run_sc_baseline(std::span<const Question> questions, Backend& backend, int n,
                          const RunOptions& options = {});

/// Upper bound on classification rounds: ceil((cap - initial_n) / increment) + 1.
int max_rounds(const PolicyConfig& policy);

}  // namespace dynathink
