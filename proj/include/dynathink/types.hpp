#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dynathink {

enum class AnswerKind { Numeric, MultipleChoice, Boolean, FreeformBoxed };

/// Answer format of a question. `letters` is only meaningful for
/// MultipleChoice and holds the allowed uppercase option letters in order.
struct AnswerFormat {
  AnswerKind kind = AnswerKind::Numeric;
  std::string letters;

  static AnswerFormat numeric() { return {AnswerKind::Numeric, {}}; }
  static AnswerFormat multiple_choice(std::string letters) {
    return {AnswerKind::MultipleChoice, std::move(letters)};
  }
  static AnswerFormat boolean() { return {AnswerKind::Boolean, {}}; }
  static AnswerFormat freeform_boxed() { return {AnswerKind::FreeformBoxed, {}}; }

  auto operator<=>(const AnswerFormat&) const = default;
};

/// Normalized answer. Equality is exact on (canonical, format).
struct AnswerKey {
  std::string canonical;
  AnswerFormat format;

  auto operator<=>(const AnswerKey&) const = default;
};

struct Question {
  std::string id;
  std::string prompt;
  AnswerFormat answer_format;
  std::optional<AnswerKey> gold;

  bool operator==(const Question&) const = default;
};

struct ParsedSample {
  std::string question_id;
  int round = 1;
  std::size_t ordinal = 0;
  std::string raw;
  std::vector<std::string> steps;
  std::size_t step_count = 0;
  std::optional<AnswerKey> answer;

  bool operator==(const ParsedSample&) const = default;
};

struct VoteDistribution {
  std::map<AnswerKey, std::size_t> counts;
  std::size_t total_parsed = 0;
  std::size_t total_samples = 0;

  bool operator==(const VoteDistribution&) const = default;
};

enum class ThresholdMode { Plurality, StrictMajority, Unanimous };
enum class VerificationOrder { ConsistencyThenSteps, StepsThenConsistency };
enum class SlowResolver { SelfConsistencyAtCap };

struct PolicyConfig {
  ThresholdMode threshold_mode = ThresholdMode::StrictMajority;
  VerificationOrder verification_order = VerificationOrder::ConsistencyThenSteps;
  int initial_n = 2;
  int increment = 2;
  int budget_cap = 10;
  SlowResolver slow_resolver = SlowResolver::SelfConsistencyAtCap;
  // The winner must be the only answer attaining the global step minimum.
  bool require_unique_min_steps = false;
  // Keep growing n until the cap even in rounds where nothing went fast.
  // Not part of the published loop, which stops on the first empty round.
  bool spend_to_cap = false;

  bool operator==(const PolicyConfig&) const = default;
};

enum class CheckOutcome { NotRun, Passed, Failed };

/// One classification round of one question.
struct RoundAudit {
  int round = 1;
  std::size_t n = 0;
  VoteDistribution distribution;
  CheckOutcome consistency = CheckOutcome::NotRun;
  CheckOutcome steps = CheckOutcome::NotRun;
  std::optional<AnswerKey> winner;
  bool fast = false;

  bool operator==(const RoundAudit&) const = default;
};

enum class VerdictStatus { Fast, Slow };

struct QuestionVerdict {
  std::string question_id;
  VerdictStatus status = VerdictStatus::Slow;
  // Absent only for a slow verdict whose pool had no parseable answer.
  std::optional<AnswerKey> answer;
  // Round of the fast decision; 0 for slow verdicts.
  int round = 0;
  std::size_t queries_used = 0;
  std::vector<ParsedSample> pool;
  std::vector<RoundAudit> audit;

  bool is_fast() const { return status == VerdictStatus::Fast; }
  bool operator==(const QuestionVerdict&) const = default;
};

struct RoundCost {
  int round = 0;
  std::size_t pending = 0;
  std::size_t queries = 0;

  bool operator==(const RoundCost&) const = default;
};

struct CostLedger {
  std::map<std::string, std::size_t> per_question;
  std::size_t total = 0;
  std::vector<RoundCost> per_round;

  /// Records `queries` issued for `question_id` in the most recent round entry.
  void charge(const std::string& question_id, std::size_t queries);
  void open_round(int round, std::size_t pending);

  bool operator==(const CostLedger&) const = default;
};

// Thrown by the validators below; the message names the violated invariant.
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void validate(const AnswerFormat& format);
void validate(const Question& question);
void validate(const PolicyConfig& policy);
void validate(const VoteDistribution& dist);
void validate(const CostLedger& ledger);
/// Structural checks plus audit consistency: a fast verdict must end with
/// a fast audit round whose n equals the pool size and whose winner is the
/// verdict answer.
void validate(const QuestionVerdict& verdict);

std::string to_string(AnswerKind kind);
std::string to_string(ThresholdMode mode);
std::string to_string(VerificationOrder order);
std::string to_string(CheckOutcome outcome);

ThresholdMode parse_threshold_mode(const std::string& text);
VerificationOrder parse_verification_order(const std::string& text);
AnswerKind parse_answer_kind(const std::string& text);

}  // namespace dynathink
