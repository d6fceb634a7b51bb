#include "dynathink/types.hpp"

#include <set>

namespace dynathink {

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw InvariantError(message);
}

}  // namespace

void CostLedger::open_round(int round, std::size_t pending) {
  per_round.push_back({round, pending, 0});
}

void CostLedger::charge(const std::string& question_id, std::size_t queries) {
  if (per_round.empty()) throw std::logic_error("CostLedger::charge before open_round");
  per_question[question_id] += queries;
  per_round.back().queries += queries;
  total += queries;
}

void validate(const AnswerFormat& format) {
  if (format.kind != AnswerKind::MultipleChoice) {
    require(format.letters.empty(), "answer format: letters only allowed for multiple choice");
    return;
  }
  require(!format.letters.empty(), "answer format: multiple choice needs allowed letters");
  std::set<char> seen;
  for (char c : format.letters) {
    require(c >= 'A' && c <= 'Z', "answer format: allowed letters must be uppercase A-Z");
    require(seen.insert(c).second, "answer format: allowed letters must be distinct");
  }
}

void validate(const Question& question) {
  require(!question.id.empty(), "question: id must be non-empty");
  validate(question.answer_format);
  if (question.gold) {
    require(question.gold->format == question.answer_format,
            "question " + question.id + ": gold format differs from answer format");
  }
}

void validate(const PolicyConfig& policy) {
  require(policy.initial_n >= 1, "policy: initial_n must be >= 1");
  require(policy.increment >= 1, "policy: increment must be >= 1");
  require(policy.budget_cap >= policy.initial_n, "policy: budget_cap must be >= initial_n");
}

void validate(const VoteDistribution& dist) {
  std::size_t sum = 0;
  for (const auto& [key, count] : dist.counts) {
    require(count >= 1, "vote distribution: counts must be >= 1");
    sum += count;
  }
  require(sum == dist.total_parsed, "vote distribution: counts must sum to total_parsed");
  require(dist.total_parsed <= dist.total_samples,
          "vote distribution: total_parsed exceeds total_samples");
}

void validate(const CostLedger& ledger) {
  std::size_t by_question = 0;
  for (const auto& [id, q] : ledger.per_question) by_question += q;
  std::size_t by_round = 0;
  for (const auto& r : ledger.per_round) by_round += r.queries;
  require(by_question == ledger.total, "ledger: per-question sum differs from total");
  require(by_round == ledger.total, "ledger: per-round sum differs from total");
}

void validate(const QuestionVerdict& verdict) {
  const std::string where = "verdict " + verdict.question_id + ": ";
  require(!verdict.question_id.empty(), "verdict: empty question id");
  require(verdict.queries_used == verdict.pool.size(), where + "queries_used != pool size");
  require(verdict.queries_used >= 1, where + "queries_used must be >= 1");
  for (std::size_t i = 0; i < verdict.pool.size(); ++i) {
    const auto& s = verdict.pool[i];
    require(s.question_id == verdict.question_id, where + "sample from a different question");
    require(s.step_count == s.steps.size(), where + "step_count != number of steps");
    require(s.round >= 1, where + "sample round must be >= 1");
    require(s.ordinal == i, where + "sample ordinals must be 0..n-1 in pool order");
    if (s.answer && verdict.answer) {
      require(s.answer->format == verdict.answer->format, where + "mixed answer formats");
    }
  }
  for (const auto& a : verdict.audit) validate(a.distribution);
  if (verdict.is_fast()) {
    require(verdict.answer.has_value(), where + "fast verdict without answer");
    require(!verdict.audit.empty(), where + "fast verdict without audit");
    const auto& last = verdict.audit.back();
    require(last.fast && last.round == verdict.round, where + "last audit round is not the fast round");
    require(last.n == verdict.pool.size(), where + "fast round n differs from pool size");
    require(last.winner == verdict.answer, where + "fast round winner differs from answer");
    require(last.consistency == CheckOutcome::Passed && last.steps == CheckOutcome::Passed,
            where + "fast round did not pass both checks");
    for (std::size_t i = 0; i + 1 < verdict.audit.size(); ++i) {
      require(!verdict.audit[i].fast, where + "fast decision before the last audit round");
    }
  } else {
    require(verdict.round == 0, where + "slow verdict carries a round");
    for (const auto& a : verdict.audit) require(!a.fast, where + "slow verdict has a fast round");
  }
}

std::string to_string(AnswerKind kind) {
  switch (kind) {
    case AnswerKind::Numeric: return "numeric";
    case AnswerKind::MultipleChoice: return "multiple-choice";
    case AnswerKind::Boolean: return "boolean";
    case AnswerKind::FreeformBoxed: return "freeform-boxed";
  }
  return "unknown";
}

std::string to_string(ThresholdMode mode) {
  switch (mode) {
    case ThresholdMode::Plurality: return "plurality";
    case ThresholdMode::StrictMajority: return "strict-majority";
    case ThresholdMode::Unanimous: return "unanimous";
  }
  return "unknown";
}

std::string to_string(VerificationOrder order) {
  switch (order) {
    case VerificationOrder::ConsistencyThenSteps: return "consistency-steps";
    case VerificationOrder::StepsThenConsistency: return "steps-consistency";
  }
  return "unknown";
}

std::string to_string(CheckOutcome outcome) {
  switch (outcome) {
    case CheckOutcome::NotRun: return "not_run";
    case CheckOutcome::Passed: return "passed";
    case CheckOutcome::Failed: return "failed";
  }
  return "unknown";
}

ThresholdMode parse_threshold_mode(const std::string& text) {
  if (text == "plurality") return ThresholdMode::Plurality;
  if (text == "strict-majority") return ThresholdMode::StrictMajority;
  if (text == "unanimous") return ThresholdMode::Unanimous;
  throw std::invalid_argument("unknown threshold mode '" + text +
                              "' (expected plurality|strict-majority|unanimous)");
}

VerificationOrder parse_verification_order(const std::string& text) {
  if (text == "consistency-steps") return VerificationOrder::ConsistencyThenSteps;
  if (text == "steps-consistency") return VerificationOrder::StepsThenConsistency;
  throw std::invalid_argument("unknown verification order '" + text +
                              "' (expected consistency-steps|steps-consistency)");
}

AnswerKind parse_answer_kind(const std::string& text) {
  if (text == "numeric") return AnswerKind::Numeric;
  if (text == "multiple-choice") return AnswerKind::MultipleChoice;
  if (text == "boolean") return AnswerKind::Boolean;
  if (text == "freeform-boxed") return AnswerKind::FreeformBoxed;
  throw std::invalid_argument("unknown answer format '" + text +
                              "' (expected numeric|multiple-choice|boolean|freeform-boxed)");
}

}  // namespace dynathink
