#pragma once

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynathink/types.hpp"

namespace dynathink {

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads a JSON Lines dataset, one {"id"?, "question", "answer", "choices"?}
/// object per line. Gold answers are canonicalized for `format`; for
/// MultipleChoice the allowed letters are A.. up to the number of choices
/// (A-E when no choices are given) and the choices are appended to the
/// prompt. Lines without an id get "line-<n>". Blank lines are skipped.
std::vector<Question> load_dataset(const std::string& path, AnswerKind format);
std::vector<Question> parse_dataset(const std::string& contents, AnswerKind format);

struct Tally {
  std::size_t correct = 0;
  std::size_t total = 0;

  /// nullopt for an empty subset.
  std::optional<double> accuracy() const;
  bool operator==(const Tally&) const = default;
};

struct AccuracyReport {
  Tally overall;
  Tally fast;
  Tally slow;
  std::size_t total_queries = 0;
  // Keyed by the smallest step count among samples backing the final
  // answer. Verdicts without an answer are counted in `unanswered` instead.
  std::map<std::size_t, Tally> by_steps;
  std::size_t unanswered = 0;

  std::size_t fast_count() const { return fast.total; }
  std::size_t slow_count() const { return slow.total; }
};

AccuracyReport score(const std::map<std::string, QuestionVerdict>& verdicts,
                     std::span<const Question> questions);

/// Step count used to bucket a verdict: the minimum step count among its
/// samples that support the final answer.
std::optional<std::size_t> answer_step_count(const QuestionVerdict& verdict);

}  // namespace dynathink
