#pragma once

#include <chrono>
#include <deque>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dynathink/types.hpp"

namespace dynathink {

/// Instruction line that asks the model for "Step :"-prefixed reasoning.
inline constexpr std::string_view kStepInstruction =
    "Solve the following problem step by step. Please start each step with \"Step :\"";

/// [prefix "\n\n"] instruction "\n\n" question prompt.
std::string build_prompt(const Question& question, const std::optional<std::string>& prefix = {});

struct GenerationRequest {
  std::string question_id;
  // Pool position of the first requested completion; replay and synthetic
  // backends key their output on (question_id, ordinal).
  std::size_t first_ordinal = 0;
  std::string prompt;
  int k = 1;
  double temperature = 0.7;
  int max_tokens = 1024;
  std::string model_id;
};

class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FixtureCoverageError : public BackendError {
 public:
  using BackendError::BackendError;
};

/// Completion source. Implementations must return exactly request.k texts
/// or throw BackendError, and must tolerate concurrent calls.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::vector<std::string> generate(const GenerationRequest& request) = 0;
  virtual std::string name() const = 0;
};

void validate(const GenerationRequest& request);

// ---------------------------------------------------------------------------
// Fixture replay

struct FixtureRecord {
  std::string question_id;
  std::size_t ordinal = 0;
  std::string text;
};

/// Replays scripted completions from JSON Lines records
/// {"question_id": str, "ordinal": int, "text": str}.
class FixtureBackend final : public Backend {
 public:
  explicit FixtureBackend(std::vector<FixtureRecord> records);
  static FixtureBackend from_file(const std::string& path);
  static FixtureBackend from_jsonl(const std::string& contents);

  std::vector<std::string> generate(const GenerationRequest& request) override;
  std::string name() const override { return "fixture"; }

  std::size_t size() const { return records_.size(); }

 private:
  std::map<std::pair<std::string, std::size_t>, std::string> records_;
};

// ---------------------------------------------------------------------------
// Synthetic generator

struct StepOutcome {
  std::size_t steps = 1;
  double probability = 1.0;
};

struct SyntheticQuestionProfile {
  AnswerFormat format = AnswerFormat::numeric();
  std::optional<std::string> gold;
  std::vector<std::pair<AnswerKey, double>> answer_pool;
  std::map<AnswerKey, std::vector<StepOutcome>> steps_given_answer;
  double parse_failure_rate = 0.0;
};

void validate(const SyntheticQuestionProfile& profile);

struct SyntheticDraw {
  std::optional<AnswerKey> answer;  // nullopt for a scripted parse failure
  std::size_t steps = 1;
};

/// Stochastic completions whose every draw is a pure function of
/// (seed, question id, ordinal). Texts are "Step k: ..." transcripts ending
/// in "The answer is X" (or an inconclusive final step on parse failure).
class SyntheticBackend final : public Backend {
 public:
  SyntheticBackend(std::uint64_t seed, std::vector<std::pair<std::string, SyntheticQuestionProfile>> profiles);

  /// Profile document: {"seed": int, "questions": {id: profile, ...}}.
  static SyntheticBackend from_file(const std::string& path, std::optional<std::uint64_t> seed = {});
  static SyntheticBackend from_json(const std::string& contents, std::optional<std::uint64_t> seed = {});

  std::vector<std::string> generate(const GenerationRequest& request) override;
  std::string name() const override { return "synthetic"; }

  SyntheticDraw draw(const std::string& question_id, std::size_t ordinal) const;
  std::string render(const SyntheticDraw& draw, const AnswerFormat& format) const;

  /// Questions described by the profile, in document order, with gold when given.
  std::vector<Question> questions() const;
  std::uint64_t seed() const { return seed_; }
  const SyntheticQuestionProfile& profile(const std::string& question_id) const;

 private:
  std::uint64_t seed_;
  std::vector<std::string> order_;
  std::map<std::string, SyntheticQuestionProfile> profiles_;
};

// ---------------------------------------------------------------------------
// Live chat-completion client

struct HttpBackendConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string token_env = "DYNATHINK_API_KEY";
  int max_attempts = 5;
  std::chrono::milliseconds base_backoff{500};
  std::chrono::milliseconds max_backoff{30000};
  int max_in_flight = 4;
  int requests_per_minute = 0;  // 0 = unlimited
  bool native_multi_sample = true;
  std::chrono::seconds timeout{120};
};

class HttpBackend final : public Backend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpBackend(HttpBackendConfig config, Sleeper sleeper = {});

  std::vector<std::string> generate(const GenerationRequest& request) override;
  std::string name() const override { return "http"; }

  /// Attempts made by the most recent generate calls, for diagnostics.
  int attempts_made() const;

 private:
  std::vector<std::string> post_once(const GenerationRequest& request, int n);
  std::vector<std::string> post_with_retry(const GenerationRequest& request, int n);
  void wait_for_rate_budget();

  HttpBackendConfig config_;
  Sleeper sleep_;
  std::string scheme_host_port_;
  std::string path_;
  std::string token_;
  std::counting_semaphore<1024> in_flight_;
  mutable std::mutex mutex_;
  std::deque<std::chrono::steady_clock::time_point> recent_;
  std::mt19937_64 jitter_rng_{std::random_device{}()};
  int attempts_ = 0;
};

/// Request body in the chat-completion convention.
std::string chat_request_body(const GenerationRequest& request, int n);
/// Completion texts from a chat-completion response body.
std::vector<std::string> parse_chat_response(const std::string& body);

}  // namespace dynathink
