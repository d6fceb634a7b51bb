#include "dynathink/backends.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "dynathink/answer_extraction.hpp"
#include "dynathink/serialization.hpp"

#include <httplib.h>

namespace dynathink {

std::string build_prompt(const Question& question, const std::optional<std::string>& prefix) {
  std::string out;
  if (prefix) {
    out += *prefix;
    out += "\n\n";
  }
  out += kStepInstruction;
  out += "\n\n";
  out += question.prompt;
  return out;
}

void validate(const GenerationRequest& request) {
  if (request.k < 1) throw std::invalid_argument("generation request: k must be >= 1");
  if (request.temperature < 0) throw std::invalid_argument("generation request: temperature must be >= 0");
  if (request.k > 1 && request.temperature <= 0) {
    throw std::invalid_argument("generation request: k > 1 needs temperature > 0");
  }
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BackendError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

// ---------------------------------------------------------------------------

FixtureBackend::FixtureBackend(std::vector<FixtureRecord> records) {
  for (auto& r : records) {
    auto key = std::make_pair(r.question_id, r.ordinal);
    if (!records_.emplace(std::move(key), std::move(r.text)).second) {
      throw BackendError("fixture: duplicate entry for (" + r.question_id + ", " +
                         std::to_string(r.ordinal) + ")");
    }
  }
}

FixtureBackend FixtureBackend::from_file(const std::string& path) {
  return from_jsonl(read_file(path));
}

FixtureBackend FixtureBackend::from_jsonl(const std::string& contents) {
  std::vector<FixtureRecord> records;
  std::istringstream in(contents);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      records.push_back({j.at("question_id").get<std::string>(), j.at("ordinal").get<std::size_t>(),
                         j.at("text").get<std::string>()});
    } catch (const json::exception& e) {
      throw BackendError("fixture line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return FixtureBackend(std::move(records));
}

std::vector<std::string> FixtureBackend::generate(const GenerationRequest& request) {
  validate(request);
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(request.k));
  for (int i = 0; i < request.k; ++i) {
    const std::size_t ordinal = request.first_ordinal + static_cast<std::size_t>(i);
    auto it = records_.find({request.question_id, ordinal});
    if (it == records_.end()) {
      throw FixtureCoverageError("fixture has no completion for (" + request.question_id + ", " +
                                 std::to_string(ordinal) + ")");
    }
    out.push_back(it->second);
  }
  return out;
}

// ---------------------------------------------------------------------------

void validate(const SyntheticQuestionProfile& profile) {
  validate(profile.format);
  if (profile.answer_pool.empty()) throw InvariantError("synthetic profile: empty answer pool");
  double total = 0;
  for (const auto& [key, p] : profile.answer_pool) {
    if (p < 0) throw InvariantError("synthetic profile: negative answer probability");
    if (key.format != profile.format) throw InvariantError("synthetic profile: answer format mismatch");
    total += p;
    auto it = profile.steps_given_answer.find(key);
    if (it == profile.steps_given_answer.end() || it->second.empty()) {
      throw InvariantError("synthetic profile: no step distribution for answer " + key.canonical);
    }
    double step_total = 0;
    for (const auto& outcome : it->second) {
      if (outcome.steps < 1 || outcome.steps > 64) {
        throw InvariantError("synthetic profile: step counts must lie in [1, 64]");
      }
      if (outcome.probability < 0) throw InvariantError("synthetic profile: negative step probability");
      step_total += outcome.probability;
    }
    if (std::abs(step_total - 1.0) > 1e-9) {
      throw InvariantError("synthetic profile: step probabilities for " + key.canonical +
                           " do not sum to 1");
    }
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvariantError("synthetic profile: answer probabilities do not sum to 1");
  if (profile.parse_failure_rate < 0 || profile.parse_failure_rate > 1) {
    throw InvariantError("synthetic profile: parse_failure_rate outside [0, 1]");
  }
}

namespace {

std::uint64_t fnv1a(std::uint64_t hash, std::string_view bytes) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::uint64_t fnv1a(std::uint64_t hash, std::uint64_t value) {
  for (int i = 0; i < 8; ++i) {
    hash ^= (value >> (8 * i)) & 0xffU;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

// mt19937_64 output is fully specified; only the double conversion is ours.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <typename Range, typename Weight>
std::size_t pick(const Range& items, double u, Weight weight) {
  double acc = 0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const double w = weight(items[i]);
    if (w <= 0) continue;
    last_positive = i;
    acc += w;
    if (u < acc) return i;
  }
  return last_positive;
}

constexpr std::string_view kFiller[] = {
    "Identify the quantities stated in the problem.",
    "Relate the known quantities to the unknown one.",
    "Set up the relationship between them.",
    "Simplify the expression carefully.",
    "Check the intermediate result for consistency.",
};

SyntheticQuestionProfile profile_from_json(const json& j) {
  SyntheticQuestionProfile p;
  p.format = j.contains("format") ? j.at("format").get<AnswerFormat>() : AnswerFormat::numeric();
  auto key_of = [&](const std::string& raw) {
    auto key = normalize_answer(raw, p.format);
    if (!key) throw InvariantError("synthetic profile: unparseable answer '" + raw + "'");
    return *key;
  };
  if (j.contains("gold") && !j.at("gold").is_null()) p.gold = j.at("gold").get<std::string>();
  for (const auto& entry : j.at("answer_pool")) {
    p.answer_pool.emplace_back(key_of(entry.at("answer").get<std::string>()),
                               entry.at("probability").get<double>());
  }
  for (const auto& [raw, outcomes] : j.at("steps_given_answer").items()) {
    auto& dist = p.steps_given_answer[key_of(raw)];
    for (const auto& o : outcomes) {
      dist.push_back({o.at("steps").get<std::size_t>(), o.at("probability").get<double>()});
    }
  }
  p.parse_failure_rate = j.value("parse_failure_rate", 0.0);
  validate(p);
  return p;
}

}  // namespace

SyntheticBackend::SyntheticBackend(std::uint64_t seed,
                                   std::vector<std::pair<std::string, SyntheticQuestionProfile>> profiles)
    : seed_(seed) {
  for (auto& [id, profile] : profiles) {
    validate(profile);
    if (!profiles_.emplace(id, std::move(profile)).second) {
      throw InvariantError("synthetic profile: duplicate question id " + id);
    }
    order_.push_back(id);
  }
}

SyntheticBackend SyntheticBackend::from_file(const std::string& path, std::optional<std::uint64_t> seed) {
  return from_json(read_file(path), seed);
}

SyntheticBackend SyntheticBackend::from_json(const std::string& contents,
                                             std::optional<std::uint64_t> seed) {
  std::vector<std::pair<std::string, SyntheticQuestionProfile>> profiles;
  std::uint64_t resolved = 0;
  try {
    const auto doc = nlohmann::ordered_json::parse(contents);
    if (!seed && !doc.contains("seed")) throw InvariantError("synthetic profile: missing top-level seed");
    resolved = seed ? *seed : doc.at("seed").get<std::uint64_t>();
    for (const auto& [id, body] : doc.at("questions").items()) {
      // Round-trip through the std::map-backed json the ADL decoders expect.
      profiles.emplace_back(id, profile_from_json(json::parse(body.dump())));
    }
  } catch (const json::exception& e) {
    throw InvariantError(std::string("synthetic profile: ") + e.what());
  }
  if (profiles.empty()) throw InvariantError("synthetic profile: no questions");
  return SyntheticBackend(resolved, std::move(profiles));
}

const SyntheticQuestionProfile& SyntheticBackend::profile(const std::string& question_id) const {
  auto it = profiles_.find(question_id);
  if (it == profiles_.end()) throw BackendError("synthetic profile has no question " + question_id);
  return it->second;
}

SyntheticDraw SyntheticBackend::draw(const std::string& question_id, std::size_t ordinal) const {
  const auto& p = profile(question_id);
  std::uint64_t h = fnv1a(0xcbf29ce484222325ULL, seed_);
  h = fnv1a(h, question_id);
  h = fnv1a(h, static_cast<std::uint64_t>(ordinal));
  std::mt19937_64 rng(h);
  const double fail_u = unit(rng);
  const double answer_u = unit(rng);
  const double steps_u = unit(rng);

  const auto& [key, prob] =
      p.answer_pool[pick(p.answer_pool, answer_u, [](const auto& e) { return e.second; })];
  const auto& steps = p.steps_given_answer.at(key);
  SyntheticDraw out;
  out.steps = steps[pick(steps, steps_u, [](const StepOutcome& o) { return o.probability; })].steps;
  if (fail_u >= p.parse_failure_rate) out.answer = key;
  return out;
}

std::string SyntheticBackend::render(const SyntheticDraw& draw, const AnswerFormat& format) const {
  std::string text;
  for (std::size_t i = 1; i < draw.steps; ++i) {
    text += "Step " + std::to_string(i) + ": ";
    text += kFiller[(i - 1) % std::size(kFiller)];
    text += '\n';
  }
  text += "Step " + std::to_string(draw.steps) + ": ";
  if (!draw.answer) {
    text += "The reasoning is inconclusive.";
    return text;
  }
  const std::string& answer = draw.answer->canonical;
  switch (format.kind) {
    case AnswerKind::MultipleChoice: text += "Therefore, the answer is (" + answer + ")."; break;
    case AnswerKind::FreeformBoxed: text += "Therefore, the answer is \\boxed{" + answer + "}."; break;
    default: text += "Therefore, the answer is " + answer + "."; break;
  }
  return text;
}

std::vector<std::string> SyntheticBackend::generate(const GenerationRequest& request) {
  validate(request);
  const auto& p = profile(request.question_id);
  std::vector<std::string> out;
  for (int i = 0; i < request.k; ++i) {
    out.push_back(render(draw(request.question_id, request.first_ordinal + static_cast<std::size_t>(i)), p.format));
  }
  return out;
}

std::vector<Question> SyntheticBackend::questions() const {
  std::vector<Question> out;
  for (const auto& id : order_) {
    const auto& p = profiles_.at(id);
    Question q{id, "Synthetic question " + id, p.format, std::nullopt};
    if (p.gold) {
      q.gold = normalize_answer(*p.gold, p.format);
      if (!q.gold) throw InvariantError("synthetic profile: unparseable gold for " + id);
    }
    out.push_back(std::move(q));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string chat_request_body(const GenerationRequest& request, int n) {
  json body = {{"model", request.model_id},
               {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
               {"temperature", request.temperature},
               {"max_tokens", request.max_tokens},
               {"n", n}};
  return body.dump();
}

std::vector<std::string> parse_chat_response(const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed completion response: ") + e.what());
  }
  if (!doc.contains("choices") || !doc.at("choices").is_array()) {
    throw BackendError("completion response has no choices array");
  }
  std::vector<std::string> out;
  for (const auto& choice : doc.at("choices")) {
    if (choice.contains("message") && choice.at("message").contains("content") &&
        choice.at("message").at("content").is_string()) {
      out.push_back(choice.at("message").at("content").get<std::string>());
    } else if (choice.contains("text") && choice.at("text").is_string()) {
      out.push_back(choice.at("text").get<std::string>());
    } else {
      throw BackendError("completion choice without message content");
    }
  }
  return out;
}

namespace {

class RetryableError : public BackendError {
 public:
  RetryableError(const std::string& what, std::chrono::milliseconds retry_after)
      : BackendError(what), retry_after_(retry_after) {}
  std::chrono::milliseconds retry_after() const { return retry_after_; }

 private:
  std::chrono::milliseconds retry_after_;
};

class SemaphoreGuard {
 public:
  explicit SemaphoreGuard(std::counting_semaphore<1024>& sem) : sem_(sem) { sem_.acquire(); }
  ~SemaphoreGuard() { sem_.release(); }
  SemaphoreGuard(const SemaphoreGuard&) = delete;
  SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

 private:
  std::counting_semaphore<1024>& sem_;
};

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config, Sleeper sleeper)
    : config_(std::move(config)),
      sleep_(sleeper ? std::move(sleeper) : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })),
      in_flight_(std::clamp(config_.max_in_flight, 1, 1024)) {
  const auto scheme_end = config_.endpoint.find("://");
  const auto scheme = config_.endpoint.substr(0, scheme_end);
  if (scheme_end == std::string::npos || (scheme != "http" && scheme != "https")) {
    throw std::invalid_argument("http backend: endpoint must start with http:// or https://");
  }
  const auto path_start = config_.endpoint.find('/', scheme_end + 3);
  scheme_host_port_ = config_.endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);
  if (config_.max_attempts < 1) throw std::invalid_argument("http backend: max_attempts must be >= 1");
  if (const char* token = std::getenv(config_.token_env.c_str())) token_ = token;
}

int HttpBackend::attempts_made() const {
  std::lock_guard lock(mutex_);
  return attempts_;
}

void HttpBackend::wait_for_rate_budget() {
  if (config_.requests_per_minute <= 0) return;
  using clock = std::chrono::steady_clock;
  for (;;) {
    std::chrono::milliseconds wait{0};
    {
      std::lock_guard lock(mutex_);
      const auto now = clock::now();
      while (!recent_.empty() && now - recent_.front() >= std::chrono::minutes(1)) recent_.pop_front();
      if (recent_.size() < static_cast<std::size_t>(config_.requests_per_minute)) {
        recent_.push_back(now);
        return;
      }
      wait = std::chrono::duration_cast<std::chrono::milliseconds>(recent_.front() + std::chrono::minutes(1) - now);
    }
    sleep_(std::max(wait, std::chrono::milliseconds(1)));
  }
}

std::vector<std::string> HttpBackend::post_once(const GenerationRequest& request, int n) {
  wait_for_rate_budget();
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(config_.timeout).count());
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(config_.timeout).count());
  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
  auto result = client.Post(path_, headers, chat_request_body(request, n), "application/json");
  if (!result) {
    throw RetryableError("transport failure: " + httplib::to_string(result.error()), std::chrono::milliseconds(0));
  }
  if (result->status != 200) {
    std::chrono::milliseconds retry_after{0};
    if (result->has_header("Retry-After")) {
      try {
        retry_after = std::chrono::seconds(std::stoi(result->get_header_value("Retry-After")));
      } catch (const std::exception&) {
      }
    }
    throw RetryableError("HTTP status " + std::to_string(result->status), retry_after);
  }
  return parse_chat_response(result->body);
}

std::vector<std::string> HttpBackend::post_with_retry(const GenerationRequest& request, int n) {
  std::string last_error;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    {
      std::lock_guard lock(mutex_);
      ++attempts_;
    }
    try {
      return post_once(request, n);
    } catch (const RetryableError& e) {
      last_error = e.what();
      if (attempt == config_.max_attempts) break;
      const double scale = std::pow(2.0, attempt - 1);
      auto delay = std::chrono::milliseconds(static_cast<long long>(
          std::min<double>(static_cast<double>(config_.max_backoff.count()),
                           static_cast<double>(config_.base_backoff.count()) * scale)));
      if (config_.base_backoff.count() > 0) {
        std::uniform_int_distribution<long long> jitter(0, config_.base_backoff.count() - 1);
        std::lock_guard lock(mutex_);
        delay += std::chrono::milliseconds(jitter(jitter_rng_));
      }
      sleep_(std::max(delay, e.retry_after()));
    }
  }
  throw BackendError("backend request for " + request.question_id + " failed after " +
                     std::to_string(config_.max_attempts) + " attempts: " + last_error);
}

std::vector<std::string> HttpBackend::generate(const GenerationRequest& request) {
  validate(request);
  SemaphoreGuard guard(in_flight_);
  std::vector<std::string> out;
  const auto wanted = static_cast<std::size_t>(request.k);
  while (out.size() < wanted) {
    const int n = config_.native_multi_sample ? static_cast<int>(wanted - out.size()) : 1;
    auto batch = post_with_retry(request, n);
    if (batch.empty()) throw BackendError("completion response returned no choices");
    for (auto& text : batch) {
      if (out.size() < wanted) out.push_back(std::move(text));
    }
  }
  return out;
}

}  // namespace dynathink
