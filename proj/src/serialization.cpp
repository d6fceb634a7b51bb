#include "dynathink/serialization.hpp"

namespace dynathink {

namespace {

VerdictStatus parse_status(const std::string& s) {
  if (s == "fast") return VerdictStatus::Fast;
  if (s == "slow") return VerdictStatus::Slow;
  throw InvariantError("unknown verdict status '" + s + "'");
}

CheckOutcome parse_outcome(const std::string& s) {
  if (s == "not_run") return CheckOutcome::NotRun;
  if (s == "passed") return CheckOutcome::Passed;
  if (s == "failed") return CheckOutcome::Failed;
  throw InvariantError("unknown check outcome '" + s + "'");
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& value) {
  if (value) {
    j[key] = *value;
  } else {
    j[key] = nullptr;
  }
}

}  // namespace

void to_json(json& j, const AnswerFormat& f) {
  j = json{{"kind", to_string(f.kind)}};
  if (f.kind == AnswerKind::MultipleChoice) j["letters"] = f.letters;
}

void from_json(const json& j, AnswerFormat& f) {
  if (j.is_string()) {
    f = {parse_answer_kind(j.get<std::string>()), {}};
    if (f.kind == AnswerKind::MultipleChoice) f.letters = "ABCDE";
  } else {
    f.kind = parse_answer_kind(j.at("kind").get<std::string>());
    f.letters = j.value("letters", f.kind == AnswerKind::MultipleChoice ? "ABCDE" : "");
  }
  validate(f);
}

void to_json(json& j, const AnswerKey& k) {
  j = json{{"canonical", k.canonical}, {"format", k.format}};
}

void from_json(const json& j, AnswerKey& k) {
  k.canonical = j.at("canonical").get<std::string>();
  k.format = j.at("format").get<AnswerFormat>();
}

void to_json(json& j, const Question& q) {
  j = json{{"id", q.id}, {"prompt", q.prompt}, {"answer_format", q.answer_format}};
  put_optional(j, "gold", q.gold);
}

void from_json(const json& j, Question& q) {
  q.id = j.at("id").get<std::string>();
  q.prompt = j.at("prompt").get<std::string>();
  q.answer_format = j.at("answer_format").get<AnswerFormat>();
  q.gold = optional_field<AnswerKey>(j, "gold");
  validate(q);
}

void to_json(json& j, const ParsedSample& s) {
  j = json{{"question_id", s.question_id}, {"round", s.round},     {"ordinal", s.ordinal},
           {"raw", s.raw},                 {"steps", s.steps},     {"step_count", s.step_count}};
  put_optional(j, "answer", s.answer);
}

void from_json(const json& j, ParsedSample& s) {
  s.question_id = j.at("question_id").get<std::string>();
  s.round = j.at("round").get<int>();
  s.ordinal = j.at("ordinal").get<std::size_t>();
  s.raw = j.at("raw").get<std::string>();
  s.steps = j.at("steps").get<std::vector<std::string>>();
  s.step_count = j.at("step_count").get<std::size_t>();
  s.answer = optional_field<AnswerKey>(j, "answer");
  if (s.step_count != s.steps.size()) throw InvariantError("sample: step_count != number of steps");
}

void to_json(json& j, const VoteDistribution& d) {
  json counts = json::array();
  for (const auto& [key, count] : d.counts) counts.push_back({{"answer", key}, {"count", count}});
  j = json{{"counts", counts}, {"total_parsed", d.total_parsed}, {"total_samples", d.total_samples}};
}

void from_json(const json& j, VoteDistribution& d) {
  d.counts.clear();
  for (const auto& entry : j.at("counts")) {
    auto [it, inserted] =
        d.counts.emplace(entry.at("answer").get<AnswerKey>(), entry.at("count").get<std::size_t>());
    if (!inserted) throw InvariantError("vote distribution: duplicate answer key");
  }
  d.total_parsed = j.at("total_parsed").get<std::size_t>();
  d.total_samples = j.at("total_samples").get<std::size_t>();
  validate(d);
}

void to_json(json& j, const PolicyConfig& p) {
  j = json{{"threshold_mode", to_string(p.threshold_mode)},
           {"verification_order", to_string(p.verification_order)},
           {"initial_n", p.initial_n},
           {"increment", p.increment},
           {"budget_cap", p.budget_cap},
           {"slow_resolver", "self-consistency-at-cap"},
           {"require_unique_min_steps", p.require_unique_min_steps},
           {"spend_to_cap", p.spend_to_cap}};
}

void from_json(const json& j, PolicyConfig& p) {
  PolicyConfig defaults;
  p.threshold_mode =
      parse_threshold_mode(j.value("threshold_mode", to_string(defaults.threshold_mode)));
  p.verification_order =
      parse_verification_order(j.value("verification_order", to_string(defaults.verification_order)));
  p.initial_n = j.value("initial_n", defaults.initial_n);
  p.increment = j.value("increment", defaults.increment);
  p.budget_cap = j.value("budget_cap", defaults.budget_cap);
  if (j.value("slow_resolver", std::string("self-consistency-at-cap")) != "self-consistency-at-cap") {
    throw InvariantError("policy: unknown slow_resolver");
  }
  p.require_unique_min_steps = j.value("require_unique_min_steps", false);
  p.spend_to_cap = j.value("spend_to_cap", false);
  validate(p);
}

void to_json(json& j, const RoundAudit& a) {
  j = json{{"round", a.round},
           {"n", a.n},
           {"distribution", a.distribution},
           {"consistency", to_string(a.consistency)},
           {"steps", to_string(a.steps)},
           {"fast", a.fast}};
  put_optional(j, "winner", a.winner);
}

void from_json(const json& j, RoundAudit& a) {
  a.round = j.at("round").get<int>();
  a.n = j.at("n").get<std::size_t>();
  a.distribution = j.at("distribution").get<VoteDistribution>();
  a.consistency = parse_outcome(j.at("consistency").get<std::string>());
  a.steps = parse_outcome(j.at("steps").get<std::string>());
  a.fast = j.at("fast").get<bool>();
  a.winner = optional_field<AnswerKey>(j, "winner");
}

void to_json(json& j, const QuestionVerdict& v) {
  j = json{{"question_id", v.question_id},
           {"status", v.is_fast() ? "fast" : "slow"},
           {"round", v.round},
           {"queries_used", v.queries_used},
           {"pool", v.pool},
           {"audit", v.audit}};
  put_optional(j, "answer", v.answer);
}

void from_json(const json& j, QuestionVerdict& v) {
  v.question_id = j.at("question_id").get<std::string>();
  v.status = parse_status(j.at("status").get<std::string>());
  v.round = j.at("round").get<int>();
  v.queries_used = j.at("queries_used").get<std::size_t>();
  v.pool = j.at("pool").get<std::vector<ParsedSample>>();
  v.audit = j.at("audit").get<std::vector<RoundAudit>>();
  v.answer = optional_field<AnswerKey>(j, "answer");
  validate(v);
}

void to_json(json& j, const RoundCost& r) {
  j = json{{"round", r.round}, {"pending", r.pending}, {"queries", r.queries}};
}

void from_json(const json& j, RoundCost& r) {
  r.round = j.at("round").get<int>();
  r.pending = j.at("pending").get<std::size_t>();
  r.queries = j.at("queries").get<std::size_t>();
}

void to_json(json& j, const CostLedger& l) {
  j = json{{"total", l.total}, {"per_question", l.per_question}, {"per_round", l.per_round}};
}

void from_json(const json& j, CostLedger& l) {
  l.total = j.at("total").get<std::size_t>();
  l.per_question = j.at("per_question").get<std::map<std::string, std::size_t>>();
  l.per_round = j.at("per_round").get<std::vector<RoundCost>>();
  validate(l);
}

std::string encode_verdict_line(const QuestionVerdict& verdict) { return json(verdict).dump(); }

QuestionVerdict decode_verdict_line(const std::string& line) {
  try {
    return json::parse(line).get<QuestionVerdict>();
  } catch (const json::exception& e) {
    throw InvariantError(std::string("verdict line: ") + e.what());
  }
}

}  // namespace dynathink
