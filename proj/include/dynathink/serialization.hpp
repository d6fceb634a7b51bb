#pragma once

#include <json.hpp>

#include "dynathink/types.hpp"

// JSON interchange for the domain types. Enums are written as the same
// lowercase names the CLI accepts. Decoding validates type invariants.
namespace dynathink {

using json = nlohmann::json;

void to_json(json& j, const AnswerFormat& f);
void from_json(const json& j, AnswerFormat& f);
void to_json(json& j, const AnswerKey& k);
void from_json(const json& j, AnswerKey& k);
void to_json(json& j, const Question& q);
void from_json(const json& j, Question& q);
void to_json(json& j, const ParsedSample& s);
void from_json(const json& j, ParsedSample& s);
void to_json(json& j, const VoteDistribution& d);
void from_json(const json& j, VoteDistribution& d);
void to_json(json& j, const PolicyConfig& p);
void from_json(const json& j, PolicyConfig& p);
void to_json(json& j, const RoundAudit& a);
void from_json(const json& j, RoundAudit& a);
void to_json(json& j, const QuestionVerdict& v);
void from_json(const json& j, QuestionVerdict& v);
void to_json(json& j, const RoundCost& r);
void from_json(const json& j, RoundCost& r);
void to_json(json& j, const CostLedger& l);
void from_json(const json& j, CostLedger& l);

/// One compact JSON line per verdict, no trailing newline.
std::string encode_verdict_line(const QuestionVerdict& verdict);
/// Parses and re-validates a verdict line; throws InvariantError on violation.
QuestionVerdict decode_verdict_line(const std::string& line);

}  // namespace dynathink
