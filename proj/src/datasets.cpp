#include "dynathink/datasets.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dynathink/answer_extraction.hpp"
#include "dynathink/classification.hpp"

namespace dynathink {

namespace {

using json = nlohmann::json;

std::string line_error(std::size_t line_no, const std::string& what) {
  return "dataset line " + std::to_string(line_no) + ": " + what;
}

bool has_letter_label(const std::string& choice) {
  std::size_t i = 0;
  while (i < choice.size() && choice[i] == ' ') ++i;
  if (i < choice.size() && choice[i] == '(') ++i;
  if (i >= choice.size() || !std::isalpha(static_cast<unsigned char>(choice[i]))) return false;
  ++i;
  while (i < choice.size() && choice[i] == ' ') ++i;
  return i < choice.size() && choice[i] == ')';
}

std::string render_choices(const std::vector<std::string>& choices) {
  std::string out = "Answer Choices:";
  for (std::size_t i = 0; i < choices.size(); ++i) {
    out += ' ';
    if (has_letter_label(choices[i])) {
      out += choices[i];
    } else {
      out += "(" + std::string(1, static_cast<char>('A' + i)) + ") " + choices[i];
    }
  }
  return out;
}

Question parse_line(const std::string& line, std::size_t line_no, AnswerKind kind) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw DatasetError(line_error(line_no, std::string("invalid JSON: ") + e.what()));
  }
  if (!j.is_object()) throw DatasetError(line_error(line_no, "expected a JSON object"));
  for (const char* key : {"question", "answer"}) {
    if (!j.contains(key)) throw DatasetError(line_error(line_no, std::string("missing key \"") + key + "\""));
  }

  Question q;
  try {
    q.id = j.contains("id") ? (j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump())
                            : "line-" + std::to_string(line_no);
    q.prompt = j.at("question").get<std::string>();
    const json& answer = j.at("answer");
    const std::string gold = answer.is_string() ? answer.get<std::string>() : answer.dump();

    std::vector<std::string> choices;
    if (j.contains("choices")) choices = j.at("choices").get<std::vector<std::string>>();
    q.answer_format = {kind, {}};
    if (kind == AnswerKind::MultipleChoice) {
      if (choices.size() > 26) throw DatasetError(line_error(line_no, "more than 26 choices"));
      const std::size_t count = choices.empty() ? 5 : choices.size();
      for (std::size_t i = 0; i < count; ++i) q.answer_format.letters += static_cast<char>('A' + i);
      if (!choices.empty()) q.prompt += "\n" + render_choices(choices);
    }
    q.gold = normalize_answer(gold, q.answer_format);
    if (!q.gold) {
      throw DatasetError(line_error(line_no, "answer \"" + gold + "\" is not a valid " + to_string(kind) + " answer"));
    }
  } catch (const json::exception& e) {
    throw DatasetError(line_error(line_no, std::string("wrong field type: ") + e.what()));
  }
  if (q.id.empty()) throw DatasetError(line_error(line_no, "empty id"));
  return q;
}

}  // namespace

std::vector<Question> parse_dataset(const std::string& contents, AnswerKind format) {
  std::vector<Question> out;
  std::set<std::string> ids;
  std::istringstream in(contents);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Question q = parse_line(line, line_no, format);
    if (!ids.insert(q.id).second) throw DatasetError(line_error(line_no, "duplicate id \"" + q.id + "\""));
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<Question> load_dataset(const std::string& path, AnswerKind format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open dataset " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_dataset(ss.str(), format);
}

std::optional<double> Tally::accuracy() const {
  if (total == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(total);
}

std::optional<std::size_t> answer_step_count(const QuestionVerdict& verdict) {
  if (!verdict.answer) return std::nullopt;
  return min_steps_for(verdict.pool, *verdict.answer);
}

AccuracyReport score(const std::map<std::string, QuestionVerdict>& verdicts,
                     std::span<const Question> questions) {
  std::map<std::string, const Question*> by_id;
  for (const auto& q : questions) by_id.emplace(q.id, &q);

  AccuracyReport report;
  for (const auto& [id, verdict] : verdicts) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DatasetError("verdict for unknown question " + id);
    if (!it->second->gold) throw DatasetError("question " + id + " has no gold answer");
    const bool correct = verdict.answer && *verdict.answer == *it->second->gold;
    auto add = [correct](Tally& t) {
      ++t.total;
      if (correct) ++t.correct;
    };
    add(report.overall);
    add(verdict.is_fast() ? report.fast : report.slow);
    report.total_queries += verdict.queries_used;
    if (const auto steps = answer_step_count(verdict)) {
      add(report.by_steps[*steps]);
    } else {
      ++report.unanswered;
    }
  }
  return report;
}

}  // namespace dynathink
