#include "dynathink/answer_extraction.hpp"

#include <algorithm>
#include <cctype>

namespace dynathink {

namespace {

bool is_blank(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }
bool is_space(char c) { return is_blank(c) || c == '\n'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
char to_lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }
char to_upper(char c) { return static_cast<char>(std::toupper(static_cast<unsigned char>(c))); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool iequals_at(std::string_view text, std::size_t pos, std::string_view word) {
  if (pos + word.size() > text.size()) return false;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (to_lower(text[pos + i]) != word[i]) return false;
  }
  return true;
}

// Offset just past the marker colon, or npos when the line is not a marker.
std::size_t step_marker_end(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && is_blank(line[i])) ++i;
  if (!iequals_at(line, i, "step")) return std::string_view::npos;
  i += 4;
  while (i < line.size() && is_blank(line[i])) ++i;
  while (i < line.size() && is_digit(line[i])) ++i;
  while (i < line.size() && is_blank(line[i])) ++i;
  if (i < line.size() && line[i] == ':') return i + 1;
  return std::string_view::npos;
}

// Length of a currency symbol ending at `end` (exclusive), 0 if none.
std::size_t currency_before(std::string_view text, std::size_t end) {
  static constexpr std::string_view kSymbols[] = {"$", "\xE2\x82\xAC", "\xC2\xA3", "\xC2\xA5"};
  for (auto sym : kSymbols) {
    if (end >= sym.size() && text.substr(end - sym.size(), sym.size()) == sym) return sym.size();
  }
  return 0;
}

std::optional<std::string> last_numeric_literal(std::string_view text) {
  std::optional<std::string> last;
  std::size_t i = 0;
  while (i < text.size()) {
    const bool digit_start = is_digit(text[i]);
    const bool dot_start = text[i] == '.' && i + 1 < text.size() && is_digit(text[i + 1]);
    if (!digit_start && !dot_start) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    std::string literal;
    std::size_t j = i;
    while (j < text.size() && is_digit(text[j])) literal += text[j++];
    // Thousands separators: only after a 1-3 digit leading group.
    if (!literal.empty() && literal.size() <= 3) {
      while (j + 3 < text.size() && text[j] == ',' && is_digit(text[j + 1]) &&
             is_digit(text[j + 2]) && is_digit(text[j + 3]) &&
             (j + 4 >= text.size() || !is_digit(text[j + 4]))) {
        literal.append(text.substr(j + 1, 3));
        j += 4;
      }
    }
    if (j + 1 < text.size() && text[j] == '.' && is_digit(text[j + 1])) {
      literal += '.';
      ++j;
      while (j < text.size() && is_digit(text[j])) literal += text[j++];
    }
    std::size_t sign_pos = start - currency_before(text, start);
    if (sign_pos > 0 && text[sign_pos - 1] == '-' &&
        (sign_pos == 1 || !is_alnum(text[sign_pos - 2]))) {
      literal.insert(literal.begin(), '-');
    }
    last = canonical_decimal(literal);
    i = j;
  }
  return last;
}

std::optional<std::string> last_choice_letter(std::string_view text, std::string_view letters) {
  auto word_char = [](char c) { return is_alnum(c) || c == '\''; };
  std::optional<std::string> last;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char up = to_upper(text[i]);
    if (up < 'A' || up > 'Z' || letters.find(up) == std::string_view::npos) continue;
    if (i > 0 && word_char(text[i - 1])) continue;
    if (i + 1 < text.size() && word_char(text[i + 1])) continue;
    last = std::string(1, up);
  }
  return last;
}

std::optional<std::string> last_boolean(std::string_view text) {
  std::optional<std::string> last;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!std::isalpha(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    std::string word;
    while (j < text.size() && is_alnum(text[j])) word += to_lower(text[j++]);
    if (word == "yes" || word == "true") last = "yes";
    if (word == "no" || word == "false") last = "no";
    i = j;
  }
  return last;
}

std::string_view strip_dollars(std::string_view s) {
  s = trim(s);
  while (!s.empty() && s.front() == '$') s = trim(s.substr(1));
  while (!s.empty() && s.back() == '$') s = trim(s.substr(0, s.size() - 1));
  return s;
}

std::optional<std::string> last_boxed(std::string_view text) {
  static constexpr std::string_view kBoxed = "\\boxed{";
  std::size_t pos = text.rfind(kBoxed);
  while (pos != std::string_view::npos) {
    const std::size_t open = pos + kBoxed.size();
    int depth = 1;
    std::size_t j = open;
    for (; j < text.size() && depth > 0; ++j) {
      if (text[j] == '{') ++depth;
      if (text[j] == '}') --depth;
    }
    if (depth == 0) return std::string(strip_dollars(text.substr(open, j - 1 - open)));
    if (pos == 0) break;
    pos = text.rfind(kBoxed, pos - 1);
  }
  return std::nullopt;
}

std::optional<std::string> after_answer_is(std::string_view text) {
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i + 9 <= text.size(); ++i) {
    if (iequals_at(text, i, "answer is")) found = i;
  }
  if (!found) return std::nullopt;
  std::string_view rest = text.substr(*found + 9);
  rest = rest.substr(0, rest.find('\n'));
  rest = trim(rest);
  if (!rest.empty() && rest.front() == ':') rest = trim(rest.substr(1));
  if (!rest.empty() && rest.back() == '.') rest.remove_suffix(1);
  return std::string(strip_dollars(rest));
}

std::optional<std::string> freeform_answer(std::string_view text, bool verbatim_fallback) {
  std::optional<std::string> out = last_boxed(text);
  if (!out) out = after_answer_is(text);
  if (!out && verbatim_fallback) out = std::string(strip_dollars(text));
  if (out && out->empty()) return std::nullopt;
  return out;
}

std::optional<AnswerKey> extract_from(std::string_view text, const AnswerFormat& format,
                                      bool verbatim_fallback) {
  std::optional<std::string> canonical;
  switch (format.kind) {
    case AnswerKind::Numeric: canonical = last_numeric_literal(text); break;
    case AnswerKind::MultipleChoice: canonical = last_choice_letter(text, format.letters); break;
    case AnswerKind::Boolean: canonical = last_boolean(text); break;
    case AnswerKind::FreeformBoxed: canonical = freeform_answer(text, verbatim_fallback); break;
  }
  if (!canonical) return std::nullopt;
  return AnswerKey{std::move(*canonical), format};
}

}  // namespace

std::vector<std::string> split_steps(std::string_view raw) {
  std::vector<std::string> steps;
  std::string current;
  bool in_step = false;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    std::size_t eol = raw.find('\n', pos);
    if (eol == std::string_view::npos) eol = raw.size();
    const std::string_view line = raw.substr(pos, eol - pos);
    if (const std::size_t body = step_marker_end(line); body != std::string_view::npos) {
      if (in_step) steps.emplace_back(trim(current));
      current.assign(line.substr(body));
      in_step = true;
    } else if (in_step) {
      current += '\n';
      current.append(line);
    }
    pos = eol + 1;
  }
  if (in_step) steps.emplace_back(trim(current));
  return steps;
}

std::size_t count_steps(std::string_view raw) { return split_steps(raw).size(); }

std::optional<AnswerKey> extract_answer(std::string_view raw, const AnswerFormat& format) {
  const auto steps = split_steps(raw);
  if (steps.empty()) return extract_from(raw, format, false);
  return extract_from(steps.back(), format, false);
}

std::optional<AnswerKey> normalize_answer(std::string_view text, const AnswerFormat& format) {
  return extract_from(text, format, true);
}

std::string canonical_decimal(std::string_view literal) {
  bool negative = false;
  if (!literal.empty() && literal.front() == '-') {
    negative = true;
    literal.remove_prefix(1);
  }
  std::string_view whole = literal;
  std::string_view frac;
  if (const auto dot = literal.find('.'); dot != std::string_view::npos) {
    whole = literal.substr(0, dot);
    frac = literal.substr(dot + 1);
  }
  std::string digits;
  for (char c : whole) {
    if (is_digit(c)) digits += c;
  }
  const auto first = digits.find_first_not_of('0');
  digits = first == std::string::npos ? "0" : digits.substr(first);
  std::string fraction(frac);
  while (!fraction.empty() && fraction.back() == '0') fraction.pop_back();
  std::string out = digits;
  if (!fraction.empty()) out += "." + fraction;
  if (negative && out != "0") out.insert(out.begin(), '-');
  return out;
}

ParsedSample parse_sample(std::string question_id, int round, std::size_t ordinal,
                          std::string raw, const AnswerFormat& format) {
  ParsedSample sample;
  sample.question_id = std::move(question_id);
  sample.round = round;
  sample.ordinal = ordinal;
  sample.steps = split_steps(raw);
  sample.step_count = sample.steps.size();
  sample.answer = sample.steps.empty() ? extract_from(raw, format, false)
                                       : extract_from(sample.steps.back(), format, false);
  sample.raw = std::move(raw);
  return sample;
}

}  // namespace dynathink
