#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dynathink/types.hpp"

namespace dynathink {

/// Splits a completion into reasoning steps. A step starts at any line whose
/// first non-blank characters are "Step" (any case), optionally followed by
/// blanks and/or an integer, then a colon. Text before the first marker is
/// dropped; each step excludes its marker and is trimmed.
std::vector<std::string> split_steps(std::string_view raw);

std::size_t count_steps(std::string_view raw);

/// Extracts the final answer from the last step (or the whole text when it
/// has no steps). Last occurrence wins in every format. Returns nullopt for
/// an unparseable completion.
std::optional<AnswerKey> extract_answer(std::string_view raw, const AnswerFormat& format);

/// Canonicalizes a bare answer string, such as a dataset's gold field.
/// Differs from extract_answer only for FreeformBoxed, where text without a
/// box or "answer is" phrase is taken verbatim.
std::optional<AnswerKey> normalize_answer(std::string_view text, const AnswerFormat& format);

/// Canonical decimal form of a numeric literal such as "-0012.340" -> "-12.34".
/// Expects optional '-', digits, optional '.', digits; separators removed.
std::string canonical_decimal(std::string_view literal);

/// Parses a completion into a sample with steps and answer filled in.
ParsedSample parse_sample(std::string question_id, int round, std::size_t ordinal,
                          std::string raw, const AnswerFormat& format);

}  // namespace dynathink
