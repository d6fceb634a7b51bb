#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dynathink/answer_extraction.hpp"
#include "support/oracles.hpp"

using namespace dynathink;

namespace {

std::optional<std::string> canon(const std::string& raw, const AnswerFormat& format) {
  const auto key = extract_answer(raw, format);
  if (!key) return std::nullopt;
  return key->canonical;
}

}  // namespace

TEST(SplitSteps, ExplicitMarkers) {
  EXPECT_EQ(split_steps("Step 1: a\nStep 2: b"), (std::vector<std::string>{"a", "b"}));
}

TEST(SplitSteps, EmptyInput) { EXPECT_TRUE(split_steps("").empty()); }

TEST(SplitSteps, PreambleContinuationAndLooseMarkers) {
  const std::string raw = "intro\nStep : x\ncont\nstep 2 : y";
  const std::vector<std::string> expected{"x\ncont", "y"};
  EXPECT_EQ(oracle::split_steps(raw), expected);
  EXPECT_EQ(split_steps(raw), expected);
}

TEST(SplitSteps, MarkerMustLeadTheLine) {
  EXPECT_TRUE(split_steps("We do the next Step 1: here").empty());
  EXPECT_EQ(split_steps("  STEP 12: indented"), (std::vector<std::string>{"indented"}));
  EXPECT_EQ(split_steps("Steps: none"), std::vector<std::string>{});
}

TEST(SplitSteps, CrlfLinesAreTrimmed) {
  EXPECT_EQ(split_steps("Step 1: a\r\nStep 2: b\r\n"), (std::vector<std::string>{"a", "b"}));
}

TEST(CountSteps, Examples) {
  EXPECT_EQ(count_steps("Step 1: a\nStep 2: b\nStep 3: c\nStep 4: d"), 4u);
  EXPECT_EQ(count_steps(""), 0u);
  EXPECT_EQ(count_steps("Step : only"), 1u);
}

TEST(SplitSteps, MatchesReferenceScanOnRandomTexts) {
  const std::vector<std::string> pieces = {"Step 1: ", "step: ", "STEP 3 : ", "  Step:", "Step x: ", "word ",
                                           "12 ", "\n", "\n", ": ", "Steps ", "\r\n", " ", "answer is 4"};
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  std::uniform_int_distribution<int> len(0, 30);
  for (int trial = 0; trial < 3000; ++trial) {
    std::string text;
    const int l = len(rng);
    for (int i = 0; i < l; ++i) text += pieces[pick(rng)];
    const auto expected = oracle::split_steps(text);
    ASSERT_EQ(split_steps(text), expected) << "text: " << text;
    ASSERT_EQ(count_steps(text), expected.size());
  }
}

TEST(ExtractAnswer, MultipleChoice) {
  const auto mc = AnswerFormat::multiple_choice("ABCDE");
  EXPECT_EQ(canon("Step 1: ...\nStep 2: The answer is (C).", mc), "C");
  EXPECT_EQ(canon("Step 1: it is B, not A", mc), "A");
  EXPECT_EQ(canon("Step 1: the answer is d", mc), "D");
  EXPECT_EQ(canon("Step 1: I think so", mc), std::nullopt);
  EXPECT_EQ(canon("Step 1: option F", mc), std::nullopt);
}

TEST(ExtractAnswer, NumericCanonicalization) {
  const auto n = AnswerFormat::numeric();
  EXPECT_EQ(canon("Step : total = 1,234.50 dollars", n), "1234.5");
  EXPECT_EQ(canon("Step 1: 3 apples\nStep 2: so 18 eggs.", n), "18");
  EXPECT_EQ(canon("Step 1: the change is -0.", n), "0");
  EXPECT_EQ(canon("Step 1: it costs $007.250", n), "7.25");
  EXPECT_EQ(canon("Step 1: no numbers here", n), std::nullopt);
}

TEST(ExtractAnswer, Boolean) {
  const auto b = AnswerFormat::boolean();
  EXPECT_EQ(canon("Step : so no, they could not.", b), "no");
  EXPECT_EQ(canon("Step : True.", b), "yes");
  EXPECT_EQ(canon("Step : yes at first, but false overall", b), "no");
  EXPECT_EQ(canon("Step : notably unknown", b), std::nullopt);
}

TEST(ExtractAnswer, FreeformBoxed) {
  const auto f = AnswerFormat::freeform_boxed();
  EXPECT_EQ(canon("Step 1: so \\boxed{\\frac{1}{2}}", f), "\\frac{1}{2}");
  EXPECT_EQ(canon("Step 1: \\boxed{1} then \\boxed{2}", f), "2");
  EXPECT_EQ(canon("Step 1: The answer is: x+1.", f), "x+1");
  EXPECT_EQ(canon("Step 1: nothing to see", f), std::nullopt);
  EXPECT_NE(canon("Step 1: \\boxed{1/2}", f), canon("Step 1: \\boxed{0.5}", f));
}

TEST(ExtractAnswer, UsesOnlyTheLastStep) {
  EXPECT_EQ(canon("Step 1: 5 apples\nStep 2: none left", AnswerFormat::numeric()), std::nullopt);
  EXPECT_EQ(canon("no markers, answer 12", AnswerFormat::numeric()), "12");
}

// Hand-written grammar table; the reference regex scanner must agree with
// both the expectation and the library.
TEST(ExtractAnswer, NumericGrammarAgainstReference) {
  const std::vector<std::pair<std::string, std::optional<std::string>>> table = {
      {"1,234.50", "1234.5"},
      {"total 1,234,567", "1234567"},
      {"12,34", "34"},
      {"1234,567", "567"},
      {"-5 degrees", "-5"},
      {"x-5", "5"},
      {"3-4", "4"},
      {"$-12.00", "-12"},
      {"-$12.00", "-12"},
      {"0.50", "0.5"},
      {".5 of it", "0.5"},
      {"00012", "12"},
      {"-0.000", "0"},
      {"answer: 42.", "42"},
      {"7 or 8 or 9", "9"},
      {"\xE2\x82\xAC" "1,000", "1000"},
      {"\xC2\xA3" "3.10", "3.1"},
      {"version 2.0.1", "0.1"},
      {"no digits", std::nullopt},
      {"100%", "100"},
  };
  ASSERT_EQ(table.size(), 20u);
  for (const auto& [text, expected] : table) {
    EXPECT_EQ(oracle::last_number(text), expected) << "reference on: " << text;
    EXPECT_EQ(canon(text, AnswerFormat::numeric()), expected) << "library on: " << text;
  }
}

TEST(ExtractAnswer, NumericMatchesReferenceOnRandomTexts) {
  const std::vector<std::string> pieces = {"1", "0", "23", ",", ",000", ".", ".5", "-", "$", "x", " ", "a-",
                                           "\xE2\x82\xAC", "9,999", "007", "e"};
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  std::uniform_int_distribution<int> len(1, 12);
  for (int trial = 0; trial < 5000; ++trial) {
    std::string text;
    const int l = len(rng);
    for (int i = 0; i < l; ++i) text += pieces[pick(rng)];
    ASSERT_EQ(canon(text, AnswerFormat::numeric()), oracle::last_number(text)) << "text: " << text;
  }
}

TEST(CanonicalDecimal, Rules) {
  EXPECT_EQ(canonical_decimal("-0012.340"), "-12.34");
  EXPECT_EQ(canonical_decimal("-0"), "0");
  EXPECT_EQ(canonical_decimal("5."), "5");
  EXPECT_EQ(canonical_decimal("0.0"), "0");
  EXPECT_EQ(canonical_decimal("10"), "10");
}

TEST(NormalizeAnswer, EquivalentSurfaceFormsCollapse) {
  const auto n = AnswerFormat::numeric();
  EXPECT_EQ(normalize_answer("3.50", n), normalize_answer("3.5", n));
  EXPECT_EQ(normalize_answer("$3.50", n), normalize_answer("3.5", n));
  EXPECT_EQ(normalize_answer("3.50", n)->canonical, "3.5");
  EXPECT_EQ(normalize_answer("x^2", AnswerFormat::freeform_boxed())->canonical, "x^2");
}

TEST(NormalizeAnswer, IdempotentOnCanonicalForms) {
  const std::vector<std::pair<std::string, AnswerFormat>> inputs = {
      {"Step 1: 1,234.50", AnswerFormat::numeric()},  {"Step 1: -0.0", AnswerFormat::numeric()},
      {"Step 1: (b)", AnswerFormat::multiple_choice("ABCDE")}, {"Step 1: True", AnswerFormat::boolean()},
      {"Step 1: \\boxed{2\\pi}", AnswerFormat::freeform_boxed()}, {"Step 1: .750", AnswerFormat::numeric()},
  };
  for (const auto& [raw, format] : inputs) {
    const auto once = extract_answer(raw, format);
    ASSERT_TRUE(once) << raw;
    const auto twice = normalize_answer(once->canonical, format);
    ASSERT_TRUE(twice) << raw;
    EXPECT_EQ(*twice, *once) << raw;
  }
}

TEST(ParseSample, FillsStepsAndAnswer) {
  const auto s = parse_sample("q1", 2, 3, "Step 1: add\nStep 2: So the answer is 18.", AnswerFormat::numeric());
  EXPECT_EQ(s.question_id, "q1");
  EXPECT_EQ(s.round, 2);
  EXPECT_EQ(s.ordinal, 3u);
  EXPECT_EQ(s.step_count, 2u);
  EXPECT_EQ(s.steps.size(), 2u);
  ASSERT_TRUE(s.answer);
  EXPECT_EQ(s.answer->canonical, "18");
}
