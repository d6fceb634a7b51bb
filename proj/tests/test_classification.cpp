#include <algorithm>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "dynathink/classification.hpp"
#include "support/oracles.hpp"
#include "support/test_support.hpp"

using namespace dynathink;
using testing_support::num;
using testing_support::pool_of;
using testing_support::sample;

namespace {

const ThresholdMode kModes[] = {ThresholdMode::Plurality, ThresholdMode::StrictMajority, ThresholdMode::Unanimous};
const VerificationOrder kOrders[] = {VerificationOrder::ConsistencyThenSteps,
                                     VerificationOrder::StepsThenConsistency};

PolicyConfig policy(ThresholdMode mode, VerificationOrder order, bool unique = false) {
  PolicyConfig p;
  p.threshold_mode = mode;
  p.verification_order = order;
  p.require_unique_min_steps = unique;
  return p;
}

VoteDistribution dist(std::vector<std::pair<std::string, std::size_t>> counts, std::size_t unparsed = 0) {
  VoteDistribution d;
  for (const auto& [a, c] : counts) {
    d.counts[num(a)] = c;
    d.total_parsed += c;
  }
  d.total_samples = d.total_parsed + unparsed;
  return d;
}

std::vector<ParsedSample> to_samples(const std::vector<oracle::Sample>& pool) {
  std::vector<ParsedSample> out;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    std::optional<AnswerKey> a;
    if (pool[i].answer) a = num(std::string(1, *pool[i].answer));
    out.push_back(sample("q", i, a, static_cast<std::size_t>(pool[i].steps)));
  }
  return out;
}

std::vector<oracle::Sample> random_pool(std::mt19937_64& rng, std::size_t n, bool allow_unparsed) {
  std::uniform_int_distribution<int> ans(0, allow_unparsed ? 3 : 2);
  std::uniform_int_distribution<int> steps(1, 6);
  std::vector<oracle::Sample> pool;
  for (std::size_t i = 0; i < n; ++i) {
    const int a = ans(rng);
    pool.push_back({a == 3 ? std::nullopt : std::optional<char>('A' + a), steps(rng)});
  }
  return pool;
}

}  // namespace

TEST(Vote, CountsTies) {
  const auto pool = pool_of({{"1", 1}, {"1", 1}, {"2", 1}, {"2", 1}});
  const auto d = vote(pool);
  EXPECT_EQ(d, dist({{"1", 2}, {"2", 2}}));
  EXPECT_EQ(d.total_parsed, 4u);
}

TEST(Vote, Unanimity) { EXPECT_EQ(vote(pool_of({{"7", 2}, {"7", 3}, {"7", 1}})), dist({{"7", 3}})); }

TEST(Vote, UnparseableCountsOnlyTowardTotal) {
  const auto d = vote(pool_of({{"1", 1}, {"1", 1}, {"1", 1}, {"2", 1}, {"", 1}}));
  EXPECT_EQ(d, dist({{"1", 3}, {"2", 1}}, 1));
  EXPECT_EQ(d.total_parsed, 4u);
  EXPECT_EQ(d.total_samples, 5u);
}

TEST(Vote, EmptyPoolIsLegal) {
  const auto d = vote({});
  EXPECT_TRUE(d.counts.empty());
  EXPECT_EQ(d.total_samples, 0u);
}

TEST(Vote, RejectsMixedQuestions) {
  std::vector<ParsedSample> pool{sample("a", 0, num("1"), 1), sample("b", 1, num("1"), 1)};
  EXPECT_THROW(vote(pool), std::invalid_argument);
}

TEST(ConsistencyCheck, Examples) {
  EXPECT_EQ(consistency_check(dist({{"1", 2}, {"2", 2}}), 4, ThresholdMode::StrictMajority), std::nullopt);
  EXPECT_EQ(consistency_check(dist({{"9", 3}}), 3, ThresholdMode::Unanimous), num("9"));
  EXPECT_EQ(consistency_check(dist({{"1", 3}, {"2", 2}}), 5, ThresholdMode::StrictMajority), num("1"));
  EXPECT_EQ(consistency_check(dist({{"1", 2}, {"2", 1}, {"3", 1}}), 4, ThresholdMode::Plurality), num("1"));
  EXPECT_EQ(consistency_check(dist({{"1", 2}, {"2", 1}, {"3", 1}}), 4, ThresholdMode::StrictMajority),
            std::nullopt);
  EXPECT_EQ(consistency_check(dist({{"1", 3}}, 1), 4, ThresholdMode::Unanimous), std::nullopt);
}

TEST(ConsistencyCheck, RejectsMismatchedN) {
  EXPECT_THROW(consistency_check(dist({{"1", 3}}), 4, ThresholdMode::Plurality), std::invalid_argument);
}

// Every two-answer split (a, b, unparsed) of n = 1..10 against a threshold
// table computed from the definitions.
TEST(ConsistencyCheck, BruteForceThresholdTable) {
  for (std::size_t n = 1; n <= 10; ++n) {
    for (std::size_t a = 0; a <= n; ++a) {
      for (std::size_t b = 0; a + b <= n; ++b) {
        std::vector<std::pair<std::string, std::size_t>> counts;
        if (a) counts.emplace_back("1", a);
        if (b) counts.emplace_back("2", b);
        const auto d = dist(counts, n - a - b);
        const std::size_t majority = n / 2 + 1;
        std::optional<AnswerKey> plural, strict, unanimous;
        if (a > b) plural = num("1");
        if (b > a) plural = num("2");
        if (plural && std::max(a, b) >= majority) strict = plural;
        if (a == n) unanimous = num("1");
        if (b == n) unanimous = num("2");
        EXPECT_EQ(consistency_check(d, n, ThresholdMode::Plurality), plural) << n << " " << a << " " << b;
        EXPECT_EQ(consistency_check(d, n, ThresholdMode::StrictMajority), strict) << n << " " << a << " " << b;
        EXPECT_EQ(consistency_check(d, n, ThresholdMode::Unanimous), unanimous) << n << " " << a << " " << b;
      }
    }
  }
}

TEST(ConsistencyCheck, StricterModesImplyLooserOnes) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> size(1, 9);
  for (int trial = 0; trial < 5000; ++trial) {
    const auto pool = to_samples(random_pool(rng, size(rng), true));
    const auto d = vote(pool);
    const auto u = consistency_check(d, pool.size(), ThresholdMode::Unanimous);
    const auto s = consistency_check(d, pool.size(), ThresholdMode::StrictMajority);
    const auto p = consistency_check(d, pool.size(), ThresholdMode::Plurality);
    if (u) ASSERT_EQ(s, u);
    if (s) ASSERT_EQ(p, s);
  }
}

TEST(MinStepsCheck, Examples) {
  // Winner's samples take 4 steps while a rival takes 3.
  EXPECT_FALSE(min_steps_check(pool_of({{"1", 4}, {"1", 5}, {"1", 4}, {"2", 3}}), num("1")));
  EXPECT_TRUE(min_steps_check(pool_of({{"5", 9}, {"5", 2}, {"5", 6}}), num("5")));
  EXPECT_TRUE(min_steps_check(pool_of({{"1", 2}, {"2", 2}, {"1", 3}}), num("1")));
  EXPECT_FALSE(min_steps_check(pool_of({{"1", 2}, {"2", 2}, {"1", 3}}), num("1"), true));
  EXPECT_TRUE(min_steps_check(pool_of({{"1", 2}, {"", 1}, {"1", 3}}), num("1")));
}

TEST(MinStepsCheck, UnsupportedWinnerIsAnError) {
  EXPECT_THROW(min_steps_check(pool_of({{"1", 2}}), num("2")), std::invalid_argument);
}

TEST(Classify, FigureOneQuestionsAtFour) {
  const auto p = policy(ThresholdMode::StrictMajority, VerificationOrder::ConsistencyThenSteps);
  const auto q1 = classify(pool_of({{"18", 3}, {"18", 3}, {"18", 4}, {"20", 5}}), 4, p);
  const auto q2 = classify(pool_of({{"42", 4}, {"42", 4}, {"42", 5}, {"36", 3}}), 4, p);
  const auto q3 = classify(pool_of({{"7", 3}, {"9", 3}, {"7", 4}, {"9", 4}}), 4, p);
  ASSERT_TRUE(q1.is_fast());
  EXPECT_EQ(*q1.fast, num("18"));
  EXPECT_FALSE(q2.is_fast());
  EXPECT_EQ(q2.consistency, CheckOutcome::Passed);
  EXPECT_EQ(q2.steps, CheckOutcome::Failed);
  EXPECT_FALSE(q3.is_fast());
  EXPECT_EQ(q3.consistency, CheckOutcome::Failed);
  EXPECT_EQ(q3.steps, CheckOutcome::NotRun);
}

TEST(Classify, UnanimousPoolIsFastEverywhere) {
  const auto pool = pool_of({{"3", 5}, {"3", 2}, {"3", 4}});
  for (auto mode : kModes) {
    for (auto order : kOrders) {
      const auto d = classify(pool, 3, policy(mode, order));
      ASSERT_TRUE(d.is_fast());
      EXPECT_EQ(*d.fast, num("3"));
    }
  }
}

TEST(Classify, NothingParsedIsPending) {
  const auto d = classify(pool_of({{"", 1}, {"", 2}}), 2,
                          policy(ThresholdMode::Plurality, VerificationOrder::ConsistencyThenSteps));
  EXPECT_FALSE(d.is_fast());
  EXPECT_EQ(d.consistency, CheckOutcome::Failed);
}

TEST(Classify, StepsFirstNeedsOneAnswerAtTheMinimum) {
  const auto p = policy(ThresholdMode::Plurality, VerificationOrder::StepsThenConsistency);
  EXPECT_FALSE(classify(pool_of({{"1", 2}, {"2", 2}, {"1", 3}}), 3, p).is_fast());
  EXPECT_TRUE(classify(pool_of({{"1", 2}, {"1", 2}, {"2", 3}}), 3, p).is_fast());
  // The minimum-step answer is not the vote winner.
  EXPECT_FALSE(classify(pool_of({{"2", 1}, {"1", 2}, {"1", 3}}), 3, p).is_fast());
}

TEST(Classify, RejectsPoolSizeMismatch) {
  EXPECT_THROW(classify(pool_of({{"1", 1}}), 2, PolicyConfig{}), std::invalid_argument);
}

// Exhaustive agreement with the reference for n <= 4 over {A,B,C,unparsed}
// x steps 1..3; the acceptance suite covers the larger space.
TEST(Classify, MatchesReferenceExhaustivelySmall) {
  const int symbols = 4 * 3;
  for (std::size_t n = 1; n <= 4; ++n) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= symbols;
    for (std::size_t code = 0; code < total; ++code) {
      std::vector<oracle::Sample> pool;
      std::size_t c = code;
      for (std::size_t i = 0; i < n; ++i) {
        const int s = static_cast<int>(c % symbols);
        c /= symbols;
        const int a = s / 3;
        pool.push_back({a == 3 ? std::nullopt : std::optional<char>('A' + a), 1 + s % 3});
      }
      const auto samples = to_samples(pool);
      for (auto mode : kModes) {
        for (auto order : kOrders) {
          for (bool unique : {false, true}) {
            if (unique && order == VerificationOrder::StepsThenConsistency) continue;
            const auto p = policy(mode, order, unique);
            const auto expected = oracle::classify(pool, p);
            const auto got = classify(samples, n, p);
            std::optional<char> got_c;
            if (got.fast) got_c = got.fast->canonical[0];
            ASSERT_EQ(got_c, expected) << "code " << code << " n " << n << " mode " << to_string(mode)
                                       << " order " << to_string(order) << " unique " << unique;
          }
        }
      }
    }
  }
}

TEST(Classify, PermutationInvariant) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> size(1, 8);
  for (int trial = 0; trial < 3000; ++trial) {
    auto pool = random_pool(rng, size(rng), true);
    const auto base = to_samples(pool);
    std::shuffle(pool.begin(), pool.end(), rng);
    const auto shuffled = to_samples(pool);
    for (auto mode : kModes) {
      for (auto order : kOrders) {
        const auto p = policy(mode, order);
        ASSERT_EQ(classify(base, base.size(), p).fast, classify(shuffled, shuffled.size(), p).fast);
      }
    }
  }
}

TEST(Classify, MonotoneSafetyUnderStrictMajority) {
  const auto p = policy(ThresholdMode::StrictMajority, VerificationOrder::ConsistencyThenSteps);
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> size(1, 9);
  std::uniform_int_distribution<std::size_t> extra(0, 4);
  int checked = 0;
  for (int trial = 0; trial < 20000; ++trial) {
    auto pool = to_samples(random_pool(rng, size(rng), true));
    const auto before = classify(pool, pool.size(), p);
    if (!before.is_fast()) continue;
    const std::size_t w = *min_steps_for(pool, *before.fast);
    pool.push_back(sample("q", pool.size(), before.fast, w + extra(rng)));
    // Only the conditional form is claimed: the vote threshold must still hold.
    if (!consistency_check(vote(pool), pool.size(), ThresholdMode::StrictMajority)) continue;
    const auto after = classify(pool, pool.size(), p);
    ASSERT_TRUE(after.is_fast());
    ASSERT_EQ(*after.fast, *before.fast);
    ++checked;
  }
  EXPECT_GT(checked, 500);
}

TEST(ResolveByVote, PluralityThenStepsThenOrdinal) {
  EXPECT_EQ(resolve_by_vote(pool_of({{"1", 3}, {"2", 1}, {"1", 4}})), num("1"));
  EXPECT_EQ(resolve_by_vote(pool_of({{"1", 3}, {"2", 2}, {"1", 4}, {"2", 5}})), num("2"));
  EXPECT_EQ(resolve_by_vote(pool_of({{"2", 3}, {"1", 2}, {"1", 4}, {"2", 2}})), num("2"));
  EXPECT_EQ(resolve_by_vote(pool_of({{"", 3}, {"", 2}})), std::nullopt);
}

TEST(MinStepsFor, FindsSmallestSupportingSample) {
  const auto pool = pool_of({{"1", 3}, {"2", 1}, {"1", 2}});
  EXPECT_EQ(min_steps_for(pool, num("1")), 2u);
  EXPECT_EQ(min_steps_for(pool, num("3")), std::nullopt);
}
