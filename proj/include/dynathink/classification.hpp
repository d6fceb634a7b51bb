#pragma once

#include <optional>
#include <span>

#include "dynathink/types.hpp"

namespace dynathink {

/// Vote counts over the parsed answers of one question's pool. Unparseable
/// samples count toward total_samples only.
VoteDistribution vote(std::span<const ParsedSample> pool);

/// Winner under the given threshold, or nullopt. `n` must equal
/// dist.total_samples.
///   Plurality       unique strictly greatest count
///   StrictMajority  unique greatest count, and count >= floor(n/2) + 1
///   Unanimous       one distinct answer holding all n samples
std::optional<AnswerKey> consistency_check(const VoteDistribution& dist, std::size_t n,
                                           ThresholdMode mode);

/// True iff the smallest step count among `winner`'s samples equals the
/// smallest step count among all parsed samples. With `require_unique`,
/// no rival answer may also attain that minimum.
bool min_steps_check(std::span<const ParsedSample> pool, const AnswerKey& winner,
                     bool require_unique = false);

struct RoundDecision {
  std::optional<AnswerKey> fast;  // set iff the question classifies fast
  std::optional<AnswerKey> winner;  // candidate the checks were run about
  CheckOutcome consistency = CheckOutcome::NotRun;
  CheckOutcome steps = CheckOutcome::NotRun;
  VoteDistribution distribution;

  bool is_fast() const { return fast.has_value(); }
};

/// One round's fast/pending decision for a pool of exactly `n` samples,
/// running both checks in the policy's order.
RoundDecision classify(std::span<const ParsedSample> pool, std::size_t n,
                       const PolicyConfig& policy);

/// Self-consistency answer for a finished pool: plurality vote, ties broken
/// by the smaller minimum step count, then by the lowest ordinal among each
/// tied answer's supporting samples. nullopt when nothing parsed.
std::optional<AnswerKey> resolve_by_vote(std::span<const ParsedSample> pool);

/// Smallest step count among samples answering `answer`; nullopt if none do.
std::optional<std::size_t> min_steps_for(std::span<const ParsedSample> pool,
                                         const AnswerKey& answer);

}  // namespace dynathink
