#include "dynathink/classification.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace dynathink {

namespace {

struct Leader {
  const AnswerKey* key = nullptr;
  std::size_t count = 0;
  bool tied = false;
};

Leader leader_of(const VoteDistribution& dist) {
  Leader top;
  for (const auto& [key, count] : dist.counts) {
    if (count > top.count) {
      top = {&key, count, false};
    } else if (count == top.count) {
      top.tied = true;
    }
  }
  return top;
}

std::optional<std::size_t> global_min_steps(std::span<const ParsedSample> pool) {
  std::optional<std::size_t> best;
  for (const auto& s : pool) {
    if (s.answer && (!best || s.step_count < *best)) best = s.step_count;
  }
  return best;
}

CheckOutcome outcome(bool passed) { return passed ? CheckOutcome::Passed : CheckOutcome::Failed; }

}  // namespace

VoteDistribution vote(std::span<const ParsedSample> pool) {
  VoteDistribution dist;
  dist.total_samples = pool.size();
  for (const auto& s : pool) {
    if (!pool.empty() && s.question_id != pool.front().question_id) {
      throw std::invalid_argument("vote: pool mixes question ids");
    }
    if (!s.answer) continue;
    ++dist.counts[*s.answer];
    ++dist.total_parsed;
  }
  return dist;
}

std::optional<AnswerKey> consistency_check(const VoteDistribution& dist, std::size_t n,
                                           ThresholdMode mode) {
  if (n != dist.total_samples || n == 0) {
    throw std::invalid_argument("consistency_check: n must equal the pool size and be >= 1");
  }
  const Leader top = leader_of(dist);
  if (top.key == nullptr || top.tied) return std::nullopt;
  switch (mode) {
    case ThresholdMode::Plurality:
      return *top.key;
    case ThresholdMode::StrictMajority:
      if (top.count >= n / 2 + 1) return *top.key;
      return std::nullopt;
    case ThresholdMode::Unanimous:
      if (dist.counts.size() == 1 && top.count == n) return *top.key;
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<std::size_t> min_steps_for(std::span<const ParsedSample> pool,
                                         const AnswerKey& answer) {
  std::optional<std::size_t> best;
  for (const auto& s : pool) {
    if (s.answer == answer && (!best || s.step_count < *best)) best = s.step_count;
  }
  return best;
}

bool min_steps_check(std::span<const ParsedSample> pool, const AnswerKey& winner,
                     bool require_unique) {
  const auto winner_min = min_steps_for(pool, winner);
  if (!winner_min) {
    throw std::invalid_argument("min_steps_check: winner has no supporting sample");
  }
  const auto overall = global_min_steps(pool);
  if (*winner_min != *overall) return false;
  if (!require_unique) return true;
  return std::none_of(pool.begin(), pool.end(), [&](const ParsedSample& s) {
    return s.answer && *s.answer != winner && s.step_count == *overall;
  });
}

RoundDecision classify(std::span<const ParsedSample> pool, std::size_t n,
                       const PolicyConfig& policy) {
  if (n != pool.size()) throw std::invalid_argument("classify: n must equal the pool size");
  RoundDecision decision;
  decision.distribution = vote(pool);
  if (decision.distribution.total_parsed == 0) {
    decision.consistency = CheckOutcome::Failed;
    return decision;
  }

  if (policy.verification_order == VerificationOrder::ConsistencyThenSteps) {
    auto winner = consistency_check(decision.distribution, n, policy.threshold_mode);
    decision.consistency = outcome(winner.has_value());
    if (!winner) return decision;
    decision.winner = winner;
    const bool steps_ok = min_steps_check(pool, *winner, policy.require_unique_min_steps);
    decision.steps = outcome(steps_ok);
    if (steps_ok) decision.fast = std::move(winner);
    return decision;
  }

  // Steps first: every sample at the global minimum must agree on one answer.
  const std::size_t floor_steps = *global_min_steps(pool);
  const AnswerKey* shortest = nullptr;
  bool agree = true;
  for (const auto& s : pool) {
    if (!s.answer || s.step_count != floor_steps) continue;
    if (shortest == nullptr) {
      shortest = &*s.answer;
    } else if (*s.answer != *shortest) {
      agree = false;
    }
  }
  decision.steps = outcome(agree);
  if (!agree) return decision;
  decision.winner = *shortest;
  const auto confirmed = consistency_check(decision.distribution, n, policy.threshold_mode);
  const bool same = confirmed && *confirmed == *shortest;
  decision.consistency = outcome(same);
  if (same) decision.fast = *shortest;
  return decision;
}

std::optional<AnswerKey> resolve_by_vote(std::span<const ParsedSample> pool) {
  struct Tally {
    std::size_t votes = 0;
    std::size_t min_steps = std::numeric_limits<std::size_t>::max();
    std::size_t first_ordinal = std::numeric_limits<std::size_t>::max();
  };
  std::map<AnswerKey, Tally> tallies;
  for (const auto& s : pool) {
    if (!s.answer) continue;
    Tally& t = tallies[*s.answer];
    ++t.votes;
    t.min_steps = std::min(t.min_steps, s.step_count);
    t.first_ordinal = std::min(t.first_ordinal, s.ordinal);
  }
  const AnswerKey* best = nullptr;
  const Tally* best_tally = nullptr;
  for (const auto& [key, t] : tallies) {
    const bool better =
        best_tally == nullptr || t.votes > best_tally->votes ||
        (t.votes == best_tally->votes &&
         (t.min_steps < best_tally->min_steps ||
          (t.min_steps == best_tally->min_steps && t.first_ordinal < best_tally->first_ordinal)));
    if (better) {
      best = &key;
      best_tally = &t;
    }
  }
  if (best == nullptr) return std::nullopt;
  return *best;
}

}  // namespace dynathink
