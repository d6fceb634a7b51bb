#pragma once

// Seeded synthetic question populations for the property and acceptance
// suites. Answers are numeric: the gold answer is "0" and distractors are
// "1", "2", ...

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dynathink/backends.hpp"

namespace populations {

using dynathink::AnswerFormat;
using dynathink::AnswerKey;
using dynathink::StepOutcome;
using dynathink::SyntheticQuestionProfile;

using Profiles = std::vector<std::pair<std::string, SyntheticQuestionProfile>>;

inline AnswerKey key(int i) { return {std::to_string(i), AnswerFormat::numeric()}; }

/// Weights normalized so they sum to exactly `total` up to rounding, with
/// the last entry absorbing the residue.
inline std::vector<double> normalized(std::vector<double> w, double total = 1.0) {
  double sum = 0;
  for (double x : w) sum += x;
  double acc = 0;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    w[i] = w[i] / sum * total;
    acc += w[i];
  }
  w.back() = total - acc;
  return w;
}

inline std::vector<StepOutcome> step_range(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  std::uniform_real_distribution<double> u(0.2, 1.0);
  std::vector<double> w;
  for (std::size_t s = lo; s <= hi; ++s) w.push_back(u(rng));
  w = normalized(w);
  std::vector<StepOutcome> out;
  for (std::size_t s = lo; s <= hi; ++s) out.push_back({s, w[s - lo]});
  return out;
}

inline SyntheticQuestionProfile make_profile(std::mt19937_64& rng, double p_correct, int distractors,
                                             std::pair<std::size_t, std::size_t> correct_steps,
                                             std::pair<std::size_t, std::size_t> wrong_steps,
                                             double parse_failure_rate) {
  SyntheticQuestionProfile p;
  p.format = AnswerFormat::numeric();
  p.gold = "0";
  std::uniform_real_distribution<double> u(0.2, 1.0);
  std::vector<double> wrong;
  for (int i = 0; i < distractors; ++i) wrong.push_back(u(rng));
  wrong = normalized(wrong, 1.0 - p_correct);
  p.answer_pool.emplace_back(key(0), p_correct);
  p.steps_given_answer[key(0)] = step_range(rng, correct_steps.first, correct_steps.second);
  for (int i = 0; i < distractors; ++i) {
    p.answer_pool.emplace_back(key(i + 1), wrong[static_cast<std::size_t>(i)]);
    p.steps_given_answer[key(i + 1)] = step_range(rng, wrong_steps.first, wrong_steps.second);
  }
  p.parse_failure_rate = parse_failure_rate;
  return p;
}

inline std::string qid(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "q%04zu", i);
  return buf;
}

/// Heterogeneous population: per-seed ranges for correctness, distractor
/// count, step overlap and parse failures.
inline Profiles mixed(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double lo = 0.15 + 0.25 * u(rng);
  const double hi = std::min(0.99, lo + 0.3 + 0.5 * u(rng));
  const double fail_cap = 0.15 * u(rng);
  Profiles out;
  for (std::size_t i = 0; i < count; ++i) {
    const double pc = lo + (hi - lo) * u(rng);
    const int distractors = 1 + static_cast<int>(u(rng) * 4);
    const std::size_t c_lo = 1 + static_cast<std::size_t>(u(rng) * 3);
    const std::size_t w_lo = 1 + static_cast<std::size_t>(u(rng) * 5);
    const double fail = u(rng) < 0.5 ? 0.0 : fail_cap * u(rng);
    out.emplace_back(qid(i), make_profile(rng, pc, distractors, {c_lo, c_lo + 3}, {w_lo, w_lo + 4}, fail));
  }
  return out;
}

/// The correct answer holds a clear share that varies by question; the
/// wrong mass is spread over several distractors, so a larger vote share
/// means a likelier correct answer. Step counts carry no signal.
inline Profiles vote_share(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 rng(seed * 0xD1B54A32D192ED03ULL + 7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Profiles out;
  for (std::size_t i = 0; i < count; ++i) {
    const double pc = 0.3 + 0.68 * u(rng);
    const int distractors = 3 + static_cast<int>(u(rng) * 3);
    out.emplace_back(qid(i), make_profile(rng, pc, distractors, {2, 6}, {2, 6}, 0.0));
  }
  return out;
}

/// Correct answers use 1-4 steps, wrong answers 4-8, so accuracy falls
/// as the step count of the chosen answer rises.
inline Profiles step_trend(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 rng(seed * 0xA24BAED4963EE407ULL + 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Profiles out;
  for (std::size_t i = 0; i < count; ++i) {
    const double pc = 0.25 + 0.65 * u(rng);
    const int distractors = 1 + static_cast<int>(u(rng) * 3);
    out.emplace_back(qid(i), make_profile(rng, pc, distractors, {1, 4}, {4, 8}, 0.0));
  }
  return out;
}

/// Profile document accepted by SyntheticBackend::from_json.
inline std::string profile_document(std::uint64_t seed, const Profiles& profiles) {
  nlohmann::ordered_json questions = nlohmann::ordered_json::object();
  for (const auto& [id, p] : profiles) {
    nlohmann::ordered_json q;
    if (p.gold) q["gold"] = *p.gold;
    q["answer_pool"] = nlohmann::ordered_json::array();
    for (const auto& [answer, prob] : p.answer_pool) {
      q["answer_pool"].push_back({{"answer", answer.canonical}, {"probability", prob}});
    }
    for (const auto& [answer, outcomes] : p.steps_given_answer) {
      auto& list = q["steps_given_answer"][answer.canonical];
      for (const auto& o : outcomes) list.push_back({{"steps", o.steps}, {"probability", o.probability}});
    }
    q["parse_failure_rate"] = p.parse_failure_rate;
    questions[id] = q;
  }
  return nlohmann::ordered_json{{"seed", seed}, {"questions", questions}}.dump(2);
}

}  // namespace populations
