#include "dynathink/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include "dynathink/answer_extraction.hpp"
#include "dynathink/classification.hpp"

namespace dynathink {

namespace {

struct FetchJob {
  const Question* question = nullptr;
  std::size_t first_ordinal = 0;
  int k = 0;
};

void check_questions(std::span<const Question> questions) {
  if (questions.empty()) throw std::invalid_argument("run: question list is empty");
  std::set<std::string> ids;
  for (const auto& q : questions) {
    validate(q);
    if (!ids.insert(q.id).second) throw std::invalid_argument("run: duplicate question id " + q.id);
  }
}

// Issues one round's generation requests (optionally in parallel), then
// charges the ledger for every request that completed. Any failure aborts
// the run after the round barrier.
std::vector<std::vector<std::string>> fetch_round(std::span<const FetchJob> jobs, Backend& backend,
                                                  const RunOptions& options, CostLedger& ledger) {
  std::vector<std::vector<std::string>> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::vector<char> done(jobs.size(), 0);
  std::atomic<bool> failed{false};
  std::atomic<std::size_t> next{0};

  auto work = [&](std::size_t i) {
    const FetchJob& job = jobs[i];
    GenerationRequest request;
    request.question_id = job.question->id;
    request.first_ordinal = job.first_ordinal;
    request.prompt = build_prompt(*job.question, options.prompt_prefix);
    request.k = job.k;
    request.temperature = options.temperature;
    request.max_tokens = options.max_tokens;
    request.model_id = options.model_id;
    try {
      auto texts = backend.generate(request);
      if (texts.size() != static_cast<std::size_t>(job.k)) {
        throw BackendError(backend.name() + " backend returned " + std::to_string(texts.size()) +
                           " completions for " + job.question->id + ", expected " +
                           std::to_string(job.k));
      }
      results[i] = std::move(texts);
      done[i] = 1;
    } catch (...) {
      errors[i] = std::current_exception();
      failed = true;
    }
  };

  const std::size_t workers = std::min(options.max_parallel, jobs.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs.size() && !failed; ++i) work(i);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size() && !failed; i = next++) work(i);
      });
    }
  }

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (done[i]) ledger.charge(jobs[i].question->id, static_cast<std::size_t>(jobs[i].k));
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw RunAborted(std::string("backend failure: ") + e.what(), ledger);
    } catch (...) {
      throw RunAborted("backend failure: unknown error", ledger);
    }
  }
  return results;
}

// Tops every listed pool up to `target` samples.
void top_up(const std::vector<const Question*>& targets, std::size_t target, int round,
            RoundState& state, Backend& backend, const RunOptions& options, CostLedger& ledger) {
  std::vector<FetchJob> jobs;
  for (const Question* q : targets) {
    const auto have = state.pools[q->id].size();
    if (have < target) jobs.push_back({q, have, static_cast<int>(target - have)});
  }
  auto texts = fetch_round(jobs, backend, options, ledger);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto& pool = state.pools[jobs[i].question->id];
    for (auto& text : texts[i]) {
      pool.push_back(parse_sample(jobs[i].question->id, round, pool.size(), std::move(text),
                                  jobs[i].question->answer_format));
    }
  }
}

QuestionVerdict slow_verdict(const std::string& id, std::vector<ParsedSample> pool,
                             std::vector<RoundAudit> audit) {
  QuestionVerdict v;
  v.question_id = id;
  v.status = VerdictStatus::Slow;
  v.answer = resolve_by_vote(pool);
  v.queries_used = pool.size();
  v.pool = std::move(pool);
  v.audit = std::move(audit);
  return v;
}

}  // namespace

int max_rounds(const PolicyConfig& policy) {
  const int span = policy.budget_cap - policy.initial_n;
  return (span + policy.increment - 1) / policy.increment + 1;
}

RunResult run(std::span<const Question> questions, Backend& backend, const PolicyConfig& policy,
              const RunOptions& options) {
  check_questions(questions);
  validate(policy);

  RunResult result;
  RoundState state;
  state.n = static_cast<std::size_t>(policy.initial_n);
  std::vector<const Question*> pending;
  for (const auto& q : questions) {
    pending.push_back(&q);
    state.pending.insert(q.id);
  }
  std::map<std::string, std::vector<RoundAudit>> audits;
  const auto cap = static_cast<std::size_t>(policy.budget_cap);

  for (;;) {
    result.ledger.open_round(state.round, pending.size());
    top_up(pending, state.n, state.round, state, backend, options, result.ledger);

    std::vector<const Question*> still_pending;
    std::size_t went_fast = 0;
    for (const Question* q : pending) {
      auto& pool = state.pools[q->id];
      RoundDecision decision = classify(pool, state.n, policy);
      RoundAudit audit{state.round,         state.n,          std::move(decision.distribution),
                       decision.consistency, decision.steps,   decision.winner,
                       decision.is_fast()};
      audits[q->id].push_back(std::move(audit));
      if (!decision.is_fast()) {
        still_pending.push_back(q);
        continue;
      }
      ++went_fast;
      QuestionVerdict v;
      v.question_id = q->id;
      v.status = VerdictStatus::Fast;
      v.answer = std::move(decision.fast);
      v.round = state.round;
      v.queries_used = pool.size();
      v.pool = std::move(pool);
      v.audit = std::move(audits[q->id]);
      state.pools.erase(q->id);
      state.pending.erase(q->id);
      result.verdicts.emplace(q->id, std::move(v));
    }
    pending = std::move(still_pending);
    result.rounds = state.round;

    const bool grow = (went_fast > 0 || policy.spend_to_cap) && state.n < cap && !pending.empty();
    if (!grow) break;
    state.n = std::min(state.n + static_cast<std::size_t>(policy.increment), cap);
    ++state.round;
  }

  if (!pending.empty()) {
    const int resolution_round = state.round + 1;
    result.ledger.open_round(resolution_round, pending.size());
    top_up(pending, cap, resolution_round, state, backend, options, result.ledger);
    for (const Question* q : pending) {
      result.verdicts.emplace(q->id, slow_verdict(q->id, std::move(state.pools[q->id]),
                                                  std::move(audits[q->id])));
    }
  }
  return result;
}

RunResult run_sc_baseline(std::span<const Question> questions, Backend& backend, int n,
                          const RunOptions& options) {
  check_questions(questions);
  if (n < 1) throw std::invalid_argument("run_sc_baseline: n must be >= 1");

  RunResult result;
  RoundState state;
  state.n = static_cast<std::size_t>(n);
  std::vector<const Question*> all;
  for (const auto& q : questions) all.push_back(&q);

  result.ledger.open_round(1, all.size());
  top_up(all, state.n, 1, state, backend, options, result.ledger);
  result.rounds = 1;
  for (const Question* q : all) {
    auto& pool = state.pools[q->id];
    RoundAudit audit;
    audit.round = 1;
    audit.n = pool.size();
    audit.distribution = vote(pool);
    audit.winner = resolve_by_vote(pool);
    result.verdicts.emplace(q->id, slow_verdict(q->id, std::move(pool), {std::move(audit)}));
  }
  return result;
}

}  // namespace dynathink
