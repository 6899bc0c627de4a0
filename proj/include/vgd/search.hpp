#pragma once

// Decoding strategies: value-guided beam search and its baselines (greedy,
// vanilla sampling, self-consistency, best-of-K reranking).
//
// RNG lineage. Every candidate owns an RngStream. Stage-0 candidate i draws
// from root.derive(i). When a beam path spawns K/b children, child 0 keeps
// drawing from the parent's stream and child j > 0 draws from
// parent.derive("t<stage>.<j>"). A vanilla rollout i draws every step from
// root.derive(i), so with b = K beam search replays vanilla sampling exactly.
// Candidates are also ordered by lineage (root index, then child indices);
// that order breaks value ties and is independent of scheduling.

#include "vgd/common.hpp"
#include "vgd/policy.hpp"
#include "vgd/rng.hpp"
#include "vgd/task_env.hpp"

#include <algorithm>
#include <concepts>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

namespace vgd {

template <class S>
concept PrefixScorer = requires(const S& s, const PartialPath& p) {
  { s.score_prefix(p) } -> std::convertible_to<double>;
  { s.score_complete(p) } -> std::convertible_to<double>;
};

struct BeamConfig {
  std::size_t K = 20;  // samples per stage
  std::size_t b = 4;   // beam size
  std::size_t T = kDefaultMaxSteps;
  bool dedup_priority = true;

  void validate() const {
    if (K < 1 || b < 1 || b > K) throw InvalidConfig("beam config needs 1 <= b <= K");
    if (K % b != 0) throw InvalidConfig("beam size must divide the sampling size");
    if (T < 1) throw InvalidConfig("beam config needs T >= 1");
  }
};

struct Candidate {
  PartialPath path;
  double value = 0.0;
  std::vector<std::size_t> lineage;
};

struct StageRecord {
  std::vector<std::string> candidates;  // last step text of each scored candidate
  std::vector<double> values;
  std::vector<std::size_t> selected;  // indices into candidates, best first
  std::size_t expanded = 0;  // beams that spawned K/b children (stage 0: none)
  std::size_t carried = 0;   // complete beams re-entering unexpanded
};

struct DecodeResult {
  PartialPath chosen;
  std::vector<PartialPath> pool;  // final candidates in lineage order
  std::vector<StageRecord> stages;
  AnswerVerdict verdict;
  std::size_t sampled_steps = 0;
};

inline bool lineage_less(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

/// Top-b selection. Order is (value desc, lineage asc). With dedup priority
/// the first occurrence of every distinct step sequence outranks all
/// duplicates. The result is sorted by (value desc, lineage asc).
inline std::vector<std::size_t> select_top(const std::vector<Candidate>& pool, std::size_t b, bool dedup_priority) {
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto better = [&](std::size_t x, std::size_t y) {
    if (pool[x].value != pool[y].value) return pool[x].value > pool[y].value;
    return lineage_less(pool[x].lineage, pool[y].lineage);
  };
  std::sort(order.begin(), order.end(), better);
  std::vector<std::size_t> chosen;
  if (!dedup_priority) {
    order.resize(std::min(b, order.size()));
    return order;
  }
  std::unordered_set<std::string> seen;
  std::vector<std::size_t> duplicates;
  for (auto i : order) {
    if (seen.insert(canonical_key(pool[i].path)).second) {
      if (chosen.size() < b) chosen.push_back(i);
    } else {
      duplicates.push_back(i);
    }
  }
  for (auto i : duplicates) {
    if (chosen.size() >= b) break;
    chosen.push_back(i);
  }
  std::sort(chosen.begin(), chosen.end(), better);
  return chosen;
}

namespace detail {

struct Live {
  Candidate cand;
  RngStream rng;
};

inline std::string last_step_text(const PartialPath& p) {
  return p.steps().empty() ? std::string() : step_text(p.steps().back());
}

template <PrefixScorer Scorer>
std::size_t pick_best_complete(const std::vector<PartialPath>& paths, const Scorer& scorer) {
  std::size_t best = paths.size();
  double best_score = 0.0;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (!paths[i].complete()) continue;
    const double s = scorer.score_complete(paths[i]);
    if (best == paths.size() || s > best_score) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

}  // namespace detail

/// Algorithm: sample K first steps, keep the top b by value; then, while a
/// beam path is incomplete and fewer than T steps were taken, every
/// incomplete beam path spawns K/b sampled continuations, complete beam paths
/// re-enter the pool unexpanded with their stored value, and the top b of the
/// pool become the next beams. The answer is the complete pool member with
/// the highest score_complete. Paths still incomplete when the cap is hit are
/// marked truncated (unanswered). Throws InvalidConfig.
template <PrefixScorer Scorer>
DecodeResult value_guided_beam_search(const InstancePtr& instance, const PolicySpec& policy,
                                      const BeamConfig& config, const Scorer& scorer, const RngStream& rng) {
  config.validate();
  const std::size_t per_beam = config.K / config.b;
  DecodeResult result{PartialPath(instance), {}, {}, {}, 0};

  std::vector<detail::Live> pool;
  StageRecord stage0;
  const PartialPath root(instance);
  for (std::size_t i = 0; i < config.K; ++i) {
    RngStream stream = rng.derive(std::to_string(i));
    PartialPath child = apply_generated_step(root, sample_step(policy, root, stream));
    ++result.sampled_steps;
    const double v = scorer.score_prefix(child);
    stage0.candidates.push_back(detail::last_step_text(child));
    stage0.values.push_back(v);
    pool.push_back({Candidate{std::move(child), v, {i}}, std::move(stream)});
  }

  auto select = [&](StageRecord& record) {
    std::vector<Candidate> cands;
    cands.reserve(pool.size());
    for (const auto& l : pool) cands.push_back(l.cand);
    record.selected = select_top(cands, config.b, config.dedup_priority);
    std::vector<detail::Live> beams;
    for (auto i : record.selected) beams.push_back(pool[i]);
    return beams;
  };

  std::vector<detail::Live> beams = select(stage0);
  result.stages.push_back(std::move(stage0));
  std::size_t t = 1;
  auto any_incomplete = [](const std::vector<detail::Live>& v) {
    return std::any_of(v.begin(), v.end(), [](const detail::Live& l) { return !l.cand.path.complete(); });
  };

  while (any_incomplete(beams) && t < config.T) {
    pool.clear();
    StageRecord record;
    for (auto& beam : beams) {
      if (beam.cand.path.complete()) {
        record.candidates.push_back(detail::last_step_text(beam.cand.path));
        record.values.push_back(beam.cand.value);
        pool.push_back(beam);
        ++record.carried;
        continue;
      }
      ++record.expanded;
      for (std::size_t j = 0; j < per_beam; ++j) {
        RngStream stream = j == 0 ? beam.rng : beam.rng.derive("t" + std::to_string(t) + "." + std::to_string(j));
        PartialPath child = apply_generated_step(beam.cand.path, sample_step(policy, beam.cand.path, stream));
        ++result.sampled_steps;
        const double v = scorer.score_prefix(child);
        auto lineage = beam.cand.lineage;
        lineage.push_back(j);
        record.candidates.push_back(detail::last_step_text(child));
        record.values.push_back(v);
        pool.push_back({Candidate{std::move(child), v, std::move(lineage)}, std::move(stream)});
      }
    }
    ++t;
    beams = select(record);
    result.stages.push_back(std::move(record));
  }

  if (t >= config.T)
    for (auto& l : pool)
      if (!l.cand.path.complete()) l.cand.path = l.cand.path.truncate();

  std::sort(pool.begin(), pool.end(),
            [](const detail::Live& a, const detail::Live& b) { return lineage_less(a.cand.lineage, b.cand.lineage); });
  for (auto& l : pool) result.pool.push_back(l.cand.path);

  std::size_t best = detail::pick_best_complete(result.pool, scorer);
  if (best == result.pool.size()) {
    // Every pool member is still open: return the top-valued one unanswered.
    std::size_t top = 0;
    for (std::size_t i = 1; i < pool.size(); ++i)
      if (pool[i].cand.value > pool[top].cand.value) top = i;
    result.chosen = result.pool[top].truncate();
  } else {
    result.chosen = result.pool[best];
  }
  result.verdict = check_answer(result.chosen);
  return result;
}

/// Deterministic rollout following greedy_step.
inline DecodeResult greedy_decode(const InstancePtr& instance, const PolicySpec& policy,
                                  std::size_t max_steps = kDefaultMaxSteps) {
  PartialPath path(instance);
  std::size_t steps = 0;
  while (!path.complete()) {
    if (path.size() >= max_steps) {
      path = path.truncate();
      break;
    }
    path = apply_generated_step(path, greedy_step(policy, path));
    ++steps;
  }
  DecodeResult r{path, {path}, {}, check_answer(path), steps};
  return r;
}

/// K independent rollouts; rollout i uses rng.derive(i).
inline std::vector<PartialPath> vanilla_sample(const InstancePtr& instance, const PolicySpec& policy, std::size_t K,
                                               const RngStream& rng, std::size_t max_steps = kDefaultMaxSteps) {
  if (K < 1) throw InvalidConfig("vanilla sampling needs K >= 1");
  std::vector<PartialPath> out;
  out.reserve(K);
  for (std::size_t i = 0; i < K; ++i) {
    RngStream stream = rng.derive(std::to_string(i));
    out.push_back(rollout(policy, PartialPath(instance), max_steps, stream));
  }
  return out;
}

inline std::size_t count_sampled_steps(const std::vector<PartialPath>& paths) {
  std::size_t n = 0;
  for (const auto& p : paths) n += p.size();
  return n;
}

/// Answer class used for voting. Game24: the answer's value and the sorted
/// multiset of numbers it uses. Chain: the terminal class.
inline std::string answer_signature(const PartialPath& path) {
  if (path.instance().kind == TaskKind::Chain) return check_answer(path).correct ? "correct" : "incorrect";
  const auto& expr = std::get<Answer>(path.steps().back()).expr;
  auto value = expr.evaluate();
  auto leaves = expr.leaves();
  std::sort(leaves.begin(), leaves.end());
  std::string sig = "value=" + (value ? format_number(*value) : std::string("undefined")) + " uses=";
  for (const auto& l : leaves) sig += format_number(l) + ",";
  return sig;
}

struct VoteResult {
  std::string answer;
  std::size_t index = 0;  // first path carrying the winning answer
  std::size_t votes = 0;
};

/// Plurality vote over answered paths; ties go to the answer seen first.
/// Throws NoAnsweredPaths.
inline VoteResult self_consistency(const std::vector<PartialPath>& paths) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> tally;  // answer -> (votes, first index)
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (!paths[i].complete() || !check_answer(paths[i]).answered) continue;
    auto [it, fresh] = tally.try_emplace(answer_signature(paths[i]), 0, i);
    it->second.first += 1;
  }
  if (tally.empty()) throw NoAnsweredPaths("no answered paths to vote over");
  VoteResult best;
  bool have = false;
  for (const auto& [answer, vf] : tally) {
    if (!have || vf.first > best.votes || (vf.first == best.votes && vf.second < best.index)) {
      best = {answer, vf.second, vf.first};
      have = true;
    }
  }
  return best;
}

/// Argmax of score_complete over the paths; ties go to the earliest.
template <PrefixScorer Scorer>
std::size_t rerank_best_of_k(const std::vector<PartialPath>& paths, const Scorer& scorer) {
  if (paths.empty()) throw InvalidConfig("rerank needs at least one path");
  std::size_t best = detail::pick_best_complete(paths, scorer);
  if (best == paths.size()) throw IncompletePath("rerank needs complete paths");
  return best;
}

}  // namespace vgd
