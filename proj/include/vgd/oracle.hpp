#pragma once

// Ground truth for value estimates: the exact probability that the policy
// finishes a prefix correctly, and a naive recount of per-prefix sample means.

#include "vgd/common.hpp"
#include "vgd/policy.hpp"
#include "vgd/task_env.hpp"
#include "vgd/value_models.hpp"

#include <cmath>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace vgd {

/// V(x) = [correct] at complete prefixes, 0 once the step cap is reached,
/// and sum_s pi(s|x) V(x+s) otherwise. Memoized on the canonical key; the
/// State key mode shares entries between prefixes with the same abstract
/// state, which is exact because that abstraction is Markovian.
class ValueOracle {
 public:
  explicit ValueOracle(PolicySpec policy, KeyMode memo_mode = KeyMode::Prefix,
                       std::size_t max_steps = kDefaultMaxSteps)
      : policy_(std::move(policy)), mode_(memo_mode), max_steps_(max_steps) {}

  const PolicySpec& policy() const { return policy_; }
  KeyMode memo_mode() const { return mode_; }

  /// Throws UnreachablePrefix when some step of `prefix` has zero probability
  /// under the policy.
  double exact_value(const PartialPath& prefix) {
    PartialPath cur(prefix.instance_ptr());
    for (const auto& step : prefix.steps()) {
      if (cur.complete()) throw UnreachablePrefix("prefix continues past a complete path");
      auto dist = step_distribution(policy_, cur);
      bool found = false;
      for (const auto& w : dist)
        if (w.prob > 0.0 && w.step == step) found = true;
      if (!found) throw UnreachablePrefix("step '" + step_text(step) + "' has zero probability");
      cur = apply_generated_step(cur, step);
    }
    return value(prefix);
  }

  /// Value without the reachability check; used as a scorer during search.
  double value(const PartialPath& path) {
    if (path.complete()) return check_answer(path).correct ? 1.0 : 0.0;
    if (path.size() >= max_steps_) return 0.0;
    const std::string key = canonical_key(path, mode_);
    {
      std::shared_lock lock(mutex_);
      auto it = memo_.find(key);
      if (it != memo_.end()) return it->second;
    }
    double v = 0.0;
    for (const auto& w : step_distribution(policy_, path)) v += w.prob * value(apply_generated_step(path, w.step));
    std::unique_lock lock(mutex_);
    memo_.emplace(key, v);
    return v;
  }

  /// Largest |V(x) - sum_s pi(s|x) V(x+s)| over prefixes reachable from the
  /// empty path, with the right-hand sum taken in reverse step order.
  double bellman_residual(const InstancePtr& instance) {
    double worst = 0.0;
    std::unordered_set<std::string> seen;
    std::vector<PartialPath> stack{PartialPath(instance)};
    while (!stack.empty()) {
      PartialPath p = std::move(stack.back());
      stack.pop_back();
      if (p.complete() || p.size() >= max_steps_) continue;
      if (!seen.insert(canonical_key(p, mode_)).second) continue;
      auto dist = step_distribution(policy_, p);
      double backup = 0.0;
      for (auto it = dist.rbegin(); it != dist.rend(); ++it) {
        PartialPath child = apply_generated_step(p, it->step);
        backup += it->prob * value(child);
        stack.push_back(std::move(child));
      }
      worst = std::max(worst, std::abs(value(p) - backup));
    }
    return worst;
  }

  std::size_t memo_size() const {
    std::shared_lock lock(mutex_);
    return memo_.size();
  }

 private:
  PolicySpec policy_;
  KeyMode mode_;
  std::size_t max_steps_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, double> memo_;
};

/// Perfect scorer: the oracle's exact value at every prefix.
class OracleScorer {
 public:
  explicit OracleScorer(ValueOracle& oracle) : oracle_(&oracle) {}
  double score_prefix(const PartialPath& path) const { return oracle_->value(path); }
  double score_complete(const PartialPath& path) const {
    if (!path.complete()) throw IncompletePath("score_complete needs a complete path");
    return oracle_->value(path);
  }

 private:
  ValueOracle* oracle_;
};

/// Naive two-pass recount of the mean label over every sample prefix whose
/// key equals `key`. Throws PrefixNotFound.
inline Rational empirical_prefix_mean(const std::vector<TrainingSample>& samples, const std::string& key,
                                      KeyMode mode = KeyMode::Prefix,
                                      Supervision sup = Supervision::Outcome) {
  std::int64_t count = 0;
  for (const auto& s : samples)
    for (const auto& k : prefix_keys(s.path, mode))
      if (k == key) ++count;
  if (count == 0) throw PrefixNotFound("prefix not present in samples");
  std::int64_t sum = 0;
  for (const auto& s : samples) {
    auto keys = prefix_keys(s.path, mode);
    auto ys = targets(s, sup);
    for (std::size_t t = 0; t < keys.size(); ++t)
      if (keys[t] == key) sum += ys[t];
  }
  return Rational(sum, count);
}

/// Recount of every key at once: key -> (sum, count), built by an explicit
/// two-pass scan (counts first, then sums) without touching the model code.
inline std::unordered_map<std::string, std::pair<std::int64_t, std::int64_t>> recount_all_prefixes(
    const std::vector<TrainingSample>& samples, KeyMode mode = KeyMode::Prefix,
    Supervision sup = Supervision::Outcome) {
  std::unordered_map<std::string, std::pair<std::int64_t, std::int64_t>> out;
  for (const auto& s : samples)
    for (const auto& k : prefix_keys(s.path, mode)) out[k].second += 1;
  for (const auto& s : samples) {
    auto keys = prefix_keys(s.path, mode);
    auto ys = targets(s, sup);
    for (std::size_t t = 0; t < keys.size(); ++t) out.at(keys[t]).first += ys[t];
  }
  return out;
}

struct FixedPointAudit {
  std::size_t keys = 0;
  std::size_t mismatches = 0;
  bool passed() const { return mismatches == 0; }
};

/// Compares every key of a tabular model with an independent recount of the
/// same samples; sizes must match and every (sum, count) must be equal.
inline FixedPointAudit fixed_point_audit(const ValueModel& model, const std::vector<TrainingSample>& samples) {
  if (!model.is_tabular()) throw InvalidConfig("fixed-point audit needs a tabular model");
  const auto recount = recount_all_prefixes(samples, model.key_mode(), model.supervision());
  const auto& table = model.tabular_backend().table;
  FixedPointAudit audit;
  audit.keys = recount.size();
  for (const auto& [key, sc] : recount) {
    auto it = table.find(key);
    if (it == table.end() || Rational(it->second.label_sum, it->second.count) != Rational(sc.first, sc.second) ||
        it->second.count != sc.second)
      ++audit.mismatches;
  }
  if (table.size() != recount.size()) audit.mismatches += table.size() > recount.size() ? table.size() - recount.size() : 0;
  return audit;
}

}  // namespace vgd
