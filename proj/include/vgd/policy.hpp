#pragma once

// Stochastic step proposers standing in for a fine-tuned generator. Every
// policy exposes its full step distribution, so values can be computed by
// exact expectation as well as sampled.

#include "vgd/common.hpp"
#include "vgd/rng.hpp"
#include "vgd/task_env.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace vgd {

enum class PolicyKind { NoisyExpert, UniformLegal, SoftmaxTabular };

inline std::string to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::NoisyExpert: return "noisy-expert";
    case PolicyKind::UniformLegal: return "uniform-legal";
    case PolicyKind::SoftmaxTabular: return "softmax-tabular";
  }
  return "?";
}

inline PolicyKind policy_kind_from_string(const std::string& s) {
  if (s == "noisy-expert") return PolicyKind::NoisyExpert;
  if (s == "uniform-legal") return PolicyKind::UniformLegal;
  if (s == "softmax-tabular") return PolicyKind::SoftmaxTabular;
  throw InvalidConfig("unknown policy kind '" + s + "'");
}

/// Largest integer a corrupted step may invent as an unavailable operand.
inline constexpr int kPhantomMax = 13;
/// Offsets applied to a true result to build a miscalculated step.
inline constexpr int kWrongOffsets[] = {-2, -1, 1, 2};

struct PolicySpec {
  PolicyKind kind = PolicyKind::NoisyExpert;
  double epsilon = 0.1;  // corruption probability
  double temperature = 1.0;  // SoftmaxTabular only
  double wrong_result_weight = 0.5;
  double unavailable_operand_weight = 0.5;
  // Zipf exponent over corrupted steps of each kind; 0 spreads them evenly.
  double corruption_skew = 0.0;
  std::string seed_namespace = "policy";

  void validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidConfig("policy epsilon must lie in [0,1]");
    if (!(temperature > 0.0)) throw InvalidConfig("policy temperature must be positive");
    if (!(corruption_skew >= 0.0)) throw InvalidConfig("policy corruption skew must be nonnegative");
    if (wrong_result_weight < 0.0 || unavailable_operand_weight < 0.0 ||
        std::abs(wrong_result_weight + unavailable_operand_weight - 1.0) > 1e-12)
      throw InvalidConfig("policy corruption weights must be nonnegative and sum to 1");
  }
};

struct WeightedStep {
  ReasoningStep step;
  double prob = 0.0;
};

/// Support of a step distribution in canonical step order; zero-probability
/// steps are omitted.
using StepDistribution = std::vector<WeightedStep>;

namespace detail {

inline void push_uniform(StepDistribution& out, const std::vector<ReasoningStep>& steps, double mass) {
  if (mass <= 0.0 || steps.empty()) return;
  const double each = mass / static_cast<double>(steps.size());
  for (const auto& s : steps) out.push_back({s, each});
}

/// Corrupted steps ranked by a hash of (table, step text); rank r gets
/// weight proportional to 1/r^skew. Depends only on the claimed table.
inline void push_skewed(StepDistribution& out, const std::vector<ReasoningStep>& steps, double mass, double skew,
                        const std::string& table) {
  if (skew == 0.0) {
    push_uniform(out, steps, mass);
    return;
  }
  if (mass <= 0.0 || steps.empty()) return;
  std::vector<std::pair<std::uint64_t, std::size_t>> order;
  for (std::size_t i = 0; i < steps.size(); ++i) order.emplace_back(fnv1a(table + "|" + step_text(steps[i])), i);
  std::sort(order.begin(), order.end());
  std::vector<double> weight(steps.size());
  double z = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    weight[order[r].second] = std::pow(static_cast<double>(r + 1), -skew);
    z += weight[order[r].second];
  }
  for (std::size_t i = 0; i < steps.size(); ++i) out.push_back({steps[i], mass * weight[i] / z});
}

inline StepDistribution noisy_expert(const PolicySpec& policy, const PartialPath& path) {
  StepDistribution out;
  if (path.instance().kind == TaskKind::Chain) {
    const auto& params = path.instance().chain;
    const double good = params.good_prob[static_cast<std::size_t>(path.chain().depth)];
    out.push_back({ChainMove{0}, good});
    if (good < 1.0)
      for (int k = 1; k <= params.wrong_branches; ++k)
        out.push_back({ChainMove{k}, (1.0 - good) / params.wrong_branches});
    return out;
  }

  auto legal = legal_steps(path);
  if (legal.size() == 1 && std::holds_alternative<Answer>(legal.front())) {
    out.push_back({legal.front(), 1.0});
    return out;
  }

  std::vector<ReasoningStep> expert;
  for (const auto& s : legal) {
    auto next = apply_step(path, s);
    if (solvable(next.game24().claimed_values())) expert.push_back(s);
  }
  if (expert.empty()) expert = legal;

  std::vector<ReasoningStep> wrong;
  for (const auto& s : legal) {
    const auto& c = std::get<Combine>(s);
    for (int off : kWrongOffsets) wrong.push_back(Combine{c.lhs, c.rhs, c.op, c.claimed + off});
  }

  std::vector<ReasoningStep> phantom;
  const auto values = path.game24().claimed_values();
  std::vector<Rational> distinct;
  for (const auto& v : values)
    if (distinct.empty() || distinct.back() != v) distinct.push_back(v);
  for (int x = 1; x <= kPhantomMax; ++x) {
    const Rational xr(x);
    if (std::find(values.begin(), values.end(), xr) != values.end()) continue;
    for (const auto& a : distinct)
      for (Op op : kAllOps)
        if (auto r = apply_op(op, xr, a)) phantom.push_back(Combine{xr, a, op, *r});
  }

  std::string table;
  for (const auto& v : values) table += format_number(v) + " ";
  const double eps = policy.epsilon;
  push_uniform(out, expert, 1.0 - eps);
  push_skewed(out, wrong, eps * policy.wrong_result_weight, policy.corruption_skew, table);
  push_skewed(out, phantom, eps * policy.unavailable_operand_weight, policy.corruption_skew, table);
  return out;
}

}  // namespace detail

/// Throws CompletePath.
///
/// NoisyExpert(eps): mass 1-eps spread evenly over expert steps (true-result
/// combines whose table stays solvable; all true-result combines if none
/// does), mass eps*wrong_weight over miscalculated steps (true result offset
/// by +-1 or +-2) and eps*unavailable_weight over steps using a number in
/// 1..13 that is not on the table. Within each corrupted kind the mass is
/// even, or Zipf-shaped when corruption_skew > 0. Chain tasks ignore eps: the good move gets
/// p_d and the W wrong moves share the rest.
/// UniformLegal: uniform over legal_steps.
/// SoftmaxTabular: the NoisyExpert distribution tempered as p^(1/temperature).
inline StepDistribution step_distribution(const PolicySpec& policy, const PartialPath& path) {
  if (path.complete()) throw CompletePath("no step distribution at a complete path");
  switch (policy.kind) {
    case PolicyKind::NoisyExpert: return detail::noisy_expert(policy, path);
    case PolicyKind::UniformLegal: {
      StepDistribution out;
      detail::push_uniform(out, legal_steps(path), 1.0);
      return out;
    }
    case PolicyKind::SoftmaxTabular: {
      auto base = detail::noisy_expert(policy, path);
      double z = 0.0;
      for (auto& w : base) {
        w.prob = std::pow(w.prob, 1.0 / policy.temperature);
        z += w.prob;
      }
      for (auto& w : base) w.prob /= z;
      return base;
    }
  }
  return {};
}

inline ReasoningStep sample_from(const StepDistribution& dist, RngStream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (const auto& w : dist) {
    acc += w.prob;
    if (u < acc) return w.step;
  }
  return dist.back().step;
}

/// One draw from step_distribution. Throws CompletePath.
inline ReasoningStep sample_step(const PolicySpec& policy, const PartialPath& path, RngStream& rng) {
  return sample_from(step_distribution(policy, path), rng);
}

/// Samples until the path completes or holds `max_steps` steps; a path cut
/// off by the cap is marked truncated (answered=false, correct=false).
inline PartialPath rollout(const PolicySpec& policy, PartialPath path, std::size_t max_steps, RngStream& rng) {
  while (!path.complete()) {
    if (path.size() >= max_steps) return path.truncate();
    path = apply_generated_step(path, sample_step(policy, path, rng));
  }
  return path;
}

/// Argmax of step_distribution; ties go to the earliest step in canonical order.
inline ReasoningStep greedy_step(const PolicySpec& policy, const PartialPath& path) {
  auto dist = step_distribution(policy, path);
  std::size_t best = 0;
  for (std::size_t i = 1; i < dist.size(); ++i)
    if (dist[i].prob > dist[best].prob) best = i;
  return dist[best].step;
}

}  // namespace vgd
