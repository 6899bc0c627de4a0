#include "vgd/oracle.hpp"
#include "vgd/search.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace vgd;

namespace {

InstancePtr puzzle(std::vector<int> xs) {
  std::vector<Rational> v(xs.begin(), xs.end());
  return std::make_shared<const TaskInstance>(TaskInstance::game24("t", v));
}

InstancePtr chain(std::vector<double> p, int w = 2) {
  const int m = static_cast<int>(p.size());
  return std::make_shared<const TaskInstance>(TaskInstance::make_chain("c", {m, w, std::move(p)}));
}

PolicySpec noisy(double eps) {
  PolicySpec p;
  p.epsilon = eps;
  return p;
}

// Scores a path by a hash of its key, so ties and orderings are arbitrary but fixed.
struct HashScorer {
  double score_prefix(const PartialPath& p) const {
    return static_cast<double>(fnv1a(canonical_key(p)) % 1000) / 1000.0;
  }
  double score_complete(const PartialPath& p) const { return score_prefix(p); }
};

std::size_t index_below(RngStream& rng, std::size_t n) {
  return static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
}

struct ConstScorer {
  double score_prefix(const PartialPath&) const { return 0.5; }
  double score_complete(const PartialPath&) const { return 0.5; }
};

PartialPath chain_path(const InstancePtr& inst, std::vector<int> moves) {
  PartialPath p(inst);
  for (int m : moves) p = apply_step(p, ChainMove{m});
  return p;
}

}  // namespace

TEST(BeamConfig, Validation) {
  EXPECT_NO_THROW((BeamConfig{20, 4, 10, true}.validate()));
  EXPECT_THROW((BeamConfig{20, 3, 10, true}.validate()), InvalidConfig);
  EXPECT_THROW((BeamConfig{4, 8, 10, true}.validate()), InvalidConfig);
  EXPECT_THROW((BeamConfig{4, 0, 10, true}.validate()), InvalidConfig);
  EXPECT_THROW((BeamConfig{4, 2, 0, true}.validate()), InvalidConfig);
}

TEST(SelectTop, MatchesNaiveSortWithoutDedup) {
  auto inst = chain({0.5, 0.5});
  RngStream rng(11, "sel");
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Candidate> pool;
    const std::size_t n = 1 + index_below(rng, 12);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = static_cast<double>(index_below(rng, 4)) / 4.0;  // many ties
      pool.push_back({chain_path(inst, {static_cast<int>(index_below(rng, 3))}), v, {n - i, index_below(rng, 3)}});
    }
    const std::size_t b = 1 + index_below(rng, n);
    std::vector<std::size_t> naive(n);
    for (std::size_t i = 0; i < n; ++i) naive[i] = i;
    std::stable_sort(naive.begin(), naive.end(), [&](std::size_t x, std::size_t y) {
      if (pool[x].value != pool[y].value) return pool[x].value > pool[y].value;
      return pool[x].lineage < pool[y].lineage;
    });
    naive.resize(b);
    EXPECT_EQ(select_top(pool, b, false), naive);
  }
}

TEST(SelectTop, DedupPrefersDistinctPaths) {
  auto inst = chain({0.5, 0.5});
  auto a = chain_path(inst, {0});
  auto c = chain_path(inst, {1});
  std::vector<Candidate> pool{{a, 0.9, {0}}, {a, 0.9, {1}}, {c, 0.1, {2}}};
  EXPECT_EQ(select_top(pool, 2, true), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(select_top(pool, 2, false), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(select_top(pool, 3, true), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(BeamSearch, FullBeamReplaysVanillaSampling) {
  RngStream pick(5, "eq");
  for (int trial = 0; trial < 12; ++trial) {
    auto inst = trial % 2 ? puzzle({1, 5, 5, 5}) : chain({0.7, 0.6, 0.8});
    const std::size_t K = 1 + index_below(pick, 12);
    RngStream root(static_cast<std::uint64_t>(trial), "beq");
    auto beam = value_guided_beam_search(inst, noisy(0.5), BeamConfig{K, K, 10, true}, HashScorer{}, root);
    auto vanilla = vanilla_sample(inst, noisy(0.5), K, root);
    ASSERT_EQ(beam.pool.size(), vanilla.size());
    for (std::size_t i = 0; i < K; ++i) EXPECT_EQ(canonical_key(beam.pool[i]), canonical_key(vanilla[i]));
    EXPECT_EQ(beam.sampled_steps, count_sampled_steps(vanilla));
    EXPECT_EQ(canonical_key(beam.chosen), canonical_key(vanilla[rerank_best_of_k(vanilla, HashScorer{})]));
  }
}

TEST(BeamSearch, BudgetAndStageShapes) {
  auto inst = puzzle({4, 9, 10, 13});
  for (std::size_t b : {1, 2, 4, 5, 10, 20}) {
    const BeamConfig cfg{20, b, 10, true};
    auto r = value_guided_beam_search(inst, noisy(0.4), cfg, HashScorer{}, RngStream(3, "shape"));
    EXPECT_LE(r.sampled_steps, 20u * 10u);
    ASSERT_FALSE(r.stages.empty());
    EXPECT_EQ(r.stages[0].candidates.size(), 20u);
    for (std::size_t t = 0; t < r.stages.size(); ++t) {
      const auto& s = r.stages[t];
      EXPECT_EQ(s.candidates.size(), s.values.size());
      if (t > 0) {
        EXPECT_EQ(s.candidates.size(), s.expanded * (20 / b) + s.carried);
      }
      EXPECT_LE(s.selected.size(), b);
      for (std::size_t i = 1; i < s.selected.size(); ++i)
        EXPECT_GE(s.values[s.selected[i - 1]], s.values[s.selected[i]]);
    }
    EXPECT_EQ(r.pool.size(), r.stages.back().candidates.size());
    EXPECT_TRUE(r.chosen.complete());
  }
}

TEST(BeamSearch, StepCapTruncatesEveryOpenPath) {
  auto inst = chain({0.5, 0.5, 0.5, 0.5, 0.5});
  auto r = value_guided_beam_search(inst, noisy(0), BeamConfig{4, 2, 3, true}, ConstScorer{}, RngStream(1, "cap"));
  for (const auto& p : r.pool) {
    EXPECT_TRUE(p.truncated());
    EXPECT_EQ(p.size(), 3u);
  }
  EXPECT_FALSE(r.verdict.answered);
  EXPECT_LE(r.sampled_steps, 4u * 3u);
}

TEST(BeamSearch, OracleGuidanceFindsTheGoodChain) {
  auto inst = chain({0.5, 0.5, 0.5});
  ValueOracle o(noisy(0));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto r = value_guided_beam_search(inst, noisy(0), BeamConfig{20, 1, 10, true}, OracleScorer(o), RngStream(seed, "o"));
    EXPECT_TRUE(r.verdict.correct);
  }
}

TEST(BeamSearch, SameStreamSameResult) {
  auto inst = puzzle({3, 3, 8, 8});
  const BeamConfig cfg{20, 4, 10, true};
  auto a = value_guided_beam_search(inst, noisy(0.5), cfg, HashScorer{}, RngStream(9, "d"));
  auto b = value_guided_beam_search(inst, noisy(0.5), cfg, HashScorer{}, RngStream(9, "d"));
  ASSERT_EQ(a.pool.size(), b.pool.size());
  for (std::size_t i = 0; i < a.pool.size(); ++i) EXPECT_EQ(canonical_key(a.pool[i]), canonical_key(b.pool[i]));
  EXPECT_EQ(a.sampled_steps, b.sampled_steps);
}

TEST(Vanilla, RolloutsAndSteps) {
  auto inst = chain({0.8, 0.8});
  auto paths = vanilla_sample(inst, noisy(0), 7, RngStream(1, "v"));
  EXPECT_EQ(paths.size(), 7u);
  EXPECT_EQ(count_sampled_steps(paths), 14u);
  EXPECT_THROW(vanilla_sample(inst, noisy(0), 0, RngStream(1, "v")), InvalidConfig);
}

TEST(SelfConsistency, PluralityWithFirstSeenTies) {
  auto inst = puzzle({4, 9, 10, 13});
  auto run = [&](std::vector<std::string> steps) {
    PartialPath p(inst);
    for (const auto& s : steps) p = apply_generated_step(p, parse_step(s));
    return p;
  };
  auto good1 = run({"13-9=4", "10-4=6", "6*4=24", "answer (10-4)*(13-9)"});
  auto good2 = run({"10-4=6", "13-9=4", "6*4=24", "answer (10-4)*(13-9)"});
  auto bad = run({"13-9=4", "10+4=14", "14*4=56", "answer (10+4)*(13-9)"});
  auto v = self_consistency({bad, good1, good2});
  EXPECT_EQ(v.index, 1u);
  EXPECT_EQ(v.votes, 2u);
  EXPECT_EQ(self_consistency({bad, good1}).index, 0u);
  EXPECT_THROW(self_consistency({PartialPath(inst).truncate()}), NoAnsweredPaths);
}

TEST(Rerank, HighestScoreEarliestTie) {
  auto inst = chain({0.5, 0.5});
  std::vector<PartialPath> paths{chain_path(inst, {1, 0}), chain_path(inst, {0, 0}), chain_path(inst, {0, 0})};
  ValueOracle o(noisy(0));
  EXPECT_EQ(rerank_best_of_k(paths, OracleScorer(o)), 1u);
  EXPECT_EQ(rerank_best_of_k(paths, ConstScorer{}), 0u);
  EXPECT_THROW(rerank_best_of_k({}, ConstScorer{}), InvalidConfig);
  EXPECT_THROW(rerank_best_of_k({chain_path(inst, {0})}, ConstScorer{}), IncompletePath);
}

TEST(Greedy, ExpertSolvesAndCapTruncates) {
  auto r = greedy_decode(puzzle({4, 9, 10, 13}), noisy(0));
  EXPECT_TRUE(r.verdict.correct);
  EXPECT_EQ(r.sampled_steps, 4u);
  auto capped = greedy_decode(puzzle({4, 9, 10, 13}), noisy(0), 2);
  EXPECT_FALSE(capped.verdict.answered);
  EXPECT_TRUE(capped.chosen.truncated());
}
