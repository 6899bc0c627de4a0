#include "vgd/experiments.hpp"

#include <gtest/gtest.h>

#include <filesystem>

#include "oracles.hpp"

using namespace vgd;

namespace {

InstancePtr puzzle(std::vector<int> xs, std::string id = "t") {
  std::vector<Rational> v(xs.begin(), xs.end());
  return std::make_shared<const TaskInstance>(TaskInstance::game24(std::move(id), v));
}

ExperimentSetup chain_setup(const std::vector<std::string>& specs, std::vector<std::uint64_t> seeds = {0, 1}) {
  Config cfg;
  cfg.set("env.kind", "chain");
  cfg.set("env.chain_questions", "10");
  cfg.set("train.n", "60");
  cfg.set("train.backend", "tabular");
  cfg.set("train.key_mode", "state");
  std::string joined;
  for (const auto& s : specs) joined += (joined.empty() ? "" : ",") + s;
  cfg.set("decode.specs", joined);
  auto setup = make_setup(cfg);
  setup.seeds = std::move(seeds);
  return setup;
}

// Tag-balance check: every opened element is closed in order.
bool well_formed_xml(const std::string& s) {
  std::vector<std::string> stack;
  std::size_t pos = 0;
  while ((pos = s.find('<', pos)) != std::string::npos) {
    auto end = s.find('>', pos);
    if (end == std::string::npos) return false;
    std::string tag = s.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    if (tag.empty() || tag[0] == '?') continue;
    if (tag.back() == '/') continue;
    std::string name = tag.substr(tag[0] == '/' ? 1 : 0);
    name = name.substr(0, name.find(' '));
    if (tag[0] == '/') {
      if (stack.empty() || stack.back() != name) return false;
      stack.pop_back();
    } else {
      stack.push_back(name);
    }
  }
  return stack.empty();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(DecodeSpec, ParsesEveryMethod) {
  EXPECT_EQ(DecodeSpec::parse("greedy").text(), "greedy");
  auto v = DecodeSpec::parse("vanilla:20");
  EXPECT_EQ(v.K, 20u);
  auto r = DecodeSpec::parse("rerank-prm_o:8");
  EXPECT_EQ(r.family(), "rerank");
  EXPECT_EQ(r.scorer(), "prm_o");
  auto b = DecodeSpec::parse("beam-ovm:20:4");
  EXPECT_EQ(b.b, 4u);
  EXPECT_FALSE(b.vanilla_equivalent());
  EXPECT_TRUE(DecodeSpec::parse("beam-oracle:5:5").vanilla_equivalent());
  for (const char* bad : {"greedy:3", "vanilla", "beam-ovm:20", "beam-ovm:20:3", "rerank-llm:4", "sc:0", "sc:x", "nope:1"})
    EXPECT_THROW(DecodeSpec::parse(bad), InvalidConfig) << bad;
}

TEST(Sweep, SkipsNonDivisorBeamSizes) {
  auto specs = sweep_specs({"beam-ovm"}, {20}, {1, 2, 3, 4, 5, 10, 20});
  ASSERT_EQ(specs.size(), 6u);
  EXPECT_EQ(specs.back().text(), "beam-ovm:20:20");
  EXPECT_THROW(sweep_specs({"beam-ovm"}, {20}, {3}), InvalidConfig);
}

TEST(Setup, Game24SplitIsDisjointAndSeeded) {
  Config cfg;
  cfg.set("env.train_puzzles", "12");
  cfg.set("env.eval_puzzles", "8");
  auto a = make_setup(cfg);
  auto b = make_setup(cfg);
  ASSERT_EQ(a.train.size(), 12u);
  ASSERT_EQ(a.eval.size(), 8u);
  std::set<std::string> train_headers;
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    train_headers.insert(a.train[i]->header());
    EXPECT_EQ(a.train[i]->header(), b.train[i]->header());
  }
  for (const auto& e : a.eval) {
    EXPECT_EQ(train_headers.count(e->header()), 0u);
    std::vector<oracle::Q> xs;
    const PartialPath root(e);
    for (const auto& item : root.game24().items) xs.push_back(item.claimed);
    EXPECT_TRUE(oracle::brute_force_solvable(xs));
  }
  cfg.set("env.kind", "maze");
  EXPECT_THROW(make_setup(cfg), InvalidConfig);
}

TEST(Reports, LabelConsistencyAndAnnotationCost) {
  auto inst = puzzle({4, 9, 10, 13});
  PartialPath p(inst);
  for (const char* s : {"13-9=4", "10+4=14", "14*4=56", "answer (10+4)*(13-9)"}) p = apply_generated_step(p, parse_step(s));
  TrainingSample s{p, 0, std::vector<StepLabel>{{1, 1}, {1, 0}, {1, 0}, {0, 0}}};
  EXPECT_DOUBLE_EQ(label_consistency({s}), 0.5);
  EXPECT_EQ(annotation_cost_report({s}), (AnnotationCost{1, 4, 1, 4}));
  s.step_labels.reset();
  EXPECT_THROW(label_consistency({s}), MissingStepLabels);
}

TEST(Calibration, PicksAnEpsilonInsideTheWindow) {
  std::vector<InstancePtr> qs{puzzle({4, 9, 10, 13}, "a"), puzzle({1, 5, 5, 5}, "b"), puzzle({3, 3, 8, 8}, "c"),
                              puzzle({2, 3, 4, 6}, "d")};
  PolicySpec pol;
  pol.corruption_skew = 2.0;
  auto c = calibrate_epsilon(qs, pol, 0.0, 1.0, 0.5, 0.1);
  pol.epsilon = c.epsilon;
  EXPECT_DOUBLE_EQ(greedy_accuracy(qs, pol), c.greedy_accuracy);
  EXPECT_THROW(calibrate_epsilon(qs, pol, 1.5, 2.0, 1.7, 0.25), InvalidConfig);
  pol.epsilon = 0;
  EXPECT_EQ(greedy_accuracy(qs, pol), 1.0);
}

TEST(Statistics, SampleStd) {
  EXPECT_EQ(sample_std({0.3}), 0.0);
  EXPECT_NEAR(sample_std({1, 2, 3, 4}), std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_DOUBLE_EQ(mean_of({1, 2}), 1.5);
}

TEST(RunExperiment, ChainVanillaProportionMatchesTheProduct) {
  auto setup = chain_setup({"vanilla:100", "beam-oracle:20:1"}, {0, 1, 2});
  auto result = run_experiment(setup);
  ASSERT_EQ(result.rows.size(), 2u);
  // 0.8^3 = 0.512; 3 seeds x 10 questions x 100 rollouts.
  EXPECT_NEAR(result.rows[0].proportion_mean, 0.512, 3 * oracle::binomial_sigma(0.512, 3000) + 1e-9);
  EXPECT_EQ(result.rows[1].accuracy_mean, 1.0);
  ASSERT_EQ(result.diagnostics.size(), 3u);
  EXPECT_EQ(result.diagnostics[0].training_samples, 60u);
}

TEST(RunExperiment, SweepRowsCsvAndFullBeamEquivalence) {
  auto setup = chain_setup({"rerank-ovm:20"});
  auto specs = sweep_specs({"beam-ovm"}, {20}, {1, 2, 4, 5, 10, 20});
  setup.specs.insert(setup.specs.end(), specs.begin(), specs.end());
  auto result = run_experiment(setup);
  ASSERT_EQ(result.rows.size(), 7u);
  const auto& rerank = result.rows[0];
  const auto& full = result.rows[6];
  EXPECT_TRUE(full.spec.vanilla_equivalent());
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(full.per_seed[i].accuracy, rerank.per_seed[i].accuracy);
    EXPECT_EQ(full.per_seed[i].proportion, rerank.per_seed[i].proportion);
    EXPECT_EQ(full.per_seed[i].sampled_steps, rerank.per_seed[i].sampled_steps);
  }

  const auto csv = metrics_csv(result);
  EXPECT_EQ(csv.rfind(kCsvHeader, 0), 0u);
  EXPECT_EQ(count_lines(csv), 1 + 7 * 3);
  for (const auto& row : result.rows) {
    std::vector<double> acc, prop;
    for (const auto& m : row.per_seed) {
      acc.push_back(m.accuracy);
      prop.push_back(m.proportion);
    }
    const double mean = (acc[0] + acc[1]) / 2;
    EXPECT_NEAR(row.accuracy_mean, mean, 1e-12);
    EXPECT_NEAR(row.accuracy_std, std::abs(acc[0] - acc[1]) / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(row.proportion_std, std::abs(prop[0] - prop[1]) / std::sqrt(2.0), 1e-12);
  }

  auto parsed = parse_metrics_csv(csv);
  EXPECT_EQ(metrics_csv(parsed), csv);
  const auto no_wall = drop_csv_column(csv, "wall_ms");
  EXPECT_EQ(no_wall.find("wall_ms"), std::string::npos);
  EXPECT_EQ(count_lines(no_wall), count_lines(csv));
  EXPECT_THROW(parse_metrics_csv("bad header\n"), ParseError);
  EXPECT_THROW(parse_metrics_csv(std::string(kCsvHeader) + "vanilla,20,20,0,1\n"), ParseError);
}

TEST(Report, ChartsManifestAndFiles) {
  auto setup = chain_setup({"greedy", "vanilla:4", "sc:4", "beam-ovm:4:2"}, {3});
  auto result = run_experiment(setup);
  auto charts = metric_charts(result);
  ASSERT_EQ(charts.size(), 4u);
  for (const auto& [name, svg] : charts) {
    EXPECT_TRUE(well_formed_xml(svg)) << name;
    EXPECT_NE(svg.find("<polyline"), std::string::npos);
  }
  EXPECT_EQ(xml_escape("a<b & \"c\">"), "a&lt;b &amp; &quot;c&quot;&gt;");
  EXPECT_TRUE(well_formed_xml(svg_line_chart("<t>", "x", "y", {{"s&", {{1, 0.5}, {2, 0.7}}}})));

  Config cfg;
  auto j = manifest_json(result, cfg, "experiment");
  EXPECT_EQ(j["tool"], "vgd");
  EXPECT_EQ(j["config_hash"], git_blob_hash(cfg.serialize()));
  EXPECT_EQ(j["diagnostics"].size(), 1u);
  EXPECT_TRUE(j.contains("timestamp"));
  EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");

  const auto dir = (std::filesystem::temp_directory_path() / "vgd_test_report").string();
  std::filesystem::remove_all(dir);
  emit_report(result, cfg, dir);
  for (const char* f : {"metrics.csv", "manifest.json", "accuracy_vs_K.svg", "proportion_vs_K.svg", "accuracy_vs_b.svg",
                        "proportion_vs_b.svg"})
    EXPECT_TRUE(std::filesystem::exists(dir + "/" + f)) << f;
  EXPECT_EQ(read_file(dir + "/metrics.csv"), metrics_csv(result));
  std::filesystem::remove_all(dir);
  EXPECT_THROW(emit_report(result, cfg, "/proc/vgd_nope"), IoError);
}
