#pragma once

// Experiment harness: train scorers, decode evaluation questions with every
// requested method, and aggregate accuracy / correct-answer proportion over
// seeds. Reports are a CSV table, a JSON manifest and SVG line charts.

#include "vgd/common.hpp"
#include "vgd/config.hpp"
#include "vgd/oracle.hpp"
#include "vgd/policy.hpp"
#include "vgd/search.hpp"
#include "vgd/task_env.hpp"
#include "vgd/value_models.hpp"

#include <boost/uuid/detail/sha1.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace vgd {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Decode specs

/// "greedy", "vanilla:K", "sc:K", "rerank-<scorer>:K", "beam-<scorer>:K:b"
/// with scorer one of ovm, prm, prm_o, oracle.
struct DecodeSpec {
  std::string method;
  std::size_t K = 1;
  std::size_t b = 1;

  std::string family() const { return method.substr(0, method.find('-')); }
  std::string scorer() const {
    auto dash = method.find('-');
    return dash == std::string::npos ? std::string() : method.substr(dash + 1);
  }

  std::string text() const {
    if (method == "greedy") return method;
    if (family() == "beam") return method + ":" + std::to_string(K) + ":" + std::to_string(b);
    return method + ":" + std::to_string(K);
  }

  /// Beam rows with b = K behave exactly like vanilla sampling + reranking.
  bool vanilla_equivalent() const { return family() == "beam" && b == K; }

  static DecodeSpec parse(const std::string& text) {
    std::vector<std::string> parts;
    std::string_view rest = text;
    while (true) {
      auto colon = rest.find(':');
      parts.emplace_back(rest.substr(0, colon));
      if (colon == std::string_view::npos) break;
      rest.remove_prefix(colon + 1);
    }
    DecodeSpec d;
    d.method = parts[0];
    auto number = [&](std::size_t i) -> std::size_t {
      auto v = parse_int(parts[i]);
      if (!v || *v < 1) throw InvalidConfig("bad number in decode spec '" + text + "'");
      return static_cast<std::size_t>(*v);
    };
    const std::string fam = d.family();
    const std::string sc = d.scorer();
    const bool scorer_ok = sc == "ovm" || sc == "prm" || sc == "prm_o" || sc == "oracle";
    if (d.method == "greedy") {
      if (parts.size() != 1) throw InvalidConfig("greedy takes no K: '" + text + "'");
    } else if (d.method == "vanilla" || d.method == "sc" || (fam == "rerank" && scorer_ok)) {
      if (parts.size() != 2) throw InvalidConfig("expected method:K in '" + text + "'");
      d.K = d.b = number(1);
    } else if (fam == "beam" && scorer_ok) {
      if (parts.size() != 3) throw InvalidConfig("expected beam-<scorer>:K:b in '" + text + "'");
      d.K = number(1);
      d.b = number(2);
      BeamConfig{d.K, d.b, 1, true}.validate();
    } else {
      throw InvalidConfig("unknown decode method in '" + text + "'");
    }
    return d;
  }
};

// ---------------------------------------------------------------------------
// Setup

struct ExperimentSetup {
  std::vector<InstancePtr> train;
  std::vector<InstancePtr> eval;
  PolicySpec policy;
  std::size_t n = 200;
  std::size_t max_steps = kDefaultMaxSteps;
  std::vector<Supervision> models{Supervision::Outcome};
  bool linear_backend = true;
  KeyMode key_mode = KeyMode::State;
  std::size_t dim = 65536;
  TrainHyper hyper;
  double fallback = ValueModel::kDefaultFallback;
  std::vector<DecodeSpec> specs;
  bool dedup = true;
  std::vector<std::uint64_t> seeds{0, 1, 2};
};

inline std::vector<DecodeSpec> sweep_specs(const std::vector<std::string>& methods, const std::vector<std::int64_t>& Ks,
                                           const std::vector<std::int64_t>& bs) {
  std::vector<DecodeSpec> out;
  for (const auto& m : methods)
    for (auto K : Ks)
      for (auto b : bs) {
        if (b < 1 || K < 1 || b > K || K % b != 0) continue;
        out.push_back(DecodeSpec::parse(m + ":" + std::to_string(K) + ":" + std::to_string(b)));
      }
  if (out.empty()) throw InvalidConfig("sweep grid has no valid (K, b) pair");
  return out;
}

/// Builds the setup described by a config. `use_sweep` takes the decode
/// specs from the sweep grid instead of decode.specs. Throws InvalidConfig,
/// ParseError or IoError.
inline ExperimentSetup make_setup(const Config& cfg, bool use_sweep = false) {
  ExperimentSetup s;
  const auto kind = cfg.get_string("env.kind");
  if (kind == "game24") {
    const auto train_n = cfg.get_int("env.train_puzzles");
    const auto eval_n = cfg.get_int("env.eval_puzzles");
    if (train_n < 1 || eval_n < 1) throw InvalidConfig("need at least one training and one evaluation puzzle");
    const auto seed = static_cast<std::uint64_t>(cfg.get_int("env.puzzle_seed"));
    std::vector<TaskInstance> puzzles;
    if (!cfg.get_string("env.puzzle_file").empty()) {
      puzzles = read_puzzle_file(cfg.get_string("env.puzzle_file"));
      if (puzzles.size() < static_cast<std::size_t>(train_n + eval_n))
        throw InvalidConfig("puzzle file has fewer puzzles than train + eval");
    } else {
      puzzles = generate_puzzles(static_cast<std::size_t>(train_n + eval_n), seed,
                                 static_cast<int>(cfg.get_int("env.max_value")), cfg.get_bool("env.solvable_only"));
    }
    RngStream split(seed, "split");
    split.shuffle(puzzles);
    for (std::size_t i = 0; i < static_cast<std::size_t>(train_n + eval_n); ++i) {
      auto ptr = std::make_shared<const TaskInstance>(puzzles[i]);
      (i < static_cast<std::size_t>(train_n) ? s.train : s.eval).push_back(ptr);
    }
  } else if (kind == "chain") {
    ChainParams params{static_cast<int>(cfg.get_int("env.chain_m")), static_cast<int>(cfg.get_int("env.chain_w")),
                       cfg.get_doubles("env.chain_p")};
    s.train.push_back(std::make_shared<const TaskInstance>(TaskInstance::make_chain("chain", params)));
    const auto copies = cfg.get_int("env.chain_questions");
    if (copies < 1) throw InvalidConfig("env.chain_questions must be positive");
    for (std::int64_t i = 0; i < copies; ++i) {
      char id[32];
      std::snprintf(id, sizeof(id), "c%04lld", static_cast<long long>(i));
      s.eval.push_back(std::make_shared<const TaskInstance>(TaskInstance::make_chain(id, params)));
    }
  } else {
    throw InvalidConfig("env.kind must be game24 or chain");
  }
  const auto T = cfg.get_int("env.max_steps");
  if (T < 1) throw InvalidConfig("env.max_steps must be positive");
  s.max_steps = static_cast<std::size_t>(T);

  s.policy.kind = policy_kind_from_string(cfg.get_string("policy.kind"));
  s.policy.epsilon = cfg.get_double("policy.epsilon");
  s.policy.temperature = cfg.get_double("policy.temperature");
  s.policy.wrong_result_weight = cfg.get_double("policy.wrong_weight");
  s.policy.unavailable_operand_weight = cfg.get_double("policy.unavailable_weight");
  s.policy.corruption_skew = cfg.get_double("policy.corruption_skew");
  s.policy.seed_namespace = cfg.get_string("policy.seed_namespace");
  s.policy.validate();

  const auto n = cfg.get_int("train.n");
  if (n < 1) throw InvalidConfig("train.n must be positive");
  s.n = static_cast<std::size_t>(n);
  s.models.clear();
  for (const auto& m : cfg.get_strings("train.models")) s.models.push_back(supervision_from_string(m));
  const auto backend = cfg.get_string("train.backend");
  if (backend != "tabular" && backend != "linear") throw InvalidConfig("train.backend must be tabular or linear");
  s.linear_backend = backend == "linear";
  const auto mode = cfg.get_string("train.key_mode");
  if (mode != "prefix" && mode != "state") throw InvalidConfig("train.key_mode must be prefix or state");
  s.key_mode = mode == "prefix" ? KeyMode::Prefix : KeyMode::State;
  if (cfg.get_int("train.dim") < 1 || cfg.get_int("train.epochs") < 1 || cfg.get_int("train.batch") < 1 ||
      !(cfg.get_double("train.lr") > 0))
    throw InvalidConfig("train.dim, train.epochs, train.batch and train.lr must be positive");
  s.dim = static_cast<std::size_t>(cfg.get_int("train.dim"));
  s.hyper.epochs = static_cast<std::size_t>(cfg.get_int("train.epochs"));
  s.hyper.batch_size = static_cast<std::size_t>(cfg.get_int("train.batch"));
  s.hyper.learning_rate = cfg.get_double("train.lr");
  s.fallback = cfg.get_double("train.fallback");

  if (use_sweep) {
    s.specs = sweep_specs(cfg.get_strings("sweep.methods"), cfg.get_ints("sweep.K"), cfg.get_ints("sweep.b"));
  } else {
    for (const auto& t : cfg.get_strings("decode.specs")) s.specs.push_back(DecodeSpec::parse(t));
    if (s.specs.empty()) throw InvalidConfig("decode.specs is empty");
  }
  s.dedup = cfg.get_bool("decode.dedup");
  s.seeds.clear();
  for (auto v : cfg.get_ints("seeds")) s.seeds.push_back(static_cast<std::uint64_t>(v));
  if (s.seeds.empty()) throw InvalidConfig("seeds must be non-empty");
  return s;
}

// ---------------------------------------------------------------------------
// Reports on training data

/// Fraction of sampled steps whose PRM and PRM-O labels agree.
/// Throws MissingStepLabels.
inline double label_consistency(const std::vector<TrainingSample>& samples) {
  std::size_t agree = 0, total = 0;
  for (const auto& s : samples) {
    if (!s.step_labels) throw MissingStepLabels("label_consistency needs step labels");
    for (const auto& l : *s.step_labels) {
      agree += l.prm == l.prm_o;
      ++total;
    }
  }
  return total == 0 ? 1.0 : static_cast<double>(agree) / static_cast<double>(total);
}

struct AnnotationCost {
  std::size_t outcome_labels = 0;
  std::size_t process_labels = 0;
  std::size_t outcome_annotations = 0;
  std::size_t process_annotations = 0;
  friend bool operator==(const AnnotationCost&, const AnnotationCost&) = default;
};

/// Outcome supervision needs one label per sampled path (N*n); process
/// supervision needs one per sampled step.
inline AnnotationCost annotation_cost_report(const std::vector<TrainingSample>& samples) {
  AnnotationCost c;
  c.outcome_labels = samples.size();
  for (const auto& s : samples) c.process_labels += s.path.size();
  c.outcome_annotations = c.outcome_labels;
  c.process_annotations = c.process_labels;
  return c;
}

// ---------------------------------------------------------------------------
// Calibration

inline double greedy_accuracy(const std::vector<InstancePtr>& instances, const PolicySpec& policy,
                              std::size_t max_steps = kDefaultMaxSteps) {
  if (instances.empty()) throw InvalidConfig("greedy accuracy needs at least one question");
  std::size_t ok = 0;
  for (const auto& inst : instances) ok += greedy_decode(inst, policy, max_steps).verdict.correct;
  return static_cast<double>(ok) / static_cast<double>(instances.size());
}

struct Calibration {
  double epsilon = 0.0;
  double greedy_accuracy = 0.0;
};

/// Scans epsilon over {0, step, 2*step, ..., 1} and returns the value whose
/// greedy accuracy lies in [lo, hi] and is closest to `target` (smallest
/// epsilon on ties). Throws InvalidConfig when no grid point qualifies.
inline Calibration calibrate_epsilon(const std::vector<InstancePtr>& instances, PolicySpec policy, double lo,
                                     double hi, double target, double step = 0.01,
                                     std::size_t max_steps = kDefaultMaxSteps) {
  std::optional<Calibration> best;
  const auto points = static_cast<int>(std::lround(1.0 / step));
  for (int i = 0; i <= points; ++i) {
    policy.epsilon = std::min(1.0, i * step);
    const double acc = greedy_accuracy(instances, policy, max_steps);
    if (acc < lo || acc > hi) continue;
    if (!best || std::abs(acc - target) < std::abs(best->greedy_accuracy - target)) best = Calibration{policy.epsilon, acc};
  }
  if (!best) throw InvalidConfig("no epsilon puts greedy accuracy in the requested range");
  return *best;
}

// ---------------------------------------------------------------------------
// Running

struct InstanceOutcome {
  bool correct = false;
  double proportion = 0.0;
  std::size_t sampled_steps = 0;
  std::size_t pool_size = 0;
};

struct SeedMetrics {
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double proportion = 0.0;
  std::size_t sampled_steps = 0;
  double mean_pool_size = 0.0;
  std::int64_t wall_ms = 0;
};

struct MetricsRow {
  DecodeSpec spec;
  std::vector<SeedMetrics> per_seed;
  double accuracy_mean = 0.0, accuracy_std = 0.0;
  double proportion_mean = 0.0, proportion_std = 0.0;
};

struct SeedDiagnostics {
  std::uint64_t seed = 0;
  std::size_t training_samples = 0;
  double training_accuracy = 0.0;
  std::optional<double> label_consistency;
  AnnotationCost cost;
};

struct ExperimentResult {
  std::vector<MetricsRow> rows;
  std::vector<SeedDiagnostics> diagnostics;
};

/// Sample standard deviation (n - 1); 0 for fewer than two values.
inline double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

inline double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Models trained for one seed, plus the shared exact-value oracle.
struct TrainedScorers {
  std::map<Supervision, ValueModel> models;
  ValueOracle* oracle = nullptr;

  template <class Fn>
  auto with(const std::string& name, Fn&& fn) const {
    if (name == "oracle") {
      if (!oracle) throw InvalidConfig("oracle scorer not available");
      return fn(OracleScorer(*oracle));
    }
    auto it = models.find(supervision_from_string(name));
    if (it == models.end()) throw InvalidConfig("scorer '" + name + "' was not trained");
    return fn(it->second);
  }
};

inline double pool_proportion(const std::vector<PartialPath>& pool) {
  if (pool.empty()) return 0.0;
  std::size_t ok = 0;
  for (const auto& p : pool) ok += p.complete() && check_answer(p).correct;
  return static_cast<double>(ok) / static_cast<double>(pool.size());
}

inline InstanceOutcome decode_instance(const DecodeSpec& spec, const InstancePtr& instance, const PolicySpec& policy,
                                       const TrainedScorers& scorers, const RngStream& rng, std::size_t max_steps,
                                       bool dedup) {
  InstanceOutcome out;
  const std::string fam = spec.family();
  if (spec.method == "greedy") {
    auto r = greedy_decode(instance, policy, max_steps);
    out = {r.verdict.correct, pool_proportion(r.pool), r.sampled_steps, r.pool.size()};
  } else if (fam == "beam") {
    BeamConfig cfg{spec.K, spec.b, max_steps, dedup};
    auto r = scorers.with(spec.scorer(), [&](const auto& scorer) {
      return value_guided_beam_search(instance, policy, cfg, scorer, rng);
    });
    out = {r.verdict.correct, pool_proportion(r.pool), r.sampled_steps, r.pool.size()};
  } else {
    auto paths = vanilla_sample(instance, policy, spec.K, rng, max_steps);
    out.proportion = pool_proportion(paths);
    out.sampled_steps = count_sampled_steps(paths);
    out.pool_size = paths.size();
    std::size_t chosen = 0;
    if (spec.method == "sc") {
      try {
        chosen = self_consistency(paths).index;
      } catch (const NoAnsweredPaths&) {
        chosen = paths.size();
      }
    } else if (fam == "rerank") {
      chosen = scorers.with(spec.scorer(), [&](const auto& scorer) { return rerank_best_of_k(paths, scorer); });
    }
    out.correct = chosen < paths.size() && check_answer(paths[chosen]).correct;
  }
  return out;
}

inline bool needs_step_labels(const ExperimentSetup& s) {
  for (auto m : s.models)
    if (m != Supervision::Outcome) return true;
  return s.train.front()->kind == TaskKind::Game24;
}

inline ValueModel fresh_model(const ExperimentSetup& s, Supervision sup) {
  return s.linear_backend ? ValueModel::hashed_linear(sup, s.dim, s.key_mode)
                          : ValueModel::tabular(sup, s.key_mode, s.fallback);
}

/// Every seed: build the training set, train the requested scorers, then
/// decode every evaluation question with every spec. Rows follow spec order.
inline ExperimentResult run_experiment(const ExperimentSetup& setup) {
  if (setup.train.empty() || setup.eval.empty()) throw InvalidConfig("experiment needs training and evaluation questions");
  if (setup.specs.empty()) throw InvalidConfig("experiment needs at least one decode spec");
  setup.policy.validate();

  std::vector<Supervision> wanted = setup.models;
  for (const auto& spec : setup.specs) {
    const auto sc = spec.scorer();
    if (sc.empty() || sc == "oracle") continue;
    auto sup = supervision_from_string(sc);
    if (std::find(wanted.begin(), wanted.end(), sup) == wanted.end()) wanted.push_back(sup);
  }
  const bool with_labels = needs_step_labels(setup) ||
                           std::any_of(wanted.begin(), wanted.end(), [](auto m) { return m != Supervision::Outcome; });

  ValueOracle oracle(setup.policy, KeyMode::State, setup.max_steps);
  ExperimentResult result;
  result.rows.resize(setup.specs.size());
  for (std::size_t i = 0; i < setup.specs.size(); ++i) result.rows[i].spec = setup.specs[i];

  for (auto seed : setup.seeds) {
    auto samples = build_training_set(setup.train, setup.policy, setup.n, RngStream(seed, "train"), with_labels,
                                      setup.max_steps);
    SeedDiagnostics diag;
    diag.seed = seed;
    diag.training_samples = samples.size();
    for (const auto& s : samples) diag.training_accuracy += s.outcome_label;
    diag.training_accuracy /= static_cast<double>(samples.size());
    if (with_labels) diag.label_consistency = label_consistency(samples);
    diag.cost = annotation_cost_report(samples);
    result.diagnostics.push_back(diag);

    TrainedScorers scorers;
    scorers.oracle = &oracle;
    TrainHyper hyper = setup.hyper;
    hyper.seed = seed;
    for (auto sup : wanted) scorers.models.emplace(sup, train(fresh_model(setup, sup), samples, hyper));

    for (std::size_t i = 0; i < setup.specs.size(); ++i) {
      const auto& spec = setup.specs[i];
      const auto start = std::chrono::steady_clock::now();
      SeedMetrics m;
      m.seed = seed;
      for (const auto& inst : setup.eval) {
        // Sampling methods with equal K share one root stream per question.
        RngStream rng(seed, "decode/K" + std::to_string(spec.K) + "/" + inst->id);
        auto o = decode_instance(spec, inst, setup.policy, scorers, rng, setup.max_steps, setup.dedup);
        m.accuracy += o.correct;
        m.proportion += o.proportion;
        m.sampled_steps += o.sampled_steps;
        m.mean_pool_size += static_cast<double>(o.pool_size);
      }
      const double count = static_cast<double>(setup.eval.size());
      m.accuracy /= count;
      m.proportion /= count;
      m.mean_pool_size /= count;
      m.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
      result.rows[i].per_seed.push_back(m);
    }
  }

  for (auto& row : result.rows) {
    std::vector<double> acc, prop;
    for (const auto& m : row.per_seed) {
      acc.push_back(m.accuracy);
      prop.push_back(m.proportion);
    }
    row.accuracy_mean = mean_of(acc);
    row.accuracy_std = sample_std(acc);
    row.proportion_mean = mean_of(prop);
    row.proportion_std = sample_std(prop);
  }
  return result;
}

/// One row per (method, K, b) of the grid.
inline ExperimentResult sweep(ExperimentSetup setup, const std::vector<std::string>& methods,
                              const std::vector<std::int64_t>& Ks, const std::vector<std::int64_t>& bs) {
  setup.specs = sweep_specs(methods, Ks, bs);
  return run_experiment(setup);
}

// ---------------------------------------------------------------------------
// Report files

inline const char* kCsvHeader =
    "method,K,b,seed,accuracy,proportion,sampled_steps,wall_ms,accuracy_std,proportion_std,vanilla_equiv\n";

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline std::string metrics_csv(const ExperimentResult& result) {
  std::string out = kCsvHeader;
  for (const auto& row : result.rows) {
    const std::string prefix =
        row.spec.method + "," + std::to_string(row.spec.K) + "," + std::to_string(row.spec.b) + ",";
    const std::string flag = row.spec.vanilla_equivalent() ? "1" : "0";
    std::size_t steps = 0;
    std::int64_t wall = 0;
    for (const auto& m : row.per_seed) {
      out += prefix + std::to_string(m.seed) + "," + fixed6(m.accuracy) + "," + fixed6(m.proportion) + "," +
             std::to_string(m.sampled_steps) + "," + std::to_string(m.wall_ms) + ",,," + flag + "\n";
      steps += m.sampled_steps;
      wall += m.wall_ms;
    }
    out += prefix + "mean," + fixed6(row.accuracy_mean) + "," + fixed6(row.proportion_mean) + "," +
           std::to_string(steps) + "," + std::to_string(wall) + "," + fixed6(row.accuracy_std) + "," +
           fixed6(row.proportion_std) + "," + flag + "\n";
  }
  return out;
}

/// Drops the named column from a CSV text (used to compare runs without timing).
inline std::string drop_csv_column(const std::string& csv, const std::string& column) {
  std::istringstream in(csv);
  std::string line, out;
  std::size_t drop = std::string::npos;
  bool first = true;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::string_view rest = line;
    while (true) {
      auto comma = rest.find(',');
      fields.emplace_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (first) {
      for (std::size_t i = 0; i < fields.size(); ++i)
        if (fields[i] == column) drop = i;
      first = false;
    }
    std::string joined;
    bool any = false;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i == drop) continue;
      if (any) joined += ",";
      joined += fields[i];
      any = true;
    }
    out += joined + "\n";
  }
  return out;
}

/// Reads a metrics.csv produced by metrics_csv back into rows. Throws ParseError.
inline ExperimentResult parse_metrics_csv(std::string_view text) {
  ExperimentResult result;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line + "\n" != kCsvHeader) throw ParseError("metrics CSV: unexpected header");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string_view rest = line;
    while (true) {
      auto comma = rest.find(',');
      f.emplace_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    const std::string where = "metrics CSV line " + std::to_string(lineno) + ": ";
    if (f.size() != 11) throw ParseError(where + "expected 11 fields");
    DecodeSpec spec;
    try {
      std::string text = f[0];
      if (f[0] != "greedy") text += ":" + f[1];
      if (f[0].rfind("beam-", 0) == 0) text += ":" + f[2];
      spec = DecodeSpec::parse(text);
    } catch (const InvalidConfig& e) {
      throw ParseError(where + e.what());
    }
    auto acc = parse_double(f[4]);
    auto prop = parse_double(f[5]);
    auto steps = parse_int(f[6]);
    auto wall = parse_int(f[7]);
    if (!acc || !prop || !steps || !wall) throw ParseError(where + "bad number");
    if (result.rows.empty() || result.rows.back().spec.text() != spec.text()) {
      result.rows.push_back({});
      result.rows.back().spec = spec;
    }
    auto& row = result.rows.back();
    if (f[3] == "mean") {
      auto as = parse_double(f[8]);
      auto ps = parse_double(f[9]);
      if (!as || !ps) throw ParseError(where + "bad std");
      row.accuracy_mean = *acc;
      row.proportion_mean = *prop;
      row.accuracy_std = *as;
      row.proportion_std = *ps;
    } else {
      auto seed = parse_int(f[3]);
      if (!seed) throw ParseError(where + "bad seed");
      row.per_seed.push_back({static_cast<std::uint64_t>(*seed), *acc, *prop, static_cast<std::size_t>(*steps), 0.0, *wall});
    }
  }
  return result;
}

/// Git blob hash (SHA-1 of "blob <len>\0<content>") as lowercase hex.
inline std::string git_blob_hash(std::string_view content) {
  boost::uuids::detail::sha1 sha;
  const std::string head = "blob " + std::to_string(content.size()) + std::string(1, '\0');
  sha.process_bytes(head.data(), head.size());
  sha.process_bytes(content.data(), content.size());
  boost::uuids::detail::sha1::digest_type digest;
  sha.get_digest(digest);
  char buf[41];
  for (int i = 0; i < 5; ++i) std::snprintf(buf + 8 * i, 9, "%08x", digest[i]);
  return std::string(buf, 40);
}

inline nlohmann::json manifest_json(const ExperimentResult& result, const Config& cfg, const std::string& command) {
  nlohmann::json j;
  j["tool"] = "vgd";
  j["version"] = kVersion;
  j["command"] = command;
  j["config"] = cfg.values();
  j["config_hash"] = git_blob_hash(cfg.serialize());
  j["seeds"] = cfg.get_ints("seeds");
  j["unseen_prefix_fallback"] = cfg.get_double("train.fallback");
  j["module_versions"] = {{"task_env", "1"}, {"policy_gen", "1"}, {"value_models", "1"}, {"model_file", kModelFileVersion},
                          {"oracle", "1"},   {"search", "1"},     {"experiments", "1"}};
  nlohmann::json diags = nlohmann::json::array();
  for (const auto& d : result.diagnostics) {
    nlohmann::json e;
    e["seed"] = d.seed;
    e["training_samples"] = d.training_samples;
    e["training_accuracy"] = d.training_accuracy;
    if (d.label_consistency) e["label_consistency"] = *d.label_consistency;
    e["annotation_cost"] = {{"outcome_labels", d.cost.outcome_labels},
                            {"process_labels", d.cost.process_labels},
                            {"outcome_annotations", d.cost.outcome_annotations},
                            {"process_annotations", d.cost.process_annotations}};
    diags.push_back(e);
  }
  j["diagnostics"] = diags;
  std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  j["timestamp"] = stamp;
  return j;
}

struct ChartSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Minimal SVG line chart; y is fixed to [0, 1].
inline std::string svg_line_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                                  const std::vector<ChartSeries>& series) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  const double W = 640, H = 400, left = 60, right = 180, top = 40, bottom = 50;
  double xmin = 0, xmax = 1;
  bool have = false;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      xmin = have ? std::min(xmin, x) : x;
      xmax = have ? std::max(xmax, x) : x;
      have = true;
    }
  if (xmax == xmin) xmax = xmin + 1;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (W - left - right); };
  auto py = [&](double y) { return top + (1.0 - y) * (H - top - bottom); };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };
  std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
  svg += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  svg += "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + xml_escape(title) + "</text>\n";
  svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(py(0)) + "\" x2=\"" + num(W - right) + "\" y2=\"" + num(py(0)) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(py(0)) + "\" x2=\"" + num(left) + "\" y2=\"" + num(py(1)) +
         "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = i / 4.0;
    svg += "<text x=\"" + num(left - 6) + "\" y=\"" + num(py(y) + 4) + "\" text-anchor=\"end\" font-size=\"11\">" +
           num(y) + "</text>\n";
  }
  std::vector<double> xs;
  for (const auto& s : series)
    for (const auto& p : s.points) xs.push_back(p.first);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  for (double x : xs) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", x);
    svg += "<text x=\"" + num(px(x)) + "\" y=\"" + num(py(0) + 16) + "\" text-anchor=\"middle\" font-size=\"11\">" +
           buf + "</text>\n";
  }
  svg += "<text x=\"" + num((left + W - right) / 2) + "\" y=\"" + num(H - 10) +
         "\" text-anchor=\"middle\" font-size=\"12\">" + xml_escape(xlabel) + "</text>\n";
  svg += "<text x=\"16\" y=\"" + num((top + H - bottom) / 2) + "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " +
         num((top + H - bottom) / 2) + ")\">" + xml_escape(ylabel) + "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = colors[i % 8];
    auto pts = series[i].points;
    std::sort(pts.begin(), pts.end());
    std::string poly;
    for (const auto& [x, y] : pts) poly += num(px(x)) + "," + num(py(y)) + " ";
    if (!poly.empty()) poly.pop_back();
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"" + poly + "\"/>\n";
    for (const auto& [x, y] : pts)
      svg += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    const double ly = top + 16.0 * static_cast<double>(i);
    svg += "<rect x=\"" + num(W - right + 12) + "\" y=\"" + num(ly) + "\" width=\"10\" height=\"10\" fill=\"" + color +
           "\"/>\n";
    svg += "<text x=\"" + num(W - right + 28) + "\" y=\"" + num(ly + 9) + "\" font-size=\"11\">" +
           xml_escape(series[i].name) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

/// Accuracy and proportion charts against K (series per method and b) and
/// against b (series per method and K).
inline std::map<std::string, std::string> metric_charts(const ExperimentResult& result) {
  std::map<std::string, ChartSeries> by_k_acc, by_k_prop, by_b_acc, by_b_prop;
  for (const auto& row : result.rows) {
    const auto& s = row.spec;
    const std::string k_name = s.family() == "beam" ? s.method + " b=" + std::to_string(s.b) : s.method;
    const std::string b_name = s.method + " K=" + std::to_string(s.K);
    by_k_acc[k_name].name = k_name;
    by_k_acc[k_name].points.emplace_back(static_cast<double>(s.K), row.accuracy_mean);
    by_k_prop[k_name].name = k_name;
    by_k_prop[k_name].points.emplace_back(static_cast<double>(s.K), row.proportion_mean);
    if (s.method == "greedy") continue;
    by_b_acc[b_name].name = b_name;
    by_b_acc[b_name].points.emplace_back(static_cast<double>(s.b), row.accuracy_mean);
    by_b_prop[b_name].name = b_name;
    by_b_prop[b_name].points.emplace_back(static_cast<double>(s.b), row.proportion_mean);
  }
  auto values = [](const std::map<std::string, ChartSeries>& m) {
    std::vector<ChartSeries> v;
    for (const auto& [k, s] : m) v.push_back(s);
    return v;
  };
  return {
      {"accuracy_vs_K.svg", svg_line_chart("Accuracy vs sampling size", "K", "accuracy", values(by_k_acc))},
      {"proportion_vs_K.svg", svg_line_chart("Correct-answer proportion vs sampling size", "K", "proportion",
                                             values(by_k_prop))},
      {"accuracy_vs_b.svg", svg_line_chart("Accuracy vs beam size", "b", "accuracy", values(by_b_acc))},
      {"proportion_vs_b.svg", svg_line_chart("Correct-answer proportion vs beam size", "b", "proportion",
                                             values(by_b_prop))},
  };
}

/// Writes metrics.csv, manifest.json and the SVG charts into `dir`, each via
/// temp file + rename. Throws IoError.
inline void emit_report(const ExperimentResult& result, const Config& cfg, const std::string& dir,
                        const std::string& command = "experiment") {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  write_file_atomic(dir + "/metrics.csv", metrics_csv(result));
  write_file_atomic(dir + "/manifest.json", manifest_json(result, cfg, command).dump(2) + "\n");
  for (const auto& [name, svg] : metric_charts(result)) write_file_atomic(dir + "/" + name, svg);
}

}  // namespace vgd
