// vgd: command-line driver for the value-guided decoding toolkit.
//
//   vgd solve A B C D
//   vgd gen-data   [--config F] [--set k=v]... [--seed S] [--out DIR]
//   vgd train      [...] [--dataset FILE]
//   vgd decode     [...] --method SPEC [--puzzle "A B C D"] [--model FILE]
//   vgd experiment [...]
//   vgd sweep      [...]
//   vgd report     [...] [--csv FILE]
//
// Exit codes: 0 ok, 1 module error, 2 unsolvable puzzle, 64 usage or config
// error, 74 I/O error.

#include "vgd/config.hpp"
#include "vgd/experiments.hpp"
#include "vgd/oracle.hpp"
#include "vgd/search.hpp"
#include "vgd/task_env.hpp"
#include "vgd/value_models.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitModule = 1;
constexpr int kExitUnsolvable = 2;
constexpr int kExitUsage = 64;
constexpr int kExitIo = 74;

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::int64_t> seed;
  std::string out;
};

vgd::Config load_config(const Common& c) {
  vgd::Config cfg;
  if (!c.config_path.empty()) cfg = vgd::Config::parse(vgd::read_file(c.config_path));
  for (const auto& o : c.overrides) cfg.apply_override(o);
  if (c.seed) cfg.set("seeds", std::to_string(*c.seed));
  if (!c.out.empty()) cfg.set("output.dir", c.out);
  return cfg;
}

std::string out_dir(const vgd::Config& cfg) {
  const auto dir = cfg.get_string("output.dir");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw vgd::IoError("cannot create output directory " + dir + ": " + ec.message());
  return dir;
}

void write_manifest(const vgd::Config& cfg, const std::string& dir, const std::string& command,
                    const nlohmann::json& extra = {}) {
  auto j = vgd::manifest_json({}, cfg, command);
  if (!extra.is_null()) j["artifacts"] = extra;
  vgd::write_file_atomic(dir + "/manifest.json", j.dump(2) + "\n");
}

std::uint64_t first_seed(const vgd::Config& cfg) {
  auto seeds = cfg.get_ints("seeds");
  if (seeds.empty()) throw vgd::InvalidConfig("seeds must be non-empty");
  return static_cast<std::uint64_t>(seeds.front());
}

std::string path_line(const vgd::PartialPath& p) {
  std::string out;
  for (const auto& s : p.steps()) out += (out.empty() ? "" : "; ") + vgd::step_text(s);
  if (p.truncated()) out += out.empty() ? "(truncated)" : " (truncated)";
  return out;
}

int cmd_solve(const std::vector<std::string>& args) {
  if (args.size() != 4) {
    std::cerr << "vgd solve: expected 4 integers\n";
    return kExitUsage;
  }
  std::vector<vgd::Rational> inputs;
  for (const auto& a : args) {
    auto v = vgd::parse_int(a);
    if (!v || *v < 1 || *v > 1000000) {
      std::cerr << "vgd solve: '" << a << "' is not a positive integer\n";
      return kExitUsage;
    }
    inputs.emplace_back(*v);
  }
  const auto instance = vgd::TaskInstance::game24("cli", inputs);
  auto solutions = vgd::solve_exhaustive(instance);
  if (solutions.empty()) {
    std::cout << "unsolvable\n";
    return kExitUnsolvable;
  }
  for (const auto& p : solutions) {
    const auto& answer = std::get<vgd::Answer>(p.steps().back());
    std::cout << answer.expr.text() << "=" << vgd::kTarget << "  [" << path_line(p) << "]\n";
  }
  return kExitOk;
}

std::vector<vgd::TrainingSample> generate(const vgd::ExperimentSetup& setup, std::uint64_t seed) {
  return vgd::build_training_set(setup.train, setup.policy, setup.n, vgd::RngStream(seed, "train"), true,
                                 setup.max_steps);
}

int cmd_gen_data(const Common& c) {
  const auto cfg = load_config(c);
  const auto setup = vgd::make_setup(cfg);
  const auto seed = first_seed(cfg);
  const auto samples = generate(setup, seed);
  const auto dir = out_dir(cfg);
  vgd::write_file_atomic(dir + "/dataset.tsv", vgd::serialize_dataset(samples));
  const auto cost = vgd::annotation_cost_report(samples);
  std::cout << "wrote " << samples.size() << " samples to " << dir << "/dataset.tsv\n"
            << "outcome labels " << cost.outcome_labels << ", process labels " << cost.process_labels << "\n"
            << "label consistency " << vgd::format_double(vgd::label_consistency(samples)) << "\n";
  write_manifest(cfg, dir, "gen-data", {{"dataset", "dataset.tsv"}, {"seed", seed}});
  return kExitOk;
}

int cmd_train(const Common& c, const std::string& dataset_path) {
  const auto cfg = load_config(c);
  const auto setup = vgd::make_setup(cfg);
  const auto dir = out_dir(cfg);
  const auto path = dataset_path.empty() ? dir + "/dataset.tsv" : dataset_path;
  const auto samples = vgd::parse_dataset(vgd::read_file(path));
  if (samples.empty()) throw vgd::EmptyDataset("dataset " + path + " has no samples");
  vgd::TrainHyper hyper = setup.hyper;
  hyper.seed = first_seed(cfg);
  nlohmann::json files = nlohmann::json::object();
  bool audits_ok = true;
  for (auto sup : setup.models) {
    auto model = vgd::train(vgd::fresh_model(setup, sup), samples, hyper);
    const std::string name = "model_" + vgd::to_string(sup) + ".vgdm";
    vgd::save_model(model, dir + "/" + name);
    files[vgd::to_string(sup)] = name;
    std::cout << "wrote " << dir << "/" << name << "\n";
    if (model.is_tabular()) {
      const auto audit = vgd::fixed_point_audit(model, samples);
      std::cout << "fixed-point audit " << vgd::to_string(sup) << ": " << (audit.passed() ? "PASS" : "FAIL") << " ("
                << audit.keys << " prefixes, " << audit.mismatches << " mismatches)\n";
      audits_ok = audits_ok && audit.passed();
    } else if (!model.epoch_losses().empty()) {
      std::cout << "final epoch loss " << vgd::to_string(sup) << ": " << vgd::format_double(model.epoch_losses().back())
                << "\n";
    }
  }
  write_manifest(cfg, dir, "train", files);
  return audits_ok ? kExitOk : kExitModule;
}

vgd::InstancePtr cli_instance(const vgd::Config& cfg, const std::string& puzzle) {
  if (!puzzle.empty()) {
    auto inst = vgd::parse_instance_header(puzzle.rfind("Q ", 0) == 0 ? puzzle : "Q game24 " + puzzle);
    inst.id = "cli";
    return std::make_shared<const vgd::TaskInstance>(inst);
  }
  auto setup = vgd::make_setup(cfg);
  return setup.eval.front();
}

int cmd_decode(const Common& c, const std::string& method, const std::string& puzzle, const std::string& model_path) {
  const auto cfg = load_config(c);
  const auto spec = vgd::DecodeSpec::parse(method);
  const auto setup = vgd::make_setup(cfg);
  const auto instance = cli_instance(cfg, puzzle);
  const auto seed = first_seed(cfg);
  const vgd::RngStream rng(seed, "decode/K" + std::to_string(spec.K) + "/" + instance->id);

  vgd::ValueOracle oracle(setup.policy, vgd::KeyMode::State, setup.max_steps);
  vgd::TrainedScorers scorers;
  scorers.oracle = &oracle;
  const auto sc = spec.scorer();
  if (!sc.empty() && sc != "oracle") {
    const auto sup = vgd::supervision_from_string(sc);
    if (!model_path.empty()) {
      auto model = vgd::load_model(model_path);
      if (model.supervision() != sup)
        throw vgd::InvalidConfig("model file holds a " + vgd::to_string(model.supervision()) + " model, method needs " +
                                 sc);
      scorers.models.emplace(sup, std::move(model));
    } else {
      vgd::TrainHyper hyper = setup.hyper;
      hyper.seed = seed;
      scorers.models.emplace(sup, vgd::train(vgd::fresh_model(setup, sup), generate(setup, seed), hyper));
    }
  }

  std::ostringstream trace;
  trace << instance->header() << "\n" << "method " << spec.text() << " seed " << seed << "\n";
  vgd::PartialPath chosen(instance);
  std::vector<vgd::PartialPath> pool;
  if (spec.family() == "beam") {
    const vgd::BeamConfig bc{spec.K, spec.b, setup.max_steps, setup.dedup};
    auto r = scorers.with(sc, [&](const auto& scorer) {
      return vgd::value_guided_beam_search(instance, setup.policy, bc, scorer, rng);
    });
    for (std::size_t t = 0; t < r.stages.size(); ++t) {
      const auto& st = r.stages[t];
      if (t == 0) {
        trace << "stage 0: " << st.candidates.size() << " candidates\n";
      } else {
        const std::size_t per = spec.K / spec.b;
        const std::size_t expanded = st.expanded, kept = st.carried;
        trace << "stage " << t << ": " << expanded << "x" << per << " candidates";
        if (kept) trace << " + " << kept << " complete";
        trace << "\n";
      }
      for (std::size_t i = 0; i < st.candidates.size(); ++i) {
        const bool sel = std::find(st.selected.begin(), st.selected.end(), i) != st.selected.end();
        char buf[64];
        std::snprintf(buf, sizeof(buf), "  %3zu %.6f %s ", i, st.values[i], sel ? "*" : " ");
        trace << buf << st.candidates[i] << "\n";
      }
    }
    chosen = r.chosen;
    pool = r.pool;
  } else if (spec.method == "greedy") {
    auto r = vgd::greedy_decode(instance, setup.policy, setup.max_steps);
    chosen = r.chosen;
    pool = r.pool;
  } else {
    pool = vgd::vanilla_sample(instance, setup.policy, spec.K, rng, setup.max_steps);
    for (std::size_t i = 0; i < pool.size(); ++i) trace << "  sample " << i << ": " << path_line(pool[i]) << "\n";
    std::size_t idx = 0;
    if (spec.method == "sc") {
      try {
        idx = vgd::self_consistency(pool).index;
      } catch (const vgd::NoAnsweredPaths&) {
        idx = pool.size();
      }
    } else if (spec.family() == "rerank") {
      idx = scorers.with(sc, [&](const auto& scorer) { return vgd::rerank_best_of_k(pool, scorer); });
    }
    chosen = idx < pool.size() ? pool[idx] : pool.front().truncate();
  }
  const auto verdict = vgd::check_answer(chosen);
  trace << "chosen: " << path_line(chosen) << "\n"
        << "verdict: " << (verdict.correct ? "correct" : verdict.answered ? "incorrect" : "unanswered") << "\n"
        << "pool proportion: " << vgd::format_double(vgd::pool_proportion(pool)) << "\n";
  std::cout << trace.str();
  const auto dir = out_dir(cfg);
  vgd::write_file_atomic(dir + "/decode_trace.txt", trace.str());
  write_manifest(cfg, dir, "decode", {{"trace", "decode_trace.txt"}, {"method", spec.text()}});
  return kExitOk;
}

void print_table(const vgd::ExperimentResult& r) {
  std::printf("%-18s %4s %4s %10s %10s %10s %10s\n", "method", "K", "b", "accuracy", "acc_std", "proportion", "prop_std");
  for (const auto& row : r.rows)
    std::printf("%-18s %4zu %4zu %10.4f %10.4f %10.4f %10.4f%s\n", row.spec.method.c_str(), row.spec.K, row.spec.b,
                row.accuracy_mean, row.accuracy_std, row.proportion_mean, row.proportion_std,
                row.spec.vanilla_equivalent() ? "  (=vanilla)" : "");
}

int cmd_experiment(const Common& c, bool use_sweep) {
  const auto cfg = load_config(c);
  const auto setup = vgd::make_setup(cfg, use_sweep);
  const auto result = vgd::run_experiment(setup);
  const auto dir = out_dir(cfg);
  vgd::emit_report(result, cfg, dir, use_sweep ? "sweep" : "experiment");
  print_table(result);
  std::cout << "wrote " << dir << "/metrics.csv\n";
  return kExitOk;
}

int cmd_report(const Common& c, const std::string& csv_path) {
  const auto cfg = load_config(c);
  const auto dir = out_dir(cfg);
  const auto path = csv_path.empty() ? dir + "/metrics.csv" : csv_path;
  const auto result = vgd::parse_metrics_csv(vgd::read_file(path));
  for (const auto& [name, svg] : vgd::metric_charts(result)) vgd::write_file_atomic(dir + "/" + name, svg);
  print_table(result);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Value-guided decoding toolkit"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "config file (key = value lines)");
    sub->add_option("--set", common.overrides, "override a config key, e.g. --set policy.epsilon=0.3");
    sub->add_option("--seed", common.seed, "run with this single seed");
    sub->add_option("--out", common.out, "output directory");
  };

  std::vector<std::string> solve_args;
  auto* solve = app.add_subcommand("solve", "enumerate all solutions of a Game of 24 puzzle");
  solve->add_option("numbers", solve_args, "four integers")->expected(0, 8);

  auto* gen = app.add_subcommand("gen-data", "sample a labelled training dataset");
  add_common(gen);

  std::string dataset;
  auto* trn = app.add_subcommand("train", "train value models from a dataset");
  add_common(trn);
  trn->add_option("--dataset", dataset, "dataset file (default <out>/dataset.tsv)");

  std::string method, puzzle, model_path;
  auto* dec = app.add_subcommand("decode", "decode one question and print the search trace");
  add_common(dec);
  dec->add_option("--method", method, "method[:K[:b]], e.g. beam-ovm:20:4")->required();
  dec->add_option("--puzzle", puzzle, "four numbers, e.g. \"4 9 10 13\" (default: first evaluation question)");
  dec->add_option("--model", model_path, "model file for the scorer (default: train one)");

  auto* exp = app.add_subcommand("experiment", "run every decode spec over all seeds");
  add_common(exp);
  auto* swp = app.add_subcommand("sweep", "run the (method, K, b) grid over all seeds");
  add_common(swp);

  std::string csv;
  auto* rep = app.add_subcommand("report", "redraw charts and print the table of a metrics CSV");
  add_common(rep);
  rep->add_option("--csv", csv, "metrics CSV (default <out>/metrics.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*solve) return cmd_solve(solve_args);
    if (*gen) return cmd_gen_data(common);
    if (*trn) return cmd_train(common, dataset);
    if (*dec) return cmd_decode(common, method, puzzle, model_path);
    if (*exp) return cmd_experiment(common, false);
    if (*swp) return cmd_experiment(common, true);
    if (*rep) return cmd_report(common, csv);
  } catch (const vgd::InvalidConfig& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const vgd::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const vgd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitModule;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitModule;
  }
  return kExitUsage;
}
