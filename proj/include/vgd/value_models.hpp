#pragma once

// Outcome-supervised value models (OVM, which is also the ORM on complete
// paths) and process-supervised reward models (PRM, PRM-O).
//
// Training minimises sum_i sum_t (f(S_i^(1:t)) - y)^2 where y is the outcome
// label replicated over every step prefix (outcome supervision) or the label
// of step t (process supervision). The tabular backend stores the exact
// minimiser, the per-prefix sample mean, as an integer (sum, count) pair.

#include "vgd/common.hpp"
#include "vgd/policy.hpp"
#include "vgd/rng.hpp"
#include "vgd/task_env.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace vgd {

enum class Supervision : std::uint8_t { Outcome = 0, Prm = 1, PrmO = 2 };

inline std::string to_string(Supervision s) {
  switch (s) {
    case Supervision::Outcome: return "ovm";
    case Supervision::Prm: return "prm";
    case Supervision::PrmO: return "prm_o";
  }
  return "?";
}

inline Supervision supervision_from_string(const std::string& s) {
  if (s == "ovm" || s == "orm" || s == "outcome") return Supervision::Outcome;
  if (s == "prm") return Supervision::Prm;
  if (s == "prm_o" || s == "prm-o") return Supervision::PrmO;
  throw InvalidConfig("unknown supervision '" + s + "'");
}

struct TrainingSample {
  PartialPath path;  // complete
  int outcome_label = 0;
  std::optional<std::vector<StepLabel>> step_labels;
};

/// N x n rollouts, one RNG stream per question. Outcome labels come from
/// check_answer; step labels from label_path when requested.
inline std::vector<TrainingSample> build_training_set(const std::vector<InstancePtr>& instances,
                                                      const PolicySpec& policy, std::size_t n,
                                                      const RngStream& rng, bool with_step_labels,
                                                      std::size_t max_steps = kDefaultMaxSteps) {
  if (n < 1) throw InvalidConfig("need at least one path per question");
  std::vector<TrainingSample> out;
  out.reserve(instances.size() * n);
  for (std::size_t q = 0; q < instances.size(); ++q) {
    RngStream stream = rng.derive(policy.seed_namespace + "/q" + std::to_string(q));
    for (std::size_t i = 0; i < n; ++i) {
      TrainingSample s{rollout(policy, PartialPath(instances[q]), max_steps, stream), 0, std::nullopt};
      s.outcome_label = check_answer(s.path).correct;
      if (with_step_labels) s.step_labels = label_path(s.path);
      out.push_back(std::move(s));
    }
  }
  return out;
}

/// (prefix key, label) for every prefix S^(1:t), t = 1..m, all carrying the
/// sample's outcome label.
inline std::vector<std::pair<std::string, int>> expand_outcome_labels(const TrainingSample& sample,
                                                                      KeyMode mode = KeyMode::Prefix) {
  if (!sample.path.complete()) throw IncompletePath("training samples must be complete");
  std::vector<std::pair<std::string, int>> out;
  for (auto& key : prefix_keys(sample.path, mode)) out.emplace_back(std::move(key), sample.outcome_label);
  return out;
}

/// Targets for one sample under a supervision kind, one per step prefix.
/// Throws MissingStepLabels for process supervision without step labels.
inline std::vector<int> targets(const TrainingSample& sample, Supervision sup) {
  if (sup == Supervision::Outcome) return std::vector<int>(sample.path.size(), sample.outcome_label);
  if (!sample.step_labels) throw MissingStepLabels("process supervision needs step labels");
  if (sample.step_labels->size() != sample.path.size()) throw MissingStepLabels("step label count mismatch");
  std::vector<int> out;
  for (const auto& l : *sample.step_labels) out.push_back(sup == Supervision::Prm ? l.prm : l.prm_o);
  return out;
}

// ---------------------------------------------------------------------------
// Hashed features

/// Hashed sparse features of a prefix. Game24 features describe the table:
/// its size, how many numbers carry a claim that disagrees with their own
/// expression, the claimed multiset, the exact (claimed|truth) state, the
/// last step and, once answered, the answer's value. Prefix mode adds the
/// full prefix key.
inline std::vector<std::uint32_t> prefix_features(const PartialPath& prefix, std::size_t dim,
                                                  KeyMode mode = KeyMode::State) {
  std::vector<std::string> names;
  if (prefix.instance().kind == TaskKind::Chain) {
    const auto& s = prefix.chain();
    names.push_back("chain:d=" + std::to_string(s.depth) + ":alive=" + std::to_string(s.alive));
    names.push_back("chain:alive=" + std::to_string(s.alive));
  } else {
    const auto& s = prefix.game24();
    const std::string flags = std::string(s.answered ? "A" : "") + (s.dead ? "D" : "") +
                              (prefix.truncated() ? "T" : "");
    const std::string n = "n=" + std::to_string(s.items.size()) + flags;
    int bad = 0;
    std::string claimed;
    for (const auto& it : s.items) {
      if (!it.truth || *it.truth != it.claimed) ++bad;
      claimed += format_number(it.claimed) + ",";
    }
    names.push_back(n);
    names.push_back("bad=" + std::to_string(bad) + "/" + n);
    names.push_back("claimed=" + claimed + "/" + n);
    names.push_back("state=" + canonical_key(prefix, KeyMode::State));
    if (!prefix.steps().empty()) names.push_back("last=" + step_text(prefix.steps().back()));
    if (s.answered) {
      const auto& t = s.items.front().truth;
      names.push_back("ansval=" + (t ? format_number(*t) : std::string("?")));
    }
  }
  if (mode == KeyMode::Prefix) names.push_back("prefix=" + canonical_key(prefix, KeyMode::Prefix));
  std::vector<std::uint32_t> out;
  out.reserve(names.size());
  for (const auto& name : names) out.push_back(static_cast<std::uint32_t>(fnv1a(name) % dim));
  return out;
}

struct LinearExample {
  std::vector<std::uint32_t> features;
  double target = 0.0;
};

struct TrainHyper {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Model

class ValueModel {
 public:
  struct Tally {
    std::int64_t label_sum = 0;
    std::int64_t count = 0;
    Rational mean() const { return Rational(label_sum, count); }
    friend bool operator==(const Tally&, const Tally&) = default;
  };
  struct Tabular {
    std::unordered_map<std::string, Tally> table;
  };
  struct HashedLinear {
    std::vector<double> weights;
    double bias = 0.0;
  };

  static constexpr double kDefaultFallback = 0.5;

  static ValueModel tabular(Supervision sup, KeyMode mode = KeyMode::Prefix, double fallback = kDefaultFallback) {
    ValueModel m;
    m.supervision_ = sup;
    m.key_mode_ = mode;
    m.fallback_ = fallback;
    m.backend_ = Tabular{};
    return m;
  }

  static ValueModel hashed_linear(Supervision sup, std::size_t dim, KeyMode mode = KeyMode::State) {
    if (dim == 0) throw InvalidConfig("hashed feature dimension must be positive");
    ValueModel m;
    m.supervision_ = sup;
    m.key_mode_ = mode;
    m.backend_ = HashedLinear{std::vector<double>(dim, 0.0), 0.0};
    return m;
  }

  Supervision supervision() const { return supervision_; }
  KeyMode key_mode() const { return key_mode_; }
  double fallback() const { return fallback_; }
  bool is_tabular() const { return std::holds_alternative<Tabular>(backend_); }
  const Tabular& tabular_backend() const { return std::get<Tabular>(backend_); }
  Tabular& tabular_backend() { return std::get<Tabular>(backend_); }
  const HashedLinear& linear_backend() const { return std::get<HashedLinear>(backend_); }
  HashedLinear& linear_backend() { return std::get<HashedLinear>(backend_); }
  const std::vector<double>& epoch_losses() const { return epoch_losses_; }

  std::optional<Tally> tally(const std::string& key) const {
    const auto& t = tabular_backend().table;
    auto it = t.find(key);
    if (it == t.end()) return std::nullopt;
    return it->second;
  }

  /// Value of a (possibly empty) prefix, in [0,1]. Unseen tabular keys get
  /// the fallback value.
  double score_prefix(const PartialPath& path) const {
    if (auto* tab = std::get_if<Tabular>(&backend_)) {
      auto it = tab->table.find(canonical_key(path, key_mode_));
      if (it == tab->table.end()) return fallback_;
      return static_cast<double>(it->second.label_sum) / static_cast<double>(it->second.count);
    }
    const auto& lin = std::get<HashedLinear>(backend_);
    return std::clamp(raw_linear(lin, prefix_features(path, lin.weights.size(), key_mode_)), 0.0, 1.0);
  }

  /// Verification score of a complete path. Outcome models score the full
  /// path; process models take the minimum over their per-step scores.
  /// Throws IncompletePath.
  double score_complete(const PartialPath& path) const {
    if (!path.complete()) throw IncompletePath("score_complete needs a complete path");
    if (supervision_ == Supervision::Outcome || path.size() == 0) return score_prefix(path);
    double lowest = 1.0;
    PartialPath cur(path.instance_ptr());
    for (std::size_t t = 0; t < path.size(); ++t) {
      cur = apply_generated_step(cur, path.steps()[t]);
      if (t + 1 == path.size() && path.truncated()) cur = cur.truncate();
      lowest = std::min(lowest, score_prefix(cur));
    }
    return lowest;
  }

  /// Adds one sample's prefixes to the tabular sums.
  void add_sample(const TrainingSample& sample) {
    auto& table = std::get<Tabular>(backend_).table;
    auto keys = prefix_keys(sample.path, key_mode_);
    auto ys = targets(sample, supervision_);
    for (std::size_t t = 0; t < keys.size(); ++t) {
      auto& tally = table[keys[t]];
      tally.label_sum += ys[t];
      tally.count += 1;
    }
  }

  static double raw_linear(const HashedLinear& lin, const std::vector<std::uint32_t>& features) {
    double v = lin.bias;
    for (auto f : features) v += lin.weights[f];
    return v;
  }

  void set_epoch_losses(std::vector<double> losses) { epoch_losses_ = std::move(losses); }

  friend bool operator==(const ValueModel& a, const ValueModel& b) {
    if (a.supervision_ != b.supervision_ || a.key_mode_ != b.key_mode_ || a.fallback_ != b.fallback_) return false;
    if (a.is_tabular() != b.is_tabular()) return false;
    if (a.is_tabular()) return a.tabular_backend().table == b.tabular_backend().table;
    return a.linear_backend().weights == b.linear_backend().weights &&
           a.linear_backend().bias == b.linear_backend().bias;
  }

 private:
  Supervision supervision_ = Supervision::Outcome;
  KeyMode key_mode_ = KeyMode::Prefix;
  double fallback_ = kDefaultFallback;
  std::variant<Tabular, HashedLinear> backend_;
  std::vector<double> epoch_losses_;
};

// ---------------------------------------------------------------------------
// Linear regression pieces (exposed for gradient checking)

inline std::vector<LinearExample> linear_examples(const std::vector<TrainingSample>& samples, Supervision sup,
                                                  std::size_t dim, KeyMode mode) {
  std::vector<LinearExample> out;
  for (const auto& s : samples) {
    auto ys = targets(s, sup);
    PartialPath cur(s.path.instance_ptr());
    for (std::size_t t = 0; t < s.path.size(); ++t) {
      cur = apply_generated_step(cur, s.path.steps()[t]);
      if (t + 1 == s.path.size() && s.path.truncated()) cur = cur.truncate();
      out.push_back({prefix_features(cur, dim, mode), static_cast<double>(ys[t])});
    }
  }
  return out;
}

/// Mean squared error of the unclamped linear score.
inline double linear_loss(const ValueModel::HashedLinear& lin, const std::vector<LinearExample>& examples) {
  double total = 0.0;
  for (const auto& e : examples) {
    const double r = ValueModel::raw_linear(lin, e.features) - e.target;
    total += r * r;
  }
  return examples.empty() ? 0.0 : total / static_cast<double>(examples.size());
}

/// Analytic gradient of linear_loss: (d/dweights, d/dbias).
inline std::pair<std::vector<double>, double> linear_gradient(const ValueModel::HashedLinear& lin,
                                                              const std::vector<LinearExample>& examples) {
  std::vector<double> gw(lin.weights.size(), 0.0);
  double gb = 0.0;
  const double scale = examples.empty() ? 0.0 : 2.0 / static_cast<double>(examples.size());
  for (const auto& e : examples) {
    const double r = (ValueModel::raw_linear(lin, e.features) - e.target) * scale;
    for (auto f : e.features) gw[f] += r;
    gb += r;
  }
  return {std::move(gw), gb};
}

// ---------------------------------------------------------------------------
// Training

namespace detail {

inline void fit(ValueModel& model, const std::vector<TrainingSample>& samples, const TrainHyper& hyper) {
  if (samples.empty()) throw EmptyDataset("cannot train on an empty dataset");
  if (model.is_tabular()) {
    model = ValueModel::tabular(model.supervision(), model.key_mode(), model.fallback());
    for (const auto& s : samples) model.add_sample(s);
    return;
  }
  if (hyper.epochs == 0 || hyper.batch_size == 0 || !(hyper.learning_rate > 0.0))
    throw InvalidConfig("training hyperparameters must be positive");
  auto& lin = model.linear_backend();
  std::fill(lin.weights.begin(), lin.weights.end(), 0.0);
  lin.bias = 0.0;
  auto examples = linear_examples(samples, model.supervision(), lin.weights.size(), model.key_mode());
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  RngStream rng(hyper.seed, "sgd");
  std::vector<double> losses;
  std::unordered_map<std::uint32_t, double> grad;
  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
      const std::size_t end = std::min(order.size(), start + hyper.batch_size);
      const double scale = 2.0 / static_cast<double>(end - start);
      grad.clear();
      double gb = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const auto& e = examples[order[k]];
        const double r = ValueModel::raw_linear(lin, e.features) - e.target;
        epoch_loss += r * r;
        for (auto f : e.features) grad[f] += r * scale;
        gb += r * scale;
      }
      for (const auto& [f, g] : grad) lin.weights[f] -= hyper.learning_rate * g;
      lin.bias -= hyper.learning_rate * gb;
    }
    losses.push_back(epoch_loss / static_cast<double>(examples.size()));
  }
  model.set_epoch_losses(std::move(losses));
}

}  // namespace detail

/// Throws EmptyDataset.
inline ValueModel train_outcome(ValueModel model, const std::vector<TrainingSample>& samples,
                                const TrainHyper& hyper = {}) {
  if (model.supervision() != Supervision::Outcome) throw InvalidConfig("train_outcome needs an outcome model");
  detail::fit(model, samples, hyper);
  return model;
}

/// Throws EmptyDataset or MissingStepLabels.
inline ValueModel train_process(ValueModel model, const std::vector<TrainingSample>& samples,
                                const TrainHyper& hyper = {}) {
  if (model.supervision() == Supervision::Outcome) throw InvalidConfig("train_process needs a PRM or PRM-O model");
  for (const auto& s : samples)
    if (!s.step_labels) throw MissingStepLabels("sample without step labels");
  detail::fit(model, samples, hyper);
  return model;
}

inline ValueModel train(ValueModel model, const std::vector<TrainingSample>& samples, const TrainHyper& hyper = {}) {
  return model.supervision() == Supervision::Outcome ? train_outcome(std::move(model), samples, hyper)
                                                     : train_process(std::move(model), samples, hyper);
}

// ---------------------------------------------------------------------------
// Model files
//
// Layout (little-endian):
//   "VGDM" | u16 version | u8 backend (0 tabular, 1 hashed-linear)
//   | u8 supervision | u8 key mode | f64 fallback
//   tabular: u64 record count, then records sorted by key:
//            u32 key length | key bytes | i64 label sum | i64 count
//   linear:  u64 dimension | f64 x dimension weights | f64 bias
//   u64 FNV-1a checksum of every preceding byte

inline constexpr std::uint16_t kModelFileVersion = 1;
inline constexpr char kModelMagic[4] = {'V', 'G', 'D', 'M'};

namespace detail {

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

struct Reader {
  std::string_view data;
  std::size_t pos = 0;
  template <class T>
  T get() {
    if (pos + sizeof(T) > data.size()) throw CorruptFile("model file truncated");
    T v;
    std::memcpy(&v, data.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
  }
  std::string_view bytes(std::size_t n) {
    if (pos + n > data.size()) throw CorruptFile("model file truncated");
    auto v = data.substr(pos, n);
    pos += n;
    return v;
  }
};

}  // namespace detail

inline std::string serialize_model(const ValueModel& model) {
  std::string out(kModelMagic, 4);
  detail::put<std::uint16_t>(out, kModelFileVersion);
  detail::put<std::uint8_t>(out, model.is_tabular() ? 0 : 1);
  detail::put<std::uint8_t>(out, static_cast<std::uint8_t>(model.supervision()));
  detail::put<std::uint8_t>(out, model.key_mode() == KeyMode::Prefix ? 0 : 1);
  detail::put<double>(out, model.fallback());
  if (model.is_tabular()) {
    std::map<std::string_view, ValueModel::Tally> sorted;
    for (const auto& [k, v] : model.tabular_backend().table) sorted.emplace(k, v);
    detail::put<std::uint64_t>(out, sorted.size());
    for (const auto& [k, v] : sorted) {
      detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(k.size()));
      out.append(k);
      detail::put<std::int64_t>(out, v.label_sum);
      detail::put<std::int64_t>(out, v.count);
    }
  } else {
    const auto& lin = model.linear_backend();
    detail::put<std::uint64_t>(out, lin.weights.size());
    for (double w : lin.weights) detail::put<double>(out, w);
    detail::put<double>(out, lin.bias);
  }
  detail::put<std::uint64_t>(out, fnv1a(out));
  return out;
}

/// Throws CorruptFile or VersionMismatch.
inline ValueModel deserialize_model(std::string_view bytes) {
  detail::Reader r{bytes};
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kModelMagic, 4) != 0) throw CorruptFile("bad model magic");
  r.pos = 4;
  const auto version = r.get<std::uint16_t>();
  if (version != kModelFileVersion)
    throw VersionMismatch("model file version " + std::to_string(version) + ", expected " +
                          std::to_string(kModelFileVersion));
  if (bytes.size() < 8 + r.pos) throw CorruptFile("model file truncated");
  const std::uint64_t stored = [&] {
    std::uint64_t v;
    std::memcpy(&v, bytes.data() + bytes.size() - 8, 8);
    return v;
  }();
  if (fnv1a(bytes.substr(0, bytes.size() - 8)) != stored) throw CorruptFile("model checksum mismatch");
  r.data = bytes.substr(0, bytes.size() - 8);

  const auto backend = r.get<std::uint8_t>();
  const auto sup = r.get<std::uint8_t>();
  const auto mode = r.get<std::uint8_t>();
  const auto fallback = r.get<double>();
  if (backend > 1 || sup > 2 || mode > 1) throw CorruptFile("bad model header fields");
  const auto supervision = static_cast<Supervision>(sup);
  const auto key_mode = mode == 0 ? KeyMode::Prefix : KeyMode::State;

  ValueModel model;
  if (backend == 0) {
    model = ValueModel::tabular(supervision, key_mode, fallback);
    const auto n = r.get<std::uint64_t>();
    auto& table = model.tabular_backend().table;
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto len = r.get<std::uint32_t>();
      std::string key(r.bytes(len));
      ValueModel::Tally t;
      t.label_sum = r.get<std::int64_t>();
      t.count = r.get<std::int64_t>();
      if (t.count < 1 || t.label_sum < 0 || t.label_sum > t.count) throw CorruptFile("bad tally record");
      table.emplace(std::move(key), t);
    }
  } else {
    const auto dim = r.get<std::uint64_t>();
    if (dim == 0 || dim > (bytes.size() / 8)) throw CorruptFile("bad feature dimension");
    model = ValueModel::hashed_linear(supervision, dim, key_mode);
    auto& lin = model.linear_backend();
    for (auto& w : lin.weights) w = r.get<double>();
    lin.bias = r.get<double>();
  }
  if (r.pos != r.data.size()) throw CorruptFile("trailing bytes in model file");
  return model;
}

/// Writes atomically (temp file + rename). Throws IoError.
inline void write_file_atomic(const std::string& path, std::string_view bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("cannot rename " + tmp + " to " + path);
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void save_model(const ValueModel& model, const std::string& path) {
  write_file_atomic(path, serialize_model(model));
}

inline ValueModel load_model(const std::string& path) { return deserialize_model(read_file(path)); }

// ---------------------------------------------------------------------------
// Dataset files
//
// First line "# vgd-dataset v1". Then one tab-separated record per sample:
//   instance id | instance header | outcome label | steps joined by " ; "
//   | step labels as "prm/prm_o" joined by spaces, or "-" | "truncated" or "-"

inline std::string serialize_dataset(const std::vector<TrainingSample>& samples) {
  std::string out = "# vgd-dataset v1\n";
  for (const auto& s : samples) {
    out += s.path.instance().id + '\t' + s.path.instance().header() + '\t' + std::to_string(s.outcome_label) + '\t';
    for (std::size_t i = 0; i < s.path.size(); ++i) out += (i ? " ; " : "") + step_text(s.path.steps()[i]);
    out += '\t';
    if (s.step_labels) {
      for (std::size_t i = 0; i < s.step_labels->size(); ++i)
        out += (i ? " " : "") + std::to_string((*s.step_labels)[i].prm) + "/" +
               std::to_string((*s.step_labels)[i].prm_o);
    } else {
      out += '-';
    }
    out += '\t';
    out += s.path.truncated() ? "truncated" : "-";
    out += '\n';
  }
  return out;
}

/// Throws ParseError when a record is malformed or its label disagrees with
/// the re-derived verdict.
inline std::vector<TrainingSample> parse_dataset(std::string_view text) {
  std::vector<TrainingSample> out;
  std::map<std::string, InstancePtr> instances;
  std::size_t lineno = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++lineno;
    if (lineno == 1) {
      if (line != "# vgd-dataset v1") throw ParseError("missing dataset header");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    while (true) {
      auto tab = line.find('\t');
      fields.push_back(line.substr(0, tab));
      if (tab == std::string_view::npos) break;
      line.remove_prefix(tab + 1);
    }
    const std::string where = "dataset line " + std::to_string(lineno) + ": ";
    if (fields.size() != 6) throw ParseError(where + "expected 6 fields");
    const std::string key = std::string(fields[0]) + '\t' + std::string(fields[1]);
    auto& inst = instances[key];
    if (!inst) {
      auto t = parse_instance_header(fields[1]);
      t.id = std::string(fields[0]);
      inst = std::make_shared<const TaskInstance>(std::move(t));
    }
    std::vector<ReasoningStep> steps;
    std::string_view rest = fields[3];
    while (!rest.empty()) {
      auto sep = rest.find(" ; ");
      steps.push_back(parse_step(rest.substr(0, sep)));
      if (sep == std::string_view::npos) break;
      rest.remove_prefix(sep + 3);
    }
    PartialPath path = replay(inst, steps);
    if (fields[5] == "truncated") path = path.truncate();
    if (!path.complete()) throw ParseError(where + "incomplete path");
    TrainingSample s{path, 0, std::nullopt};
    auto label = parse_int(fields[2]);
    if (!label || (*label != 0 && *label != 1)) throw ParseError(where + "bad outcome label");
    s.outcome_label = static_cast<int>(*label);
    if (s.outcome_label != static_cast<int>(check_answer(path).correct))
      throw ParseError(where + "outcome label disagrees with the answer check");
    if (fields[4] != "-") {
      std::vector<StepLabel> labels;
      std::istringstream in{std::string(fields[4])};
      std::string tok;
      while (in >> tok) {
        if (tok.size() != 3 || tok[1] != '/') throw ParseError(where + "bad step label '" + tok + "'");
        labels.push_back({tok[0] - '0', tok[2] - '0'});
      }
      if (labels.size() != path.size()) throw ParseError(where + "step label count mismatch");
      s.step_labels = std::move(labels);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace vgd
