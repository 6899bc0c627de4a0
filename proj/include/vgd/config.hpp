#pragma once

// Experiment configuration: a flat, documented key-value text format.
//
//   # comment
//   env.kind = game24
//   policy.epsilon = 0.1
//
// One "key = value" per line; whitespace around key and value is ignored.
// Unknown keys are rejected and every value is type-checked against the
// schema below. serialize() writes every key in schema order, so
// parse(serialize(parse(x))) == parse(x).

#include "vgd/common.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace vgd {

enum class FieldType { String, Int, Double, Bool, IntList, DoubleList, StringList };

struct FieldSpec {
  const char* key;
  FieldType type;
  const char* default_value;
  const char* doc;
};

inline const std::vector<FieldSpec>& config_schema() {
  static const std::vector<FieldSpec> schema = {
      {"env.kind", FieldType::String, "game24", "game24 | chain"},
      {"env.puzzle_file", FieldType::String, "", "puzzle list file; empty = generate"},
      {"env.train_puzzles", FieldType::Int, "50", "training questions (Game24)"},
      {"env.eval_puzzles", FieldType::Int, "30", "evaluation questions (Game24), disjoint from training"},
      {"env.puzzle_seed", FieldType::Int, "7", "seed for puzzle generation and the train/eval split"},
      {"env.max_value", FieldType::Int, "13", "largest generated puzzle entry"},
      {"env.solvable_only", FieldType::Bool, "true", "generate solvable puzzles only"},
      {"env.chain_m", FieldType::Int, "3", "chain depth m"},
      {"env.chain_w", FieldType::Int, "2", "wrong branches per depth W"},
      {"env.chain_p", FieldType::DoubleList, "0.8,0.8,0.8", "good-step probability per depth"},
      {"env.chain_questions", FieldType::Int, "30", "evaluation copies of the chain question"},
      {"env.max_steps", FieldType::Int, "10", "step cap T"},
      {"policy.kind", FieldType::String, "noisy-expert", "noisy-expert | uniform-legal | softmax-tabular"},
      {"policy.epsilon", FieldType::Double, "0.1", "corruption probability"},
      {"policy.temperature", FieldType::Double, "1", "softmax-tabular temperature"},
      {"policy.wrong_weight", FieldType::Double, "0.5", "share of corruption spent on miscalculations"},
      {"policy.unavailable_weight", FieldType::Double, "0.5", "share of corruption spent on unavailable operands"},
      {"policy.corruption_skew", FieldType::Double, "0", "Zipf exponent over corrupted steps; 0 = uniform"},
      {"policy.seed_namespace", FieldType::String, "policy", "label prefix for policy RNG streams"},
      {"train.n", FieldType::Int, "200", "sampled paths per training question"},
      {"train.models", FieldType::StringList, "ovm,prm,prm_o", "models to train: ovm, prm, prm_o"},
      {"train.backend", FieldType::String, "linear", "tabular | linear"},
      {"train.key_mode", FieldType::String, "prefix", "prefix | state"},
      {"train.dim", FieldType::Int, "65536", "hashed feature dimension (linear backend)"},
      {"train.epochs", FieldType::Int, "30", "SGD epochs (linear backend)"},
      {"train.batch", FieldType::Int, "32", "SGD batch size (linear backend)"},
      {"train.lr", FieldType::Double, "0.05", "SGD learning rate (linear backend)"},
      {"train.fallback", FieldType::Double, "0.5", "tabular value of unseen prefixes"},
      {"decode.specs", FieldType::StringList, "greedy,vanilla:20,sc:20,rerank-ovm:20,beam-ovm:20:4",
       "decode methods as method[:K[:b]]"},
      {"decode.dedup", FieldType::Bool, "true", "beam search gives priority to non-duplicate paths"},
      {"sweep.methods", FieldType::StringList, "beam-ovm", "methods swept over the (K, b) grid"},
      {"sweep.K", FieldType::IntList, "20", "sampling sizes"},
      {"sweep.b", FieldType::IntList, "1,2,4,5,10,20", "beam sizes; pairs with b not dividing K are skipped"},
      {"seeds", FieldType::IntList, "0,1,2", "run seeds"},
      {"output.dir", FieldType::String, "out", "output directory"},
  };
  return schema;
}

class Config {
 public:
  Config() {
    for (const auto& f : config_schema()) values_[f.key] = f.default_value;
  }

  /// Throws InvalidConfig on syntax errors, unknown keys or badly typed values.
  static Config parse(std::string_view text) {
    Config c;
    std::size_t lineno = 0;
    while (!text.empty()) {
      auto nl = text.find('\n');
      std::string_view line = text.substr(0, nl);
      text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
      ++lineno;
      line = trim(line);
      if (line.empty() || line.front() == '#') continue;
      auto eq = line.find('=');
      if (eq == std::string_view::npos)
        throw InvalidConfig("config line " + std::to_string(lineno) + ": expected key = value");
      c.set(std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))));
    }
    return c;
  }

  /// Applies a "dotted.key=value" override. Throws InvalidConfig.
  void apply_override(std::string_view assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw InvalidConfig("override must look like key=value");
    set(std::string(trim(assignment.substr(0, eq))), std::string(trim(assignment.substr(eq + 1))));
  }

  void set(const std::string& key, const std::string& value) {
    const FieldSpec* spec = find(key);
    if (!spec) throw InvalidConfig("unknown config key '" + key + "'");
    check_type(*spec, value);
    values_[key] = normalize(*spec, value);
  }

  std::string serialize() const {
    std::string out;
    for (const auto& f : config_schema()) out += std::string(f.key) + " = " + values_.at(f.key) + "\n";
    return out;
  }

  const std::string& raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw InvalidConfig("unknown config key '" + key + "'");
    return it->second;
  }

  std::string get_string(const std::string& key) const { return raw(key); }
  std::int64_t get_int(const std::string& key) const { return *parse_int(raw(key)); }
  double get_double(const std::string& key) const { return *parse_double(raw(key)); }
  bool get_bool(const std::string& key) const { return raw(key) == "true"; }

  std::vector<std::string> get_strings(const std::string& key) const { return split_list(raw(key)); }

  std::vector<std::int64_t> get_ints(const std::string& key) const {
    std::vector<std::int64_t> out;
    for (const auto& s : split_list(raw(key))) out.push_back(*parse_int(s));
    return out;
  }

  std::vector<double> get_doubles(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : split_list(raw(key))) out.push_back(*parse_double(s));
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

  friend bool operator==(const Config&, const Config&) = default;

  static std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    while (!s.empty()) {
      auto comma = s.find(',');
      auto item = trim(s.substr(0, comma));
      if (!item.empty()) out.emplace_back(item);
      if (comma == std::string_view::npos) break;
      s.remove_prefix(comma + 1);
    }
    return out;
  }

 private:
  static const FieldSpec* find(const std::string& key) {
    for (const auto& f : config_schema())
      if (key == f.key) return &f;
    return nullptr;
  }

  static void check_type(const FieldSpec& spec, const std::string& value) {
    auto bad = [&] { throw InvalidConfig("config key '" + std::string(spec.key) + "' rejects value '" + value + "'"); };
    switch (spec.type) {
      case FieldType::String: break;
      case FieldType::Int:
        if (!parse_int(value)) bad();
        break;
      case FieldType::Double:
        if (!parse_double(value)) bad();
        break;
      case FieldType::Bool:
        if (value != "true" && value != "false") bad();
        break;
      case FieldType::IntList:
        for (const auto& s : split_list(value))
          if (!parse_int(s)) bad();
        break;
      case FieldType::DoubleList:
        for (const auto& s : split_list(value))
          if (!parse_double(s)) bad();
        break;
      case FieldType::StringList: break;
    }
  }

  // Lists are stored without spaces so serialization is canonical.
  static std::string normalize(const FieldSpec& spec, const std::string& value) {
    if (spec.type != FieldType::IntList && spec.type != FieldType::DoubleList && spec.type != FieldType::StringList)
      return value;
    std::string out;
    for (const auto& s : split_list(value)) out += (out.empty() ? "" : ",") + s;
    return out;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace vgd
