#pragma once

// Reasoning environments: Game of 24 and a synthetic chain task.
//
// A PartialPath is a question plus an ordered list of steps. Its derived
// state is recomputed from those steps alone:
//   Game24 - the multiset of numbers on the table. Each number carries the
//            value the generator *claimed*, the value its expression really
//            has, and the expression over the original inputs.
//   Chain  - the depth reached and whether every move so far was the good one.

#include "vgd/common.hpp"
#include "vgd/expression.hpp"
#include "vgd/rng.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

namespace vgd {

enum class TaskKind { Game24, Chain };

inline constexpr int kTarget = 24;
inline constexpr std::size_t kDefaultMaxSteps = 10;

struct ChainParams {
  int steps = 3;           // m
  int wrong_branches = 2;  // W
  std::vector<double> good_prob;  // p_d for d = 1..m
};

struct TaskInstance {
  std::string id;
  TaskKind kind = TaskKind::Game24;
  std::vector<Rational> inputs;  // sorted ascending
  ChainParams chain;

  /// Four inputs, each >= 1. `allow_any_size` admits the 1..n-number
  /// degenerate states used by solver tests.
  static TaskInstance game24(std::string id, std::vector<Rational> inputs, bool allow_any_size = false) {
    if (!allow_any_size && inputs.size() != 4) throw InvalidInstance("Game24 needs exactly 4 inputs");
    if (inputs.empty()) throw InvalidInstance("Game24 needs at least one input");
    for (const auto& v : inputs)
      if (v < 1) throw InvalidInstance("Game24 inputs must be >= 1");
    std::sort(inputs.begin(), inputs.end());
    TaskInstance t;
    t.id = std::move(id);
    t.kind = TaskKind::Game24;
    t.inputs = std::move(inputs);
    return t;
  }

  static TaskInstance make_chain(std::string id, ChainParams params) {
    if (params.steps < 1) throw InvalidInstance("Chain needs m >= 1");
    if (params.wrong_branches < 1) throw InvalidInstance("Chain needs W >= 1");
    if (params.good_prob.size() != static_cast<std::size_t>(params.steps))
      throw InvalidInstance("Chain needs one good-step probability per depth");
    for (double p : params.good_prob)
      if (!(p > 0.0 && p <= 1.0)) throw InvalidInstance("Chain probabilities must lie in (0,1]");
    TaskInstance t;
    t.id = std::move(id);
    t.kind = TaskKind::Chain;
    t.chain = std::move(params);
    return t;
  }

  /// Question header line (first line of every canonical key).
  std::string header() const {
    std::string h;
    if (kind == TaskKind::Game24) {
      h = "Q game24";
      for (const auto& v : inputs) h += " " + format_number(v);
    } else {
      h = "Q chain m=" + std::to_string(chain.steps) + " w=" + std::to_string(chain.wrong_branches) + " p=";
      for (std::size_t i = 0; i < chain.good_prob.size(); ++i)
        h += (i ? "," : "") + format_double(chain.good_prob[i]);
    }
    return h;
  }
};

using InstancePtr = std::shared_ptr<const TaskInstance>;

/// Inverse of TaskInstance::header(). The id is set to the header text.
inline TaskInstance parse_instance_header(std::string_view line) {
  std::istringstream in{std::string(line)};
  std::string q, kind;
  in >> q >> kind;
  if (q != "Q") throw ParseError("instance header must start with 'Q': " + std::string(line));
  if (kind == "game24") {
    std::vector<Rational> inputs;
    std::string tok;
    while (in >> tok) {
      auto v = parse_number(tok);
      if (!v) throw ParseError("bad Game24 input '" + tok + "'");
      inputs.push_back(*v);
    }
    return TaskInstance::game24(std::string(line), std::move(inputs), true);
  }
  if (kind == "chain") {
    ChainParams params;
    std::string tok;
    bool seen_m = false, seen_w = false, seen_p = false;
    while (in >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos) throw ParseError("bad chain field '" + tok + "'");
      std::string key = tok.substr(0, eq), value = tok.substr(eq + 1);
      if (key == "m") {
        auto v = parse_int(value);
        if (!v) throw ParseError("bad chain m");
        params.steps = static_cast<int>(*v);
        seen_m = true;
      } else if (key == "w") {
        auto v = parse_int(value);
        if (!v) throw ParseError("bad chain w");
        params.wrong_branches = static_cast<int>(*v);
        seen_w = true;
      } else if (key == "p") {
        std::string_view rest = value;
        while (!rest.empty()) {
          auto comma = rest.find(',');
          auto v = parse_double(rest.substr(0, comma));
          if (!v) throw ParseError("bad chain probability");
          params.good_prob.push_back(*v);
          if (comma == std::string_view::npos) break;
          rest.remove_prefix(comma + 1);
        }
        seen_p = true;
      } else {
        throw ParseError("unknown chain field '" + key + "'");
      }
    }
    if (!seen_m || !seen_w || !seen_p) throw ParseError("chain header needs m, w and p");
    return TaskInstance::make_chain(std::string(line), std::move(params));
  }
  throw ParseError("unknown task kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Steps

struct Combine {
  Rational lhs;
  Rational rhs;
  Op op = Op::Add;
  Rational claimed;
  friend bool operator==(const Combine&, const Combine&) = default;
};

struct Answer {
  Expr expr;
  friend bool operator==(const Answer& a, const Answer& b) { return a.expr == b.expr; }
};

struct ChainMove {
  int token = 0;  // 0 is the good move
  friend bool operator==(const ChainMove&, const ChainMove&) = default;
};

using ReasoningStep = std::variant<Combine, Answer, ChainMove>;

/// One line of a canonical key: "13-9=4", "answer (10-4)*(13-9)", "move 0".
inline std::string step_text(const ReasoningStep& step) {
  if (auto* c = std::get_if<Combine>(&step))
    return format_number(c->lhs) + op_symbol(c->op) + format_number(c->rhs) + "=" + format_number(c->claimed);
  if (auto* a = std::get_if<Answer>(&step)) return "answer " + a->expr.text();
  return "move " + std::to_string(std::get<ChainMove>(step).token);
}

namespace detail {

// Reads a number as written by format_number starting at `pos`.
inline std::optional<Rational> read_number(std::string_view s, std::size_t& pos) {
  std::size_t start = pos;
  if (pos < s.size() && s[pos] == '(') {
    auto close = s.find(')', pos);
    if (close == std::string_view::npos) return std::nullopt;
    pos = close + 1;
    return parse_number(s.substr(start, pos - start));
  }
  if (pos < s.size() && s[pos] == '-') ++pos;
  while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
  return parse_number(s.substr(start, pos - start));
}

}  // namespace detail

inline ReasoningStep parse_step(std::string_view text) {
  text = trim(text);
  if (text.starts_with("answer ")) return Answer{Expr::parse(text.substr(7))};
  if (text.starts_with("move ")) {
    auto v = parse_int(text.substr(5));
    if (!v) throw ParseError("bad chain move '" + std::string(text) + "'");
    return ChainMove{static_cast<int>(*v)};
  }
  std::size_t pos = 0;
  auto lhs = detail::read_number(text, pos);
  if (!lhs || pos >= text.size()) throw ParseError("bad step '" + std::string(text) + "'");
  auto op = op_from_char(text[pos++]);
  auto rhs = detail::read_number(text, pos);
  if (!op || !rhs || pos >= text.size() || text[pos] != '=') throw ParseError("bad step '" + std::string(text) + "'");
  ++pos;
  auto claimed = detail::read_number(text, pos);
  if (!claimed || pos != text.size()) throw ParseError("bad step '" + std::string(text) + "'");
  return Combine{*lhs, *rhs, *op, *claimed};
}

// ---------------------------------------------------------------------------
// Derived state

struct Item {
  Rational claimed;
  std::optional<Rational> truth;  // nullopt after a division by zero in the true history
  Expr expr;
};

inline bool item_less(const Item& a, const Item& b) {
  if (a.claimed != b.claimed) return a.claimed < b.claimed;
  if (a.truth != b.truth) return a.truth < b.truth;  // nullopt sorts first
  return a.expr.text() < b.expr.text();
}

struct Game24State {
  std::vector<Item> items;  // kept sorted by item_less
  bool answered = false;
  bool dead = false;  // the generator used a number that was not on the table

  std::vector<Rational> claimed_values() const {
    std::vector<Rational> v;
    v.reserve(items.size());
    for (const auto& it : items) v.push_back(it.claimed);
    return v;
  }
};

struct ChainState {
  int depth = 0;
  bool alive = true;
};

class PartialPath {
 public:
  explicit PartialPath(InstancePtr instance) : instance_(std::move(instance)) {
    if (instance_->kind == TaskKind::Game24) {
      Game24State s;
      for (const auto& v : instance_->inputs) s.items.push_back(Item{v, v, Expr::leaf(v)});
      std::sort(s.items.begin(), s.items.end(), item_less);
      state_ = std::move(s);
    } else {
      state_ = ChainState{};
    }
  }

  const TaskInstance& instance() const { return *instance_; }
  const InstancePtr& instance_ptr() const { return instance_; }
  const std::vector<ReasoningStep>& steps() const { return steps_; }
  std::size_t size() const { return steps_.size(); }

  const Game24State& game24() const { return std::get<Game24State>(state_); }
  const ChainState& chain() const { return std::get<ChainState>(state_); }

  bool truncated() const { return truncated_; }

  /// Complete when answered (Game24), when the chain reached depth m, when the
  /// generator broke the table, or when a rollout hit its step cap.
  bool complete() const {
    if (truncated_) return true;
    if (auto* g = std::get_if<Game24State>(&state_)) return g->answered || g->dead;
    return chain().depth >= instance_->chain.steps;
  }

  /// Marks an incomplete path as finished without an answer.
  PartialPath truncate() const {
    PartialPath p = *this;
    if (!p.complete()) p.truncated_ = true;
    return p;
  }

  friend PartialPath apply_step(const PartialPath& path, const ReasoningStep& step);
  friend PartialPath apply_generated_step(const PartialPath& path, const ReasoningStep& step);

 private:
  enum class Mode { Strict, Lenient };
  PartialPath advance(const ReasoningStep& step, Mode mode) const;

  InstancePtr instance_;
  std::vector<ReasoningStep> steps_;
  std::variant<Game24State, ChainState> state_;
  bool truncated_ = false;
};

namespace detail {

inline std::ptrdiff_t find_item(const std::vector<Item>& items, const Rational& v, std::ptrdiff_t skip = -1) {
  for (std::size_t i = 0; i < items.size(); ++i)
    if (static_cast<std::ptrdiff_t>(i) != skip && items[i].claimed == v) return static_cast<std::ptrdiff_t>(i);
  return -1;
}

}  // namespace detail

inline PartialPath PartialPath::advance(const ReasoningStep& step, Mode mode) const {
  if (complete()) throw CompletePath("cannot extend a complete path");
  PartialPath next = *this;
  next.steps_.push_back(step);

  if (instance_->kind == TaskKind::Chain) {
    auto* move = std::get_if<ChainMove>(&step);
    if (!move) throw IllegalStep("chain paths only accept chain moves");
    if (move->token < 0 || move->token > instance_->chain.wrong_branches)
      throw IllegalStep("chain move index out of range: " + std::to_string(move->token));
    auto& s = std::get<ChainState>(next.state_);
    s.depth += 1;
    if (move->token != 0) s.alive = false;
    return next;
  }

  auto& s = std::get<Game24State>(next.state_);
  if (std::holds_alternative<Answer>(step)) {
    if (s.items.size() != 1) throw IllegalStep("answer requires exactly one remaining number");
    s.answered = true;
    return next;
  }
  auto* c = std::get_if<Combine>(&step);
  if (!c) throw IllegalStep("Game24 paths do not accept chain moves");
  if (s.items.size() < 2) throw IllegalStep("combine requires two remaining numbers");

  auto i = detail::find_item(s.items, c->lhs);
  auto j = i < 0 ? -1 : detail::find_item(s.items, c->rhs, i);
  const bool div_zero = c->op == Op::Div && c->rhs == Rational(0);
  if (i < 0 || j < 0 || div_zero) {
    if (mode == Mode::Strict) {
      if (div_zero) throw IllegalStep("division by zero in " + step_text(step));
      throw IllegalStep("operand not available for " + step_text(step));
    }
    s.dead = true;
    return next;
  }

  const Item& a = s.items[static_cast<std::size_t>(i)];
  const Item& b = s.items[static_cast<std::size_t>(j)];
  Item merged{c->claimed, std::nullopt, Expr::combine(a.expr, c->op, b.expr)};
  if (a.truth && b.truth) merged.truth = apply_op(c->op, *a.truth, *b.truth);

  std::vector<Item> rest;
  rest.reserve(s.items.size() - 1);
  for (std::size_t k = 0; k < s.items.size(); ++k)
    if (static_cast<std::ptrdiff_t>(k) != i && static_cast<std::ptrdiff_t>(k) != j) rest.push_back(s.items[k]);
  rest.insert(std::upper_bound(rest.begin(), rest.end(), merged, item_less), std::move(merged));
  s.items = std::move(rest);
  return next;
}

/// Appends a step, enforcing the environment rules. Wrong claimed results are
/// accepted and replace the operands as claimed.
/// Throws CompletePath or IllegalStep.
inline PartialPath apply_step(const PartialPath& path, const ReasoningStep& step) {
  return path.advance(step, PartialPath::Mode::Strict);
}

/// Appends a step emitted by a generator. A combine that uses a number not on
/// the table (or divides by zero) ends the path without an answer instead of
/// throwing.
inline PartialPath apply_generated_step(const PartialPath& path, const ReasoningStep& step) {
  return path.advance(step, PartialPath::Mode::Lenient);
}

/// Re-derives a path from its steps.
inline PartialPath replay(const InstancePtr& instance, const std::vector<ReasoningStep>& steps) {
  PartialPath p(instance);
  for (const auto& s : steps) p = apply_generated_step(p, s);
  return p;
}

// ---------------------------------------------------------------------------
// Solvability

namespace detail {

inline bool solvable_uncached(std::vector<Rational> values);

class SolvableMemo {
 public:
  static SolvableMemo& instance() {
    static SolvableMemo memo;
    return memo;
  }

  bool lookup(const std::vector<Rational>& sorted) {
    std::string key;
    for (const auto& v : sorted) key += format_number(v) + ",";
    {
      std::shared_lock lock(mutex_);
      auto it = table_.find(key);
      if (it != table_.end()) return it->second;
    }
    bool result = solvable_uncached(sorted);
    std::unique_lock lock(mutex_);
    table_.emplace(std::move(key), result);
    return result;
  }

 private:
  std::shared_mutex mutex_;
  std::unordered_map<std::string, bool> table_;
};

}  // namespace detail

/// True iff some sequence of true-arithmetic combines turns `state` into
/// exactly 24. Memoized on the sorted multiset.
inline bool solvable(std::vector<Rational> state) {
  if (state.empty()) return false;
  std::sort(state.begin(), state.end());
  if (state.size() == 1) return state[0] == Rational(kTarget);
  return detail::SolvableMemo::instance().lookup(state);
}

namespace detail {

inline bool solvable_uncached(std::vector<Rational> values) {
  const std::size_t n = values.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      std::vector<Rational> rest;
      for (std::size_t k = 0; k < n; ++k)
        if (k != i && k != j) rest.push_back(values[k]);
      for (Op op : kAllOps) {
        auto r = apply_op(op, values[i], values[j]);
        if (!r) continue;
        auto next = rest;
        next.push_back(*r);
        if (solvable(std::move(next))) return true;
      }
    }
  }
  return false;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Legal steps and verification

/// Game24 with >= 2 numbers: every ordered operand pair x operator with the
/// true result, ordered by (lhs, rhs, operator) and collapsed by value.
/// Game24 with 1 number: the single answer step. Chain: moves 0..W.
/// Throws CompletePath.
inline std::vector<ReasoningStep> legal_steps(const PartialPath& path) {
  if (path.complete()) throw CompletePath("no legal steps from a complete path");
  std::vector<ReasoningStep> out;
  if (path.instance().kind == TaskKind::Chain) {
    for (int k = 0; k <= path.instance().chain.wrong_branches; ++k) out.push_back(ChainMove{k});
    return out;
  }
  const auto& items = path.game24().items;
  if (items.size() == 1) {
    out.push_back(Answer{items.front().expr});
    return out;
  }
  std::vector<Rational> distinct;
  for (const auto& it : items)
    if (distinct.empty() || distinct.back() != it.claimed) distinct.push_back(it.claimed);
  auto count = [&](const Rational& v) {
    return std::count_if(items.begin(), items.end(), [&](const Item& it) { return it.claimed == v; });
  };
  for (const auto& a : distinct) {
    for (const auto& b : distinct) {
      if (a == b && count(a) < 2) continue;
      for (Op op : kAllOps) {
        auto r = apply_op(op, a, b);
        if (!r) continue;
        out.push_back(Combine{a, b, op, *r});
      }
    }
  }
  return out;
}

struct AnswerVerdict {
  bool answered = false;
  bool correct = false;
  friend bool operator==(const AnswerVerdict&, const AnswerVerdict&) = default;
};

/// Game24: the answer expression must evaluate exactly to 24 and use every
/// original input exactly once. Intermediate claims are not consulted.
/// Chain: correct iff the path is still alive at depth m.
/// Throws IncompletePath.
inline AnswerVerdict check_answer(const TaskInstance& instance, const PartialPath& path) {
  if (!path.complete()) throw IncompletePath("check_answer needs a complete path");
  if (path.truncated()) return {};
  if (instance.kind == TaskKind::Chain) {
    const auto& s = path.chain();
    return {true, s.alive && s.depth == instance.chain.steps};
  }
  const auto& s = path.game24();
  if (!s.answered) return {};
  const auto& expr = std::get<Answer>(path.steps().back()).expr;
  auto value = expr.evaluate();
  auto leaves = expr.leaves();
  std::sort(leaves.begin(), leaves.end());
  return {true, value && *value == Rational(kTarget) && leaves == instance.inputs};
}

inline AnswerVerdict check_answer(const PartialPath& path) { return check_answer(path.instance(), path); }

/// Every distinct correct solution path reachable by true-arithmetic combines.
inline std::vector<PartialPath> solve_exhaustive(const TaskInstance& instance) {
  if (instance.kind != TaskKind::Game24) throw InvalidInstance("solve_exhaustive needs a Game24 instance");
  auto ptr = std::make_shared<const TaskInstance>(instance);
  std::vector<PartialPath> found;
  std::vector<PartialPath> stack{PartialPath(ptr)};
  while (!stack.empty()) {
    PartialPath p = std::move(stack.back());
    stack.pop_back();
    if (p.complete()) {
      if (check_answer(*ptr, p).correct) found.push_back(std::move(p));
      continue;
    }
    // Prune subtrees whose table can no longer reach 24.
    if (p.game24().items.size() > 1 && !solvable(p.game24().claimed_values())) continue;
    auto steps = legal_steps(p);
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) stack.push_back(apply_step(p, *it));
  }
  return found;
}

// ---------------------------------------------------------------------------
// Process labels

struct StepLabel {
  int prm = 0;    // logically valid step
  int prm_o = 0;  // valid and still on a feasible correct solution path
  friend bool operator==(const StepLabel&, const StepLabel&) = default;
};

/// Labels for every step of `path`, computed left to right.
inline std::vector<StepLabel> label_path(const PartialPath& path) {
  std::vector<StepLabel> labels;
  labels.reserve(path.size());
  PartialPath cur(path.instance_ptr());
  bool prefix_ok = true;
  for (const auto& step : path.steps()) {
    StepLabel label;
    PartialPath next = apply_generated_step(cur, step);
    if (auto* move = std::get_if<ChainMove>(&step)) {
      label.prm = move->token == 0;
      label.prm_o = label.prm && prefix_ok;
    } else if (std::holds_alternative<Answer>(step)) {
      const int correct = check_answer(next).correct;
      label = {correct, correct};
    } else {
      const auto& c = std::get<Combine>(step);
      const auto& items = cur.game24().items;
      auto i = detail::find_item(items, c.lhs);
      auto j = i < 0 ? -1 : detail::find_item(items, c.rhs, i);
      auto truth = apply_op(c.op, c.lhs, c.rhs);
      label.prm = i >= 0 && j >= 0 && truth && *truth == c.claimed;
      label.prm_o = label.prm && prefix_ok && !next.game24().dead && solvable(next.game24().claimed_values());
    }
    prefix_ok = prefix_ok && label.prm_o;
    labels.push_back(label);
    cur = std::move(next);
  }
  return labels;
}

/// Label of `step` taken after `path`.
inline StepLabel label_step(const TaskInstance&, const PartialPath& path, const ReasoningStep& step) {
  return label_path(apply_generated_step(path, step)).back();
}

// ---------------------------------------------------------------------------
// Canonical keys

enum class KeyMode { Prefix, State };

/// Prefix mode: the question header, then one line per step, every line
/// terminated by '\n'. State mode: an abstraction of the derived state that
/// drops the question; Game24 lists each number as "claimed|truth", so it is
/// Markovian for both the generator and the answer check.
inline std::string canonical_key(const PartialPath& path, KeyMode mode = KeyMode::Prefix) {
  std::string key;
  if (mode == KeyMode::Prefix) {
    key = path.instance().header();
    key += '\n';
    for (const auto& s : path.steps()) {
      key += step_text(s);
      key += '\n';
    }
    if (path.truncated()) key += "#truncated\n";
    return key;
  }
  if (path.instance().kind == TaskKind::Chain) {
    const auto& s = path.chain();
    key = "S " + path.instance().header().substr(2) + "\nd=" + std::to_string(s.depth) +
          " alive=" + std::to_string(s.alive) + "\n";
  } else {
    const auto& s = path.game24();
    key = "S game24\n";
    for (const auto& it : s.items) {
      key += format_number(it.claimed);
      key += '|';
      key += it.truth ? format_number(*it.truth) : std::string("?");
      key += '\n';
    }
    if (s.answered) key += "#answered\n";
    if (s.dead) key += "#dead\n";
  }
  if (path.truncated()) key += "#truncated\n";
  return key;
}

inline std::string canonical_key(const TaskInstance&, const PartialPath& path, KeyMode mode = KeyMode::Prefix) {
  return canonical_key(path, mode);
}

/// Keys of S^(1:t) for t = 1..m.
inline std::vector<std::string> prefix_keys(const PartialPath& path, KeyMode mode) {
  std::vector<std::string> keys;
  keys.reserve(path.size());
  PartialPath cur(path.instance_ptr());
  for (std::size_t t = 0; t < path.size(); ++t) {
    cur = apply_generated_step(cur, path.steps()[t]);
    if (t + 1 == path.size() && path.truncated()) cur = cur.truncate();
    keys.push_back(canonical_key(cur, mode));
  }
  return keys;
}

// ---------------------------------------------------------------------------
// Puzzle files

/// One puzzle per line, four whitespace-separated integers. Blank lines and
/// lines starting with '#' are skipped. Throws ParseError.
inline std::vector<TaskInstance> read_puzzles(std::istream& in) {
  std::vector<TaskInstance> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    std::istringstream fields{std::string(view)};
    std::vector<Rational> inputs;
    std::string tok;
    while (fields >> tok) {
      auto v = parse_int(tok);
      if (!v) throw ParseError("line " + std::to_string(lineno) + ": '" + tok + "' is not an integer");
      inputs.emplace_back(*v);
    }
    if (inputs.size() != 4) throw ParseError("line " + std::to_string(lineno) + ": expected 4 numbers");
    char id[32];
    std::snprintf(id, sizeof(id), "p%04zu", out.size());
    try {
      out.push_back(TaskInstance::game24(id, std::move(inputs)));
    } catch (const InvalidInstance& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<TaskInstance> read_puzzle_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open puzzle file " + path);
  return read_puzzles(in);
}

inline void write_puzzles(std::ostream& out, const std::vector<TaskInstance>& puzzles) {
  for (const auto& p : puzzles) {
    for (std::size_t i = 0; i < p.inputs.size(); ++i) out << (i ? " " : "") << format_number(p.inputs[i]);
    out << '\n';
  }
}

/// Distinct random puzzles with entries in 1..max_value.
inline std::vector<TaskInstance> generate_puzzles(std::size_t count, std::uint64_t seed, int max_value = 13,
                                                  bool solvable_only = true) {
  RngStream rng(seed, "puzzles");
  std::vector<TaskInstance> out;
  std::unordered_set<std::string> seen;
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (++attempts > 1000000) throw InvalidConfig("cannot generate that many distinct puzzles");
    std::vector<Rational> v;
    for (int i = 0; i < 4; ++i) v.emplace_back(rng.uniform_int(1, max_value));
    if (solvable_only && !solvable(v)) continue;
    char id[32];
    std::snprintf(id, sizeof(id), "p%04zu", out.size());
    auto inst = TaskInstance::game24(id, std::move(v));
    if (!seen.insert(inst.header()).second) continue;
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace vgd
