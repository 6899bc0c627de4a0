#include "vgd/task_env.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace vgd;

namespace {

InstancePtr puzzle(std::vector<int> xs) {
  std::vector<Rational> v(xs.begin(), xs.end());
  return std::make_shared<const TaskInstance>(TaskInstance::game24("t", v, xs.size() != 4));
}

InstancePtr chain(int m = 3, int w = 2, double p = 0.8) {
  return std::make_shared<const TaskInstance>(TaskInstance::make_chain("c", {m, w, std::vector<double>(m, p)}));
}

Combine comb(int a, char op, int b, int claimed) { return Combine{a, b, *op_from_char(op), claimed}; }

PartialPath run(const InstancePtr& inst, const std::vector<std::string>& steps) {
  PartialPath p(inst);
  for (const auto& s : steps) p = apply_step(p, parse_step(s));
  return p;
}

bool contains(const std::vector<ReasoningStep>& steps, const ReasoningStep& s) {
  return std::find(steps.begin(), steps.end(), s) != steps.end();
}

}  // namespace

TEST(TaskInstance, ValidatesShape) {
  EXPECT_THROW(TaskInstance::game24("x", {1, 2, 3}), InvalidInstance);
  EXPECT_THROW(TaskInstance::game24("x", {0, 2, 3, 4}), InvalidInstance);
  EXPECT_THROW(TaskInstance::make_chain("c", {0, 2, {}}), InvalidInstance);
  EXPECT_THROW(TaskInstance::make_chain("c", {2, 0, {0.5, 0.5}}), InvalidInstance);
  EXPECT_THROW(TaskInstance::make_chain("c", {2, 1, {0.5, 0.0}}), InvalidInstance);
  EXPECT_THROW(TaskInstance::make_chain("c", {2, 1, {0.5}}), InvalidInstance);
  auto t = TaskInstance::game24("x", {13, 4, 10, 9});
  EXPECT_EQ(t.header(), "Q game24 4 9 10 13");
}

TEST(TaskInstance, HeaderRoundTrip) {
  auto g = parse_instance_header("Q game24 4 9 10 13");
  EXPECT_EQ(g.header(), "Q game24 4 9 10 13");
  auto c = parse_instance_header("Q chain m=3 w=2 p=0.8,0.7,0.9");
  EXPECT_EQ(c.chain.steps, 3);
  EXPECT_EQ(c.chain.good_prob[1], 0.7);
  EXPECT_EQ(c.header(), "Q chain m=3 w=2 p=0.8,0.7,0.9");
  EXPECT_THROW(parse_instance_header("game24 1 2 3 4"), ParseError);
  EXPECT_THROW(parse_instance_header("Q chain m=3"), ParseError);
}

TEST(Steps, TextRoundTrip) {
  for (const char* s : {"13-9=4", "4*6=24", "(3/2)*16=24", "-6*-4=24", "answer (10-4)*(13-9)", "move 2",
                        "8/(8/3)=3"}) {
    EXPECT_EQ(step_text(parse_step(s)), s);
  }
  EXPECT_THROW(parse_step("13-9"), ParseError);
  EXPECT_THROW(parse_step("13^9=4"), ParseError);
  EXPECT_THROW(parse_step("move x"), ParseError);
}

TEST(LegalSteps, ContainsTrueCombines) {
  PartialPath root(puzzle({4, 9, 10, 13}));
  auto steps = legal_steps(root);
  EXPECT_TRUE(contains(steps, comb(13, '-', 9, 4)));
  EXPECT_TRUE(contains(steps, comb(10, '-', 4, 6)));
  EXPECT_FALSE(contains(steps, comb(13, '-', 9, 5)));
  // 4 distinct values: 12 ordered pairs x 4 operators, no zero divisors.
  EXPECT_EQ(steps.size(), 48u);
  for (const auto& s : steps) {
    const auto& c = std::get<Combine>(s);
    EXPECT_EQ(*apply_op(c.op, c.lhs, c.rhs), c.claimed);
  }
}

TEST(LegalSteps, CollapsesEqualValuesAndSkipsZeroDivisors) {
  PartialPath p = run(puzzle({4, 4, 4, 4}), {"4-4=0"});
  // values {0, 4, 4}: pairs (0,4),(4,0),(4,4) x 4 ops minus 4/0 and 4/... only x/0 excluded
  auto steps = legal_steps(p);
  EXPECT_EQ(steps.size(), 11u);
  EXPECT_FALSE(contains(steps, Combine{4, 0, Op::Div, 0}));
}

TEST(LegalSteps, ForcedAnswerAndChainMoves) {
  PartialPath p = run(puzzle({4, 9, 10, 13}), {"13-9=4", "10-4=6", "6*4=24"});
  auto steps = legal_steps(p);
  ASSERT_EQ(steps.size(), 1u);
  const auto text = step_text(steps[0]);
  ASSERT_EQ(text.rfind("answer ", 0), 0u);
  EXPECT_TRUE(oracle::evaluates_to(text.substr(7), oracle::Q(24))) << text;

  PartialPath c = apply_step(PartialPath(chain()), ChainMove{0});
  auto moves = legal_steps(c);
  ASSERT_EQ(moves.size(), 3u);
  for (int k = 0; k < 3; ++k) EXPECT_EQ(std::get<ChainMove>(moves[k]).token, k);
}

TEST(ApplyStep, UpdatesStateAndPropagatesWrongClaims) {
  auto inst = puzzle({4, 9, 10, 13});
  auto ok = apply_step(PartialPath(inst), comb(13, '-', 9, 4));
  std::vector<Rational> expect{4, 4, 10};
  EXPECT_EQ(ok.game24().claimed_values(), expect);

  auto wrong = apply_step(PartialPath(inst), comb(13, '-', 9, 5));
  std::vector<Rational> expect_wrong{4, 5, 10};
  EXPECT_EQ(wrong.game24().claimed_values(), expect_wrong);

  EXPECT_THROW(apply_step(PartialPath(inst), comb(7, '+', 9, 16)), IllegalStep);
  EXPECT_THROW(apply_step(PartialPath(inst), comb(9, '+', 9, 18)), IllegalStep);
  auto zero = run(puzzle({3, 3, 5, 8}), {"3-3=0"});
  EXPECT_THROW(apply_step(zero, Combine{5, 0, Op::Div, 1}), IllegalStep);
  EXPECT_THROW(apply_step(ok, Answer{Expr::parse("1+1")}), IllegalStep);
  EXPECT_THROW(apply_step(PartialPath(chain()), ChainMove{3}), IllegalStep);
  EXPECT_THROW(apply_step(PartialPath(inst), ChainMove{0}), IllegalStep);
}

TEST(ApplyStep, CompletePathsRejectSteps) {
  auto done = run(puzzle({4, 9, 10, 13}), {"13-9=4", "10-4=6", "6*4=24", "answer (10-4)*(13-9)"});
  EXPECT_TRUE(done.complete());
  EXPECT_THROW(apply_step(done, comb(1, '+', 1, 2)), CompletePath);
  EXPECT_THROW(legal_steps(done), CompletePath);
}

TEST(ApplyStep, GeneratedStepWithMissingOperandKillsPath) {
  auto inst = puzzle({4, 9, 10, 13});
  auto dead = apply_generated_step(PartialPath(inst), comb(7, '+', 9, 16));
  EXPECT_TRUE(dead.complete());
  EXPECT_TRUE(dead.game24().dead);
  EXPECT_EQ(check_answer(dead), (AnswerVerdict{false, false}));
}

TEST(ApplyStep, ReplayReproducesDerivedState) {
  auto inst = puzzle({1, 5, 5, 5});
  auto p = run(inst, {"1/5=(1/5)", "5-(1/5)=(24/5)", "(24/5)*5=24"});
  auto q = replay(inst, p.steps());
  EXPECT_EQ(canonical_key(p, KeyMode::State), canonical_key(q, KeyMode::State));
  EXPECT_EQ(canonical_key(p), canonical_key(q));
  EXPECT_EQ(step_text(legal_steps(p).front()), "answer (5-(1/5))*5");
}

TEST(CheckAnswer, ExactRulesAndShortcuts) {
  auto inst = puzzle({4, 9, 10, 13});
  auto correct = run(inst, {"13-9=4", "10-4=6", "6*4=24", "answer (10-4)*(13-9)"});
  EXPECT_EQ(check_answer(correct), (AnswerVerdict{true, true}));

  // 10 unused: value 16, and the leaves do not match the inputs.
  PartialPath partial = run(inst, {"13-9=4", "10-4=6", "6*4=24"});
  auto bogus = apply_step(partial, Answer{Expr::parse("(13-9)*4")});
  EXPECT_EQ(check_answer(bogus), (AnswerVerdict{true, false}));

  // Wrong intermediate claim, but the history-composed answer is exact.
  auto shortcut = run(inst, {"13-9=5", "10-4=6", "6*5=30"});
  auto answer = legal_steps(shortcut).front();
  EXPECT_EQ(step_text(answer), "answer (10-4)*(13-9)");
  EXPECT_EQ(check_answer(apply_step(shortcut, answer)), (AnswerVerdict{true, true}));

  EXPECT_THROW(check_answer(partial), IncompletePath);
  EXPECT_EQ(check_answer(partial.truncate()), (AnswerVerdict{false, false}));
}

TEST(CheckAnswer, FractionalSolutionAccepted) {
  auto inst = puzzle({3, 3, 8, 8});
  auto p = run(inst, {"8/3=(8/3)", "3-(8/3)=(1/3)", "8/(1/3)=24"});
  p = apply_step(p, legal_steps(p).front());
  EXPECT_EQ(check_answer(p), (AnswerVerdict{true, true}));
  EXPECT_TRUE(oracle::evaluates_to("8/(3-8/3)", oracle::Q(24)));
}

TEST(CheckAnswer, ChainCorrectIffAllGoodMoves) {
  auto inst = chain(3, 2);
  for (int a = 0; a <= 2; ++a)
    for (int b = 0; b <= 2; ++b)
      for (int c = 0; c <= 2; ++c) {
        PartialPath p(inst);
        for (int t : {a, b, c}) p = apply_step(p, ChainMove{t});
        ASSERT_TRUE(p.complete());
        EXPECT_EQ(check_answer(p).correct, a == 0 && b == 0 && c == 0);
      }
}

TEST(Solvable, SmallStates) {
  EXPECT_TRUE(solvable({Rational(6), Rational(4)}));
  EXPECT_FALSE(solvable({Rational(10), Rational(13), Rational(13)}));
  EXPECT_TRUE(solvable({Rational(24)}));
  EXPECT_FALSE(solvable({Rational(23)}));
  EXPECT_TRUE(solvable({Rational(3), Rational(3), Rational(8), Rational(8)}));
  EXPECT_FALSE(oracle::brute_force_solvable(std::vector<int>{10, 13, 13}));
}

TEST(Solvable, AgreesWithSubsetSplitOracleOnRandomTables) {
  RngStream rng(11, "solvable");
  for (int i = 0; i < 300; ++i) {
    std::vector<Rational> v;
    const int n = static_cast<int>(rng.uniform_int(1, 4));
    for (int k = 0; k < n; ++k) v.emplace_back(rng.uniform_int(1, 13));
    EXPECT_EQ(solvable(v), oracle::brute_force_solvable(v));
  }
}

TEST(SolveExhaustive, KnownPuzzles) {
  auto sols = solve_exhaustive(*puzzle({4, 9, 10, 13}));
  ASSERT_FALSE(sols.empty());
  bool found = false;
  for (const auto& p : sols) {
    EXPECT_TRUE(check_answer(p).correct);
    const auto& text = std::get<Answer>(p.steps().back()).expr.text();
    EXPECT_TRUE(oracle::evaluates_to(text, oracle::Q(24))) << text;
    found = found || text == "(10-4)*(13-9)";
  }
  EXPECT_TRUE(found);
  EXPECT_TRUE(solve_exhaustive(*puzzle({1, 1, 1, 1})).empty());

  auto trivial = solve_exhaustive(TaskInstance::game24("d", {24}, true));
  ASSERT_EQ(trivial.size(), 1u);
  EXPECT_EQ(step_text(trivial[0].steps()[0]), "answer 24");
}

TEST(SolveExhaustive, PathsAreDistinct) {
  auto sols = solve_exhaustive(*puzzle({4, 9, 10, 13}));
  std::set<std::string> keys;
  for (const auto& p : sols) keys.insert(canonical_key(p));
  EXPECT_EQ(keys.size(), sols.size());
}

TEST(Labels, RuleBasedExamples) {
  auto inst = puzzle({4, 9, 10, 13});
  PartialPath root(inst);
  EXPECT_EQ(label_step(*inst, root, comb(4, '+', 9, 13)), (StepLabel{1, 0}));
  EXPECT_EQ(label_step(*inst, root, comb(13, '-', 9, 5)), (StepLabel{0, 0}));
  EXPECT_EQ(label_step(*inst, root, comb(13, '-', 9, 4)), (StepLabel{1, 1}));
  EXPECT_EQ(label_step(*inst, root, comb(7, '+', 9, 16)), (StepLabel{0, 0}));
}

TEST(Labels, PrefixFailurePropagatesToPrmO) {
  auto inst = puzzle({4, 9, 10, 13});
  // 4+9=13 dooms the table; later valid steps keep prm=1 but prm_o=0.
  auto p = run(inst, {"4+9=13", "13-13=0", "10*0=0"});
  auto labels = label_path(p);
  ASSERT_EQ(labels.size(), 3u);
  for (const auto& l : labels) {
    EXPECT_EQ(l.prm, 1);
    EXPECT_EQ(l.prm_o, 0);
  }
  auto good = run(inst, {"13-9=4", "10-4=6", "6*4=24", "answer (10-4)*(13-9)"});
  for (const auto& l : label_path(good)) EXPECT_EQ(l, (StepLabel{1, 1}));
}

TEST(Labels, ChainMoves) {
  auto inst = chain(3, 2);
  PartialPath p(inst);
  for (int t : {0, 1, 0}) p = apply_step(p, ChainMove{t});
  auto labels = label_path(p);
  EXPECT_EQ(labels[0], (StepLabel{1, 1}));
  EXPECT_EQ(labels[1], (StepLabel{0, 0}));
  EXPECT_EQ(labels[2], (StepLabel{1, 0}));
}

TEST(CanonicalKey, PrefixFormatIsExact) {
  auto inst = puzzle({4, 9, 10, 13});
  EXPECT_EQ(canonical_key(PartialPath(inst)), "Q game24 4 9 10 13\n");
  auto p = run(inst, {"13-9=4", "10-4=6"});
  EXPECT_EQ(canonical_key(p), "Q game24 4 9 10 13\n13-9=4\n10-4=6\n");
  EXPECT_EQ(canonical_key(p.truncate()), "Q game24 4 9 10 13\n13-9=4\n10-4=6\n#truncated\n");
  auto swapped = run(inst, {"10-4=6", "13-9=4"});
  EXPECT_NE(canonical_key(p), canonical_key(swapped));
  EXPECT_EQ(canonical_key(p), canonical_key(run(inst, {"13-9=4", "10-4=6"})));
}

TEST(CanonicalKey, StateFormatIsExact) {
  auto inst = puzzle({4, 9, 10, 13});
  auto p = run(inst, {"13-9=5"});
  EXPECT_EQ(canonical_key(p, KeyMode::State), "S game24\n4|4\n5|4\n10|10\n");
  auto swapped = run(inst, {"10-4=6", "13-9=4"});
  auto straight = run(inst, {"13-9=4", "10-4=6"});
  EXPECT_EQ(canonical_key(swapped, KeyMode::State), canonical_key(straight, KeyMode::State));

  auto c = apply_step(PartialPath(chain(3, 2, 0.8)), ChainMove{1});
  EXPECT_EQ(canonical_key(c, KeyMode::State), "S chain m=3 w=2 p=0.8,0.8,0.8\nd=1 alive=0\n");
}

TEST(CanonicalKey, PrefixKeysListEveryPrefix) {
  auto inst = puzzle({4, 9, 10, 13});
  auto p = run(inst, {"13-9=4", "10-4=6"});
  auto keys = prefix_keys(p, KeyMode::Prefix);
  ASSERT_EQ(keys.size(), 2u);
  EXPECT_EQ(keys[0], "Q game24 4 9 10 13\n13-9=4\n");
  EXPECT_EQ(keys[1], canonical_key(p));
  auto t = prefix_keys(p.truncate(), KeyMode::Prefix);
  EXPECT_EQ(t.back(), canonical_key(p.truncate()));
}

TEST(PuzzleFiles, ReadWriteAndErrors) {
  std::istringstream in("# comment\n4 9 10 13\n\n1 1 1 1\n");
  auto ps = read_puzzles(in);
  ASSERT_EQ(ps.size(), 2u);
  EXPECT_EQ(ps[0].id, "p0000");
  std::ostringstream out;
  write_puzzles(out, ps);
  EXPECT_EQ(out.str(), "4 9 10 13\n1 1 1 1\n");
  std::istringstream bad1("4 9 10\n");
  EXPECT_THROW(read_puzzles(bad1), ParseError);
  std::istringstream bad2("4 9 x 13\n");
  EXPECT_THROW(read_puzzles(bad2), ParseError);
  std::istringstream bad3("4 9 0 13\n");
  EXPECT_THROW(read_puzzles(bad3), ParseError);
  EXPECT_THROW(read_puzzle_file("/nonexistent/puzzles.txt"), IoError);
}

TEST(PuzzleFiles, GeneratorIsSeededDistinctAndSolvable) {
  auto a = generate_puzzles(40, 3);
  auto b = generate_puzzles(40, 3);
  ASSERT_EQ(a.size(), 40u);
  std::set<std::string> headers;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].header(), b[i].header());
    headers.insert(a[i].header());
    std::vector<int> xs;
    for (const auto& v : a[i].inputs) {
      EXPECT_GE(v, 1);
      EXPECT_LE(v, 13);
      xs.push_back(static_cast<int>(v.numerator()));
    }
    EXPECT_TRUE(oracle::brute_force_solvable(xs));
  }
  EXPECT_EQ(headers.size(), 40u);
  EXPECT_NE(generate_puzzles(5, 4)[0].header() + generate_puzzles(5, 4)[1].header(),
            a[0].header() + a[1].header());
}
