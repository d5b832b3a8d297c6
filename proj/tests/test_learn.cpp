// Copyright 2026 The seqdfa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace seqdfa {
namespace {

using testing::encode;

AssignmentProgram make_program(const std::vector<BinaryTrace>& data, const Alphabet& a,
                               std::size_t q_max, ProgramWeights w,
                               Weighting weighting = Weighting::raw) {
  return build_program(build_prefix_tree(data, weighting, a), StateLayout::standard(q_max), w);
}

SolveResult solve_quick(const AssignmentProgram& p, unsigned threads = 1) {
  SolveOptions o;
  o.time_limit = 60;
  o.threads = threads;
  return solve(p, o);
}

struct Worked : ::testing::Test {
  Alphabet a = testing::letters(2);
  std::vector<BinaryTrace> data{{encode(a, {"b"}), true},
                                {encode(a, {"a", "a"}), true},
                                {encode(a, {"a", "b"}), false}};
};

TEST_F(Worked, VariableCounts) {
  Alphabet ab = testing::letters(2);
  std::vector<BinaryTrace> five{{encode(ab, {"a", "a"}), true}, {encode(ab, {"b", "b"}), false}};
  auto p = make_program(five, ab, 3, {});
  ASSERT_EQ(p.n_nodes(), 5u);
  EXPECT_EQ(p.n_assignment_vars(), 15u);
  EXPECT_EQ(p.n_transition_vars(), 18u);
}

TEST_F(Worked, LayoutRules) {
  EXPECT_THROW(StateLayout::standard(2), UsageError);
  auto l = StateLayout::standard(7);
  EXPECT_FALSE(l.is_accepting(0));
  EXPECT_TRUE(l.is_accepting(1));
  EXPECT_FALSE(l.is_accepting(2));
  EXPECT_TRUE(l.is_accepting(3));
  EXPECT_TRUE(l.is_accepting(5));
  EXPECT_FALSE(l.is_accepting(6));
  EXPECT_TRUE(l.is_absorbing(5) && l.is_absorbing(6) && !l.is_absorbing(4));
  std::vector<StateId> bad{0};
  EXPECT_THROW(StateLayout(4, bad), UsageError);
}

// With free regularizers each node pays its cheaper label, except the root,
// which is pinned to the non-accepting initial state. Here the bound is met.
TEST_F(Worked, OptimumClassifiesEveryTrace) {
  auto p = make_program(data, a, 4, {0, 0, 1, 1});
  auto r = solve_quick(p);
  ASSERT_EQ(r.status, SolveStatus::optimal);
  double bound = p.tree().node(0).w_pos;
  for (std::size_t n = 1; n < p.n_nodes(); ++n)
    bound += std::min(p.tree().node(n).w_pos, p.tree().node(n).w_neg);
  EXPECT_NEAR(r.objective, bound, 1e-9);
  EXPECT_NEAR(r.objective, 3.0, 1e-9);
  auto oracle = testing::brute_force_minimum(p.tree(), p.layout(), p.weights());
  EXPECT_NEAR(oracle.objective, r.objective, 1e-9);
  auto m = decode(p, r);
  EXPECT_TRUE(accepts(m, encode(a, {"b"})));
  EXPECT_TRUE(accepts(m, encode(a, {"a", "a"})));
  EXPECT_FALSE(accepts(m, encode(a, {"a", "b"})));
  EXPECT_NEAR(*evaluate_assignment(p, r.assignment), r.objective, 1e-9);
}

TEST_F(Worked, LpTextShape) {
  auto p = make_program(data, a, 4, {0.5, 0.001, 1, 1});
  auto lp = export_lp(p);
  EXPECT_EQ(lp.rfind("Minimize", 0), 0u);
  EXPECT_EQ(lp.substr(lp.size() - 4), "End\n");
  EXPECT_NE(lp.find(" root: x_n0_q0 = 1\n"), std::string::npos);
  EXPECT_NE(lp.find("Subject To\n"), std::string::npos);
  EXPECT_NE(lp.find("Binary\n"), std::string::npos);
  EXPECT_NE(lp.find(" d_q3_s1_q2\n"), std::string::npos);
  for (std::size_t pos = 0, next; (next = lp.find('\n', pos)) != std::string::npos; pos = next + 1)
    EXPECT_LE(next - pos, 255u);
}

TEST(Learn, SinglePositiveTrace) {
  auto a = testing::letters(2);
  std::vector<BinaryTrace> one{{encode(a, {"a", "b", "a"}), true}};
  auto p = make_program(one, a, 4, {0, 0, 1, 1});
  auto r = solve_quick(p);
  EXPECT_EQ(r.status, SolveStatus::optimal);
  EXPECT_NEAR(r.objective, 1.0, 1e-12);  // the root alone
  for (NodeId n = 1; n < p.n_nodes(); ++n) EXPECT_TRUE(p.layout().is_accepting(r.assignment[n]));
}

TEST(Learn, ContradictoryLabels) {
  auto a = testing::letters(1);
  std::vector<BinaryTrace> both{{encode(a, {"a"}), true}, {encode(a, {"a"}), false}};
  for (auto [lp, ln] : {std::pair{1.0, 2.0}, std::pair{3.0, 1.0}}) {
    auto p = make_program(both, a, 4, {0, 0, lp, ln});
    auto r = solve_quick(p);
    double root = lp * 1.0;
    EXPECT_NEAR(r.objective, root + std::min(lp, ln), 1e-12);
  }
}

TEST(Learn, UnconstrainedTransitionsSelfLoop) {
  auto a = testing::letters(3);
  std::vector<BinaryTrace> one{{encode(a, {"a"}), true}};
  auto p = make_program(one, a, 5, {0, 0, 1, 1});
  auto r = solve_quick(p);
  auto m = decode(p, r);
  StateId first = r.assignment[1];
  for (StateId q = 0; q < m.n_states(); ++q)
    for (SymbolId s = 0; s < 3; ++s) {
      if (q == 0 && s == 0) {
        EXPECT_EQ(m.next(q, s), first);
      } else {
        EXPECT_EQ(m.next(q, s), q);
      }
    }
}

TEST(Learn, DecodeRejectsBrokenAssignment) {
  auto a = testing::letters(1);
  std::vector<BinaryTrace> data{{encode(a, {"a", "a", "a"}), true}};
  auto p = make_program(data, a, 4, {});
  SolveResult r;
  r.status = SolveStatus::feasible_timeout;
  r.assignment = {0, 1, 0, 2};  // 0 -a-> 1 but also 0 -a-> 2
  EXPECT_THROW(decode(p, r), InvariantError);
  r.assignment = {0, 3, 0, 0};  // leaves the rejecting sink
  EXPECT_THROW(decode(p, r), InvariantError);
}

// Optimal objective against exhaustive enumeration; canonical tie-break is
// the lexicographically first optimum, checked on integer weights.
TEST(Learn, PropertyOracleEquivalence) {
  testing::Rng rng(41);
  for (int round = 0; round < 150; ++round) {
    std::size_t k = testing::uniform(rng, 1, 3);
    auto a = testing::letters(k);
    auto data = testing::random_binary_traces(rng, k, 8);
    bool integral = round % 2 == 0;
    ProgramWeights w;
    if (integral) {
      w = {double(testing::uniform(rng, 0, 1)), double(testing::uniform(rng, 0, 1)), 1, 1};
    } else {
      w = {0.001 * double(testing::uniform(rng, 0, 500)), 0.001 * double(testing::uniform(rng, 0, 50)),
           0.5 + 0.01 * double(testing::uniform(rng, 0, 100)), 1.0};
    }
    std::size_t q_max = round % 3 == 2 ? 4 : 3;
    auto p = make_program(data, a, q_max, w,
                          integral ? Weighting::raw : Weighting::length_normalized);
    auto r = solve_quick(p);
    auto oracle = testing::brute_force_minimum(p.tree(), p.layout(), p.weights());
    ASSERT_EQ(r.status, SolveStatus::optimal);
    ASSERT_NEAR(r.objective, oracle.objective, 1e-9);
    EXPECT_NEAR(r.bound, r.objective, 1e-9);
    EXPECT_NEAR(*evaluate_assignment(p, r.assignment), r.objective, 1e-9);
    if (integral) {
      EXPECT_EQ(r.assignment, oracle.assignment);
    }
    // Replay: the decoded automaton visits exactly the assignment.
    auto m = decode(p, r);
    for (const auto& n : p.tree().nodes())
      if (n.parent) {
        EXPECT_EQ(m.next(r.assignment[*n.parent], *n.incoming_symbol), r.assignment[n.id]);
      }
  }
}

TEST(Learn, PropertyMonotoneInEachLambda) {
  testing::Rng rng(43);
  for (int round = 0; round < 20; ++round) {
    std::size_t k = testing::uniform(rng, 1, 3);
    auto a = testing::letters(k);
    auto data = testing::random_binary_traces(rng, k, 8);
    auto tree = build_prefix_tree(data, Weighting::length_normalized, a);
    for (int which = 0; which < 4; ++which) {
      double prev = -1.0;
      for (double v : {0.0, 0.01, 0.1, 0.5, 1.0, 3.0}) {
        ProgramWeights w{0.05, 0.01, 1.0, 1.0};
        (which == 0 ? w.lambda_edge : which == 1 ? w.lambda_absorb
                                     : which == 2 ? w.lambda_pos
                                                  : w.lambda_neg) = v;
        auto r = solve_quick(build_program(tree, StateLayout::standard(4), w));
        EXPECT_GE(r.objective, prev - 1e-9);
        prev = r.objective;
      }
    }
  }
}

TEST(Learn, PropertyAnytimeDeterministicAndThreaded) {
  testing::Rng rng(47);
  for (int round = 0; round < 20; ++round) {
    std::size_t k = testing::uniform(rng, 2, 3);
    auto a = testing::letters(k);
    std::vector<BinaryTrace> data(12);
    for (auto& b : data) b = {testing::random_trace(rng, k, 1, 4), testing::uniform(rng, 0, 1) == 1};
    auto p = make_program(data, a, 5, {0.01, 0.001, 1, 1}, Weighting::length_normalized);
    auto r1 = solve_quick(p), r2 = solve_quick(p), r4 = solve_quick(p, 4);
    EXPECT_EQ(r1.assignment, r2.assignment);
    EXPECT_EQ(r1.objective, r2.objective);
    EXPECT_NEAR(r4.objective, r1.objective, 1e-9);
    const auto& h = r1.stats.incumbent_history;
    ASSERT_FALSE(h.empty());
    for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LE(h[i], h[i - 1] + 1e-12);
    EXPECT_LE(r1.bound, r1.objective + 1e-9);
  }
}

TEST(Learn, TimeLimitKeepsValidIncumbent) {
  testing::Rng rng(53);
  auto a = testing::letters(5);
  std::vector<BinaryTrace> data(300);
  for (auto& b : data) b = {testing::random_trace(rng, 5, 4, 9), testing::uniform(rng, 0, 2) == 0};
  auto p = make_program(data, a, 9, {0.001, 0.001, 1, 1}, Weighting::length_normalized);
  SolveOptions o;
  o.time_limit = 0.05;
  auto r = solve(p, o);
  EXPECT_NE(r.status, SolveStatus::infeasible);
  EXPECT_LE(r.bound, r.objective + 1e-9);
  EXPECT_NEAR(*evaluate_assignment(p, r.assignment), r.objective, 1e-9);
  EXPECT_NO_THROW(decode(p, r));
  EXPECT_THROW(solve(p, SolveOptions{0.0}), UsageError);
}

TEST(Learn, OfficeCoffeeFitsTraining) {
  auto d = office_dataset();
  HyperParams hp;
  hp.q_max = 4;
  hp.lambda_edge = 1e-4;
  auto m = train_class_dfa(d, d.class_id("coffee"), hp);
  EXPECT_EQ(score_binary(m, binarize(d, d.class_id("coffee"))).accuracy(), 1.0);
}

TEST(Learn, TargetClassEmpty) {
  auto d = office_dataset();
  d.classes.push_back("nobody");
  HyperParams hp;
  hp.q_max = 4;
  try {
    train_class_dfa(d, static_cast<ClassId>(d.classes.size() - 1), hp);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_STREQ(e.what(), "target class empty");
  }
}

TEST(Learn, EdgeTermShrinksWithLambda) {
  auto d = office_dataset();
  HyperParams hp;
  hp.q_max = 5;
  for (ClassId c = 0; c < d.classes.size(); ++c) {
    auto bin = binarize(d, c);
    std::size_t prev = std::numeric_limits<std::size_t>::max();
    std::vector<double> grid{0.0};
    for (double l : default_lambda_edge_grid()) grid.push_back(l);
    for (double l : grid) {
      auto r = train_class_dfa_detailed(bin, d.alphabet, hp, l);
      std::size_t moving = r.model.count_moving_transitions();
      EXPECT_LE(moving, prev) << d.classes[c] << " lambda " << l;
      prev = moving;
    }
  }
}

TEST(Learn, GridIsElevenLogSpaced) {
  auto g = default_lambda_edge_grid();
  ASSERT_EQ(g.size(), 11u);
  EXPECT_DOUBLE_EQ(g.front(), 1e-4);
  EXPECT_DOUBLE_EQ(g.back(), 10.0);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(g[i] / g[i - 1], std::sqrt(10.0), 1e-9);
}

TEST(ValidateSelect, Rules) {
  auto a = testing::letters(2);
  std::vector<BinaryTrace> val{{encode(a, {"a"}), true}, {encode(a, {"b"}), false}};
  auto all = universal_dfa(a);
  auto none = empty_dfa(a);
  DfaModel only_a(a, 2, 0, {false, true}, {false, true}, {1, 0, 1, 1});
  std::vector<Candidate> one{{0.1, all}};
  EXPECT_EQ(validate_select(one, val), 0u);
  std::vector<Candidate> two{{0.1, all}, {1.0, only_a}};
  EXPECT_EQ(validate_select(two, val), 1u);  // F1 1 beats 2/3
  std::vector<Candidate> tie{{1.0, only_a}, {0.01, only_a}};
  EXPECT_EQ(validate_select(tie, val), 1u);
  DfaModel only_a_busy(a, 3, 0, {false, true, false}, {false, true, false}, {1, 2, 1, 1, 2, 2});
  std::vector<Candidate> busy{{0.5, only_a_busy}, {0.5, only_a}};
  EXPECT_EQ(validate_select(busy, val), 1u);
  std::vector<BinaryTrace> negatives{{encode(a, {"a"}), false}};
  EXPECT_EQ(score_binary(none, negatives).f1(), 0.0);
  std::vector<Candidate> empty;
  EXPECT_THROW(validate_select(empty, val), UsageError);
}

}  // namespace
}  // namespace seqdfa
