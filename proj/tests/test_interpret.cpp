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

struct OfficeExplain : ::testing::Test {
  LabeledDataset d = office_dataset();
  Alphabet a = d.alphabet;
  DfaModel m = office_coffee_dfa(a);
  Trace t(std::initializer_list<const char*> s) { return encode(a, s); }
};

TEST_F(OfficeExplain, ReplaceMaleWithCoffee) {
  auto src = t({"A", "H2", "H1", "male"});
  auto e = counterfactual_explain(m, src);
  EXPECT_EQ(e.distance, 1u);
  ASSERT_EQ(e.ops.size(), 1u);
  EXPECT_EQ(e.ops[0], replace_op(3, a.id("male"), a.id("coffee")));
  EXPECT_EQ(e.target, t({"A", "H2", "H1", "coffee"}));
  EXPECT_EQ(narrate(e, src, a),
            "The binary classifier would have accepted the trace had coffee been observed "
            "instead of male");
}

TEST_F(OfficeExplain, AcceptedTraceHasDistanceZero) {
  auto e = edit_distance_to_language(m, t({"B", "H1", "coffee"}));
  EXPECT_EQ(e.distance, 0u);
  EXPECT_TRUE(e.ops.empty());
  EXPECT_THROW(counterfactual_explain(m, t({"B", "H1", "coffee"})), UsageError);
}

TEST_F(OfficeExplain, EmptyLanguage) {
  EXPECT_THROW(edit_distance_to_language(empty_dfa(a), t({"A"})), DataError);
}

TEST_F(OfficeExplain, VerifyProperties) {
  auto coffee = property_template(a, "eventually", {"coffee"});
  EXPECT_TRUE(verify_property(m, coffee).holds);
  auto male = verify_property(m, property_template(a, "eventually", {"male"}));
  EXPECT_FALSE(male.holds);
  ASSERT_TRUE(male.witness.has_value());
  EXPECT_EQ(*male.witness, t({"coffee"}));
  EXPECT_TRUE(verify_property(m, universal_dfa(a)).holds);
  // A restroom visit while in H2/H3 is forgotten by the detector.
  auto restroom_first = property_template(a, "precedes", {"female", "male", "coffee"});
  auto r = verify_property(m, restroom_first);
  EXPECT_FALSE(r.holds);
  EXPECT_EQ(*r.witness, t({"H2", "female", "H2", "coffee"}));
  EXPECT_THROW(verify_property(m, universal_dfa(testing::letters(2))), AlphabetMismatchError);
}

TEST_F(OfficeExplain, ModifyWithNeverCoffee) {
  auto modified = modify_classifier(m, property_template(a, "never", {"coffee"}));
  EXPECT_TRUE(language_empty(modified));
  auto report = check_dataset_consistency(modified, d, d.class_id("coffee"));
  EXPECT_EQ(report.positives, 5u);
  EXPECT_EQ(report.rejected.size(), 5u);
}

TEST_F(OfficeExplain, ModifyWithUniversalKeepsLanguage) {
  auto modified = modify_classifier(m, universal_dfa(a));
  for (const auto& w : testing::all_words(a.size(), 4)) ASSERT_EQ(accepts(modified, w), accepts(m, w));
  EXPECT_TRUE(check_dataset_consistency(modified, d, d.class_id("coffee")).rejected.empty());
}

TEST(Explain, CriterionAcceptingPositivesOnly) {
  auto d = office_dataset();
  ClassId coffee = d.class_id("coffee");
  // Prefix-tree acceptor of exactly the coffee traces.
  std::vector<std::vector<StateId>> rows(1, std::vector<StateId>(d.alphabet.size(), 0));
  std::vector<bool> acc{false};
  const StateId dead = 0;
  rows[0].assign(d.alphabet.size(), dead);
  rows.push_back(std::vector<StateId>(d.alphabet.size(), dead));
  acc.push_back(false);
  for (const auto& it : d.items) {
    if (it.label != coffee) continue;
    StateId q = 1;
    for (SymbolId s : it.trace) {
      if (rows[q][s] == dead) {
        rows[q][s] = static_cast<StateId>(rows.size());
        rows.push_back(std::vector<StateId>(d.alphabet.size(), dead));
        acc.push_back(false);
      }
      q = rows[q][s];
    }
    acc[q] = true;
  }
  std::vector<StateId> delta;
  for (const auto& r : rows) delta.insert(delta.end(), r.begin(), r.end());
  std::vector<bool> abs(rows.size(), false);
  abs[0] = true;
  DfaModel criterion(d.alphabet, rows.size(), 1, acc, abs, delta);
  auto modified = modify_classifier(universal_dfa(d.alphabet), criterion);
  EXPECT_TRUE(check_dataset_consistency(modified, d, coffee).rejected.empty());
}

TEST(Explain, DeletionNarrative) {
  Alphabet a(std::vector<std::string>{"sendto", "read", "futex"});
  // Even-length traces without "read": only dropping read costs one edit.
  std::vector<StateId> parity{1, 1, 1, 0, 0, 0};
  DfaModel even(a, 2, 0, {true, false}, {false, false}, parity);
  auto m = modify_classifier(even, property_template(a, "never", {"read"}));
  auto src = encode(a, {"sendto", "read", "futex"});
  auto e = counterfactual_explain(m, src);
  ASSERT_EQ(e.ops.size(), 1u);
  EXPECT_EQ(e.ops[0], delete_op(1, a.id("read")));
  EXPECT_EQ(narrate(e, src, a),
            "The binary classifier would have accepted the trace had read been removed from "
            "the trace");
}

TEST(Explain, InsertAndJoinedClauses) {
  auto a = testing::letters(3);
  // Accepts exactly "a b c".
  DfaModel m(a, 5, 0, {false, false, false, true, false}, {false, false, false, false, true},
             {1, 4, 4, 4, 2, 4, 4, 4, 3, 4, 4, 4, 4, 4, 4});
  auto src = encode(a, {"b"});
  auto e = counterfactual_explain(m, src);
  EXPECT_EQ(e.distance, 2u);
  EXPECT_EQ(e.target, encode(a, {"a", "b", "c"}));
  EXPECT_EQ(narrate(e, src, a),
            "The binary classifier would have accepted the trace had a been observed at the "
            "start of the trace and had c been observed following the observation of b");
  std::set<SymbolId> vocab{a.id("a"), a.id("b")};
  EXPECT_EQ(out_of_vocabulary_ops(e, vocab), std::vector<std::size_t>{1});
}

TEST(Explain, Templates) {
  auto d = office_dataset();
  const auto& a = d.alphabet;
  auto ev = property_template(a, "eventually", {"coffee"});
  EXPECT_TRUE(accepts(ev, encode(a, {"B", "H1", "coffee"})));
  EXPECT_FALSE(accepts(ev, encode(a, {"B", "H1"})));
  auto nv = property_template(a, "never", {"male"});
  EXPECT_FALSE(accepts(nv, encode(a, {"A", "male", "H1"})));
  EXPECT_TRUE(accepts(nv, encode(a, {"A", "H1"})));
  auto pr = property_template(a, "precedes", {"female", "male", "coffee"});
  EXPECT_FALSE(accepts(pr, encode(a, {"male", "coffee"})));
  EXPECT_TRUE(accepts(pr, encode(a, {"coffee", "male"})));
  EXPECT_FALSE(accepts(pr, encode(a, {"female"})));
  EXPECT_TRUE(accepts(pr, encode(a, {"A", "H1"})));
  EXPECT_THROW(property_template(a, "always", {"coffee"}), UsageError);
  EXPECT_THROW(property_template(a, "never", {"tea"}), UnknownSymbolError);
}

// Wagner distance against string-level breadth-first search, plus the
// script invariants.
TEST(Explain, PropertyDistanceMatchesBfs) {
  testing::Rng rng(73);
  int checked = 0;
  while (checked < 600) {
    std::size_t k = testing::uniform(rng, 1, 3);
    auto a = testing::letters(k);
    auto m = testing::random_dfa(rng, a, testing::uniform(rng, 1, 4));
    auto witness = find_accepted_witness(m);
    if (!witness) continue;
    auto tr = testing::random_trace(rng, k, 0, 4);
    auto e = edit_distance_to_language(m, tr);
    ASSERT_EQ(e.distance, testing::bfs_edit_distance(m, tr));
    EXPECT_EQ(e.distance == 0, accepts(m, tr));
    EXPECT_EQ(e.ops.size(), e.distance);
    EXPECT_EQ(apply_ops(tr, e.ops), e.target);
    EXPECT_TRUE(accepts(m, e.target));
    EXPECT_LE(e.target.size(), tr.size() + e.distance);
    EXPECT_GE(e.target.size() + e.distance, tr.size());
    EXPECT_LE(e.distance, tr.size() + witness->size());
    ++checked;
  }
}

TEST(Explain, PropertyVerifyMatchesExhaustive) {
  testing::Rng rng(79);
  for (int round = 0; round < 150; ++round) {
    std::size_t k = testing::uniform(rng, 1, 2);
    auto a = testing::letters(k);
    auto m = testing::random_dfa(rng, a, testing::uniform(rng, 1, 3));
    auto p = testing::random_dfa(rng, a, testing::uniform(rng, 1, 3));
    bool holds = true;
    for (const auto& w : testing::all_words(k, m.n_states() * p.n_states()))
      if (accepts(m, w) && !accepts(p, w)) holds = false;
    auto r = verify_property(m, p);
    EXPECT_EQ(r.holds, holds);
    if (r.witness) {
      EXPECT_TRUE(accepts(m, *r.witness));
      EXPECT_FALSE(accepts(p, *r.witness));
    }
  }
}

}  // namespace
}  // namespace seqdfa
