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

#include <algorithm>

#include "oracles.hpp"

namespace seqdfa {
namespace {

using testing::encode;

LabeledDataset two_class(std::vector<std::pair<std::vector<const char*>, ClassId>> rows,
                         std::size_t k = 2) {
  LabeledDataset d;
  d.alphabet = testing::letters(k);
  d.classes = {"A", "B"};
  for (auto& [syms, c] : rows) {
    Trace t;
    for (const char* s : syms) t.push_back(d.alphabet.id(s));
    d.items.push_back({t, c});
  }
  return d;
}

TEST(DfaFt, OwnTraceProbabilityOne) {
  auto d = two_class({{{"a", "a"}, 0}, {{"b"}, 1}});
  auto m = dfa_ft_train(d);
  auto p = m.distribution(m.locate(encode(d.alphabet, {"a", "a"})));
  EXPECT_EQ(p[0], 1.0);
  EXPECT_EQ(dfa_ft_predict(m, encode(d.alphabet, {"b"})).label, 1u);
}

TEST(DfaFt, EmpiricalFraction) {
  auto d = two_class({{{"a", "a"}, 0}, {{"a", "b"}, 0}, {{"a"}, 0}, {{"a", "a", "b"}, 1}});
  auto m = dfa_ft_train(d);
  auto node = m.locate(encode(d.alphabet, {"a"}));
  EXPECT_DOUBLE_EQ(m.probability(node, 0), 0.75);
  EXPECT_DOUBLE_EQ(m.probability(node, 1), 0.25);
}

TEST(DfaFt, OffTreeHoldsLastNode) {
  auto d = two_class({{{"a", "a"}, 0}, {{"a", "b"}, 1}, {{"a", "a"}, 1}});
  auto m = dfa_ft_train(d);
  auto at_aa = m.distribution(m.locate(encode(d.alphabet, {"a", "a"})));
  auto beyond = dfa_ft_prefixes(m, encode(d.alphabet, {"a", "a", "b", "b"}));
  EXPECT_EQ(beyond[3], at_aa);
  EXPECT_THROW(m.step(0, 9), UnknownSymbolError);
}

TEST(DfaFt, OfficeMemorized) {
  auto d = office_dataset();
  auto m = dfa_ft_train(d);
  for (const auto& it : d.items) EXPECT_EQ(dfa_ft_predict(m, it.trace).label, it.label);
  auto back = dfa_ft_from_json(nlohmann::json::parse(to_json(m).dump()));
  for (const auto& it : d.items)
    EXPECT_EQ(dfa_ft_prefixes(back, it.trace), dfa_ft_prefixes(m, it.trace));
}

// Equal-length traces share no proper prefixes, so each final node holds
// exactly one training trace and its label comes back.
TEST(DfaFt, PropertyMemorization) {
  testing::Rng rng(67);
  for (int round = 0; round < 100; ++round) {
    LabeledDataset d;
    d.alphabet = testing::letters(3);
    d.classes = {"A", "B"};
    std::map<Trace, ClassId> label;
    for (int i = 0; i < 10; ++i) {
      auto t = testing::random_trace(rng, 3, 4, 4);
      auto c = static_cast<ClassId>(testing::uniform(rng, 0, 1));
      if (label.try_emplace(t, c).first->second != c) continue;
      d.items.push_back({t, c});
    }
    auto m = dfa_ft_train(d);
    for (const auto& it : d.items) {
      auto p = m.distribution(m.locate(it.trace));
      EXPECT_EQ(argmax(p).label, it.label);
      EXPECT_EQ(argmax(p).confidence, 1.0);
    }
  }
}

TEST(Ngram, UnigramHandValue) {
  auto d = two_class({{{"a", "a"}, 0}, {{"b", "b"}, 1}});
  auto m = ngram_train(d, 1, 0.5);
  EXPECT_DOUBLE_EQ(m.probability(0, 0, 0), 2.5 / 3);
  EXPECT_DOUBLE_EQ(m.probability(1, 0, 0), 0.5 / 3);
  auto p = ngram_predict(m, encode(d.alphabet, {"a"}));
  EXPECT_EQ(p.label, 0u);
  EXPECT_NEAR(p.confidence, 5.0 / 6, 1e-12);
}

TEST(Ngram, LargeAlphaIsUniform) {
  auto d = two_class({{{"a", "a"}, 0}, {{"b", "b"}, 1}});
  auto m = ngram_train(d, 2, 1e9);
  auto p = ngram_distribution(m, encode(d.alphabet, {"a", "a", "a"}));
  EXPECT_NEAR(p[0], 0.5, 1e-6);
}

TEST(Ngram, EmptyQueryGivesPrior) {
  auto d = two_class({{{"a"}, 0}, {{"a"}, 0}, {{"a"}, 0}, {{"b"}, 1}});
  auto m = ngram_train(d, 2, 0.5);
  auto p = ngram_distribution(m, Trace{});
  EXPECT_DOUBLE_EQ(p[0], 0.75);
  EXPECT_DOUBLE_EQ(p[1], 0.25);
}

TEST(Ngram, BigramUsesStartToken) {
  // Same symbol counts; only the first symbol differs in context.
  auto d = two_class({{{"a", "b"}, 0}, {{"b", "a"}, 1}});
  auto uni = ngram_train(d, 1, 0.5);
  auto bi = ngram_train(d, 2, 0.5);
  auto q = encode(d.alphabet, {"a", "b"});
  EXPECT_NEAR(ngram_distribution(uni, q)[0], 0.5, 1e-12);
  EXPECT_NEAR(ngram_distribution(bi, q)[0], 0.5625 / (0.5625 + 0.125), 1e-12);
  EXPECT_THROW(ngram_train(d, 3, 0.5), UsageError);
  EXPECT_THROW(ngram_train(d, 1, 0.0), UsageError);
}

TEST(Ngram, PropertyNormalizedAndOrderInvariant) {
  testing::Rng rng(71);
  for (int round = 0; round < 50; ++round) {
    LabeledDataset d;
    std::size_t k = testing::uniform(rng, 1, 4);
    d.alphabet = testing::letters(k);
    d.classes = {"A", "B", "C"};
    for (int i = 0; i < 12; ++i)
      d.items.push_back({testing::random_trace(rng, k, 1, 6), static_cast<ClassId>(i % 3)});
    unsigned n = round % 2 ? 1 : 2;
    auto m = ngram_train(d, n, 0.5);
    auto shuffled = d;
    std::shuffle(shuffled.items.begin(), shuffled.items.end(), rng);
    auto m2 = ngram_train(shuffled, n, 0.5);
    for (ClassId c = 0; c < 3; ++c)
      for (std::size_t ctx = 0; ctx < m.n_contexts(); ++ctx) {
        double sum = 0;
        for (SymbolId s = 0; s < k; ++s) {
          double p = m.probability(c, ctx, s);
          EXPECT_GT(p, 0.0);
          sum += p;
        }
        EXPECT_NEAR(sum, 1.0, 1e-9);
      }
    auto q = testing::random_trace(rng, k, 1, 6);
    auto a = ngram_prefixes(m, q), b = ngram_prefixes(m2, q);
    for (std::size_t t = 0; t < q.size(); ++t)
      for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(a[t][c], b[t][c], 1e-12);
    auto back = ngram_from_json(nlohmann::json::parse(to_json(m).dump()));
    EXPECT_EQ(ngram_prefixes(back, q), a);
  }
}

}  // namespace
}  // namespace seqdfa
