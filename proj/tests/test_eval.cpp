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

#include <sstream>

#include "oracles.hpp"

namespace seqdfa {
namespace {

std::vector<Prediction> seq(std::initializer_list<std::pair<ClassId, double>> xs) {
  std::vector<Prediction> out;
  for (auto [c, p] : xs) out.push_back({c, p});
  return out;
}

TEST(Metrics, AllCorrect) {
  PrefixPredictions p{seq({{0, 1}, {0, 1}}), seq({{1, 1}, {1, 1}, {1, 1}})};
  std::vector<ClassId> y{0, 1};
  for (std::size_t t = 1; t < 6; ++t) EXPECT_EQ(cca(p, y, t), 100.0);
}

TEST(Metrics, CcaHandValue) {
  PrefixPredictions p{seq({{1, .6}, {1, .6}, {0, .9}}), seq({{1, 1}, {1, 1}})};
  std::vector<ClassId> y{0, 1};
  EXPECT_EQ(cca(p, y, 1), 50.0);
  EXPECT_EQ(cca(p, y, 2), 50.0);
  EXPECT_EQ(cca(p, y, 3), 100.0);
  EXPECT_EQ(cca(p, y, 50), 100.0);
  EXPECT_THROW(cca(p, y, 0), UsageError);
  EXPECT_THROW(cca({}, {}, 1), DataError);
}

TEST(Metrics, PcaRounding) {
  EXPECT_EQ(pca_prefix_length(10, 20), 2u);
  EXPECT_EQ(pca_prefix_length(7, 40), 3u);
  EXPECT_EQ(pca_prefix_length(3, 1), 1u);
  EXPECT_EQ(pca_prefix_length(5, 100), 5u);
  EXPECT_EQ(pca_prefix_length(5, 60), 3u);
  PrefixPredictions p{seq({{1, .6}, {1, .6}, {0, .9}})};
  std::vector<ClassId> y{0};
  EXPECT_EQ(pca(p, y, 100), 100.0);
  EXPECT_EQ(pca(p, y, 60), 0.0);
  EXPECT_THROW(pca(p, y, 0), UsageError);
  EXPECT_THROW(pca(p, y, 101), UsageError);
}

TEST(Metrics, UtilityValues) {
  UtilityFunction u;
  EXPECT_EQ(u(0), 1.0);
  EXPECT_EQ(u(40), 0.0);
  EXPECT_EQ(u(80), 0.0);
  PrefixPredictions p{seq({{0, 1}, {0, 1}, {0, 1}}), seq({{1, 1}})};
  std::vector<ClassId> y{0, 1};
  EXPECT_EQ(early_utility(p, y), 1.0 - 1.0 / 40);
  std::vector<ClassId> wrong{1, 0};
  EXPECT_EQ(early_utility(p, wrong), 0.0);
}

TEST(Metrics, UtilityBeyondHorizon) {
  std::vector<Prediction> s(45, Prediction{1, 0.0});
  s.back() = {0, 1.0};
  PrefixPredictions p{s};
  std::vector<ClassId> y{0};
  // U * conf is zero everywhere, so the earliest step (wrong) is chosen.
  EXPECT_EQ(stopping_time(s, UtilityFunction{}), 1u);
  EXPECT_EQ(early_utility(p, y), 0.0);
}

TEST(Metrics, UtilityTradeoff) {
  // conf 0.5 at t=1, 1.0 at t=2: 0.975*0.5 < 0.95*1.
  PrefixPredictions p{seq({{0, .5}, {0, 1.0}})};
  std::vector<ClassId> y{0};
  EXPECT_EQ(stopping_time(p[0], UtilityFunction{}), 2u);
  EXPECT_DOUBLE_EQ(early_utility(p, y), 0.95);
}

PrefixPredictions random_table(testing::Rng& rng, std::vector<ClassId>& labels) {
  PrefixPredictions p(testing::uniform(rng, 1, 15));
  labels.clear();
  std::uniform_real_distribution<double> u(0, 1);
  for (auto& s : p) {
    s.resize(testing::uniform(rng, 1, 12));
    for (auto& x : s) x = {static_cast<ClassId>(testing::uniform(rng, 0, 2)), u(rng)};
    labels.push_back(static_cast<ClassId>(testing::uniform(rng, 0, 2)));
  }
  return p;
}

TEST(Metrics, PropertyCcaTailAndPermutation) {
  testing::Rng rng(83);
  for (int round = 0; round < 300; ++round) {
    std::vector<ClassId> y;
    auto p = random_table(rng, y);
    std::size_t longest = 0;
    for (const auto& s : p) longest = std::max(longest, s.size());
    double full = pca(p, y, 100);
    for (std::size_t t = longest; t < longest + 3; ++t) EXPECT_EQ(cca(p, y, t), full);
    for (double x : {0.1, 5.0, 33.0}) {
      for (std::size_t i = 0; i < p.size(); ++i) EXPECT_GE(pca_prefix_length(p[i].size(), x), 1u);
    }
    std::vector<std::size_t> idx(p.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    PrefixPredictions q;
    std::vector<ClassId> z;
    for (auto i : idx) {
      q.push_back(p[i]);
      z.push_back(y[i]);
    }
    EXPECT_DOUBLE_EQ(cca(q, z, 2), cca(p, y, 2));
    EXPECT_DOUBLE_EQ(pca(q, z, 40), pca(p, y, 40));
    EXPECT_NEAR(early_utility(q, z), early_utility(p, y), 1e-12);
  }
}

TEST(Metrics, PropertyUtilityIgnoresLowTail) {
  testing::Rng rng(89);
  UtilityFunction u;
  for (int round = 0; round < 200; ++round) {
    std::vector<ClassId> y;
    auto p = random_table(rng, y);
    double before = early_utility(p, y, u);
    for (auto& s : p) {
      std::size_t t = stopping_time(s, u);
      double best = u(t) * s[t - 1].confidence;
      // Appended steps never beat the chosen maximum.
      for (int extra = 0; extra < 3; ++extra) {
        std::size_t at = s.size() + 1;
        double cap = u(at) > 0 ? best / u(at) : 1.0;
        s.push_back({static_cast<ClassId>(extra % 3), std::min(1.0, cap * 0.5)});
      }
    }
    EXPECT_NEAR(early_utility(p, y, u), before, 1e-12);
  }
}

TEST(Multilabel, AcceptingSet) {
  auto a = testing::letters(2);
  std::vector<DfaModel> none{empty_dfa(a), empty_dfa(a)};
  EXPECT_TRUE(multilabel_predict(none, Trace{0}).empty());
  std::vector<DfaModel> both{universal_dfa(a), empty_dfa(a), universal_dfa(a)};
  EXPECT_EQ(multilabel_predict(both, Trace{1}), (std::vector<ClassId>{0, 2}));
}

TEST(Multilabel, MeanPerLabelAccuracy) {
  // Two goals pursued in interleaved fashion; labels are the goals.
  std::istringstream in(
      "{\"trace\":[\"x\",\"y\"],\"labels\":[\"X\",\"Y\"]}\n"
      "{\"trace\":[\"x\"],\"labels\":[\"X\"]}\n"
      "{\"trace\":[\"y\",\"y\"],\"labels\":[\"Y\"]}\n"
      "{\"trace\":[\"y\",\"x\"],\"labels\":[\"X\",\"Y\"]}\n");
  auto d = make_multilabel_dataset(read_records(in, DatasetFormat::jsonl));
  auto ev_x = property_template(d.alphabet, PropertyKind::eventually, {d.alphabet.id("x")});
  auto starts_y = [&] {
    // Accepts traces whose first symbol is y.
    const auto k = d.alphabet.size();
    std::vector<StateId> delta(3 * k);
    for (SymbolId s = 0; s < k; ++s) {
      delta[s] = s == d.alphabet.id("y") ? 1 : 2;
      delta[k + s] = 1;
      delta[2 * k + s] = 2;
    }
    return DfaModel(d.alphabet, 3, 0, {false, true, false}, {false, true, true}, delta);
  }();
  std::vector<DfaModel> dfas{ev_x, starts_y};
  auto r = multilabel_evaluate(dfas, d);
  // Recount by hand: X is perfect; Y misses the first trace.
  EXPECT_EQ(r.per_class[0].accuracy(), 1.0);
  EXPECT_EQ(r.per_class[1].accuracy(), 0.75);
  EXPECT_DOUBLE_EQ(r.mean_accuracy, 0.875);
}

TEST(Report, JsonAndCsv) {
  PrefixPredictions p{seq({{1, .6}, {0, .9}}), seq({{1, 1}})};
  std::vector<ClassId> y{0, 1};
  auto j = evaluation_report(p, y, {"A", "B"});
  EXPECT_EQ(j["cca"]["1"], 50.0);
  EXPECT_EQ(j["cca"]["2"], 100.0);
  EXPECT_EQ(j["pca"]["100"], 100.0);
  EXPECT_EQ(j["per_class"]["A"]["count"], 1);
  EXPECT_TRUE(j.contains("early_utility"));
  std::ostringstream out;
  write_predictions_csv(out, p, y, {"A", "B"});
  EXPECT_EQ(out.str(), "trace,t,predicted,confidence,label\n0,1,B,0.6,A\n0,2,A,0.9,A\n1,1,B,1.0,B\n");
}

}  // namespace
}  // namespace seqdfa
