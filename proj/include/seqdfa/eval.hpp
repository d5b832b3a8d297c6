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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqdfa/dfa.hpp"
#include "seqdfa/error.hpp"
#include "seqdfa/inference.hpp"
#include "seqdfa/learn.hpp"
#include "seqdfa/traces.hpp"

namespace seqdfa {

// predictions[i][t - 1]: prediction for trace i after t observations.
using PrefixPredictions = std::vector<std::vector<Prediction>>;

struct UtilityFunction {
  double horizon = 40.0;
  double operator()(std::size_t t) const { return std::max(1.0 - double(t) / horizon, 0.0); }
};

namespace detail {

inline void check_table(const PrefixPredictions& preds, std::span<const ClassId> labels) {
  if (preds.empty()) throw DataError("empty test set");
  if (preds.size() != labels.size()) throw UsageError("one label per trace expected");
  for (const auto& p : preds)
    if (p.empty()) throw DataError("prediction sequence for an empty trace");
}

}  // namespace detail

// Percentage of traces classified correctly after min(t, |trace|)
// observations.
inline double cca(const PrefixPredictions& preds, std::span<const ClassId> labels,
                  std::size_t t) {
  detail::check_table(preds, labels);
  if (t < 1) throw UsageError("t must be at least 1");
  std::size_t ok = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    ok += preds[i][std::min(t, preds[i].size()) - 1].label == labels[i];
  return 100.0 * double(ok) / double(preds.size());
}

// Observations used for the first x percent of a trace: ceil(x/100 * n),
// at least one.
inline std::size_t pca_prefix_length(std::size_t n, double x) {
  auto k = static_cast<std::size_t>(std::ceil(x / 100.0 * double(n) - 1e-9));
  return std::clamp<std::size_t>(k, 1, n);
}

inline double pca(const PrefixPredictions& preds, std::span<const ClassId> labels, double x) {
  detail::check_table(preds, labels);
  if (!(x > 0 && x <= 100)) throw UsageError("percentage must lie in (0, 100]");
  std::size_t ok = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    ok += preds[i][pca_prefix_length(preds[i].size(), x) - 1].label == labels[i];
  return 100.0 * double(ok) / double(preds.size());
}

// Step with the largest U(t) * conf(t); earliest wins ties.
inline std::size_t stopping_time(std::span<const Prediction> seq, const UtilityFunction& u) {
  std::size_t best = 1;
  double best_v = u(1) * seq[0].confidence;
  for (std::size_t t = 2; t <= seq.size(); ++t) {
    double v = u(t) * seq[t - 1].confidence;
    if (v > best_v) {
      best_v = v;
      best = t;
    }
  }
  return best;
}

// Mean utility: U(t*) when the prediction at t* is correct, else 0.
inline double early_utility(const PrefixPredictions& preds, std::span<const ClassId> labels,
                            const UtilityFunction& u = {}) {
  detail::check_table(preds, labels);
  // Running mean: exact when every trace scores the same.
  double mean = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    std::size_t t = stopping_time(preds[i], u);
    double x = preds[i][t - 1].label == labels[i] ? u(t) : 0.0;
    mean += (x - mean) / double(i + 1);
  }
  return mean;
}

inline PrefixPredictions to_predictions(const std::vector<std::vector<std::vector<double>>>& d) {
  PrefixPredictions out;
  out.reserve(d.size());
  for (const auto& seq : d) {
    std::vector<Prediction> row;
    row.reserve(seq.size());
    for (const auto& p : seq) row.push_back(argmax(p));
    out.push_back(std::move(row));
  }
  return out;
}

// Classes whose automaton accepts the trace; no posterior layer.
inline std::vector<ClassId> multilabel_predict(std::span<const DfaModel> dfas,
                                               std::span<const SymbolId> trace) {
  std::vector<ClassId> out;
  for (std::size_t c = 0; c < dfas.size(); ++c)
    if (accepts(dfas[c], trace)) out.push_back(static_cast<ClassId>(c));
  return out;
}

struct MultiLabelReport {
  std::vector<BinaryScores> per_class;
  double mean_accuracy = 0.0;
};

// Per-label binary accuracy averaged over labels.
inline MultiLabelReport multilabel_evaluate(std::span<const DfaModel> dfas,
                                            const MultiLabelDataset& d) {
  if (d.items.empty()) throw DataError("empty test set");
  if (dfas.size() != d.classes.size()) throw UsageError("one automaton per class expected");
  MultiLabelReport r;
  for (std::size_t c = 0; c < dfas.size(); ++c) {
    r.per_class.push_back(score_binary(dfas[c], binarize(d, static_cast<ClassId>(c))));
    r.mean_accuracy += r.per_class.back().accuracy();
  }
  r.mean_accuracy /= double(dfas.size());
  return r;
}

inline nlohmann::json evaluation_report(const PrefixPredictions& preds,
                                        std::span<const ClassId> labels,
                                        const std::vector<std::string>& classes,
                                        const UtilityFunction& u = {}) {
  detail::check_table(preds, labels);
  std::size_t longest = 0;
  for (const auto& p : preds) longest = std::max(longest, p.size());
  nlohmann::json cca_j = nlohmann::json::object();
  for (std::size_t t = 1; t <= longest; ++t) cca_j[std::to_string(t)] = cca(preds, labels, t);
  nlohmann::json pca_j = nlohmann::json::object();
  for (int x : {20, 40, 60, 80, 100}) pca_j[std::to_string(x)] = pca(preds, labels, x);

  std::vector<std::size_t> count(classes.size(), 0), correct(classes.size(), 0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    ++count[labels[i]];
    correct[labels[i]] += preds[i].back().label == labels[i];
  }
  nlohmann::json per_class = nlohmann::json::object();
  for (std::size_t c = 0; c < classes.size(); ++c) {
    nlohmann::json e = {{"count", count[c]}};
    e["accuracy"] = count[c] ? 100.0 * double(correct[c]) / double(count[c]) : 0.0;
    per_class[classes[c]] = std::move(e);
  }
  return {{"n_traces", preds.size()},
          {"cca", std::move(cca_j)},
          {"pca", std::move(pca_j)},
          {"early_utility", early_utility(preds, labels, u)},
          {"utility_horizon", u.horizon},
          {"per_class", std::move(per_class)}};
}

// One row per (trace, t).
inline void write_predictions_csv(std::ostream& out, const PrefixPredictions& preds,
                                  std::span<const ClassId> labels,
                                  const std::vector<std::string>& classes) {
  out << "trace,t,predicted,confidence,label\n";
  for (std::size_t i = 0; i < preds.size(); ++i)
    for (std::size_t t = 0; t < preds[i].size(); ++t)
      out << i << ',' << t + 1 << ',' << classes[preds[i][t].label] << ','
          << nlohmann::json(preds[i][t].confidence).dump() << ',' << classes[labels[i]] << '\n';
}

}  // namespace seqdfa
