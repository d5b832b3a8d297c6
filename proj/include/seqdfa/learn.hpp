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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "seqdfa/dfa.hpp"
#include "seqdfa/prefix_tree.hpp"
#include "seqdfa/program.hpp"
#include "seqdfa/solver.hpp"
#include "seqdfa/traces.hpp"

namespace seqdfa {

// 11 log-spaced transition penalties from 1e-4 to 10.
inline std::vector<double> default_lambda_edge_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 10; ++k) grid.push_back(std::pow(10.0, -4.0 + 0.5 * k));
  return grid;
}

struct HyperParams {
  std::size_t q_max = 10;
  double lambda_edge = 1e-4;  // used when training a single automaton
  std::vector<double> lambda_edge_grid = default_lambda_edge_grid();
  double lambda_absorb = 0.001;
  double lambda_pos = 1.0;
  double lambda_neg = 1.0;
  // Rescale lambda_pos to total negative / total positive weight.
  bool balanced = false;
  // Non-sink accepting states; empty means the standard layout.
  std::optional<std::vector<StateId>> accepting;
  double time_limit = 900.0;
  unsigned threads = 1;
  std::uint64_t seed = 0;
  double validation_fraction = 0.2;  // 0 disables the held-out split
  double smoothing = 0.5;
  bool uniform_prior = false;
};

inline StateLayout make_layout(const HyperParams& hp) {
  if (hp.accepting) return StateLayout(hp.q_max, *hp.accepting);
  return StateLayout::standard(hp.q_max);
}

inline ProgramWeights make_weights(const HyperParams& hp, const PrefixTree& tree,
                                   double lambda_edge) {
  ProgramWeights w{lambda_edge, hp.lambda_absorb, hp.lambda_pos, hp.lambda_neg};
  if (hp.balanced) {
    double pos = tree.total_w_pos(), neg = tree.total_w_neg();
    if (pos > 0) w.lambda_pos = neg / pos;
  }
  return w;
}

struct ClassDfaResult {
  DfaModel model;
  SolveResult solve;
  double lambda_edge = 0.0;
};

inline ClassDfaResult train_class_dfa_detailed(std::span<const BinaryTrace> binarized,
                                               const Alphabet& alphabet,
                                               const HyperParams& hp,
                                               double lambda_edge) {
  bool any_positive = false;
  for (const auto& b : binarized) any_positive = any_positive || b.positive;
  if (!any_positive) throw DataError("target class empty");
  auto tree = build_prefix_tree(binarized, Weighting::length_normalized, alphabet);
  auto weights = make_weights(hp, tree, lambda_edge);
  AssignmentProgram program(std::move(tree), make_layout(hp), weights);
  SolveOptions opts;
  opts.time_limit = hp.time_limit;
  opts.threads = hp.threads;
  opts.seed = hp.seed;
  auto result = solve(program, opts);
  auto model = decode(program, result);
  return {std::move(model), std::move(result), lambda_edge};
}

// One-vs-rest automaton for `target` at hp.lambda_edge.
inline DfaModel train_class_dfa(const LabeledDataset& d, ClassId target,
                                const HyperParams& hp) {
  auto bin = binarize(d, target);
  return train_class_dfa_detailed(bin, d.alphabet, hp, hp.lambda_edge).model;
}

struct BinaryScores {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  double precision() const { return tp + fp ? double(tp) / double(tp + fp) : 0.0; }
  double recall() const { return tp + fn ? double(tp) / double(tp + fn) : 0.0; }
  // Zero when precision + recall is zero.
  double f1() const {
    double p = precision(), r = recall();
    return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
  double accuracy() const {
    std::size_t n = tp + fp + fn + tn;
    return n ? double(tp + tn) / double(n) : 0.0;
  }
};

inline BinaryScores score_binary(const DfaModel& m, std::span<const BinaryTrace> data) {
  BinaryScores s;
  for (const auto& b : data) {
    bool acc = accepts(m, b.trace);
    if (acc && b.positive) ++s.tp;
    else if (acc) ++s.fp;
    else if (b.positive) ++s.fn;
    else ++s.tn;
  }
  return s;
}

struct Candidate {
  double lambda_edge = 0.0;
  DfaModel model;
};

// Index of the candidate with the highest F1 on `validation`; ties prefer
// the smaller lambda_edge, then fewer state-changing transitions.
inline std::size_t validate_select(std::span<const Candidate> candidates,
                                   std::span<const BinaryTrace> validation) {
  if (candidates.empty()) throw UsageError("no candidates to select from");
  std::size_t best = 0;
  double best_f1 = score_binary(candidates[0].model, validation).f1();
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    double f1 = score_binary(candidates[i].model, validation).f1();
    const auto& a = candidates[i];
    const auto& b = candidates[best];
    bool better = f1 > best_f1 + 1e-12;
    if (!better && std::abs(f1 - best_f1) <= 1e-12) {
      if (a.lambda_edge != b.lambda_edge)
        better = a.lambda_edge < b.lambda_edge;
      else
        better = a.model.count_moving_transitions() < b.model.count_moving_transitions();
    }
    if (better) {
      best = i;
      best_f1 = f1;
    }
  }
  return best;
}

}  // namespace seqdfa
