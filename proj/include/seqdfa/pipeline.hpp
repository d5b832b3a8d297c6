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
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "seqdfa/inference.hpp"
#include "seqdfa/learn.hpp"
#include "seqdfa/traces.hpp"

namespace seqdfa {

struct ClassTrainReport {
  std::string name;
  double lambda_edge = 0.0;
  double validation_f1 = 0.0;
  SolveStatus status = SolveStatus::optimal;
  double objective = 0.0;
  double bound = 0.0;
  std::uint64_t nodes_explored = 0;
  double wall_time = 0.0;  // summed over the grid
};

struct TrainedEnsemble {
  ClassifierEnsemble ensemble;
  std::vector<ClassTrainReport> reports;
  std::vector<ClassId> singleton_classes;
};

inline nlohmann::json to_json(const HyperParams& hp) {
  nlohmann::json j = {{"q_max", hp.q_max},
                      {"lambda_edge_grid", hp.lambda_edge_grid},
                      {"lambda_absorb", hp.lambda_absorb},
                      {"lambda_pos", hp.lambda_pos},
                      {"lambda_neg", hp.lambda_neg},
                      {"balanced", hp.balanced},
                      {"time_limit", hp.time_limit},
                      {"seed", hp.seed},
                      {"validation_fraction", hp.validation_fraction},
                      {"smoothing", hp.smoothing},
                      {"uniform_prior", hp.uniform_prior}};
  if (hp.accepting) j["accepting"] = *hp.accepting;
  return j;
}

// Inverse of to_json; absent fields keep their defaults.
inline HyperParams hyperparams_from_json(const nlohmann::json& j) {
  HyperParams hp;
  try {
    hp.q_max = j.value("q_max", hp.q_max);
    hp.lambda_edge_grid = j.value("lambda_edge_grid", hp.lambda_edge_grid);
    hp.lambda_absorb = j.value("lambda_absorb", hp.lambda_absorb);
    hp.lambda_pos = j.value("lambda_pos", hp.lambda_pos);
    hp.lambda_neg = j.value("lambda_neg", hp.lambda_neg);
    hp.balanced = j.value("balanced", hp.balanced);
    hp.time_limit = j.value("time_limit", hp.time_limit);
    hp.seed = j.value("seed", hp.seed);
    hp.validation_fraction = j.value("validation_fraction", hp.validation_fraction);
    hp.smoothing = j.value("smoothing", hp.smoothing);
    hp.uniform_prior = j.value("uniform_prior", hp.uniform_prior);
    if (j.contains("accepting")) hp.accepting = j.at("accepting").get<std::vector<StateId>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid hyperparameters: ") + e.what());
  }
  return hp;
}

namespace detail {

inline ClassTrainReport train_one_class(const LabeledDataset& train,
                                        const LabeledDataset& validation, ClassId c,
                                        const HyperParams& hp, unsigned solver_threads,
                                        DfaModel& out) {
  auto bin_train = binarize(train, c);
  auto bin_val = binarize(validation, c);
  HyperParams local = hp;
  local.threads = solver_threads;

  std::vector<Candidate> candidates;
  std::vector<ClassDfaResult> results;
  double wall = 0.0;
  std::uint64_t nodes = 0;
  for (double lambda : hp.lambda_edge_grid) {
    auto r = train_class_dfa_detailed(bin_train, train.alphabet, local, lambda);
    wall += r.solve.stats.wall_time;
    nodes += r.solve.stats.nodes_explored;
    candidates.push_back({lambda, r.model});
    results.push_back(std::move(r));
  }
  std::size_t best = validate_select(candidates, bin_val);
  const auto& r = results[best];
  out = r.model;
  ClassTrainReport rep;
  rep.name = train.classes[c];
  rep.lambda_edge = r.lambda_edge;
  rep.validation_f1 = score_binary(r.model, bin_val).f1();
  rep.status = r.solve.status;
  rep.objective = r.solve.objective;
  rep.bound = r.solve.bound;
  rep.nodes_explored = nodes;
  rep.wall_time = wall;
  return rep;
}

}  // namespace detail

// Full one-vs-rest pipeline: split, per-class grid search with validation
// selection, then prior and likelihood estimation. With
// validation_fraction == 0 the training set doubles as validation set.
// Classes are trained concurrently when hp.threads > 1; the solver itself
// then runs single-threaded.
inline TrainedEnsemble train_ensemble(const LabeledDataset& d, const HyperParams& hp) {
  if (d.items.empty()) throw DataError("no records");
  if (hp.lambda_edge_grid.empty()) throw UsageError("lambda_edge grid is empty");
  TrainedEnsemble out;
  LabeledDataset train, validation;
  if (hp.validation_fraction > 0.0) {
    auto split = split_train_validation(d, hp.validation_fraction, hp.seed);
    train = std::move(split.train);
    validation = std::move(split.validation);
    out.singleton_classes = std::move(split.singleton_classes);
  } else {
    train = d;
    validation = d;
  }

  const std::size_t n = d.classes.size();
  std::vector<DfaModel> dfas(n, empty_dfa(d.alphabet));
  out.reports.resize(n);
  unsigned workers = std::max(1u, std::min<unsigned>(hp.threads, static_cast<unsigned>(n)));
  unsigned solver_threads = workers > 1 ? 1 : std::max(1u, hp.threads);

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t c; (c = next.fetch_add(1)) < n;) {
      try {
        out.reports[c] = detail::train_one_class(train, validation, static_cast<ClassId>(c),
                                                 hp, solver_threads, dfas[c]);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  out.ensemble = make_ensemble(d.alphabet, d.classes, std::move(dfas));
  estimate_prior(out.ensemble, train, hp.smoothing, hp.uniform_prior);
  estimate_likelihoods(out.ensemble, validation, hp.smoothing);
  nlohmann::json selected = nlohmann::json::object();
  for (const auto& r : out.reports) selected[r.name] = r.lambda_edge;
  out.ensemble.metadata = {{"hyperparams", to_json(hp)}, {"selected_lambda_edge", selected}};
  return out;
}

inline nlohmann::json to_json(const ClassTrainReport& r) {
  return {{"class", r.name},
          {"lambda_edge", r.lambda_edge},
          {"validation_f1", r.validation_f1},
          {"status", to_string(r.status)},
          {"objective", r.objective},
          {"bound", r.bound},
          {"nodes_explored", r.nodes_explored},
          {"wall_time", r.wall_time}};
}

}  // namespace seqdfa
