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

#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "seqdfa/dfa.hpp"
#include "seqdfa/error.hpp"
#include "seqdfa/traces.hpp"

namespace seqdfa {

// One-vs-rest automata combined by a naive Bayes posterior over the true
// class. Decisions of the automata are assumed independent given the
// class, and each decision's distribution only depends on whether its
// automaton belongs to the true class.
struct ClassifierEnsemble {
  Alphabet alphabet;
  std::vector<std::string> classes;
  std::vector<DfaModel> dfas;
  std::vector<double> prior;
  std::vector<double> lik_match;     // p(accept | true class is c)
  std::vector<double> lik_mismatch;  // p(accept | true class is not c)
  // Classes whose likelihoods fell back to 0.5 for lack of validation data.
  std::vector<ClassId> likelihood_fallback;
  nlohmann::json metadata = nlohmann::json::object();

  std::size_t size() const { return classes.size(); }
};

inline ClassifierEnsemble make_ensemble(Alphabet alphabet,
                                        std::vector<std::string> classes,
                                        std::vector<DfaModel> dfas) {
  if (classes.size() != dfas.size() || classes.empty())
    throw UsageError("need one automaton per class");
  for (const auto& m : dfas)
    if (!(m.alphabet() == alphabet)) throw AlphabetMismatchError();
  ClassifierEnsemble e;
  const std::size_t n = classes.size();
  e.alphabet = std::move(alphabet);
  e.classes = std::move(classes);
  e.dfas = std::move(dfas);
  e.prior.assign(n, 1.0 / double(n));
  e.lik_match.assign(n, 0.5);
  e.lik_mismatch.assign(n, 0.5);
  return e;
}

// Class frequencies in `train`, add-`smoothing` smoothed, or uniform.
inline void estimate_prior(ClassifierEnsemble& e, const LabeledDataset& train,
                           double smoothing, bool uniform = false) {
  const std::size_t n = e.size();
  if (uniform || train.items.empty()) {
    e.prior.assign(n, 1.0 / double(n));
    return;
  }
  auto counts = train.class_counts();
  double total = double(train.items.size()) + smoothing * double(n);
  e.prior.resize(n);
  for (std::size_t c = 0; c < n; ++c) e.prior[c] = (double(counts[c]) + smoothing) / total;
}

// Decision likelihoods from full validation traces with pseudocount
// `smoothing`, so no estimate is ever exactly 0 or 1.
inline void estimate_likelihoods(ClassifierEnsemble& e, const LabeledDataset& validation,
                                 double smoothing) {
  if (validation.items.empty()) throw UsageError("validation set is empty");
  if (!(smoothing > 0)) throw UsageError("smoothing must be positive");
  const std::size_t n = e.size();
  std::vector<double> acc_in(n, 0), cnt_in(n, 0), acc_out(n, 0), cnt_out(n, 0);
  for (const auto& item : validation.items) {
    for (std::size_t c = 0; c < n; ++c) {
      bool a = accepts(e.dfas[c], item.trace);
      if (item.label == c) {
        cnt_in[c] += 1;
        acc_in[c] += a;
      } else {
        cnt_out[c] += 1;
        acc_out[c] += a;
      }
    }
  }
  e.likelihood_fallback.clear();
  e.lik_match.resize(n);
  e.lik_mismatch.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    if (cnt_in[c] == 0) {
      e.lik_match[c] = e.lik_mismatch[c] = 0.5;
      e.likelihood_fallback.push_back(static_cast<ClassId>(c));
      continue;
    }
    e.lik_match[c] = (acc_in[c] + smoothing) / (cnt_in[c] + 2 * smoothing);
    e.lik_mismatch[c] = (acc_out[c] + smoothing) / (cnt_out[c] + 2 * smoothing);
  }
}

struct Posterior {
  std::vector<double> probabilities;
  std::vector<bool> decisions;  // true = accept
};

// Normalized prior(c) * p(D_c | c) / p(D_c | not c).
inline Posterior posterior_from_decisions(const ClassifierEnsemble& e,
                                          std::vector<bool> decisions) {
  const std::size_t n = e.size();
  if (decisions.size() != n) throw UsageError("one decision per class expected");
  Posterior p;
  p.probabilities.resize(n);
  double total = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    double match = decisions[c] ? e.lik_match[c] : 1.0 - e.lik_match[c];
    double mismatch = decisions[c] ? e.lik_mismatch[c] : 1.0 - e.lik_mismatch[c];
    p.probabilities[c] = e.prior[c] * match / mismatch;
    total += p.probabilities[c];
  }
  if (!(total > 0)) {
    p.probabilities.assign(n, 1.0 / double(n));
  } else {
    for (double& x : p.probabilities) x /= total;
  }
  p.decisions = std::move(decisions);
  return p;
}

inline Posterior posterior(const ClassifierEnsemble& e, std::span<const SymbolId> trace) {
  std::vector<bool> d(e.size());
  for (std::size_t c = 0; c < e.size(); ++c) d[c] = accepts(e.dfas[c], trace);
  return posterior_from_decisions(e, std::move(d));
}

struct Prediction {
  ClassId label = 0;
  double confidence = 0.0;
};

// Argmax; exact ties go to the earlier class.
inline Prediction argmax(std::span<const double> probabilities) {
  Prediction best{0, probabilities.empty() ? 0.0 : probabilities[0]};
  for (std::size_t c = 1; c < probabilities.size(); ++c)
    if (probabilities[c] > best.confidence) best = {static_cast<ClassId>(c), probabilities[c]};
  return best;
}

inline Prediction predict(const ClassifierEnsemble& e, std::span<const SymbolId> trace) {
  return argmax(posterior(e, trace).probabilities);
}

// Posterior after each of the first 1..|trace| observations. Automaton
// states advance incrementally.
inline std::vector<Posterior> predict_prefixes(const ClassifierEnsemble& e,
                                               std::span<const SymbolId> trace) {
  std::vector<StateId> state(e.size());
  for (std::size_t c = 0; c < e.size(); ++c) state[c] = e.dfas[c].initial();
  std::vector<Posterior> out;
  out.reserve(trace.size());
  for (SymbolId s : trace) {
    std::vector<bool> d(e.size());
    for (std::size_t c = 0; c < e.size(); ++c) {
      state[c] = e.dfas[c].next(state[c], s);
      d[c] = e.dfas[c].is_accepting(state[c]);
    }
    out.push_back(posterior_from_decisions(e, std::move(d)));
  }
  return out;
}

inline nlohmann::json to_json(const ClassifierEnsemble& e) {
  nlohmann::json dfas = nlohmann::json::array();
  for (const auto& m : e.dfas) dfas.push_back(to_json(m));
  return {{"kind", "dfa"},
          {"classes", e.classes},
          {"alphabet", e.alphabet.symbols()},
          {"dfas", std::move(dfas)},
          {"prior", e.prior},
          {"lik_match", e.lik_match},
          {"lik_mismatch", e.lik_mismatch},
          {"likelihood_fallback", e.likelihood_fallback},
          {"metadata", e.metadata}};
}

inline ClassifierEnsemble ensemble_from_json(const nlohmann::json& j) {
  try {
    Alphabet alphabet(j.at("alphabet").get<std::vector<std::string>>());
    std::vector<DfaModel> dfas;
    for (const auto& m : j.at("dfas")) dfas.push_back(dfa_from_json(m));
    auto e = make_ensemble(std::move(alphabet), j.at("classes").get<std::vector<std::string>>(),
                           std::move(dfas));
    e.prior = j.at("prior").get<std::vector<double>>();
    e.lik_match = j.at("lik_match").get<std::vector<double>>();
    e.lik_mismatch = j.at("lik_mismatch").get<std::vector<double>>();
    if (j.contains("likelihood_fallback"))
      e.likelihood_fallback = j.at("likelihood_fallback").get<std::vector<ClassId>>();
    if (j.contains("metadata")) e.metadata = j.at("metadata");
    const std::size_t n = e.size();
    if (e.prior.size() != n || e.lik_match.size() != n || e.lik_mismatch.size() != n)
      throw DataError("ensemble arrays must have one entry per class");
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("ensemble schema violation: ") + ex.what());
  }
}

}  // namespace seqdfa
