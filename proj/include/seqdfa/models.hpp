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

#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "seqdfa/baselines.hpp"
#include "seqdfa/error.hpp"
#include "seqdfa/inference.hpp"
#include "seqdfa/traces.hpp"

namespace seqdfa {

// Any multi-class sequence classifier the command line can train and run.
using AnyModel = std::variant<ClassifierEnsemble, DfaFtModel, NgramModel>;

inline const Alphabet& model_alphabet(const AnyModel& m) {
  return std::visit(
      [](const auto& x) -> const Alphabet& {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, ClassifierEnsemble>)
          return x.alphabet;
        else
          return x.alphabet();
      },
      m);
}

inline const std::vector<std::string>& model_classes(const AnyModel& m) {
  return std::visit(
      [](const auto& x) -> const std::vector<std::string>& {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, ClassifierEnsemble>)
          return x.classes;
        else
          return x.classes();
      },
      m);
}

// Class distribution after each observation.
inline std::vector<std::vector<double>> prefix_distributions(const AnyModel& m,
                                                             std::span<const SymbolId> trace) {
  if (const auto* e = std::get_if<ClassifierEnsemble>(&m)) {
    std::vector<std::vector<double>> out;
    for (auto& p : predict_prefixes(*e, trace)) out.push_back(std::move(p.probabilities));
    return out;
  }
  if (const auto* f = std::get_if<DfaFtModel>(&m)) return dfa_ft_prefixes(*f, trace);
  return ngram_prefixes(std::get<NgramModel>(m), trace);
}

inline nlohmann::json to_json(const AnyModel& m) {
  return std::visit([](const auto& x) { return to_json(x); }, m);
}

inline AnyModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) throw DataError("model file lacks a kind");
  auto kind = j.at("kind").get<std::string>();
  if (kind == "dfa") return ensemble_from_json(j);
  if (kind == "dfa-ft") return dfa_ft_from_json(j);
  if (kind == "ngram1" || kind == "ngram2") return ngram_from_json(j);
  throw DataError("unknown model kind '" + kind + "'");
}

}  // namespace seqdfa
