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
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "seqdfa/error.hpp"
#include "seqdfa/traces.hpp"

namespace seqdfa {

using StateId = std::uint32_t;

class AlphabetMismatchError : public DataError {
 public:
  AlphabetMismatchError() : DataError("automata have different alphabets") {}
};

// Complete deterministic automaton. The transition table is row-major,
// delta[q * |alphabet| + s].
class DfaModel {
 public:
  DfaModel(Alphabet alphabet, std::size_t n_states, StateId initial,
           std::vector<bool> accepting, std::vector<bool> absorbing,
           std::vector<StateId> delta)
      : alphabet_(std::move(alphabet)),
        n_states_(n_states),
        initial_(initial),
        accepting_(std::move(accepting)),
        absorbing_(std::move(absorbing)),
        delta_(std::move(delta)) {
    validate();
  }

  const Alphabet& alphabet() const { return alphabet_; }
  std::size_t n_states() const { return n_states_; }
  std::size_t n_symbols() const { return alphabet_.size(); }
  StateId initial() const { return initial_; }
  bool is_accepting(StateId q) const { return accepting_.at(q); }
  bool is_absorbing(StateId q) const { return absorbing_.at(q); }
  const std::vector<bool>& accepting_mask() const { return accepting_; }
  const std::vector<bool>& absorbing_mask() const { return absorbing_; }
  const std::vector<StateId>& delta() const { return delta_; }

  StateId next(StateId q, SymbolId s) const {
    if (s >= n_symbols()) throw UnknownSymbolError("#" + std::to_string(s));
    return delta_[static_cast<std::size_t>(q) * n_symbols() + s];
  }

  std::vector<StateId> accepting_states() const { return members(accepting_); }
  std::vector<StateId> absorbing_states() const { return members(absorbing_); }

  // Transitions (q, s) with delta(q, s) != q.
  std::size_t count_moving_transitions() const {
    std::size_t n = 0;
    for (StateId q = 0; q < n_states_; ++q)
      for (SymbolId s = 0; s < n_symbols(); ++s) n += next(q, s) != q;
    return n;
  }

  friend bool operator==(const DfaModel& a, const DfaModel& b) {
    return a.alphabet_ == b.alphabet_ && a.n_states_ == b.n_states_ &&
           a.initial_ == b.initial_ && a.accepting_ == b.accepting_ &&
           a.absorbing_ == b.absorbing_ && a.delta_ == b.delta_;
  }

 private:
  static std::vector<StateId> members(const std::vector<bool>& mask) {
    std::vector<StateId> out;
    for (StateId q = 0; q < mask.size(); ++q)
      if (mask[q]) out.push_back(q);
    return out;
  }

  void validate() const {
    if (n_states_ == 0) throw DataError("automaton needs at least one state");
    if (initial_ >= n_states_) throw DataError("initial state out of range");
    if (accepting_.size() != n_states_ || absorbing_.size() != n_states_)
      throw DataError("state set sizes do not match n_states");
    if (delta_.size() != n_states_ * n_symbols())
      throw DataError("transition table is not total");
    for (StateId t : delta_)
      if (t >= n_states_) throw DataError("transition target out of range");
    for (StateId q = 0; q < n_states_; ++q) {
      if (!absorbing_[q]) continue;
      for (SymbolId s = 0; s < n_symbols(); ++s)
        if (delta_[q * n_symbols() + s] != q)
          throw DataError("absorbing state " + std::to_string(q) +
                          " must self-loop on every symbol");
    }
  }

  Alphabet alphabet_;
  std::size_t n_states_;
  StateId initial_;
  std::vector<bool> accepting_;
  std::vector<bool> absorbing_;
  std::vector<StateId> delta_;
};

// State sequence s_0..s_n visited on `trace`.
inline std::vector<StateId> run(const DfaModel& m, std::span<const SymbolId> trace) {
  std::vector<StateId> states;
  states.reserve(trace.size() + 1);
  StateId q = m.initial();
  states.push_back(q);
  for (SymbolId s : trace) {
    q = m.next(q, s);
    states.push_back(q);
  }
  return states;
}

inline StateId final_state(const DfaModel& m, std::span<const SymbolId> trace) {
  StateId q = m.initial();
  for (SymbolId s : trace) q = m.next(q, s);
  return q;
}

inline bool accepts(const DfaModel& m, std::span<const SymbolId> trace) {
  return m.is_accepting(final_state(m, trace));
}

// One state accepting everything.
inline DfaModel universal_dfa(const Alphabet& alphabet) {
  return DfaModel(alphabet, 1, 0, {true}, {true},
                  std::vector<StateId>(alphabet.size(), 0));
}

inline DfaModel empty_dfa(const Alphabet& alphabet) {
  return DfaModel(alphabet, 1, 0, {false}, {true},
                  std::vector<StateId>(alphabet.size(), 0));
}

enum class ProductMode { intersection, union_, difference };

// Reachable synchronous product; states numbered in breadth-first
// discovery order.
inline DfaModel product(const DfaModel& m1, const DfaModel& m2,
                        ProductMode mode = ProductMode::intersection) {
  if (!(m1.alphabet() == m2.alphabet())) throw AlphabetMismatchError();
  const std::size_t k = m1.n_symbols();
  std::map<std::pair<StateId, StateId>, StateId> ids;
  std::vector<std::pair<StateId, StateId>> pairs;
  std::vector<StateId> delta;
  auto intern = [&](StateId a, StateId b) {
    auto [it, fresh] = ids.try_emplace({a, b}, static_cast<StateId>(pairs.size()));
    if (fresh) pairs.emplace_back(a, b);
    return it->second;
  };
  intern(m1.initial(), m2.initial());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto [a, b] = pairs[i];
    for (SymbolId s = 0; s < k; ++s) delta.push_back(intern(m1.next(a, s), m2.next(b, s)));
  }
  std::vector<bool> acc(pairs.size()), abs(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto [a, b] = pairs[i];
    bool x = m1.is_accepting(a), y = m2.is_accepting(b);
    switch (mode) {
      case ProductMode::intersection: acc[i] = x && y; break;
      case ProductMode::union_: acc[i] = x || y; break;
      case ProductMode::difference: acc[i] = x && !y; break;
    }
    abs[i] = m1.is_absorbing(a) && m2.is_absorbing(b);
  }
  return DfaModel(m1.alphabet(), pairs.size(), 0, std::move(acc),
                  std::move(abs), std::move(delta));
}

inline DfaModel complement(const DfaModel& m) {
  std::vector<bool> acc(m.n_states());
  for (StateId q = 0; q < m.n_states(); ++q) acc[q] = !m.is_accepting(q);
  return DfaModel(m.alphabet(), m.n_states(), m.initial(), std::move(acc),
                  m.absorbing_mask(), m.delta());
}

// Shortest accepted trace; ties go to the smaller symbol id at each step.
inline std::optional<Trace> find_accepted_witness(const DfaModel& m) {
  constexpr StateId kNone = static_cast<StateId>(-1);
  std::vector<StateId> parent(m.n_states(), kNone);
  std::vector<SymbolId> via(m.n_states(), 0);
  std::vector<bool> seen(m.n_states(), false);
  std::queue<StateId> q;
  seen[m.initial()] = true;
  q.push(m.initial());
  while (!q.empty()) {
    StateId cur = q.front();
    q.pop();
    if (m.is_accepting(cur)) {
      Trace out;
      for (StateId s = cur; s != m.initial(); s = parent[s]) out.push_back(via[s]);
      std::reverse(out.begin(), out.end());
      return out;
    }
    for (SymbolId s = 0; s < m.n_symbols(); ++s) {
      StateId nx = m.next(cur, s);
      if (seen[nx]) continue;
      seen[nx] = true;
      parent[nx] = cur;
      via[nx] = s;
      q.push(nx);
    }
  }
  return std::nullopt;
}

inline bool language_empty(const DfaModel& m) {
  return !find_accepted_witness(m).has_value();
}

inline std::vector<bool> reachable_states(const DfaModel& m) {
  std::vector<bool> seen(m.n_states(), false);
  std::vector<StateId> stack{m.initial()};
  seen[m.initial()] = true;
  while (!stack.empty()) {
    StateId q = stack.back();
    stack.pop_back();
    for (SymbolId s = 0; s < m.n_symbols(); ++s) {
      StateId nx = m.next(q, s);
      if (!seen[nx]) {
        seen[nx] = true;
        stack.push_back(nx);
      }
    }
  }
  return seen;
}

// States from which some accepting state is reachable.
inline std::vector<bool> coreachable_states(const DfaModel& m) {
  std::vector<bool> live = m.accepting_mask();
  for (bool changed = true; changed;) {
    changed = false;
    for (StateId q = 0; q < m.n_states(); ++q) {
      if (live[q]) continue;
      for (SymbolId s = 0; s < m.n_symbols(); ++s)
        if (live[m.next(q, s)]) {
          live[q] = changed = true;
          break;
        }
    }
  }
  return live;
}

inline nlohmann::json to_json(const DfaModel& m) {
  nlohmann::json delta = nlohmann::json::array();
  for (StateId q = 0; q < m.n_states(); ++q) {
    nlohmann::json row = nlohmann::json::array();
    for (SymbolId s = 0; s < m.n_symbols(); ++s) row.push_back(m.next(q, s));
    delta.push_back(std::move(row));
  }
  return {{"n_states", m.n_states()},
          {"initial", m.initial()},
          {"accepting", m.accepting_states()},
          {"absorbing", m.absorbing_states()},
          {"alphabet", m.alphabet().symbols()},
          {"delta", std::move(delta)}};
}

inline DfaModel dfa_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw DataError("automaton JSON must be an object");
    auto n = j.at("n_states").get<std::size_t>();
    auto initial = j.at("initial").get<StateId>();
    auto symbols = j.at("alphabet").get<std::vector<std::string>>();
    Alphabet alphabet(symbols);
    std::vector<bool> acc(n, false), abs(n, false);
    for (StateId q : j.at("accepting").get<std::vector<StateId>>()) {
      if (q >= n) throw DataError("accepting state out of range");
      acc[q] = true;
    }
    for (StateId q : j.at("absorbing").get<std::vector<StateId>>()) {
      if (q >= n) throw DataError("absorbing state out of range");
      abs[q] = true;
    }
    const auto& rows = j.at("delta");
    if (!rows.is_array() || rows.size() != n)
      throw DataError("delta must have one row per state");
    std::vector<StateId> delta;
    delta.reserve(n * alphabet.size());
    for (const auto& row : rows) {
      auto r = row.get<std::vector<StateId>>();
      if (r.size() != alphabet.size())
        throw DataError("delta row must have one entry per symbol");
      delta.insert(delta.end(), r.begin(), r.end());
    }
    return DfaModel(std::move(alphabet), n, initial, std::move(acc),
                    std::move(abs), std::move(delta));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("automaton schema violation: ") + e.what());
  }
}

inline DfaModel dfa_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("automaton schema violation: ") + e.what());
  }
  return dfa_from_json(j);
}

// Graphviz rendering; parallel edges between two states share one label.
inline std::string to_dot(const DfaModel& m) {
  std::ostringstream out;
  out << "digraph dfa {\n  rankdir=LR;\n  start [shape=point];\n";
  for (StateId q = 0; q < m.n_states(); ++q) {
    out << "  q" << q << " [shape=" << (m.is_accepting(q) ? "doublecircle" : "circle");
    if (m.is_absorbing(q)) out << ", xlabel=\"absorbing\"";
    out << "];\n";
  }
  out << "  start -> q" << m.initial() << ";\n";
  for (StateId q = 0; q < m.n_states(); ++q) {
    std::map<StateId, std::vector<SymbolId>> groups;
    for (SymbolId s = 0; s < m.n_symbols(); ++s) groups[m.next(q, s)].push_back(s);
    for (const auto& [target, syms] : groups) {
      out << "  q" << q << " -> q" << target << " [label=\"";
      for (std::size_t i = 0; i < syms.size(); ++i)
        out << (i ? "," : "") << m.alphabet().symbol(syms[i]);
      out << "\"];\n";
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace seqdfa
