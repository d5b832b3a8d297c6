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
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seqdfa/dfa.hpp"
#include "seqdfa/error.hpp"
#include "seqdfa/prefix_tree.hpp"

namespace seqdfa {

// Which of the q_max candidate states are accepting / absorbing. State 0 is
// initial, q_max-2 the accepting sink and q_max-1 the rejecting sink.
class StateLayout {
 public:
  // Default layout: the accepting sink plus odd states in 1..q_max-3.
  static StateLayout standard(std::size_t q_max) {
    check_size(q_max);
    std::vector<StateId> acc;
    for (StateId q = 1; q + 3 <= q_max; q += 2) acc.push_back(q);
    return StateLayout(q_max, acc);
  }

  // `accepting` lists the non-sink accepting states; the accepting sink is
  // always added.
  StateLayout(std::size_t q_max, std::span<const StateId> accepting)
      : q_max_(q_max), accepting_(q_max, false) {
    check_size(q_max);
    for (StateId q : accepting) {
      if (q >= q_max) throw UsageError("accepting state out of range");
      accepting_[q] = true;
    }
    accepting_[absorb_accept()] = true;
    if (accepting_[initial()])
      throw UsageError("the initial state cannot be accepting");
    if (accepting_[absorb_reject()])
      throw UsageError("the rejecting sink cannot be accepting");
  }

  std::size_t q_max() const { return q_max_; }
  StateId initial() const { return 0; }
  StateId absorb_accept() const { return static_cast<StateId>(q_max_ - 2); }
  StateId absorb_reject() const { return static_cast<StateId>(q_max_ - 1); }
  bool is_accepting(StateId q) const { return accepting_.at(q); }
  bool is_absorbing(StateId q) const { return q + 2 >= q_max_; }
  const std::vector<bool>& accepting_mask() const { return accepting_; }
  std::vector<bool> absorbing_mask() const {
    std::vector<bool> m(q_max_, false);
    m[absorb_accept()] = m[absorb_reject()] = true;
    return m;
  }

  // Non-sink accepting states other than the initial one.
  std::vector<StateId> free_accepting() const {
    std::vector<StateId> out;
    for (StateId q = 1; q < absorb_accept(); ++q)
      if (accepting_[q]) out.push_back(q);
    return out;
  }

 private:
  static void check_size(std::size_t q_max) {
    if (q_max < 3) throw UsageError("q_max must be at least 3");
  }

  std::size_t q_max_;
  std::vector<bool> accepting_;
};

struct ProgramWeights {
  double lambda_edge = 0.0;    // per transition leaving its state
  double lambda_absorb = 0.0;  // per node outside the sinks
  double lambda_pos = 1.0;     // misclassified positive weight
  double lambda_neg = 1.0;     // misclassified negative weight
};

// The 0-1 assignment problem: pick a state for every prefix-tree node such
// that some deterministic transition function explains the assignment.
class AssignmentProgram {
 public:
  AssignmentProgram(PrefixTree tree, StateLayout layout, ProgramWeights weights)
      : tree_(std::move(tree)), layout_(std::move(layout)), weights_(weights) {
    if (weights_.lambda_edge < 0 || weights_.lambda_absorb < 0 ||
        weights_.lambda_pos < 0 || weights_.lambda_neg < 0)
      throw UsageError("regularization weights must be non-negative");
    if (tree_.size() == 0) throw UsageError("empty prefix tree");
    cost_accept_.reserve(tree_.size());
    cost_reject_.reserve(tree_.size());
    for (const auto& n : tree_.nodes()) {
      cost_accept_.push_back(cost_accept(n, weights_.lambda_neg));
      cost_reject_.push_back(cost_reject(n, weights_.lambda_pos));
    }
  }

  const PrefixTree& tree() const { return tree_; }
  const StateLayout& layout() const { return layout_; }
  const ProgramWeights& weights() const { return weights_; }
  std::size_t n_states() const { return layout_.q_max(); }
  std::size_t n_symbols() const { return tree_.alphabet().size(); }
  std::size_t n_nodes() const { return tree_.size(); }

  std::size_t n_assignment_vars() const { return n_nodes() * n_states(); }
  std::size_t n_transition_vars() const {
    return n_states() * n_states() * n_symbols();
  }

  double misclassification_cost(NodeId n, StateId q) const {
    return layout_.is_accepting(q) ? cost_accept_[n] : cost_reject_[n];
  }

  // Everything a node contributes once assigned to q, except transitions.
  double node_cost(NodeId n, StateId q) const {
    return misclassification_cost(n, q) +
           (layout_.is_absorbing(q) ? 0.0 : weights_.lambda_absorb);
  }

 private:
  PrefixTree tree_;
  StateLayout layout_;
  ProgramWeights weights_;
  std::vector<double> cost_accept_;
  std::vector<double> cost_reject_;
};

inline AssignmentProgram build_program(const PrefixTree& tree,
                                       const StateLayout& layout,
                                       const ProgramWeights& weights) {
  return AssignmentProgram(tree, layout, weights);
}

// Objective of a full assignment, or nullopt if no deterministic transition
// function (with self-looping sinks) realizes it.
inline std::optional<double> evaluate_assignment(const AssignmentProgram& p,
                                                 std::span<const StateId> assignment) {
  const auto& tree = p.tree();
  if (assignment.size() != tree.size()) return std::nullopt;
  if (assignment[tree.root()] != p.layout().initial()) return std::nullopt;
  std::map<std::pair<StateId, SymbolId>, StateId> delta;
  double total = 0.0;
  for (const auto& n : tree.nodes()) {
    StateId q = assignment[n.id];
    if (q >= p.n_states()) return std::nullopt;
    total += p.node_cost(n.id, q);
    if (!n.parent) continue;
    StateId from = assignment[*n.parent];
    if (p.layout().is_absorbing(from) && q != from) return std::nullopt;
    auto [it, fresh] = delta.try_emplace({from, *n.incoming_symbol}, q);
    if (!fresh && it->second != q) return std::nullopt;
  }
  for (const auto& [key, to] : delta)
    if (to != key.first) total += p.weights().lambda_edge;
  return total;
}

enum class SolveStatus { optimal, feasible_timeout, infeasible };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::feasible_timeout: return "feasible_timeout";
    case SolveStatus::infeasible: return "infeasible";
  }
  return "?";
}

struct SolveStats {
  std::uint64_t nodes_explored = 0;
  double wall_time = 0.0;  // seconds
  // Objective after each incumbent improvement, in discovery order.
  std::vector<double> incumbent_history;
};

struct SolveResult {
  std::vector<StateId> assignment;  // indexed by node id
  double objective = 0.0;
  double bound = 0.0;
  SolveStatus status = SolveStatus::infeasible;
  SolveStats stats;
};

// Turns a solved assignment into a complete automaton. Transitions no tree
// edge constrains become self-loops.
inline DfaModel decode(const AssignmentProgram& p, const SolveResult& r) {
  if (r.status == SolveStatus::infeasible)
    throw UsageError("cannot decode an infeasible result");
  const auto& tree = p.tree();
  const auto& layout = p.layout();
  const std::size_t q_max = p.n_states(), k = p.n_symbols();
  if (r.assignment.size() != tree.size())
    throw InvariantError("assignment size does not match the prefix tree");
  if (r.assignment[tree.root()] != layout.initial())
    throw InvariantError("root is not assigned the initial state");

  constexpr StateId kUnset = static_cast<StateId>(-1);
  std::vector<StateId> delta(q_max * k, kUnset);
  for (const auto& n : tree.nodes()) {
    if (!n.parent) continue;
    StateId from = r.assignment[*n.parent], to = r.assignment[n.id];
    if (from >= q_max || to >= q_max) throw InvariantError("state out of range");
    if (layout.is_absorbing(from) && to != from)
      throw InvariantError("assignment leaves an absorbing state");
    StateId& slot = delta[from * k + *n.incoming_symbol];
    if (slot != kUnset && slot != to)
      throw InvariantError("assignment is not deterministic");
    slot = to;
  }
  for (StateId q = 0; q < q_max; ++q)
    for (SymbolId s = 0; s < k; ++s)
      if (delta[q * k + s] == kUnset) delta[q * k + s] = q;

  DfaModel m(tree.alphabet(), q_max, layout.initial(), layout.accepting_mask(),
             layout.absorbing_mask(), std::move(delta));
  for (const auto& n : tree.nodes()) {
    if (!n.parent) continue;
    if (m.next(r.assignment[*n.parent], *n.incoming_symbol) != r.assignment[n.id])
      throw InvariantError("decoded automaton does not replay the assignment");
  }
  return m;
}

namespace detail {

inline std::string lp_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Accumulates "+ c var" terms, wrapping long rows.
class LpRow {
 public:
  explicit LpRow(std::string head) : text_(std::move(head)) {}

  void add(double coef, const std::string& var) {
    if (coef == 0.0) return;
    if (line_len_ > 200) {
      text_ += "\n   ";
      line_len_ = 0;
    }
    std::string term = (coef < 0 ? " - " : " + ") +
                       (std::abs(coef) == 1.0 ? std::string() : lp_number(std::abs(coef)) + " ") +
                       var;
    text_ += term;
    line_len_ += term.size();
    ++terms_;
  }

  std::size_t terms() const { return terms_; }
  std::string str() const { return text_; }

 private:
  std::string text_;
  std::size_t line_len_ = 0;
  std::size_t terms_ = 0;
};

}  // namespace detail

inline std::string lp_x(NodeId n, StateId q) {
  return "x_n" + std::to_string(n) + "_q" + std::to_string(q);
}

inline std::string lp_d(StateId q, SymbolId s, StateId t) {
  return "d_q" + std::to_string(q) + "_s" + std::to_string(s) + "_q" + std::to_string(t);
}

// CPLEX LP rendering of the program. The auxiliary cost variables are
// substituted into the objective, so only x and d appear.
inline std::string export_lp(const AssignmentProgram& p) {
  const auto& tree = p.tree();
  const auto& layout = p.layout();
  const std::size_t Q = p.n_states(), K = p.n_symbols();
  std::string out = "Minimize\n";

  detail::LpRow obj(" obj:");
  for (const auto& n : tree.nodes())
    for (StateId q = 0; q < Q; ++q) obj.add(p.node_cost(n.id, q), lp_x(n.id, q));
  for (StateId q = 0; q < Q; ++q)
    for (SymbolId s = 0; s < K; ++s)
      for (StateId t = 0; t < Q; ++t)
        if (t != q) obj.add(p.weights().lambda_edge, lp_d(q, s, t));
  out += obj.terms() == 0 ? " obj: 0 " + lp_x(0, 0) : obj.str();
  out += "\nSubject To\n";

  for (const auto& n : tree.nodes()) {
    detail::LpRow row(" one_n" + std::to_string(n.id) + ":");
    for (StateId q = 0; q < Q; ++q) row.add(1.0, lp_x(n.id, q));
    out += row.str() + " = 1\n";
  }
  out += " root: " + lp_x(tree.root(), layout.initial()) + " = 1\n";
  for (StateId q = 0; q < Q; ++q)
    for (SymbolId s = 0; s < K; ++s) {
      detail::LpRow row(" det_q" + std::to_string(q) + "_s" + std::to_string(s) + ":");
      for (StateId t = 0; t < Q; ++t) row.add(1.0, lp_d(q, s, t));
      out += row.str() + " = 1\n";
    }
  for (StateId q = 0; q < Q; ++q) {
    if (!layout.is_absorbing(q)) continue;
    for (SymbolId s = 0; s < K; ++s)
      out += " sink_q" + std::to_string(q) + "_s" + std::to_string(s) + ": " +
             lp_d(q, s, q) + " = 1\n";
  }
  for (const auto& n : tree.nodes()) {
    if (!n.parent) continue;
    for (StateId q = 0; q < Q; ++q)
      for (StateId t = 0; t < Q; ++t)
        out += " link_n" + std::to_string(n.id) + "_q" + std::to_string(q) + "_q" +
               std::to_string(t) + ": " + lp_x(*n.parent, q) + " + " + lp_x(n.id, t) +
               " - " + lp_d(q, *n.incoming_symbol, t) + " <= 1\n";
  }
  out += "Binary\n";
  for (const auto& n : tree.nodes())
    for (StateId q = 0; q < Q; ++q) out += " " + lp_x(n.id, q) + "\n";
  for (StateId q = 0; q < Q; ++q)
    for (SymbolId s = 0; s < K; ++s)
      for (StateId t = 0; t < Q; ++t) out += " " + lp_d(q, s, t) + "\n";
  out += "End\n";
  return out;
}

}  // namespace seqdfa
