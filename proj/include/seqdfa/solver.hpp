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
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <mutex>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "seqdfa/program.hpp"

namespace seqdfa {

struct SolveOptions {
  double time_limit = 900.0;  // seconds
  unsigned threads = 1;
  std::uint64_t seed = 0;
  unsigned dives = 16;  // randomized warm-start dives
};

// Objectives closer than this are treated as equal.
inline constexpr double kCostTolerance = 1e-9;

namespace detail {

constexpr StateId kUnassigned = static_cast<StateId>(-1);

// Best solution so far. Ties are broken towards the lexicographically
// smallest assignment so that the optimum is canonical.
class SharedIncumbent {
 public:
  SharedIncumbent(double objective, std::vector<StateId> assignment)
      : objective_(objective), assignment_(std::move(assignment)) {
    history_.push_back(objective);
  }

  double objective() const { return objective_.load(std::memory_order_acquire); }

  bool offer(double objective, std::span<const StateId> assignment) {
    std::lock_guard lock(mu_);
    double cur = objective_.load(std::memory_order_relaxed);
    bool better = objective < cur - kCostTolerance ||
                  (objective <= cur + kCostTolerance &&
                   std::lexicographical_compare(assignment.begin(), assignment.end(),
                                                assignment_.begin(), assignment_.end()));
    if (!better) return false;
    assignment_.assign(assignment.begin(), assignment.end());
    objective_.store(objective, std::memory_order_release);
    history_.push_back(objective);
    return true;
  }

  // True when assignment[1..=last] compares greater than the incumbent's.
  bool prefix_greater(std::span<const StateId> assignment, std::size_t last) const {
    std::lock_guard lock(mu_);
    for (std::size_t i = 1; i <= last; ++i) {
      if (assignment[i] != assignment_[i]) return assignment[i] > assignment_[i];
    }
    return false;
  }

  std::vector<StateId> assignment() const {
    std::lock_guard lock(mu_);
    return assignment_;
  }

  std::vector<double> history() const {
    std::lock_guard lock(mu_);
    return history_;
  }

 private:
  mutable std::mutex mu_;
  std::atomic<double> objective_;
  std::vector<StateId> assignment_;
  std::vector<double> history_;
};

// Per-node lower-bound tables for the subtree hanging below each node.
struct BoundTables {
  std::size_t n_nodes = 0, n_states = 0, n_symbols = 0;
  std::vector<NodeId> parent;
  std::vector<SymbolId> symbol;
  std::vector<std::vector<NodeId>> children;
  std::vector<double> node_cost;   // [n * Q + q]
  std::vector<double> sink_cost;   // [n * Q + q], whole subtree in sink q
  std::vector<double> free_lb;     // subtree bound, state of n unconstrained
  std::vector<double> child_free;  // sum of free_lb over children
  std::vector<bool> absorbing;
  std::vector<int> symmetry_prev;  // previous interchangeable state or -1

  explicit BoundTables(const AssignmentProgram& p)
      : n_nodes(p.n_nodes()), n_states(p.n_states()), n_symbols(p.n_symbols()) {
    const auto& tree = p.tree();
    const auto& layout = p.layout();
    const std::size_t N = n_nodes, Q = n_states;
    parent.assign(N, 0);
    symbol.assign(N, 0);
    children.resize(N);
    for (const auto& n : tree.nodes()) {
      if (n.parent) {
        parent[n.id] = *n.parent;
        symbol[n.id] = *n.incoming_symbol;
      }
      for (const auto& [s, c] : n.children) children[n.id].push_back(c);
    }
    absorbing.resize(Q);
    for (StateId q = 0; q < Q; ++q) absorbing[q] = layout.is_absorbing(q);

    node_cost.resize(N * Q);
    for (NodeId n = 0; n < N; ++n)
      for (StateId q = 0; q < Q; ++q) node_cost[n * Q + q] = p.node_cost(n, q);

    sink_cost.assign(N * Q, 0.0);
    free_lb.assign(N, 0.0);
    child_free.assign(N, 0.0);
    // Breadth-first ids: every child has a larger id than its parent.
    for (NodeId n = static_cast<NodeId>(N); n-- > 0;) {
      for (StateId q = 0; q < Q; ++q) {
        if (!absorbing[q]) continue;
        double s = node_cost[n * Q + q];
        for (NodeId c : children[n]) s += sink_cost[c * Q + q];
        sink_cost[n * Q + q] = s;
      }
      double cf = 0.0;
      for (NodeId c : children[n]) cf += free_lb[c];
      child_free[n] = cf;
      double best = std::numeric_limits<double>::infinity();
      for (StateId q = 0; q < Q; ++q) best = std::min(best, given(n, q));
      free_lb[n] = best;
    }

    symmetry_prev.assign(Q, -1);
    int last_acc = -1, last_rej = -1;
    for (StateId q = 1; q < layout.absorb_accept(); ++q) {
      int& last = layout.is_accepting(q) ? last_acc : last_rej;
      symmetry_prev[q] = last;
      last = static_cast<int>(q);
    }
  }

  // Bound for the subtree of n when n is assigned q.
  double given(NodeId n, StateId q) const {
    return absorbing[q] ? sink_cost[n * n_states + q]
                        : node_cost[n * n_states + q] + child_free[n];
  }
};

// Depth-first branch and bound over nodes in breadth-first order.
class Search {
 public:
  Search(const AssignmentProgram& p, const BoundTables& t, SharedIncumbent& inc,
         std::chrono::steady_clock::time_point deadline, std::atomic<bool>& stop)
      : p_(p), t_(t), inc_(inc), deadline_(deadline), stop_(stop) {
    reset();
  }

  void reset() {
    const std::size_t N = t_.n_nodes, Q = t_.n_states;
    assign_.assign(N, kUnassigned);
    delta_.assign(Q * t_.n_symbols, kUnassigned);
    used_.assign(Q, 0);
    frontier_lb_.assign(N, 0.0);
    undo_.clear();
    assign_[0] = p_.layout().initial();
    used_[assign_[0]] = 1;
    incurred_ = t_.node_cost[assign_[0]];
    frontier_ = 0.0;
    for (NodeId c : t_.children[0]) {
      frontier_lb_[c] = child_bound(c, assign_[0]);
      frontier_ += frontier_lb_[c];
    }
  }

  double bound() const { return incurred_ + frontier_; }
  std::size_t depth() const { return undo_.size(); }  // nodes 1..depth assigned
  const std::vector<StateId>& assignment() const { return assign_; }
  std::uint64_t explored() const { return explored_; }

  // Admissible states for node n given the current partial assignment.
  void candidates(NodeId n, std::vector<StateId>& out) const {
    out.clear();
    StateId from = assign_[t_.parent[n]];
    if (t_.absorbing[from]) {
      out.push_back(from);
      return;
    }
    StateId fixed = delta_[from * t_.n_symbols + t_.symbol[n]];
    if (fixed != kUnassigned) {
      out.push_back(fixed);
      return;
    }
    for (StateId q = 0; q < t_.n_states; ++q) {
      int prev = t_.symmetry_prev[q];
      if (used_[q] == 0 && prev >= 0 && used_[prev] == 0) continue;
      out.push_back(q);
    }
  }

  void apply(NodeId n, StateId q) {
    const std::size_t K = t_.n_symbols;
    Undo u{incurred_, frontier_, kUnassigned};
    StateId from = assign_[t_.parent[n]];
    std::size_t slot = from * K + t_.symbol[n];
    double cost = t_.node_cost[n * t_.n_states + q];
    if (!t_.absorbing[from] && delta_[slot] == kUnassigned) {
      delta_[slot] = q;
      u.delta_slot = static_cast<StateId>(slot);
      if (q != from) cost += p_.weights().lambda_edge;
    }
    assign_[n] = q;
    ++used_[q];
    incurred_ += cost;
    frontier_ -= frontier_lb_[n];
    for (NodeId c : t_.children[n]) {
      frontier_lb_[c] = child_bound(c, q);
      frontier_ += frontier_lb_[c];
    }
    undo_.push_back(u);
  }

  void undo(NodeId n) {
    Undo u = undo_.back();
    undo_.pop_back();
    --used_[assign_[n]];
    assign_[n] = kUnassigned;
    if (u.delta_slot != kUnassigned) delta_[u.delta_slot] = kUnassigned;
    incurred_ = u.incurred;
    frontier_ = u.frontier;
  }

  bool prunable(double b) const {
    double inc = inc_.objective();
    if (b > inc + kCostTolerance) return true;
    return b >= inc - kCostTolerance && inc_.prefix_greater(assign_, depth());
  }

  bool time_up() {
    if (stop_.load(std::memory_order_relaxed)) return true;
    if ((++ticks_ & 255u) != 0) return false;
    if (std::chrono::steady_clock::now() >= deadline_) {
      stop_.store(true, std::memory_order_relaxed);
      return true;
    }
    return false;
  }

  // Completes the current partial assignment, one state per node. With
  // probability `greed` (else uniformly) the state with the best bound wins.
  void dive(std::mt19937_64& rng, double greed) {
    const std::size_t start = depth() + 1;
    std::vector<StateId> cand;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (NodeId n = static_cast<NodeId>(start); n < t_.n_nodes; ++n) {
      candidates(n, cand);
      StateId pick = cand.front();
      if (cand.size() > 1) {
        if (coin(rng) < greed) {
          double best = std::numeric_limits<double>::infinity();
          for (StateId q : cand) {
            apply(n, q);
            if (bound() < best - kCostTolerance) {
              best = bound();
              pick = q;
            }
            undo(n);
          }
        } else {
          pick = cand[std::uniform_int_distribution<std::size_t>(0, cand.size() - 1)(rng)];
        }
      }
      apply(n, pick);
    }
    inc_.offer(incurred_, assign_);
    for (NodeId n = static_cast<NodeId>(t_.n_nodes); n-- > start;) undo(n);
  }

  // Exhausts the subtree below the current partial assignment. Returns the
  // smallest bound left unexplored, or +inf when the subtree was finished.
  double exhaust() {
    const std::size_t N = t_.n_nodes;
    const std::size_t base = depth();
    if (base + 1 == N) {
      inc_.offer(incurred_, assign_);
      return std::numeric_limits<double>::infinity();
    }
    struct Frame {
      NodeId node;
      std::vector<StateId> cand;
      std::size_t next = 0;
      bool applied = false;
      double entry_bound;
    };
    std::vector<Frame> stack;
    stack.push_back({static_cast<NodeId>(base + 1), {}, 0, false, bound()});
    candidates(stack.back().node, stack.back().cand);
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.applied) {
        undo(f.node);
        f.applied = false;
      }
      if (time_up()) {
        double open = std::numeric_limits<double>::infinity();
        for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
          if (it->applied) undo(it->node);
          open = std::min(open, it->entry_bound);
        }
        return open;
      }
      if (f.next == f.cand.size()) {
        stack.pop_back();
        continue;
      }
      StateId q = f.cand[f.next++];
      apply(f.node, q);
      f.applied = true;
      ++explored_;
      double b = bound();
      if (prunable(b)) continue;
      if (f.node + 1 == N) {
        inc_.offer(incurred_, assign_);
        continue;
      }
      NodeId child = f.node + 1;
      stack.push_back({child, {}, 0, false, b});
      candidates(child, stack.back().cand);
    }
    return std::numeric_limits<double>::infinity();
  }

 private:
  struct Undo {
    double incurred;
    double frontier;
    StateId delta_slot;
  };

  double child_bound(NodeId c, StateId parent_state) const {
    if (t_.absorbing[parent_state]) return t_.given(c, parent_state);
    StateId fixed = delta_[parent_state * t_.n_symbols + t_.symbol[c]];
    return fixed == kUnassigned ? t_.free_lb[c] : t_.given(c, fixed);
  }

  const AssignmentProgram& p_;
  const BoundTables& t_;
  SharedIncumbent& inc_;
  std::chrono::steady_clock::time_point deadline_;
  std::atomic<bool>& stop_;
  std::vector<StateId> assign_;
  std::vector<StateId> delta_;
  std::vector<std::uint32_t> used_;
  std::vector<double> frontier_lb_;
  std::vector<Undo> undo_;
  double incurred_ = 0.0;
  double frontier_ = 0.0;
  std::uint64_t explored_ = 0;
  std::uint32_t ticks_ = 0;
};

// Every non-root node in the rejecting sink; always feasible.
inline std::vector<StateId> fallback_assignment(const AssignmentProgram& p) {
  std::vector<StateId> a(p.n_nodes(), p.layout().absorb_reject());
  a[p.tree().root()] = p.layout().initial();
  return a;
}

}  // namespace detail

// Exact anytime solver. Returns the canonical optimum (lexicographically
// smallest optimal assignment) unless the time limit interrupts the search,
// in which case the best incumbent and a valid lower bound are reported.
inline SolveResult solve(const AssignmentProgram& p, const SolveOptions& opts = {}) {
  if (!(opts.time_limit > 0)) throw UsageError("time limit must be positive");
  using clock = std::chrono::steady_clock;
  const auto started = clock::now();
  const auto deadline =
      started + std::chrono::duration_cast<clock::duration>(
                    std::chrono::duration<double>(opts.time_limit));

  detail::BoundTables tables(p);
  auto fallback = detail::fallback_assignment(p);
  auto fallback_obj = evaluate_assignment(p, fallback);
  if (!fallback_obj) throw InvariantError("fallback assignment is infeasible");
  detail::SharedIncumbent inc(*fallback_obj, fallback);
  std::atomic<bool> stop{false};

  detail::Search root(p, tables, inc, deadline, stop);
  const double root_bound = root.bound();
  {
    std::mt19937_64 rng(opts.seed);
    root.dive(rng, 1.0);
    for (unsigned i = 0; i < opts.dives; ++i) root.dive(rng, 0.8);
  }

  // Work units: prefixes of the search tree, in lexicographic order.
  const unsigned threads = std::max(1u, opts.threads);
  std::vector<std::vector<StateId>> units{{}};
  if (threads > 1) {
    std::vector<StateId> cand;
    while (units.size() < 8 * threads) {
      std::vector<std::vector<StateId>> next;
      bool grew = false;
      for (const auto& u : units) {
        if (u.size() + 1 >= p.n_nodes()) {
          next.push_back(u);
          continue;
        }
        for (std::size_t i = 0; i < u.size(); ++i) root.apply(static_cast<NodeId>(i + 1), u[i]);
        root.candidates(static_cast<NodeId>(u.size() + 1), cand);
        for (std::size_t i = u.size(); i-- > 0;) root.undo(static_cast<NodeId>(i + 1));
        for (StateId q : cand) {
          auto v = u;
          v.push_back(q);
          next.push_back(std::move(v));
        }
        grew = grew || !cand.empty();
      }
      units = std::move(next);
      if (!grew) break;
    }
  }

  std::atomic<std::size_t> next_unit{0};
  std::atomic<std::uint64_t> explored{0};
  std::mutex open_mu;
  double open_bound = std::numeric_limits<double>::infinity();
  auto worker = [&] {
    detail::Search s(p, tables, inc, deadline, stop);
    for (;;) {
      std::size_t k = next_unit.fetch_add(1);
      if (k >= units.size()) break;
      const auto& u = units[k];
      double open = std::numeric_limits<double>::infinity();
      if (stop.load()) {
        open = root_bound;
      } else {
        s.reset();
        bool pruned = false;
        for (std::size_t i = 0; i < u.size() && !pruned; ++i) {
          s.apply(static_cast<NodeId>(i + 1), u[i]);
          pruned = s.prunable(s.bound());
        }
        if (!pruned) {
          if (u.size() + 1 == p.n_nodes())
            inc.offer(s.bound(), s.assignment());
          else
            open = s.exhaust();
        }
      }
      if (open < std::numeric_limits<double>::infinity()) {
        std::lock_guard lock(open_mu);
        open_bound = std::min(open_bound, open);
      }
    }
    explored += s.explored();
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  SolveResult r;
  r.assignment = inc.assignment();
  r.objective = inc.objective();
  const bool finished = open_bound == std::numeric_limits<double>::infinity();
  r.status = finished ? SolveStatus::optimal : SolveStatus::feasible_timeout;
  r.bound = finished ? r.objective : std::min(r.objective, std::max(open_bound, root_bound));
  r.stats.nodes_explored = explored.load() + root.explored();
  r.stats.wall_time = std::chrono::duration<double>(clock::now() - started).count();
  r.stats.incumbent_history = inc.history();
  return r;
}

}  // namespace seqdfa
