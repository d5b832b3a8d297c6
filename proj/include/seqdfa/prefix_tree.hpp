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
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "seqdfa/error.hpp"
#include "seqdfa/traces.hpp"

namespace seqdfa {

using NodeId = std::uint32_t;

struct PtNode {
  NodeId id = 0;
  std::optional<NodeId> parent;
  std::optional<SymbolId> incoming_symbol;
  std::map<SymbolId, NodeId> children;
  double w_pos = 0.0;  // weighted positive traces through this node
  double w_neg = 0.0;
  std::uint64_t raw_pos = 0;
  std::uint64_t raw_neg = 0;
};

enum class Weighting { length_normalized, raw };

// Tree of all training prefixes. Node ids are breadth-first with children
// visited in symbol order; the root is node 0.
class PrefixTree {
 public:
  PrefixTree(Alphabet alphabet, std::vector<PtNode> nodes)
      : alphabet_(std::move(alphabet)), nodes_(std::move(nodes)) {}

  NodeId root() const { return 0; }
  std::size_t size() const { return nodes_.size(); }
  const PtNode& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<PtNode>& nodes() const { return nodes_; }
  const Alphabet& alphabet() const { return alphabet_; }

  // Node spelled by `prefix`, if it exists.
  std::optional<NodeId> find(std::span<const SymbolId> prefix) const {
    NodeId n = root();
    for (SymbolId s : prefix) {
      const auto& ch = nodes_[n].children;
      auto it = ch.find(s);
      if (it == ch.end()) return std::nullopt;
      n = it->second;
    }
    return n;
  }

  double total_w_pos() const {
    double t = 0.0;
    for (const auto& n : nodes_) t += n.w_pos;
    return t;
  }

  double total_w_neg() const {
    double t = 0.0;
    for (const auto& n : nodes_) t += n.w_neg;
    return t;
  }

  // Graphviz dump; nodes read "id [w+|w-]".
  std::string to_dot() const {
    std::ostringstream out;
    out << "digraph prefix_tree {\n  rankdir=LR;\n";
    for (const auto& n : nodes_)
      out << "  n" << n.id << " [label=\"" << n.id << " [" << n.w_pos << "|"
          << n.w_neg << "]\"];\n";
    for (const auto& n : nodes_)
      for (const auto& [sym, child] : n.children)
        out << "  n" << n.id << " -> n" << child << " [label=\""
            << alphabet_.symbol(sym) << "\"];\n";
    out << "}\n";
    return out.str();
  }

 private:
  Alphabet alphabet_;
  std::vector<PtNode> nodes_;
};

inline PrefixTree build_prefix_tree(std::span<const BinaryTrace> traces,
                                    Weighting weighting,
                                    const Alphabet& alphabet) {
  if (traces.empty()) throw UsageError("cannot build a prefix tree from no traces");

  // Insertion-order trie first, renumbered breadth-first below.
  std::vector<PtNode> trie(1);
  auto add_cost = [&](PtNode& n, bool positive, double w) {
    if (positive) {
      n.w_pos += w;
      ++n.raw_pos;
    } else {
      n.w_neg += w;
      ++n.raw_neg;
    }
  };
  for (const auto& bt : traces) {
    if (bt.trace.empty()) throw DataError("empty trace in prefix tree input");
    double w = weighting == Weighting::raw
                   ? 1.0
                   : 1.0 / static_cast<double>(bt.trace.size());
    NodeId n = 0;
    add_cost(trie[n], bt.positive, w);
    for (SymbolId s : bt.trace) {
      if (!alphabet.contains(s)) throw DataError("symbol id out of range");
      auto it = trie[n].children.find(s);
      if (it == trie[n].children.end()) {
        NodeId child = static_cast<NodeId>(trie.size());
        trie[n].children.emplace(s, child);
        PtNode fresh;
        fresh.parent = n;
        fresh.incoming_symbol = s;
        trie.push_back(std::move(fresh));
        n = child;
      } else {
        n = it->second;
      }
      add_cost(trie[n], bt.positive, w);
    }
  }

  std::vector<NodeId> new_id(trie.size());
  std::vector<NodeId> order;
  order.reserve(trie.size());
  std::queue<NodeId> frontier;
  frontier.push(0);
  while (!frontier.empty()) {
    NodeId n = frontier.front();
    frontier.pop();
    new_id[n] = static_cast<NodeId>(order.size());
    order.push_back(n);
    for (const auto& [sym, child] : trie[n].children) frontier.push(child);
  }
  std::vector<PtNode> nodes(trie.size());
  for (NodeId old : order) {
    PtNode n = trie[old];
    n.id = new_id[old];
    if (n.parent) n.parent = new_id[*n.parent];
    for (auto& [sym, child] : n.children) child = new_id[child];
    nodes[n.id] = std::move(n);
  }
  return PrefixTree(alphabet, std::move(nodes));
}

// Cost of predicting `n` positive: the negatives it would misclassify.
inline double cost_accept(const PtNode& n, double lambda_neg) {
  return lambda_neg * n.w_neg;
}

// Cost of predicting `n` negative.
inline double cost_reject(const PtNode& n, double lambda_pos) {
  return lambda_pos * n.w_pos;
}

}  // namespace seqdfa
