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
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqdfa/error.hpp"
#include "seqdfa/inference.hpp"
#include "seqdfa/traces.hpp"

namespace seqdfa {

// Per-class probabilities normalized to a distribution; uniform when all
// are zero.
inline std::vector<double> normalized(std::vector<double> v) {
  double total = 0.0;
  for (double x : v) total += x;
  if (!(total > 0)) {
    v.assign(v.size(), v.empty() ? 0.0 : 1.0 / double(v.size()));
    return v;
  }
  for (double& x : v) x /= total;
  return v;
}

// Full observation tree shared by all classes. A class automaton sits at
// the node reached so far; nodes whose traces all share one label act as
// that class's positive or negative absorbing state. Unseen
// continuations keep the last node reached.
class DfaFtModel {
 public:
  struct Node {
    std::map<SymbolId, std::size_t> children;
    std::vector<std::size_t> counts;  // traces through the node, per class
    std::size_t total = 0;
  };

  DfaFtModel(Alphabet alphabet, std::vector<std::string> classes, std::vector<Node> nodes)
      : alphabet_(std::move(alphabet)), classes_(std::move(classes)), nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw DataError("observation tree has no root");
    for (const auto& n : nodes_) {
      if (n.counts.size() != classes_.size()) throw DataError("count vector size mismatch");
      for (const auto& [s, child] : n.children)
        if (s >= alphabet_.size() || child >= nodes_.size())
          throw DataError("observation tree edge out of range");
    }
  }

  const Alphabet& alphabet() const { return alphabet_; }
  const std::vector<std::string>& classes() const { return classes_; }
  const std::vector<Node>& nodes() const { return nodes_; }

  std::size_t step(std::size_t node, SymbolId s) const {
    if (!alphabet_.contains(s)) throw UnknownSymbolError("#" + std::to_string(s));
    const auto& ch = nodes_[node].children;
    auto it = ch.find(s);
    return it == ch.end() ? node : it->second;
  }

  // p(class c | trace passes through node).
  double probability(std::size_t node, ClassId c) const {
    const auto& n = nodes_[node];
    return n.total ? double(n.counts[c]) / double(n.total) : 0.0;
  }

  std::vector<double> distribution(std::size_t node) const {
    std::vector<double> p(classes_.size());
    for (std::size_t c = 0; c < p.size(); ++c) p[c] = probability(node, static_cast<ClassId>(c));
    return normalized(std::move(p));
  }

  std::size_t locate(std::span<const SymbolId> trace) const {
    std::size_t node = 0;
    for (SymbolId s : trace) node = step(node, s);
    return node;
  }

 private:
  Alphabet alphabet_;
  std::vector<std::string> classes_;
  std::vector<Node> nodes_;
};

inline DfaFtModel dfa_ft_train(const LabeledDataset& d) {
  if (d.items.empty()) throw DataError("no records");
  const std::size_t k = d.classes.size();
  std::vector<DfaFtModel::Node> nodes(1);
  nodes[0].counts.assign(k, 0);
  for (const auto& item : d.items) {
    std::size_t cur = 0;
    ++nodes[cur].counts[item.label];
    ++nodes[cur].total;
    for (SymbolId s : item.trace) {
      auto it = nodes[cur].children.find(s);
      if (it == nodes[cur].children.end()) {
        nodes[cur].children.emplace(s, nodes.size());
        cur = nodes.size();
        nodes.emplace_back();
        nodes.back().counts.assign(k, 0);
      } else {
        cur = it->second;
      }
      ++nodes[cur].counts[item.label];
      ++nodes[cur].total;
    }
  }
  return DfaFtModel(d.alphabet, d.classes, std::move(nodes));
}

inline Prediction dfa_ft_predict(const DfaFtModel& m, std::span<const SymbolId> trace) {
  return argmax(m.distribution(m.locate(trace)));
}

inline std::vector<std::vector<double>> dfa_ft_prefixes(const DfaFtModel& m,
                                                        std::span<const SymbolId> trace) {
  std::vector<std::vector<double>> out;
  std::size_t node = 0;
  for (SymbolId s : trace) {
    node = m.step(node, s);
    out.push_back(m.distribution(node));
  }
  return out;
}

inline nlohmann::json to_json(const DfaFtModel& m) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : m.nodes()) {
    nlohmann::json children = nlohmann::json::array();
    for (const auto& [s, c] : n.children) children.push_back({s, c});
    nodes.push_back({{"counts", n.counts}, {"children", std::move(children)}});
  }
  return {{"kind", "dfa-ft"},
          {"classes", m.classes()},
          {"alphabet", m.alphabet().symbols()},
          {"nodes", std::move(nodes)}};
}

inline DfaFtModel dfa_ft_from_json(const nlohmann::json& j) {
  try {
    std::vector<DfaFtModel::Node> nodes;
    for (const auto& jn : j.at("nodes")) {
      DfaFtModel::Node n;
      n.counts = jn.at("counts").get<std::vector<std::size_t>>();
      for (std::size_t c : n.counts) n.total += c;
      for (const auto& e : jn.at("children"))
        n.children.emplace(e.at(0).get<SymbolId>(), e.at(1).get<std::size_t>());
      nodes.push_back(std::move(n));
    }
    return DfaFtModel(Alphabet(j.at("alphabet").get<std::vector<std::string>>()),
                      j.at("classes").get<std::vector<std::string>>(), std::move(nodes));
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("dfa-ft schema violation: ") + ex.what());
  }
}

// Class-conditional n-gram model (n = 1 or 2) with add-alpha smoothing.
// Bigram contexts at t = 1 use a start token.
class NgramModel {
 public:
  NgramModel(Alphabet alphabet, std::vector<std::string> classes, unsigned n, double alpha,
             std::vector<double> prior, std::vector<std::vector<double>> counts)
      : alphabet_(std::move(alphabet)),
        classes_(std::move(classes)),
        n_(n),
        alpha_(alpha),
        prior_(std::move(prior)),
        counts_(std::move(counts)) {
    if (n_ != 1 && n_ != 2) throw UsageError("n-gram order must be 1 or 2");
    if (!(alpha_ > 0)) throw UsageError("smoothing constant must be positive");
    if (prior_.size() != classes_.size() || counts_.size() != classes_.size())
      throw DataError("n-gram arrays must have one entry per class");
    for (const auto& c : counts_)
      if (c.size() != n_contexts() * alphabet_.size())
        throw DataError("n-gram count table has wrong size");
  }

  unsigned order() const { return n_; }
  double alpha() const { return alpha_; }
  const Alphabet& alphabet() const { return alphabet_; }
  const std::vector<std::string>& classes() const { return classes_; }
  const std::vector<double>& prior() const { return prior_; }
  const std::vector<std::vector<double>>& counts() const { return counts_; }

  std::size_t n_contexts() const { return n_ == 1 ? 1 : alphabet_.size() + 1; }
  std::size_t start_context() const { return n_ == 1 ? 0 : alphabet_.size(); }
  std::size_t context_after(SymbolId s) const { return n_ == 1 ? 0 : s; }

  double probability(ClassId c, std::size_t ctx, SymbolId s) const {
    const std::size_t k = alphabet_.size();
    const double* row = counts_[c].data() + ctx * k;
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) total += row[i];
    return (row[s] + alpha_) / (total + alpha_ * double(k));
  }

 private:
  Alphabet alphabet_;
  std::vector<std::string> classes_;
  unsigned n_;
  double alpha_;
  std::vector<double> prior_;
  std::vector<std::vector<double>> counts_;  // [class][context * |alphabet| + symbol]
};

// Prior is the raw training class frequency.
inline NgramModel ngram_train(const LabeledDataset& d, unsigned n, double alpha) {
  if (d.items.empty()) throw DataError("no records");
  if (n != 1 && n != 2) throw UsageError("n-gram order must be 1 or 2");
  const std::size_t k = d.alphabet.size();
  const std::size_t n_ctx = n == 1 ? 1 : k + 1;
  std::vector<std::vector<double>> counts(d.classes.size(), std::vector<double>(n_ctx * k, 0.0));
  auto class_counts = d.class_counts();
  std::vector<double> prior(d.classes.size());
  for (std::size_t c = 0; c < prior.size(); ++c)
    prior[c] = double(class_counts[c]) / double(d.items.size());
  for (const auto& item : d.items) {
    std::size_t ctx = n == 1 ? 0 : k;
    for (SymbolId s : item.trace) {
      counts[item.label][ctx * k + s] += 1.0;
      if (n == 2) ctx = s;
    }
  }
  return NgramModel(d.alphabet, d.classes, n, alpha, std::move(prior), std::move(counts));
}

namespace detail {

inline std::vector<double> softmax_logs(const std::vector<double>& logs) {
  double hi = -INFINITY;
  for (double x : logs) hi = std::max(hi, x);
  std::vector<double> p(logs.size(), 0.0);
  if (hi == -INFINITY) return normalized(std::move(p));
  for (std::size_t c = 0; c < logs.size(); ++c) p[c] = std::exp(logs[c] - hi);
  return normalized(std::move(p));
}

inline std::vector<double> log_prior(const NgramModel& m) {
  std::vector<double> logs(m.classes().size());
  for (std::size_t c = 0; c < logs.size(); ++c)
    logs[c] = m.prior()[c] > 0 ? std::log(m.prior()[c]) : -INFINITY;
  return logs;
}

}  // namespace detail

inline std::vector<std::vector<double>> ngram_prefixes(const NgramModel& m,
                                                       std::span<const SymbolId> trace) {
  auto logs = detail::log_prior(m);
  std::vector<std::vector<double>> out;
  std::size_t ctx = m.start_context();
  for (SymbolId s : trace) {
    if (!m.alphabet().contains(s)) throw UnknownSymbolError("#" + std::to_string(s));
    for (std::size_t c = 0; c < logs.size(); ++c)
      logs[c] += std::log(m.probability(static_cast<ClassId>(c), ctx, s));
    ctx = m.context_after(s);
    out.push_back(detail::softmax_logs(logs));
  }
  return out;
}

// Normalized prior(c) * prod_t p(s_t | context, c).
inline std::vector<double> ngram_distribution(const NgramModel& m,
                                              std::span<const SymbolId> trace) {
  if (trace.empty()) return detail::softmax_logs(detail::log_prior(m));
  return ngram_prefixes(m, trace).back();
}

inline Prediction ngram_predict(const NgramModel& m, std::span<const SymbolId> trace) {
  return argmax(ngram_distribution(m, trace));
}

inline nlohmann::json to_json(const NgramModel& m) {
  return {{"kind", m.order() == 1 ? "ngram1" : "ngram2"},
          {"classes", m.classes()},
          {"alphabet", m.alphabet().symbols()},
          {"n", m.order()},
          {"alpha", m.alpha()},
          {"prior", m.prior()},
          {"counts", m.counts()}};
}

inline NgramModel ngram_from_json(const nlohmann::json& j) {
  try {
    return NgramModel(Alphabet(j.at("alphabet").get<std::vector<std::string>>()),
                      j.at("classes").get<std::vector<std::string>>(), j.at("n").get<unsigned>(),
                      j.at("alpha").get<double>(), j.at("prior").get<std::vector<double>>(),
                      j.at("counts").get<std::vector<std::vector<double>>>());
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("n-gram schema violation: ") + ex.what());
  }
}

}  // namespace seqdfa
