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
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "seqdfa/dfa.hpp"
#include "seqdfa/error.hpp"
#include "seqdfa/traces.hpp"

namespace seqdfa {

struct EditOp {
  enum class Kind { replace, insert, del };
  Kind kind = Kind::replace;
  // Index into the source trace. Inserts go before this index.
  std::size_t position = 0;
  std::optional<SymbolId> old_symbol;
  std::optional<SymbolId> new_symbol;

  friend bool operator==(const EditOp&, const EditOp&) = default;
};

inline EditOp replace_op(std::size_t pos, SymbolId from, SymbolId to) {
  return {EditOp::Kind::replace, pos, from, to};
}
inline EditOp insert_op(std::size_t pos, SymbolId s) {
  return {EditOp::Kind::insert, pos, std::nullopt, s};
}
inline EditOp delete_op(std::size_t pos, SymbolId s) {
  return {EditOp::Kind::del, pos, s, std::nullopt};
}

inline const char* to_string(EditOp::Kind k) {
  switch (k) {
    case EditOp::Kind::replace: return "replace";
    case EditOp::Kind::insert: return "insert";
    case EditOp::Kind::del: return "delete";
  }
  return "?";
}

struct CounterfactualExplanation {
  std::vector<EditOp> ops;  // ascending source position
  Trace target;
  std::size_t distance = 0;
};

// Applies ops sorted by position; inserts at a position precede the
// source symbol there.
inline Trace apply_ops(std::span<const SymbolId> source, std::span<const EditOp> ops) {
  Trace out;
  std::size_t k = 0;
  for (std::size_t i = 0; i <= source.size(); ++i) {
    bool deleted = false;
    std::optional<SymbolId> replaced;
    for (; k < ops.size() && ops[k].position == i; ++k) {
      const auto& op = ops[k];
      if (op.kind == EditOp::Kind::insert) {
        out.push_back(*op.new_symbol);
      } else if (i == source.size()) {
        throw UsageError("edit position past the end of the trace");
      } else if (op.kind == EditOp::Kind::del) {
        deleted = true;
      } else {
        replaced = op.new_symbol;
      }
    }
    if (k < ops.size() && ops[k].position < i) throw UsageError("edit ops out of order");
    if (i < source.size() && !deleted) out.push_back(replaced ? *replaced : source[i]);
  }
  return out;
}

// Minimal unit-cost edit script turning `trace` into a member of L(m).
// Table cell (i, q) holds the fewest edits turning the first i symbols
// into some string that drives m from its initial state to q. The
// backtrace walks from the end of the trace and prefers, in order, a
// replacement, a deletion, an insertion and a match, so edits sit as late
// in the trace as possible; predecessor states and symbols are scanned in
// ascending id order. The final state is the smallest accepting state of
// minimal cost.
inline CounterfactualExplanation edit_distance_to_language(const DfaModel& m,
                                                           std::span<const SymbolId> trace) {
  for (SymbolId s : trace)
    if (!m.alphabet().contains(s)) throw UnknownSymbolError("#" + std::to_string(s));
  constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max() / 2;
  const std::size_t n = trace.size(), nq = m.n_states(), k = m.n_symbols();
  std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(nq, kInf));

  auto close_inserts = [&](std::vector<std::size_t>& row) {
    for (bool changed = true; changed;) {
      changed = false;
      for (StateId p = 0; p < nq; ++p) {
        if (row[p] >= kInf) continue;
        for (SymbolId s = 0; s < k; ++s) {
          StateId q = m.next(p, s);
          if (row[p] + 1 < row[q]) {
            row[q] = row[p] + 1;
            changed = true;
          }
        }
      }
    }
  };

  d[0][m.initial()] = 0;
  close_inserts(d[0]);
  for (std::size_t i = 1; i <= n; ++i) {
    auto& row = d[i];
    const auto& prev = d[i - 1];
    for (StateId p = 0; p < nq; ++p) {
      if (prev[p] >= kInf) continue;
      row[p] = std::min(row[p], prev[p] + 1);
      for (SymbolId s = 0; s < k; ++s) {
        StateId q = m.next(p, s);
        row[q] = std::min(row[q], prev[p] + (s == trace[i - 1] ? 0 : 1));
      }
    }
    close_inserts(row);
  }

  std::optional<StateId> best;
  for (StateId q = 0; q < nq; ++q)
    if (m.is_accepting(q) && d[n][q] < kInf && (!best || d[n][q] < d[n][*best])) best = q;
  if (!best) throw DataError("classifier accepts no trace");

  CounterfactualExplanation out;
  out.distance = d[n][*best];
  std::size_t i = n;
  StateId q = *best;
  std::vector<EditOp> rev;
  while (i > 0 || q != m.initial()) {
    const std::size_t cur = d[i][q];
    bool moved = false;
    const bool has_obs = i > 0;
    const SymbolId obs = has_obs ? trace[i - 1] : 0;
    for (StateId p = 0; has_obs && p < nq && !moved; ++p)
      for (SymbolId s = 0; s < k && !moved; ++s)
        if (s != obs && m.next(p, s) == q && d[i - 1][p] + 1 == cur) {
          rev.push_back(replace_op(i - 1, obs, s));
          q = p;
          --i;
          moved = true;
        }
    if (has_obs && !moved && d[i - 1][q] + 1 == cur) {
      rev.push_back(delete_op(i - 1, obs));
      --i;
      moved = true;
    }
    for (StateId p = 0; p < nq && !moved; ++p)
      for (SymbolId s = 0; s < k && !moved; ++s)
        if (m.next(p, s) == q && d[i][p] + 1 == cur) {
          rev.push_back(insert_op(i, s));
          q = p;
          moved = true;
        }
    for (StateId p = 0; has_obs && p < nq && !moved; ++p)
      if (m.next(p, obs) == q && d[i - 1][p] == cur) {
        q = p;
        --i;
        moved = true;
      }
    if (!moved) throw InvariantError("edit distance backtrace is stuck");
  }
  out.ops.assign(rev.rbegin(), rev.rend());
  out.target = apply_ops(trace, out.ops);
  if (out.ops.size() != out.distance || !accepts(m, out.target))
    throw InvariantError("edit script does not reach the language");
  return out;
}

inline CounterfactualExplanation counterfactual_explain(const DfaModel& m,
                                                        std::span<const SymbolId> trace) {
  if (accepts(m, trace)) throw UsageError("trace already accepted");
  return edit_distance_to_language(m, trace);
}

// Indices of ops touching a symbol outside `vocabulary`.
inline std::vector<std::size_t> out_of_vocabulary_ops(const CounterfactualExplanation& e,
                                                      const std::set<SymbolId>& vocabulary) {
  std::vector<std::size_t> flagged;
  for (std::size_t i = 0; i < e.ops.size(); ++i) {
    const auto& op = e.ops[i];
    bool out = (op.old_symbol && !vocabulary.count(*op.old_symbol)) ||
               (op.new_symbol && !vocabulary.count(*op.new_symbol));
    if (out) flagged.push_back(i);
  }
  return flagged;
}

inline std::string narrate(const CounterfactualExplanation& e, std::span<const SymbolId> source,
                           const Alphabet& alphabet) {
  if (e.ops.empty()) throw UsageError("nothing to narrate");
  std::string text = "The binary classifier would have accepted the trace";
  bool first = true;
  for (const auto& op : e.ops) {
    text += first ? " had " : " and had ";
    first = false;
    switch (op.kind) {
      case EditOp::Kind::replace:
        text += alphabet.symbol(*op.new_symbol) + " been observed instead of " +
                alphabet.symbol(*op.old_symbol);
        break;
      case EditOp::Kind::insert:
        text += alphabet.symbol(*op.new_symbol) + " been observed ";
        if (op.position == 0)
          text += "at the start of the trace";
        else
          text += "following the observation of " + alphabet.symbol(source[op.position - 1]);
        break;
      case EditOp::Kind::del:
        text += alphabet.symbol(*op.old_symbol) + " been removed from the trace";
        break;
    }
  }
  return text;
}

inline nlohmann::json to_json(const EditOp& op, const Alphabet& alphabet) {
  nlohmann::json j = {{"kind", to_string(op.kind)}, {"position", op.position}};
  if (op.old_symbol) j["old"] = alphabet.symbol(*op.old_symbol);
  if (op.new_symbol) j["new"] = alphabet.symbol(*op.new_symbol);
  return j;
}

struct VerificationResult {
  bool holds = true;
  std::optional<Trace> witness;  // shortest accepted trace violating the property
};

// L(m) is contained in L(property) iff m minus property is empty.
inline VerificationResult verify_property(const DfaModel& m, const DfaModel& property) {
  auto diff = product(m, property, ProductMode::difference);
  auto w = find_accepted_witness(diff);
  return {!w.has_value(), std::move(w)};
}

enum class PropertyKind { eventually, never, precedes };

inline PropertyKind parse_property_kind(std::string_view name) {
  if (name == "eventually") return PropertyKind::eventually;
  if (name == "never") return PropertyKind::never;
  if (name == "precedes") return PropertyKind::precedes;
  throw UsageError("unknown property template '" + std::string(name) + "'");
}

// eventually(S): some symbol of S occurs. never(S): no symbol of S occurs.
// precedes(S, b): no symbol of S occurs before the first b (anywhere, if b
// never occurs).
inline DfaModel property_template(const Alphabet& alphabet, PropertyKind kind,
                                  const std::vector<SymbolId>& symbols,
                                  std::optional<SymbolId> anchor = std::nullopt) {
  const std::size_t k = alphabet.size();
  for (SymbolId s : symbols)
    if (!alphabet.contains(s)) throw UnknownSymbolError("#" + std::to_string(s));
  std::set<SymbolId> set(symbols.begin(), symbols.end());
  switch (kind) {
    case PropertyKind::eventually:
    case PropertyKind::never: {
      bool ev = kind == PropertyKind::eventually;
      std::vector<StateId> delta(2 * k);
      for (SymbolId s = 0; s < k; ++s) {
        delta[s] = set.count(s) ? 1 : 0;
        delta[k + s] = 1;
      }
      return DfaModel(alphabet, 2, 0, {!ev, ev}, {false, true}, std::move(delta));
    }
    case PropertyKind::precedes: {
      if (!anchor) throw UsageError("precedes needs an anchor symbol");
      if (!alphabet.contains(*anchor)) throw UnknownSymbolError("#" + std::to_string(*anchor));
      std::vector<StateId> delta(3 * k);
      for (SymbolId s = 0; s < k; ++s) {
        delta[s] = s == *anchor ? 1 : set.count(s) ? 2 : 0;
        delta[k + s] = 1;
        delta[2 * k + s] = 2;
      }
      return DfaModel(alphabet, 3, 0, {true, true, false}, {false, true, true},
                      std::move(delta));
    }
  }
  throw UsageError("unknown property template");
}

inline DfaModel property_template(const Alphabet& alphabet, std::string_view name,
                                  const std::vector<std::string>& symbols) {
  auto kind = parse_property_kind(name);
  std::vector<SymbolId> ids;
  for (const auto& s : symbols) ids.push_back(alphabet.id(s));
  if (kind != PropertyKind::precedes) {
    if (ids.empty()) throw UsageError("property needs at least one symbol");
    return property_template(alphabet, kind, ids);
  }
  if (ids.size() < 2) throw UsageError("precedes needs symbols followed by an anchor");
  SymbolId anchor = ids.back();
  ids.pop_back();
  return property_template(alphabet, kind, ids, anchor);
}

// Intersection: the modified classifier accepts a trace only when both
// the original classifier and the criterion do.
inline DfaModel modify_classifier(const DfaModel& m, const DfaModel& criterion) {
  return product(m, criterion, ProductMode::intersection);
}

struct ConsistencyReport {
  std::size_t positives = 0;
  std::vector<std::size_t> rejected;  // dataset item indices
};

// Positive training traces of `target` that `modified` rejects.
inline ConsistencyReport check_dataset_consistency(const DfaModel& modified,
                                                   const LabeledDataset& d, ClassId target) {
  if (!(modified.alphabet() == d.alphabet)) throw AlphabetMismatchError();
  if (target >= d.classes.size()) throw UsageError("target class out of range");
  ConsistencyReport r;
  for (std::size_t i = 0; i < d.items.size(); ++i) {
    if (d.items[i].label != target) continue;
    ++r.positives;
    if (!accepts(modified, d.items[i].trace)) r.rejected.push_back(i);
  }
  return r;
}

}  // namespace seqdfa
