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
#include <cctype>
#include <cstddef>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "seqdfa/dfa.hpp"
#include "seqdfa/error.hpp"
#include "seqdfa/traces.hpp"

namespace seqdfa {

// Regular expressions over an Alphabet. Printed syntax: symbols are
// separated by spaces in a concatenation, `|` is union, `*` is Kleene
// star, `∅` the empty language and `ε` the empty string. Symbol names
// containing syntax characters are double-quoted.
struct RegexNode;
using Regex = std::shared_ptr<const RegexNode>;

struct RegexNode {
  enum class Kind { empty, epsilon, symbol, concat, alt, star };
  Kind kind = Kind::empty;
  SymbolId symbol = 0;
  std::vector<Regex> parts;
};

namespace rx {

inline constexpr std::string_view kEmpty = "\xE2\x88\x85";    // ∅
inline constexpr std::string_view kEpsilon = "\xCE\xB5";      // ε

inline Regex make(RegexNode::Kind k, SymbolId s = 0, std::vector<Regex> parts = {}) {
  auto n = std::make_shared<RegexNode>();
  n->kind = k;
  n->symbol = s;
  n->parts = std::move(parts);
  return n;
}

inline Regex empty() {
  static const Regex e = make(RegexNode::Kind::empty);
  return e;
}

inline Regex epsilon() {
  static const Regex e = make(RegexNode::Kind::epsilon);
  return e;
}

inline Regex symbol(SymbolId s) { return make(RegexNode::Kind::symbol, s); }

inline bool is(const Regex& r, RegexNode::Kind k) { return r->kind == k; }

inline bool equal(const Regex& a, const Regex& b) {
  if (a == b) return true;
  if (a->kind != b->kind || a->symbol != b->symbol ||
      a->parts.size() != b->parts.size())
    return false;
  for (std::size_t i = 0; i < a->parts.size(); ++i)
    if (!equal(a->parts[i], b->parts[i])) return false;
  return true;
}

inline Regex concat(const Regex& a, const Regex& b) {
  using K = RegexNode::Kind;
  if (is(a, K::empty) || is(b, K::empty)) return empty();
  if (is(a, K::epsilon)) return b;
  if (is(b, K::epsilon)) return a;
  std::vector<Regex> parts;
  for (const Regex* r : {&a, &b}) {
    if (is(*r, K::concat))
      parts.insert(parts.end(), (*r)->parts.begin(), (*r)->parts.end());
    else
      parts.push_back(*r);
  }
  return make(K::concat, 0, std::move(parts));
}

inline Regex alt(const Regex& a, const Regex& b) {
  using K = RegexNode::Kind;
  if (is(a, K::empty)) return b;
  if (is(b, K::empty)) return a;
  std::vector<Regex> parts;
  auto push = [&](const Regex& r) {
    for (const auto& p : parts)
      if (equal(p, r)) return;
    parts.push_back(r);
  };
  for (const Regex* r : {&a, &b}) {
    if (is(*r, K::alt))
      for (const auto& p : (*r)->parts) push(p);
    else
      push(*r);
  }
  if (parts.size() == 1) return parts.front();
  return make(K::alt, 0, std::move(parts));
}

inline Regex star(const Regex& a) {
  using K = RegexNode::Kind;
  if (is(a, K::empty) || is(a, K::epsilon)) return epsilon();
  if (is(a, K::star)) return a;
  return make(K::star, 0, {a});
}

inline bool needs_quotes(const std::string& s) {
  if (s.empty() || s == kEmpty || s == kEpsilon) return true;
  return s.find_first_of(" \t\r\n()|*\"\\") != std::string::npos;
}

inline void print(const Regex& r, const Alphabet& a, std::string& out, int ctx) {
  // ctx: 0 = top/alt operand, 1 = concat operand, 2 = star operand
  using K = RegexNode::Kind;
  switch (r->kind) {
    case K::empty: out += kEmpty; return;
    case K::epsilon: out += kEpsilon; return;
    case K::symbol: {
      const auto& name = a.symbol(r->symbol);
      if (!needs_quotes(name)) {
        out += name;
        return;
      }
      out += '"';
      for (char c : name) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
      }
      out += '"';
      return;
    }
    case K::star:
      print(r->parts[0], a, out, 2);
      out += '*';
      return;
    case K::concat: {
      bool paren = ctx >= 2;
      if (paren) out += '(';
      for (std::size_t i = 0; i < r->parts.size(); ++i) {
        if (i) out += ' ';
        print(r->parts[i], a, out, 1);
      }
      if (paren) out += ')';
      return;
    }
    case K::alt: {
      bool paren = ctx >= 1;
      if (paren) out += '(';
      for (std::size_t i = 0; i < r->parts.size(); ++i) {
        if (i) out += '|';
        print(r->parts[i], a, out, 0);
      }
      if (paren) out += ')';
      return;
    }
  }
}

}  // namespace rx

inline std::string to_string(const Regex& r, const Alphabet& alphabet) {
  std::string out;
  rx::print(r, alphabet, out, 0);
  return out;
}

// State elimination. Useless states are trimmed first; then states that are
// neither initial nor accepting go highest id first, followed by the rest,
// again highest id first.
inline Regex extract_regex_ast(const DfaModel& m) {
  auto reach = reachable_states(m);
  auto live = coreachable_states(m);
  if (!live[m.initial()]) return rx::empty();

  std::vector<StateId> useful;
  for (StateId q = 0; q < m.n_states(); ++q)
    if (reach[q] && live[q]) useful.push_back(q);
  const std::size_t n = m.n_states();
  const std::size_t start = n, final = n + 1, total = n + 2;
  std::vector<Regex> R(total * total, rx::empty());
  auto at = [&](std::size_t i, std::size_t j) -> Regex& { return R[i * total + j]; };

  std::vector<bool> keep(n, false);
  for (StateId q : useful) keep[q] = true;
  for (StateId q : useful) {
    for (SymbolId s = 0; s < m.n_symbols(); ++s) {
      StateId t = m.next(q, s);
      if (keep[t]) at(q, t) = rx::alt(at(q, t), rx::symbol(s));
    }
    if (m.is_accepting(q)) at(q, final) = rx::epsilon();
  }
  at(start, m.initial()) = rx::epsilon();

  std::vector<StateId> order;
  for (auto it = useful.rbegin(); it != useful.rend(); ++it)
    if (*it != m.initial() && !m.is_accepting(*it)) order.push_back(*it);
  for (auto it = useful.rbegin(); it != useful.rend(); ++it)
    if (*it == m.initial() || m.is_accepting(*it)) order.push_back(*it);

  std::vector<bool> alive(total, false);
  for (StateId q : useful) alive[q] = true;
  alive[start] = alive[final] = true;
  for (StateId k : order) {
    alive[k] = false;
    Regex loop = rx::star(at(k, k));
    for (std::size_t i = 0; i < total; ++i) {
      if (!alive[i] || rx::is(at(i, k), RegexNode::Kind::empty)) continue;
      Regex head = rx::concat(at(i, k), loop);
      for (std::size_t j = 0; j < total; ++j) {
        if (!alive[j] || rx::is(at(k, j), RegexNode::Kind::empty)) continue;
        at(i, j) = rx::alt(at(i, j), rx::concat(head, at(k, j)));
      }
    }
  }
  return at(start, final);
}

inline std::string extract_regex(const DfaModel& m) {
  return to_string(extract_regex_ast(m), m.alphabet());
}

namespace rx {

class Parser {
 public:
  Parser(std::string_view text, const Alphabet& alphabet)
      : text_(text), alphabet_(alphabet) {}

  Regex parse() {
    Regex r = parse_alt();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return r;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw DataError("regex parse error at offset " + std::to_string(pos_) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool at_atom_start() {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] != ')' && text_[pos_] != '|' &&
           text_[pos_] != '*';
  }

  Regex parse_alt() {
    Regex r = parse_concat();
    skip_ws();
    while (pos_ < text_.size() && text_[pos_] == '|') {
      ++pos_;
      r = alt(r, parse_concat());
      skip_ws();
    }
    return r;
  }

  Regex parse_concat() {
    if (!at_atom_start()) fail("expected an expression");
    Regex r = parse_star();
    while (at_atom_start()) r = concat(r, parse_star());
    return r;
  }

  Regex parse_star() {
    Regex r = parse_atom();
    skip_ws();
    while (pos_ < text_.size() && text_[pos_] == '*') {
      ++pos_;
      r = star(r);
      skip_ws();
    }
    return r;
  }

  static bool delimiter(char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' ||
           c == '|' || c == '*' || c == '"';
  }

  Regex parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Regex r = parse_alt();
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] != ')') fail("expected ')'");
      ++pos_;
      return r;
    }
    if (c == '"') {
      ++pos_;
      std::string name;
      while (pos_ < text_.size() && text_[pos_] != '"') {
        if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
        name += text_[pos_++];
      }
      if (pos_ >= text_.size()) fail("unterminated quoted symbol");
      ++pos_;
      return lookup(name);
    }
    std::size_t begin = pos_;
    while (pos_ < text_.size() && !delimiter(text_[pos_])) ++pos_;
    std::string_view word = text_.substr(begin, pos_ - begin);
    if (word == kEmpty) return empty();
    if (word == kEpsilon) return epsilon();
    return lookup(std::string(word));
  }

  Regex lookup(const std::string& name) {
    auto id = alphabet_.find(name);
    if (!id) throw UnknownSymbolError(name);
    return symbol(*id);
  }

  std::string_view text_;
  const Alphabet& alphabet_;
  std::size_t pos_ = 0;
};

}  // namespace rx

inline Regex parse_regex(std::string_view text, const Alphabet& alphabet) {
  return rx::Parser(text, alphabet).parse();
}

// Thompson automaton: epsilon moves plus at most one symbol move per state.
class ThompsonNfa {
 public:
  explicit ThompsonNfa(const Regex& r) {
    auto [s, f] = build(r);
    start_ = s;
    accept_ = f;
  }

  bool matches(std::span<const SymbolId> trace) const {
    std::vector<bool> cur(states_.size(), false);
    cur[start_] = true;
    closure(cur);
    for (SymbolId sym : trace) {
      std::vector<bool> nxt(states_.size(), false);
      bool any = false;
      for (std::size_t q = 0; q < states_.size(); ++q)
        if (cur[q] && states_[q].has_symbol && states_[q].symbol == sym)
          nxt[states_[q].symbol_target] = any = true;
      if (!any) return false;
      closure(nxt);
      cur = std::move(nxt);
    }
    return cur[accept_];
  }

  std::size_t size() const { return states_.size(); }

 private:
  struct State {
    std::vector<std::size_t> eps;
    bool has_symbol = false;
    SymbolId symbol = 0;
    std::size_t symbol_target = 0;
  };

  std::size_t fresh() {
    states_.emplace_back();
    return states_.size() - 1;
  }

  std::pair<std::size_t, std::size_t> build(const Regex& r) {
    using K = RegexNode::Kind;
    std::size_t s = fresh(), f = fresh();
    switch (r->kind) {
      case K::empty: break;
      case K::epsilon: states_[s].eps.push_back(f); break;
      case K::symbol:
        states_[s].has_symbol = true;
        states_[s].symbol = r->symbol;
        states_[s].symbol_target = f;
        break;
      case K::concat: {
        std::size_t prev = s;
        for (const auto& p : r->parts) {
          auto [ps, pf] = build(p);
          states_[prev].eps.push_back(ps);
          prev = pf;
        }
        states_[prev].eps.push_back(f);
        break;
      }
      case K::alt:
        for (const auto& p : r->parts) {
          auto [ps, pf] = build(p);
          states_[s].eps.push_back(ps);
          states_[pf].eps.push_back(f);
        }
        break;
      case K::star: {
        auto [ps, pf] = build(r->parts[0]);
        states_[s].eps.push_back(ps);
        states_[s].eps.push_back(f);
        states_[pf].eps.push_back(ps);
        states_[pf].eps.push_back(f);
        break;
      }
    }
    return {s, f};
  }

  void closure(std::vector<bool>& set) const {
    std::vector<std::size_t> stack;
    for (std::size_t q = 0; q < set.size(); ++q)
      if (set[q]) stack.push_back(q);
    while (!stack.empty()) {
      std::size_t q = stack.back();
      stack.pop_back();
      for (std::size_t t : states_[q].eps)
        if (!set[t]) {
          set[t] = true;
          stack.push_back(t);
        }
    }
  }

  std::vector<State> states_;
  std::size_t start_ = 0;
  std::size_t accept_ = 0;
};

inline bool regex_matches(const Regex& r, std::span<const SymbolId> trace) {
  return ThompsonNfa(r).matches(trace);
}

}  // namespace seqdfa
