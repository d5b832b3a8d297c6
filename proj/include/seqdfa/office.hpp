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
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqdfa/dfa.hpp"
#include "seqdfa/error.hpp"
#include "seqdfa/traces.hpp"

namespace seqdfa {

// Goal-directed walks through an office floor plan. Every path starts at
// `start` and ends at `goal`; the goal is the trace label.
struct PathFixture {
  struct Entry {
    std::string start;
    std::string goal;
    std::vector<std::vector<std::string>> paths;
  };
  std::vector<Entry> entries;
};

inline void validate(const PathFixture& f) {
  std::set<std::vector<std::string>> seen;
  for (const auto& e : f.entries) {
    for (const auto& p : e.paths) {
      if (p.empty()) throw DataError("fixture path is empty");
      if (p.front() != e.start)
        throw DataError("fixture path does not begin at " + e.start);
      if (p.back() != e.goal)
        throw DataError("fixture path does not end at " + e.goal);
      if (!seen.insert(p).second) throw DataError("duplicate fixture path");
    }
  }
}

// Shortest hallway-only walks between the rooms A, B, E, coffee, female
// and male, enumerated by hand on the floor-plan grid: rooms open onto the
// hallways H1 (west), H2 (centre) and H3 (east); A and B touch all three
// hallways, E only H3, and coffee/female/male only H1. E is entered from
// its middle door.
inline PathFixture default_office_fixture() {
  using P = std::vector<std::string>;
  PathFixture f;
  f.entries = {
      {"A", "B", {P{"A", "H2", "B"}}},
      {"A", "E", {P{"A", "H3", "E"}}},
      {"A", "coffee", {P{"A", "H1", "coffee"}, P{"A", "H2", "H1", "coffee"}}},
      {"A", "female", {P{"A", "H1", "female"}}},
      {"A", "male", {P{"A", "H1", "male"}, P{"A", "H2", "H1", "male"}}},
      {"B", "A", {P{"B", "H2", "A"}}},
      {"B", "E", {P{"B", "H3", "E"}}},
      {"B", "coffee", {P{"B", "H2", "H1", "coffee"}, P{"B", "H1", "coffee"}}},
      {"B", "female", {P{"B", "H1", "female"}, P{"B", "H2", "H1", "female"}}},
      {"B", "male", {P{"B", "H1", "male"}}},
      {"E", "A", {P{"E", "H3", "A"}, P{"E", "H3", "H2", "A"}}},
      {"E", "B", {P{"E", "H3", "B"}, P{"E", "H3", "H2", "B"}}},
      {"E", "coffee", {P{"E", "H3", "H2", "H1", "coffee"}}},
      {"E", "female", {P{"E", "H3", "H2", "H1", "female"}}},
      {"E", "male", {P{"E", "H3", "H2", "H1", "male"}}},
  };
  return f;
}

inline nlohmann::json to_json(const PathFixture& f) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : f.entries)
    entries.push_back({{"start", e.start}, {"goal", e.goal}, {"paths", e.paths}});
  return {{"entries", entries}};
}

inline PathFixture fixture_from_json(const nlohmann::json& j) {
  PathFixture f;
  try {
    for (const auto& e : j.at("entries")) {
      f.entries.push_back({e.at("start").get<std::string>(),
                           e.at("goal").get<std::string>(),
                           e.at("paths").get<std::vector<std::vector<std::string>>>()});
    }
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("invalid fixture: ") + ex.what());
  }
  validate(f);
  return f;
}

inline std::vector<RawRecord> fixture_records(const PathFixture& f) {
  validate(f);
  std::vector<RawRecord> out;
  std::size_t line = 0;
  for (const auto& e : f.entries)
    for (const auto& p : e.paths) out.push_back({++line, p, {e.goal}});
  return out;
}

// Writes one JSONL record per path.
inline void gen_office(const PathFixture& f, std::ostream& out) {
  for (const auto& rec : fixture_records(f)) {
    nlohmann::json j = {{"trace", rec.trace}, {"label", rec.labels.front()}};
    out << j.dump() << '\n';
  }
}

inline LabeledDataset office_dataset(const PathFixture& f = default_office_fixture()) {
  return make_dataset(fixture_records(f));
}

// Four-state coffee detector over the office symbols. State 1 rejects for
// good once a restroom is seen or A/B is entered from H2/H3, state 2
// accepts for good once coffee is seen, and state 3 means "last seen in
// H2 or H3". Symbols missing from `alphabet` are ignored.
inline DfaModel office_coffee_dfa(const Alphabet& alphabet) {
  const std::size_t k = alphabet.size();
  std::vector<StateId> delta(4 * k);
  for (StateId q = 0; q < 4; ++q)
    for (SymbolId s = 0; s < k; ++s) delta[q * k + s] = q;
  auto set = [&](StateId q, const char* sym, StateId to) {
    if (auto s = alphabet.find(sym)) delta[q * k + *s] = to;
  };
  set(0, "female", 1);
  set(0, "male", 1);
  set(0, "coffee", 2);
  set(0, "H2", 3);
  set(0, "H3", 3);
  set(3, "H1", 0);
  set(3, "H2", 0);
  set(3, "A", 1);
  set(3, "B", 1);
  return DfaModel(alphabet, 4, 0, {false, false, true, false}, {false, true, true, false},
                  std::move(delta));
}

}  // namespace seqdfa
