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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "seqdfa/error.hpp"

namespace seqdfa {

using SymbolId = std::uint32_t;
using ClassId = std::uint32_t;
using Trace = std::vector<SymbolId>;

// Finite symbol set. Ids are dense and follow first-insertion order.
class Alphabet {
 public:
  Alphabet() = default;
  explicit Alphabet(std::span<const std::string> symbols) {
    for (const auto& s : symbols) {
      if (index_.contains(s)) throw DataError("duplicate symbol '" + s + "'");
      add(s);
    }
  }

  // Returns the id of `symbol`, adding it if new.
  SymbolId add(const std::string& symbol) {
    auto [it, inserted] =
        index_.try_emplace(symbol, static_cast<SymbolId>(symbols_.size()));
    if (inserted) symbols_.push_back(symbol);
    return it->second;
  }

  std::optional<SymbolId> find(std::string_view symbol) const {
    auto it = index_.find(std::string(symbol));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  SymbolId id(std::string_view symbol) const {
    auto found = find(symbol);
    if (!found) throw UnknownSymbolError(std::string(symbol));
    return *found;
  }

  const std::string& symbol(SymbolId id) const { return symbols_.at(id); }
  std::size_t size() const { return symbols_.size(); }
  bool empty() const { return symbols_.empty(); }
  const std::vector<std::string>& symbols() const { return symbols_; }

  Trace encode(std::span<const std::string> symbols) const {
    Trace out;
    out.reserve(symbols.size());
    for (const auto& s : symbols) out.push_back(id(s));
    return out;
  }

  std::vector<std::string> decode(std::span<const SymbolId> trace) const {
    std::vector<std::string> out;
    out.reserve(trace.size());
    for (SymbolId s : trace) out.push_back(symbol(s));
    return out;
  }

  bool contains(SymbolId id) const { return id < symbols_.size(); }

  friend bool operator==(const Alphabet& a, const Alphabet& b) {
    return a.symbols_ == b.symbols_;
  }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, SymbolId> index_;
};

// Splits on runs of whitespace.
inline std::vector<std::string> split_symbols(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

struct LabeledItem {
  Trace trace;
  ClassId label = 0;
};

struct LabeledDataset {
  Alphabet alphabet;
  std::vector<std::string> classes;
  std::vector<LabeledItem> items;

  std::size_t size() const { return items.size(); }

  std::optional<ClassId> find_class(std::string_view name) const {
    for (std::size_t i = 0; i < classes.size(); ++i)
      if (classes[i] == name) return static_cast<ClassId>(i);
    return std::nullopt;
  }

  ClassId class_id(std::string_view name) const {
    auto c = find_class(name);
    if (!c) throw DataError("unknown class '" + std::string(name) + "'");
    return *c;
  }

  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> counts(classes.size(), 0);
    for (const auto& it : items) ++counts[it.label];
    return counts;
  }
};

// A trace carrying any number of labels.
struct MultiLabelItem {
  Trace trace;
  std::vector<ClassId> labels;
};

struct MultiLabelDataset {
  Alphabet alphabet;
  std::vector<std::string> classes;
  std::vector<MultiLabelItem> items;
};

enum class DatasetFormat { jsonl, csv };

inline DatasetFormat parse_dataset_format(std::string_view name) {
  if (name == "jsonl") return DatasetFormat::jsonl;
  if (name == "csv") return DatasetFormat::csv;
  throw UsageError("unknown dataset format '" + std::string(name) + "'");
}

// Guesses the format from the file extension; defaults to jsonl.
inline DatasetFormat format_from_path(const std::string& path) {
  auto dot = path.rfind('.');
  if (dot != std::string::npos && path.substr(dot) == ".csv")
    return DatasetFormat::csv;
  return DatasetFormat::jsonl;
}

// One parsed line of a dataset file, still as strings.
struct RawRecord {
  std::size_t line = 0;
  std::vector<std::string> trace;
  std::vector<std::string> labels;
};

namespace detail {

inline DataError record_error(std::size_t line, const std::string& what) {
  return DataError("line " + std::to_string(line) + ": " + what);
}

inline RawRecord parse_jsonl_line(const std::string& text, std::size_t line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw record_error(line, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw record_error(line, "record is not an object");
  RawRecord rec;
  rec.line = line;
  auto tr = j.find("trace");
  if (tr == j.end() || !tr->is_array())
    throw record_error(line, "missing array field \"trace\"");
  for (const auto& s : *tr) {
    if (!s.is_string()) throw record_error(line, "trace symbols must be strings");
    rec.trace.push_back(s.get<std::string>());
  }
  if (auto lb = j.find("label"); lb != j.end()) {
    if (!lb->is_string()) throw record_error(line, "\"label\" must be a string");
    rec.labels.push_back(lb->get<std::string>());
  } else if (auto lbs = j.find("labels"); lbs != j.end()) {
    if (!lbs->is_array()) throw record_error(line, "\"labels\" must be an array");
    for (const auto& s : *lbs) {
      if (!s.is_string()) throw record_error(line, "labels must be strings");
      rec.labels.push_back(s.get<std::string>());
    }
  } else {
    throw record_error(line, "missing field \"label\"");
  }
  return rec;
}

inline bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

}  // namespace detail

inline std::vector<RawRecord> read_records(std::istream& in,
                                           DatasetFormat format) {
  std::vector<RawRecord> out;
  std::string text;
  std::size_t line = 0;
  bool header_seen = false;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (detail::blank(text)) continue;
    if (format == DatasetFormat::jsonl) {
      out.push_back(detail::parse_jsonl_line(text, line));
      continue;
    }
    if (!header_seen) {
      if (text != "label,trace")
        throw detail::record_error(line, "expected CSV header 'label,trace'");
      header_seen = true;
      continue;
    }
    auto comma = text.find(',');
    if (comma == std::string::npos)
      throw detail::record_error(line, "expected 'label,trace'");
    RawRecord rec;
    rec.line = line;
    rec.labels.push_back(text.substr(0, comma));
    auto rest = text.substr(comma + 1);
    if (rest.find(',') != std::string::npos)
      throw detail::record_error(line, "symbols must not contain commas");
    if (rec.labels.front().empty())
      throw detail::record_error(line, "empty label");
    rec.trace = split_symbols(rest);
    out.push_back(std::move(rec));
  }
  if (out.empty()) throw DataError("no records");
  return out;
}

inline std::vector<RawRecord> read_records_file(const std::string& path,
                                                DatasetFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_records(in, format);
}

// Builds alphabet and class list from the records themselves (closed world).
inline LabeledDataset make_dataset(std::span<const RawRecord> records) {
  LabeledDataset d;
  for (const auto& rec : records) {
    if (rec.trace.empty())
      throw detail::record_error(rec.line, "empty trace in training data");
    if (rec.labels.size() != 1)
      throw detail::record_error(rec.line, "expected exactly one label");
    LabeledItem item;
    for (const auto& s : rec.trace) item.trace.push_back(d.alphabet.add(s));
    auto c = d.find_class(rec.labels.front());
    if (!c) {
      d.classes.push_back(rec.labels.front());
      c = static_cast<ClassId>(d.classes.size() - 1);
    }
    item.label = *c;
    d.items.push_back(std::move(item));
  }
  return d;
}

// Encodes records against a fixed alphabet and class list; unseen symbols
// and classes are errors.
inline LabeledDataset encode_dataset(std::span<const RawRecord> records,
                                     const Alphabet& alphabet,
                                     const std::vector<std::string>& classes) {
  LabeledDataset d;
  d.alphabet = alphabet;
  d.classes = classes;
  for (const auto& rec : records) {
    if (rec.trace.empty())
      throw detail::record_error(rec.line, "empty trace");
    if (rec.labels.size() != 1)
      throw detail::record_error(rec.line, "expected exactly one label");
    LabeledItem item;
    try {
      item.trace = alphabet.encode(rec.trace);
      item.label = d.class_id(rec.labels.front());
    } catch (const DataError& e) {
      throw detail::record_error(rec.line, e.what());
    }
    d.items.push_back(std::move(item));
  }
  return d;
}

inline MultiLabelDataset make_multilabel_dataset(
    std::span<const RawRecord> records) {
  MultiLabelDataset d;
  for (const auto& rec : records) {
    if (rec.trace.empty())
      throw detail::record_error(rec.line, "empty trace in training data");
    MultiLabelItem item;
    for (const auto& s : rec.trace) item.trace.push_back(d.alphabet.add(s));
    for (const auto& name : rec.labels) {
      auto it = std::find(d.classes.begin(), d.classes.end(), name);
      ClassId c = static_cast<ClassId>(it - d.classes.begin());
      if (it == d.classes.end()) d.classes.push_back(name);
      if (std::find(item.labels.begin(), item.labels.end(), c) ==
          item.labels.end())
        item.labels.push_back(c);
    }
    d.items.push_back(std::move(item));
  }
  return d;
}

inline LabeledDataset load_dataset(const std::string& path,
                                   DatasetFormat format) {
  return make_dataset(read_records_file(path, format));
}

struct SplitResult {
  LabeledDataset train;
  LabeledDataset validation;
  // Classes with a single trace; kept entirely in training.
  std::vector<ClassId> singleton_classes;
};

// Per-class stratified split. Each class sends floor(fraction * count)
// traces to validation, at least one when the class has two or more.
inline SplitResult split_train_validation(const LabeledDataset& d,
                                          double fraction,
                                          std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw UsageError("validation fraction must lie in (0, 1)");
  std::vector<std::vector<std::size_t>> by_class(d.classes.size());
  for (std::size_t i = 0; i < d.items.size(); ++i)
    by_class[d.items[i].label].push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<char> to_validation(d.items.size(), 0);
  SplitResult out;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& idx = by_class[c];
    std::size_t n_val =
        static_cast<std::size_t>(std::floor(fraction * static_cast<double>(idx.size())));
    if (idx.size() >= 2 && n_val == 0) n_val = 1;
    if (idx.size() == 1) out.singleton_classes.push_back(static_cast<ClassId>(c));
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t k = 0; k < n_val; ++k) to_validation[idx[k]] = 1;
  }
  out.train.alphabet = out.validation.alphabet = d.alphabet;
  out.train.classes = out.validation.classes = d.classes;
  for (std::size_t i = 0; i < d.items.size(); ++i)
    (to_validation[i] ? out.validation : out.train).items.push_back(d.items[i]);
  return out;
}

struct BinaryTrace {
  Trace trace;
  bool positive = false;
};

// One-vs-rest relabelling for `target`.
inline std::vector<BinaryTrace> binarize(const LabeledDataset& d,
                                         ClassId target) {
  if (target >= d.classes.size()) throw UsageError("target class out of range");
  std::vector<BinaryTrace> out;
  out.reserve(d.items.size());
  for (const auto& it : d.items) out.push_back({it.trace, it.label == target});
  return out;
}

inline std::vector<BinaryTrace> binarize(const MultiLabelDataset& d,
                                         ClassId target) {
  if (target >= d.classes.size()) throw UsageError("target class out of range");
  std::vector<BinaryTrace> out;
  out.reserve(d.items.size());
  for (const auto& it : d.items) {
    bool pos = std::find(it.labels.begin(), it.labels.end(), target) !=
               it.labels.end();
    out.push_back({it.trace, pos});
  }
  return out;
}

}  // namespace seqdfa
