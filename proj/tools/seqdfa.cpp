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

// seqdfa: train, run and inspect automaton-based sequence classifiers.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant
// violation. Errors are also reported as one JSON object on stderr.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "seqdfa.hpp"

#ifndef SEQDFA_VERSION
#define SEQDFA_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace seqdfa;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kInvariant = 3 };

int report_error(int code, const char* kind, const std::string& message) {
  json j = {{"error", kind}, {"message", message}, {"exit_code", code}};
  std::cerr << j.dump() << std::endl;
  return code;
}

struct Options {
  std::string run_dir;
  std::string data;
  std::string format;
  std::string out;
  std::string model_path;
  std::string model_kind = "disc";
  std::string class_name;
  std::string trace;
  std::string export_format = "json";
  std::string property;
  std::vector<std::string> symbols;
  std::vector<std::string> vocabulary;
  std::string criterion;
  std::string fixture;
  std::string dump_fixture;
  std::string predictions_csv;
  double alpha = 1.0;
  double horizon = 40.0;
  std::vector<StateId> accepting;
  std::vector<double> lambda_edge;
  HyperParams hp;
};

fs::path output_path(const Options& o, const std::string& p) {
  fs::path path(p);
  if (!o.run_dir.empty() && path.is_relative()) path = fs::path(o.run_dir) / path;
  return path;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
}

// Writes to `path` under the run directory, or stdout when empty.
void emit(const Options& o, const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  write_text(output_path(o, path), text);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("'" + path + "' is not valid JSON: " + e.what());
  }
}

DatasetFormat data_format(const Options& o) {
  return o.format.empty() ? format_from_path(o.data) : parse_dataset_format(o.format);
}

LabeledDataset load_training(const Options& o) {
  if (o.data.empty()) throw UsageError("--data is required");
  return make_dataset(read_records_file(o.data, data_format(o)));
}

AnyModel load_model(const Options& o) {
  if (o.model_path.empty()) throw UsageError("--model is required");
  return model_from_json(read_json_file(o.model_path));
}

const ClassifierEnsemble& as_ensemble(const AnyModel& m) {
  if (const auto* e = std::get_if<ClassifierEnsemble>(&m)) return *e;
  throw UsageError("this command needs an automaton model");
}

ClassId class_index(const std::vector<std::string>& classes, const std::string& name) {
  if (name.empty()) throw UsageError("--class is required");
  auto it = std::find(classes.begin(), classes.end(), name);
  if (it == classes.end()) throw DataError("unknown class '" + name + "'");
  return static_cast<ClassId>(it - classes.begin());
}

Trace parse_trace(const Alphabet& a, const std::string& text) {
  auto symbols = split_symbols(text);
  return a.encode(symbols);
}

json symbols_json(const Alphabet& a, std::span<const SymbolId> t) {
  return a.decode(t);
}

// ---- commands ----

json cmd_gen_office(const Options& o) {
  auto f = o.fixture.empty() ? default_office_fixture() : fixture_from_json(read_json_file(o.fixture));
  if (!o.dump_fixture.empty()) emit(o, o.dump_fixture, to_json(f).dump(2) + "\n");
  std::ostringstream out;
  gen_office(f, out);
  emit(o, o.out, out.str());
  return {{"records", fixture_records(f).size()}};
}

json cmd_train(Options& o, const CLI::App& sub) {
  auto d = load_training(o);
  if (sub.count("--accepting")) o.hp.accepting = o.accepting;
  if (!o.lambda_edge.empty()) o.hp.lambda_edge_grid = o.lambda_edge;
  json summary = {{"model", o.model_kind}, {"traces", d.items.size()}, {"classes", d.classes}};
  AnyModel model;
  if (o.model_kind == "disc") {
    auto trained = train_ensemble(d, o.hp);
    json reports = json::array();
    for (const auto& r : trained.reports) reports.push_back(to_json(r));
    summary["reports"] = reports;
    if (!trained.singleton_classes.empty()) {
      json names = json::array();
      for (auto c : trained.singleton_classes) names.push_back(d.classes[c]);
      summary["singleton_classes"] = names;
    }
    model = std::move(trained.ensemble);
  } else if (o.model_kind == "dfa-ft") {
    model = dfa_ft_train(d);
  } else if (o.model_kind == "ngram1" || o.model_kind == "ngram2") {
    model = ngram_train(d, o.model_kind == "ngram1" ? 1 : 2, o.alpha);
  } else {
    throw UsageError("unknown model kind '" + o.model_kind + "'");
  }
  if (o.out.empty()) throw UsageError("--out is required");
  emit(o, o.out, to_json(model).dump(2) + "\n");
  return summary;
}

std::vector<Trace> query_traces(const Options& o, const Alphabet& a, std::vector<ClassId>* labels,
                                const std::vector<std::string>& classes) {
  std::vector<Trace> out;
  if (!o.trace.empty()) {
    out.push_back(parse_trace(a, o.trace));
    return out;
  }
  if (o.data.empty()) throw UsageError("--data or --trace is required");
  auto records = read_records_file(o.data, data_format(o));
  if (labels) {
    auto d = encode_dataset(records, a, classes);
    for (auto& it : d.items) {
      out.push_back(std::move(it.trace));
      labels->push_back(it.label);
    }
    return out;
  }
  for (const auto& r : records) out.push_back(a.encode(r.trace));
  return out;
}

json cmd_predict(const Options& o) {
  auto m = load_model(o);
  const auto& a = model_alphabet(m);
  const auto& classes = model_classes(m);
  std::ostringstream out;
  std::size_t index = 0;
  for (const auto& t : query_traces(o, a, nullptr, classes)) {
    json steps = json::array();
    auto dists = prefix_distributions(m, t);
    for (std::size_t i = 0; i < dists.size(); ++i) {
      auto p = argmax(dists[i]);
      steps.push_back({{"t", i + 1},
                       {"symbol", a.symbol(t[i])},
                       {"predicted", classes[p.label]},
                       {"confidence", p.confidence},
                       {"posterior", dists[i]}});
    }
    out << json{{"trace", index++}, {"prefixes", steps}}.dump() << '\n';
  }
  emit(o, o.out, out.str());
  return {{"traces", index}};
}

json cmd_evaluate(const Options& o) {
  auto m = load_model(o);
  const auto& a = model_alphabet(m);
  const auto& classes = model_classes(m);
  std::vector<ClassId> labels;
  auto traces = query_traces(o, a, &labels, classes);
  if (!o.trace.empty()) throw UsageError("evaluate needs labelled --data");
  std::vector<std::vector<std::vector<double>>> dists;
  for (const auto& t : traces) dists.push_back(prefix_distributions(m, t));
  auto preds = to_predictions(dists);
  UtilityFunction u{o.horizon};
  auto report = evaluation_report(preds, labels, classes, u);
  if (!o.predictions_csv.empty()) {
    std::ostringstream csv;
    write_predictions_csv(csv, preds, labels, classes);
    emit(o, o.predictions_csv, csv.str());
  }
  emit(o, o.out, report.dump(2) + "\n");
  return {{"traces", traces.size()}};
}

json cmd_explain(const Options& o) {
  auto m = load_model(o);
  const auto& e = as_ensemble(m);
  auto c = class_index(e.classes, o.class_name);
  if (o.trace.empty()) throw UsageError("--trace is required");
  auto src = parse_trace(e.alphabet, o.trace);
  const auto& dfa = e.dfas[c];
  json j = {{"class", e.classes[c]}, {"trace", symbols_json(e.alphabet, src)}};
  if (accepts(dfa, src)) {
    j["accepted"] = true;
    j["distance"] = 0;
    j["ops"] = json::array();
    j["target"] = j["trace"];
  } else {
    auto x = counterfactual_explain(dfa, src);
    json ops = json::array();
    for (const auto& op : x.ops) ops.push_back(to_json(op, e.alphabet));
    std::set<SymbolId> vocabulary;
    if (o.vocabulary.empty()) {
      for (SymbolId s = 0; s < e.alphabet.size(); ++s) vocabulary.insert(s);
    } else {
      for (const auto& s : o.vocabulary) vocabulary.insert(e.alphabet.id(s));
    }
    j["accepted"] = false;
    j["distance"] = x.distance;
    j["ops"] = ops;
    j["target"] = symbols_json(e.alphabet, x.target);
    j["sentence"] = narrate(x, src, e.alphabet);
    j["out_of_vocabulary"] = out_of_vocabulary_ops(x, vocabulary);
  }
  emit(o, o.out, j.dump(2) + "\n");
  return {{"class", e.classes[c]}};
}

DfaModel criterion_dfa(const Options& o, const Alphabet& a) {
  if (!o.criterion.empty()) {
    auto d = dfa_from_json(read_json_file(o.criterion));
    if (!(d.alphabet() == a)) throw AlphabetMismatchError();
    return d;
  }
  if (o.property.empty()) throw UsageError("--property or --criterion is required");
  if (o.symbols.empty()) throw UsageError("--symbols is required");
  return property_template(a, o.property, o.symbols);
}

json cmd_verify(const Options& o) {
  auto m = load_model(o);
  const auto& e = as_ensemble(m);
  auto c = class_index(e.classes, o.class_name);
  auto r = verify_property(e.dfas[c], criterion_dfa(o, e.alphabet));
  json j = {{"class", e.classes[c]}, {"holds", r.holds}};
  j["witness"] = r.witness ? json(symbols_json(e.alphabet, *r.witness)) : json(nullptr);
  emit(o, o.out, j.dump(2) + "\n");
  return {{"holds", r.holds}};
}

json cmd_modify(const Options& o) {
  auto m = load_model(o);
  auto e = as_ensemble(m);
  auto c = class_index(e.classes, o.class_name);
  e.dfas[c] = modify_classifier(e.dfas[c], criterion_dfa(o, e.alphabet));
  json summary = {{"class", e.classes[c]},
                  {"language_empty", language_empty(e.dfas[c])}};
  if (!o.data.empty()) {
    auto d = encode_dataset(read_records_file(o.data, data_format(o)), e.alphabet, e.classes);
    auto r = check_dataset_consistency(e.dfas[c], d, c);
    summary["positives"] = r.positives;
    summary["rejected_positives"] = r.rejected;
  }
  if (o.out.empty()) throw UsageError("--out is required");
  emit(o, o.out, to_json(e).dump(2) + "\n");
  return summary;
}

// Rebuilds the selected program of one class from the training data and
// the hyperparameters stored with the model.
AssignmentProgram class_program(const ClassifierEnsemble& e, ClassId c, const Options& o) {
  if (o.data.empty()) throw UsageError("--format lp needs the training --data");
  auto d = encode_dataset(read_records_file(o.data, data_format(o)), e.alphabet, e.classes);
  if (!e.metadata.contains("hyperparams")) throw DataError("model has no training metadata");
  auto hp = hyperparams_from_json(e.metadata.at("hyperparams"));
  double lambda_edge = e.metadata.at("selected_lambda_edge").at(e.classes[c]).get<double>();
  LabeledDataset train = d;
  if (hp.validation_fraction > 0.0) train = split_train_validation(d, hp.validation_fraction, hp.seed).train;
  auto bin = binarize(train, c);
  auto tree = build_prefix_tree(bin, Weighting::length_normalized, e.alphabet);
  auto w = make_weights(hp, tree, lambda_edge);
  return AssignmentProgram(std::move(tree), make_layout(hp), w);
}

json cmd_export(const Options& o) {
  auto m = load_model(o);
  const auto& f = o.export_format;
  if (f == "json" && o.class_name.empty()) {
    emit(o, o.out, to_json(m).dump(2) + "\n");
    return {{"format", f}};
  }
  const auto& e = as_ensemble(m);
  auto c = class_index(e.classes, o.class_name);
  const auto& dfa = e.dfas[c];
  std::string text;
  if (f == "dot") {
    text = to_dot(dfa);
  } else if (f == "regex") {
    text = extract_regex(dfa) + "\n";
  } else if (f == "json") {
    text = to_json(dfa).dump(2) + "\n";
  } else if (f == "lp") {
    text = export_lp(class_program(e, c, o));
  } else {
    throw UsageError("unknown export format '" + f + "'");
  }
  emit(o, o.out, text);
  return {{"format", f}, {"class", e.classes[c]}};
}

void add_hyperparams(CLI::App* sub, Options& o) {
  auto& hp = o.hp;
  hp.seed = 0;
  sub->add_option("--qmax", hp.q_max, "Automaton states per class")->capture_default_str();
  sub->add_option("--lambda-edge", o.lambda_edge, "lambda_edge grid (default: 11-point log grid)");
  sub->add_option("--lambda-absorb", hp.lambda_absorb)->capture_default_str();
  sub->add_option("--lambda-pos", hp.lambda_pos)->capture_default_str();
  sub->add_option("--lambda-neg", hp.lambda_neg)->capture_default_str();
  sub->add_flag("--balanced", hp.balanced, "Scale lambda_pos by the negative/positive ratio");
  sub->add_option("--accepting", o.accepting,
                  "Accepting states besides the accepting sink (empty: sink only)")
      ->expected(0, CLI::detail::expected_max_vector_size);
  sub->add_option("--time-limit", hp.time_limit, "Seconds per solve")->capture_default_str();
  sub->add_option("--threads", hp.threads)->capture_default_str();
  sub->add_option("--seed", hp.seed)->capture_default_str();
  sub->add_option("--validation-fraction", hp.validation_fraction)->capture_default_str();
  sub->add_option("--smoothing", hp.smoothing)->capture_default_str();
  sub->add_flag("--uniform-prior", hp.uniform_prior);
  sub->add_option("--alpha", o.alpha, "n-gram additive smoothing")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Automaton-based sequence classification"};
  app.set_version_flag("--version", SEQDFA_VERSION);
  app.set_config("--config", "", "TOML file with option defaults; flags override it");
  app.add_option("--run-dir", o.run_dir, "Write outputs and manifest.json here");
  app.require_subcommand(1);
  app.fallthrough();

  auto* gen = app.add_subcommand("gen-office", "Write the office-walk dataset as JSONL");
  gen->add_option("--fixture", o.fixture, "Fixture JSON (default: bundled)");
  gen->add_option("--dump-fixture", o.dump_fixture, "Also write the fixture JSON here");
  gen->add_option("--out", o.out, "Output file (default: stdout)");

  auto* train = app.add_subcommand("train", "Train a classifier");
  train->add_option("--data", o.data, "Labelled traces (.jsonl or .csv)")->required();
  train->add_option("--data-format", o.format, "jsonl or csv (default: from the extension)");
  train->add_option("--model", o.model_kind, "disc, dfa-ft, ngram1 or ngram2")
      ->check(CLI::IsMember({"disc", "dfa-ft", "ngram1", "ngram2"}))
      ->capture_default_str();
  train->add_option("--out", o.out, "Model file")->required();
  add_hyperparams(train, o);

  auto* predict = app.add_subcommand("predict", "Per-prefix class posteriors");
  auto* evaluate = app.add_subcommand("evaluate", "Accuracy and earliness metrics");
  auto* explain = app.add_subcommand("explain", "Counterfactual explanation of a rejection");
  auto* verify = app.add_subcommand("verify", "Check a class automaton against a property");
  auto* modify = app.add_subcommand("modify", "Intersect a class automaton with a criterion");
  auto* exp = app.add_subcommand("export", "Export a model or class automaton");
  for (auto* sub : {predict, evaluate, explain, verify, modify, exp}) {
    sub->add_option("--model", o.model_path, "Model file")->required();
    sub->add_option("--out", o.out, "Output file (default: stdout)");
  }
  for (auto* sub : {predict, evaluate, modify, exp}) {
    sub->add_option("--data", o.data, "Traces (.jsonl or .csv)");
    sub->add_option("--data-format", o.format, "jsonl or csv (default: from the extension)");
  }
  predict->add_option("--trace", o.trace, "Whitespace-separated symbols");
  evaluate->add_option("--horizon", o.horizon, "Utility horizon")->capture_default_str();
  evaluate->add_option("--predictions-csv", o.predictions_csv, "Per-prefix predictions");
  for (auto* sub : {explain, verify, modify, exp}) sub->add_option("--class", o.class_name);
  explain->add_option("--trace", o.trace, "Whitespace-separated symbols")->required();
  explain->add_option("--vocabulary", o.vocabulary,
                      "Symbols allowed in explanations; edits using others are flagged");
  for (auto* sub : {verify, modify}) {
    sub->add_option("--property", o.property, "eventually, never or precedes");
    sub->add_option("--symbols", o.symbols, "Property symbols; for precedes the last is the anchor");
    sub->add_option("--criterion", o.criterion, "Automaton JSON used instead of --property");
  }
  exp->add_option("--format", o.export_format, "dot, regex, lp or json")
      ->check(CLI::IsMember({"dot", "regex", "lp", "json"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(kUsage, "usage", e.what());
  }

  auto t0 = std::chrono::steady_clock::now();
  try {
    auto* sub = app.get_subcommands().front();
    std::string name = sub->get_name();
    json summary;
    if (name == "gen-office") summary = cmd_gen_office(o);
    else if (name == "train") summary = cmd_train(o, *sub);
    else if (name == "predict") summary = cmd_predict(o);
    else if (name == "evaluate") summary = cmd_evaluate(o);
    else if (name == "explain") summary = cmd_explain(o);
    else if (name == "verify") summary = cmd_verify(o);
    else if (name == "modify") summary = cmd_modify(o);
    else summary = cmd_export(o);

    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.run_dir.empty()) {
      json manifest = {{"tool", "seqdfa"},
                       {"version", SEQDFA_VERSION},
                       {"json_library", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                            std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                            std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                       {"cli_library", CLI11_VERSION},
                       {"compiler", __VERSION__},
                       {"command", name},
                       {"argv", std::vector<std::string>(argv + 1, argv + argc)},
                       {"flags", sub->config_to_str(true, false)},
                       {"seed", o.hp.seed},
                       {"timings", {{"total_seconds", secs}}},
                       {"summary", summary}};
      write_text(fs::path(o.run_dir) / "manifest.json", manifest.dump(2) + "\n");
    } else if (name == "train" || name == "modify") {
      std::cerr << summary.dump() << std::endl;
    }
  } catch (const InvariantError& e) {
    return report_error(kInvariant, "invariant", e.what());
  } catch (const UsageError& e) {
    return report_error(kUsage, "usage", e.what());
  } catch (const DataError& e) {
    return report_error(kData, "data", e.what());
  } catch (const std::exception& e) {
    return report_error(kInvariant, "internal", e.what());
  }
  return kOk;
}
