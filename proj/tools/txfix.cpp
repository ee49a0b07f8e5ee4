// Copyright 2026 The txfix Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// txfix command-line entry point.

#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "txfix/binary_io.hpp"
#include "txfix/csv.hpp"
#include "txfix/error.hpp"
#include "txfix/feature_file.hpp"
#include "txfix/features.hpp"
#include "txfix/forest.hpp"
#include "txfix/hash.hpp"
#include "txfix/logistic.hpp"
#include "txfix/logstore.hpp"
#include "txfix/metrics.hpp"
#include "txfix/prep.hpp"
#include "txfix/registry.hpp"
#include "txfix/replay.hpp"
#include "txfix/service.hpp"
#include "txfix/synth.hpp"

namespace txfix {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Paths {
  std::string schema;
  std::string taxonomy;
  std::string policy;
};

ErrorTaxonomy load_taxonomy(const std::string& path) {
  return path.empty() ? ErrorTaxonomy::defaults() : ErrorTaxonomy::load(path);
}

FilterPolicy load_policy(const std::string& path) {
  return path.empty() ? FilterPolicy::defaults() : FilterPolicy::load(path);
}

FeatureSchema load_schema(const std::string& path, DatasetKind kind) {
  if (!path.empty()) return FeatureSchema::load(path);
  return kind == DatasetKind::kDetection ? FeatureSchema::detection_default()
                                         : FeatureSchema::correction_default();
}

void print_ingest(std::string_view table, const IngestReport& r) {
  std::cout << fmt::format("{}: {} rows added, {} duplicates, {} quarantined\n", table, r.rows_added,
                           r.duplicates, r.quarantined);
  for (const auto& e : r.errors) {
    std::cout << fmt::format("  line {}: {}: {}\n", e.line, e.reason, e.detail);
  }
}

// synth

struct SynthArgs {
  std::string profile = "easy";
  std::string out;
  std::optional<std::uint64_t> seed;
};

int run_synth(const SynthArgs& a) {
  GeneratorProfile p = a.profile == "easy"   ? GeneratorProfile::easy()
                       : a.profile == "hard" ? GeneratorProfile::hard()
                                             : GeneratorProfile::load(a.profile);
  if (a.seed) p.seed = *a.seed;
  const auto corpus = generate_corpus(p);
  write_corpus(corpus, a.out);
  std::cout << fmt::format("{} transactions, {} injected errors, seed {}\n", corpus.transaction_count,
                           corpus.truth.size(), p.seed);
  return 0;
}

// ingest

struct IngestArgs {
  std::string corpus;
  std::string store;
};

int run_ingest(const IngestArgs& a) {
  LogStore store{fs::path(a.store)};
  const fs::path dir(a.corpus);
  std::ifstream tlog(dir / "tlog.csv", std::ios::binary);
  if (!tlog) fail("logstore.UnreadableSource", "cannot open " + (dir / "tlog.csv").string());
  print_ingest("tlog", store.ingest_tlog(tlog));
  std::ifstream plog(dir / "plog.csv", std::ios::binary);
  if (plog) print_ingest("plog", store.ingest_plog(plog));
  std::cout << fmt::format("{} transactions, {} plog entries\n", store.transaction_count(),
                           store.plog_entry_count());
  return 0;
}

// reconstruct

struct ReconstructArgs {
  std::string store;
  bool verify = false;
  std::string truth;
  std::string out;
};

int run_reconstruct(const ReconstructArgs& a) {
  const LogStore store{fs::path(a.store)};
  std::vector<ReconstructionResult> results;
  std::size_t skipped = 0, roundtrip_failures = 0;
  for (const auto& ct : store.corrected_transactions()) {
    auto r = reconstruct(ct.transaction, ct.history);
    skipped += r.skipped.size();
    if (!verify_roundtrip(r)) ++roundtrip_failures;
    results.push_back(std::move(r));
  }
  if (!a.out.empty()) {
    std::ofstream out(a.out, std::ios::binary);
    csv::write_row(out, tlog_columns());
    for (const auto& r : results) {
      for (const auto& rec : r.erroneous.records()) csv::write_row(out, format_tlog_row(rec));
    }
    if (!out) fail("cli.WriteFailed", "cannot write " + a.out);
  }
  std::cout << fmt::format("{} corrected transactions, {} skipped entries, {} round-trip failures\n",
                           results.size(), skipped, roundtrip_failures);
  if (!a.verify) return roundtrip_failures == 0 ? 0 : 1;
  const auto truth = parse_ground_truth(read_file_bytes(a.truth));
  const auto report = oracle_check(truth, results);
  for (const auto& m : report.mismatches) {
    std::cout << fmt::format("  {}: {}\n", to_string(m.key), m.detail);
  }
  std::cout << fmt::format("{} mismatches\n", report.mismatches.size());
  return report.ok() && roundtrip_failures == 0 ? 0 : 1;
}

// extract

struct ExtractArgs {
  std::string store;
  std::string kind = "detection";
  std::string error_class;
  std::string out;
  std::string csv;
  std::uint64_t seed = 0;
  double train = 0.7, test = 0.15, validation = 0.15;
  Paths paths;
};

int run_extract(const ExtractArgs& a) {
  const LogStore store{fs::path(a.store)};
  const auto taxonomy = load_taxonomy(a.paths.taxonomy);
  DatasetOptions options;
  options.ratios = {a.train, a.test, a.validation};
  options.seed = a.seed;
  options.policy = load_policy(a.paths.policy);
  Dataset ds;
  if (a.kind == "detection") {
    ds = build_detection_dataset(store, load_schema(a.paths.schema, DatasetKind::kDetection), taxonomy,
                                 options);
  } else if (a.kind == "correction") {
    if (a.error_class.empty()) fail("cli.BadArguments", "--class is required for correction");
    const int id = taxonomy.by_name(a.error_class).id;
    ds = build_correction_dataset(store, load_schema(a.paths.schema, DatasetKind::kCorrection), taxonomy,
                                  id, options);
  } else {
    fail("cli.BadArguments", "--kind must be detection or correction");
  }
  write_feature_file(ds, a.out);
  if (!a.csv.empty()) {
    std::ofstream csv(a.csv, std::ios::binary);
    export_csv(ds, csv);
  }
  std::cout << fmt::format("{} rows ({} train, {} test, {} validation), {} columns\n", ds.rows.size(),
                           ds.rows_in(Split::kTrain).size(), ds.rows_in(Split::kTest).size(),
                           ds.rows_in(Split::kValidation).size(), ds.columns.size());
  std::cout << fmt::format("sha256 {}\n", sha256_hex(read_file_bytes(a.out)));
  return 0;
}

// training

struct TrainArgs {
  std::string features;
  std::string registry = "models";
  std::uint64_t seed = 0;
  bool activate = false;
  Paths paths;
  // detector
  std::string mode = "joint";
  std::vector<std::string> labels;
  std::size_t trees = 100;
  std::size_t max_depth = 16;
  std::size_t min_leaf = 2;
  std::size_t mtry = 0;
  // corrector
  std::vector<double> penalties;
  std::size_t folds = 5;
  std::size_t max_iterations = 10000;
};

std::string now_text() {
  return format_timestamp(std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
}

ModelManifest base_manifest(const Dataset& ds, const std::string& features, std::uint64_t seed) {
  ModelManifest m;
  m.seed = seed;
  m.schema_fingerprint = ds.schema_fingerprint;
  m.taxonomy_fingerprint = ds.taxonomy_fingerprint;
  m.dataset_sha256 = sha256_hex(read_file_bytes(features));
  m.ratios = ds.ratios;
  m.created_at = now_text();
  return m;
}

int finish_training(Registry& registry, ModelManifest m, const std::string& payload, bool activate) {
  const auto purpose = m.purpose;
  const int version = registry.save(std::move(m), payload);
  if (activate) registry.activate(purpose, version);
  std::cout << fmt::format("{} v{}\n", purpose, version);
  std::cout << fmt::format("payload sha256 {}\n", sha256_hex(payload));
  return 0;
}

int run_train_detector(const TrainArgs& a) {
  const auto taxonomy = load_taxonomy(a.paths.taxonomy);
  const auto schema = load_schema(a.paths.schema, DatasetKind::kDetection);
  const auto ds = read_feature_file(a.features, {schema.fingerprint(), taxonomy.fingerprint()});
  if (ds.kind != DatasetKind::kDetection) fail("cli.BadArguments", a.features + " is not a detection set");
  const auto mode = parse_forest_mode(a.mode);
  std::vector<int> label_ids;
  if (a.labels.empty()) {
    if (mode == ForestMode::kPerLabel) fail("cli.BadArguments", "--label is required for per-label mode");
    for (const auto& c : taxonomy.classes) label_ids.push_back(c.id);
  } else {
    if (mode == ForestMode::kPerLabel && a.labels.size() != 1) {
      fail("cli.BadArguments", "per-label mode takes exactly one --label");
    }
    for (const auto& name : a.labels) label_ids.push_back(taxonomy.by_name(name).id);
  }
  ForestParams params;
  params.n_trees = a.trees;
  params.tree.max_depth = a.max_depth;
  params.tree.min_leaf = a.min_leaf;
  params.tree.feature_subset_size = a.mtry;
  const auto model = ForestModel::train(ds, mode, label_ids, params, a.seed);
  auto m = base_manifest(ds, a.features, a.seed);
  m.purpose = detection_purpose();
  m.kind = "forest";
  m.hyperparameters = params.to_json();
  m.hyperparameters["mode"] = to_string(mode);
  m.hyperparameters["label_ids"] = label_ids;
  m.hyperparameters["feature_schema"] = schema.to_json();
  m.hyperparameters["taxonomy"] = taxonomy.to_json();
  Registry registry{fs::path(a.registry)};
  return finish_training(registry, std::move(m), model.serialize(), a.activate);
}

int run_train_corrector(const TrainArgs& a) {
  const auto taxonomy = load_taxonomy(a.paths.taxonomy);
  const auto schema = load_schema(a.paths.schema, DatasetKind::kCorrection);
  const auto ds = read_feature_file(a.features, {schema.fingerprint(), taxonomy.fingerprint()});
  if (ds.kind != DatasetKind::kCorrection) fail("cli.BadArguments", a.features + " is not a correction set");
  LogisticParams params;
  if (!a.penalties.empty()) params.penalties = a.penalties;
  params.folds = a.folds;
  params.max_iterations = a.max_iterations;
  const auto model = OvrLogisticModel::train(ds, params, a.seed);
  if (!model.converged()) {
    std::cerr << fmt::format("warning: learn.DidNotConverge: penalty {} hit {} iterations\n",
                             model.penalty(), params.max_iterations);
  }
  auto m = base_manifest(ds, a.features, a.seed);
  m.purpose = correction_purpose(ds.class_id);
  m.kind = "ovr_logistic";
  m.hyperparameters = params.to_json();
  m.hyperparameters["selected_penalty"] = model.penalty();
  m.hyperparameters["cv_accuracy"] = model.cv_accuracy();
  m.hyperparameters["converged"] = model.converged();
  m.hyperparameters["feature_schema"] = schema.to_json();
  m.hyperparameters["taxonomy"] = taxonomy.to_json();
  Registry registry{fs::path(a.registry)};
  return finish_training(registry, std::move(m), model.serialize(), a.activate);
}

// evaluate

struct EvaluateArgs {
  std::string registry = "models";
  std::string model;
  std::string features;
  std::string split = "test";
  std::string out;
};

int run_evaluate(const EvaluateArgs& a) {
  const auto slash = a.model.rfind('/');
  if (slash == std::string::npos) fail("cli.BadArguments", "--model must be <purpose>/<version>");
  const auto purpose = a.model.substr(0, slash);
  Registry registry{fs::path(a.registry)};
  const int version = parse_version(a.model.substr(slash + 1));
  const auto loaded = registry.load(purpose, version);
  const auto ds = read_feature_file(a.features, {loaded.manifest.schema_fingerprint,
                                                 loaded.manifest.taxonomy_fingerprint});
  const auto split = parse_split(a.split);
  EvaluationReport report;
  if (loaded.manifest.kind == "forest") {
    report = evaluate_forest(ForestModel::deserialize(loaded.payload), ds, split);
  } else {
    report = evaluate_logistic(OvrLogisticModel::deserialize(loaded.payload), ds, split);
  }
  registry.attach_evaluation(purpose, version, report);
  const auto text = report.to_json().dump(2) + "\n";
  if (!a.out.empty()) write_file_atomic(a.out, text);
  std::cout << text;
  return 0;
}

// registry

struct RegistryArgs {
  std::string registry = "models";
  std::string purpose;
  std::string version;
};

int run_registry_list(const RegistryArgs& a) {
  const Registry registry{fs::path(a.registry)};
  for (const auto& m : registry.list()) {
    const bool active = registry.active(m.purpose) == m.version;
    std::string summary;
    if (m.evaluation) {
      summary = fmt::format(" {} subset_accuracy={:.4f}", m.evaluation->split, m.evaluation->subset_accuracy);
    }
    std::cout << fmt::format("{}\tv{}\t{}{}\t{}\t{}{}\n", m.purpose, m.version, m.kind,
                             active ? "\tACTIVE" : "\t-", m.created_at, m.payload_sha256.substr(0, 16),
                             summary);
  }
  return 0;
}

int run_registry_activate(const RegistryArgs& a) {
  Registry registry{fs::path(a.registry)};
  const int version = parse_version(a.version);
  registry.activate(a.purpose, version);
  std::cout << fmt::format("{} v{} active\n", a.purpose, version);
  return 0;
}

// serve

struct ServeArgs {
  std::string config;
  std::string bind;
  std::string registry;
  std::string store;
};

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

int run_serve(const ServeArgs& a) {
  ServiceConfig c = a.config.empty() ? ServiceConfig{} : ServiceConfig::load(a.config);
  c.apply_environment();
  if (!a.bind.empty()) {
    const auto bound = ServiceConfig::from_json(json{{"bind_address", a.bind}});
    c.host = bound.host;
    c.port = bound.port;
  }
  if (!a.registry.empty()) c.registry_path = a.registry;
  if (!a.store.empty()) c.store_path = a.store;
  Service service(c);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const int port = service.start();
  std::cout << fmt::format("listening on {}:{}\n", c.host, port) << std::flush;
  while (g_stop == 0) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  service.stop();
  return 0;
}

// defaults

int run_defaults(const std::string& out) {
  const fs::path dir(out);
  fs::create_directories(dir);
  auto write = [&](const char* name, const json& j) { write_file_atomic(dir / name, j.dump(2) + "\n"); };
  write("detection_schema.json", FeatureSchema::detection_default().to_json());
  write("correction_schema.json", FeatureSchema::correction_default().to_json());
  write("taxonomy.json", ErrorTaxonomy::defaults().to_json());
  write("policy.json", FilterPolicy::defaults().to_json());
  write("easy_profile.json", GeneratorProfile::easy().to_json());
  write("hard_profile.json", GeneratorProfile::hard().to_json());
  write("service.json", json{{"bind_address", "127.0.0.1:8080"},
                             {"registry_path", "models"},
                             {"store_path", "store"},
                             {"flag_threshold", 0.5},
                             {"log_requests", true}});
  std::cout << "wrote defaults to " << dir.string() << "\n";
  return 0;
}

void add_paths(CLI::App* cmd, Paths& p, bool schema = true) {
  if (schema) cmd->add_option("--schema", p.schema, "Feature schema JSON (default: built-in)");
  cmd->add_option("--taxonomy", p.taxonomy, "Error taxonomy JSON (default: tender1..tender3)");
  cmd->add_option("--policy", p.policy, "Filter policy JSON (default: built-in)");
}

int run(int argc, char** argv) {
  CLI::App app{"txfix: transaction error detection and correction pipeline"};
  app.set_config("--config", "", "INI or TOML file with option defaults");
  app.require_subcommand(1);
  std::function<int()> action;

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic TLOG/PLOG corpus with ground truth");
  s->add_option("--profile", synth.profile, "easy, hard, or a profile JSON file")->capture_default_str();
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--seed", synth.seed, "Override the profile seed");
  s->callback([&] { action = [&] { return run_synth(synth); }; });

  IngestArgs ingest;
  auto* i = app.add_subcommand("ingest", "Load tlog.csv and plog.csv into a durable store");
  i->add_option("--corpus", ingest.corpus, "Directory holding tlog.csv and plog.csv")->required();
  i->add_option("--store", ingest.store, "Store directory")->required();
  i->callback([&] { action = [&] { return run_ingest(ingest); }; });

  ReconstructArgs recon;
  auto* r = app.add_subcommand("reconstruct", "Recover erroneous transactions by replaying PLOG");
  r->add_option("--store", recon.store, "Store directory")->required();
  r->add_flag("--verify", recon.verify, "Compare against a ground-truth manifest");
  r->add_option("--truth", recon.truth, "ground_truth.csv written by synth");
  r->add_option("--out", recon.out, "Write the erroneous versions as TLOG CSV");
  r->callback([&] {
    if (recon.verify && recon.truth.empty()) {
      throw CLI::ValidationError("--truth", "required with --verify");
    }
    action = [&] { return run_reconstruct(recon); };
  });

  ExtractArgs extract;
  auto* e = app.add_subcommand("extract", "Build a detection or correction feature file");
  e->add_option("--store", extract.store, "Store directory")->required();
  e->add_option("--kind", extract.kind, "detection or correction")
      ->check(CLI::IsMember({"detection", "correction"}))
      ->capture_default_str();
  e->add_option("--class", extract.error_class, "Error class name for correction sets");
  e->add_option("--out", extract.out, "Feature file path")->required();
  e->add_option("--csv", extract.csv, "Also export the rows as CSV");
  e->add_option("--seed", extract.seed, "Seed for balancing and splits")->capture_default_str();
  e->add_option("--train-ratio", extract.train)->capture_default_str();
  e->add_option("--test-ratio", extract.test)->capture_default_str();
  e->add_option("--validation-ratio", extract.validation)->capture_default_str();
  add_paths(e, extract.paths);
  e->callback([&] { action = [&] { return run_extract(extract); }; });

  TrainArgs det;
  auto* d = app.add_subcommand("train-detector", "Train a random-forest error detector");
  d->add_option("--features", det.features, "Detection feature file")->required();
  d->add_option("--registry", det.registry, "Registry directory")->capture_default_str();
  d->add_option("--mode", det.mode, "per-label or joint")
      ->check(CLI::IsMember({"per-label", "joint"}))
      ->capture_default_str();
  d->add_option("--label", det.labels, "Error class name (repeatable; default: all classes)");
  d->add_option("--trees", det.trees)->capture_default_str();
  d->add_option("--max-depth", det.max_depth)->capture_default_str();
  d->add_option("--min-leaf", det.min_leaf)->capture_default_str();
  d->add_option("--feature-subset", det.mtry, "Features per split (0: ceil(sqrt(d)))")->capture_default_str();
  d->add_option("--seed", det.seed)->capture_default_str();
  d->add_flag("--activate", det.activate, "Activate the new version");
  add_paths(d, det.paths);
  d->callback([&] { action = [&] { return run_train_detector(det); }; });

  TrainArgs corr;
  auto* c = app.add_subcommand("train-corrector", "Train a one-vs-rest logistic value recommender");
  c->add_option("--features", corr.features, "Correction feature file")->required();
  c->add_option("--registry", corr.registry, "Registry directory")->capture_default_str();
  c->add_option("--penalties", corr.penalties, "Candidate L2 penalties")->delimiter(',');
  c->add_option("--folds", corr.folds)->capture_default_str();
  c->add_option("--max-iterations", corr.max_iterations)->capture_default_str();
  c->add_option("--seed", corr.seed)->capture_default_str();
  c->add_flag("--activate", corr.activate, "Activate the new version");
  add_paths(c, corr.paths);
  c->callback([&] { action = [&] { return run_train_corrector(corr); }; });

  EvaluateArgs eval;
  auto* v = app.add_subcommand("evaluate", "Evaluate a registered model and attach the report");
  v->add_option("--registry", eval.registry, "Registry directory")->capture_default_str();
  v->add_option("--model", eval.model, "<purpose>/<version>, e.g. detection/v1")->required();
  v->add_option("--features", eval.features, "Feature file")->required();
  v->add_option("--split", eval.split, "train, test or validation")->capture_default_str();
  v->add_option("--out", eval.out, "Also write the report JSON here");
  v->callback([&] { action = [&] { return run_evaluate(eval); }; });

  RegistryArgs reg;
  auto* g = app.add_subcommand("registry", "Inspect or activate registered models");
  g->require_subcommand(1);
  auto* gl = g->add_subcommand("list", "List all versions");
  gl->add_option("--registry", reg.registry, "Registry directory")->capture_default_str();
  gl->callback([&] { action = [&] { return run_registry_list(reg); }; });
  auto* ga = g->add_subcommand("activate", "Point a purpose at a version");
  ga->add_option("--registry", reg.registry, "Registry directory")->capture_default_str();
  ga->add_option("--purpose", reg.purpose, "detection or correction:<class id>")->required();
  ga->add_option("--version", reg.version, "Version number")->required();
  ga->callback([&] { action = [&] { return run_registry_activate(reg); }; });

  ServeArgs serve;
  auto* sv = app.add_subcommand("serve", "Run the HTTP detection and review service");
  sv->add_option("--service-config", serve.config, "Service JSON config");
  sv->add_option("--bind", serve.bind, "host:port (port 0 picks a free port)");
  sv->add_option("--registry", serve.registry, "Registry directory");
  sv->add_option("--store", serve.store, "Store directory");
  sv->callback([&] { action = [&] { return run_serve(serve); }; });

  std::string defaults_out;
  auto* df = app.add_subcommand("defaults", "Write the built-in schemas, taxonomy, policy and profiles");
  df->add_option("--out", defaults_out, "Output directory")->required();
  df->callback([&] { action = [&] { return run_defaults(defaults_out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    if (err.get_exit_code() == 0) return app.exit(err);
    std::cerr << fmt::format("error: cli.BadArguments: {}\n", err.what());
    return 2;
  }
  return action();
}

}  // namespace
}  // namespace txfix

int main(int argc, char** argv) {
  try {
    return txfix::run(argc, argv);
  } catch (const txfix::Error& e) {
    std::cerr << fmt::format("error: {}\n", e.what());
  } catch (const std::exception& e) {
    std::cerr << fmt::format("error: cli.Internal: {}\n", e.what());
  }
  return 1;
}
