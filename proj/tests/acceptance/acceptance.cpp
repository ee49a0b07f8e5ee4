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


// Acceptance run: one [PASS]/[FAIL] line per criterion. Exits non-zero when
// any criterion fails.

#include <sys/wait.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "../golden_data.hpp"
#include "../oracles.hpp"
#include "../support.hpp"
#include "txfix/binary_io.hpp"
#include "txfix/feature_file.hpp"
#include "txfix/features.hpp"
#include "txfix/forest.hpp"
#include "txfix/json_codec.hpp"
#include "txfix/logistic.hpp"
#include "txfix/metrics.hpp"
#include "txfix/registry.hpp"
#include "txfix/replay.hpp"
#include "txfix/service.hpp"
#include "txfix/synth.hpp"
#include "httplib.h"

#ifndef TXFIX_CLI_PATH
#error "TXFIX_CLI_PATH must name the txfix binary"
#endif
#ifndef TXFIX_GOLDEN_DIR
#error "TXFIX_GOLDEN_DIR must name tests/golden"
#endif

namespace txfix::acceptance {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const Outcome& o) {
  std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << name << ": " << o.detail << std::endl;
  if (!o.pass) ++failures;
}

void criterion(const std::string& name, const std::function<Outcome()>& fn) {
  try {
    report(name, fn());
  } catch (const std::exception& e) {
    report(name, {false, std::string("exception: ") + e.what()});
  }
}

// Accumulates sub-check failures for multi-step criteria.
struct Checks {
  std::vector<std::string> failed;
  std::size_t count = 0;
  void expect(bool ok, const std::string& what) {
    ++count;
    if (!ok) failed.push_back(what);
  }
  Outcome outcome(const std::string& summary) const {
    if (failed.empty()) return {true, fmt::format("{} ({} checks)", summary, count)};
    std::string text;
    for (const auto& f : failed) text += (text.empty() ? "" : "; ") + f;
    return {false, fmt::format("{}/{} checks failed: {}", failed.size(), count, text)};
  }
};

constexpr std::uint64_t kCorpusSeed = 42;
constexpr std::uint64_t kDatasetSeed = 7;
constexpr std::uint64_t kModelSeed = 1;

// State shared by the data-driven criteria.
struct Pipeline {
  Corpus corpus;
  LogStore store;
  ErrorTaxonomy taxonomy = ErrorTaxonomy::defaults();
  FeatureSchema detection_schema = FeatureSchema::detection_default();
  FeatureSchema correction_schema = FeatureSchema::correction_default();
  std::optional<Dataset> detection;
  std::optional<Dataset> correction;
  std::optional<ForestModel> joint;
  std::optional<OvrLogisticModel> corrector;
};

Outcome replay_round_trip(Pipeline& p) {
  const auto start = Clock::now();
  p.corpus = generate_corpus([] {
    auto prof = GeneratorProfile::easy();
    prof.seed = kCorpusSeed;
    return prof;
  }());
  testing::load_corpus(p.store, p.corpus);
  std::vector<ReconstructionResult> results;
  for (const auto& ct : p.store.corrected_transactions()) results.push_back(reconstruct(ct.transaction, ct.history));
  const auto oracle = oracle_check(p.corpus.truth, results);
  const double elapsed = seconds_since(start);
  const bool ok = p.corpus.transaction_count == 10000 && oracle.ok() && oracle.checked == p.corpus.truth.size() &&
                  !p.corpus.truth.empty() && elapsed < 30.0;
  return {ok, fmt::format("{} transactions, {}/{} injected values recovered, {} mismatches, {:.2f} s (limit 30 s)",
                          p.corpus.transaction_count, oracle.checked - oracle.mismatches.size(), oracle.checked,
                          oracle.mismatches.size(), elapsed)};
}

Outcome metric_oracles() {
  std::mt19937_64 gen(20260302);
  std::size_t mismatches = 0, jaccard_binary = 0, monotone = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto m = oracle::random_multilabel(gen);
    if (subset_accuracy(m.pred, m.truth) != oracle::subset_accuracy(m)) ++mismatches;
    if (jaccard_score(m.pred, m.truth) != oracle::jaccard(m)) ++mismatches;
  }
  for (int i = 0; i < 1000; ++i) {
    const auto m = oracle::random_multilabel(gen);
    std::vector<std::string> names(m.pred[0].size(), "l");
    const auto rep = evaluate_detection(m.pred, m.truth, names);
    const auto conf = oracle::confusion(m);
    for (std::size_t j = 0; j < conf.size(); ++j) {
      if (rep.labels[j].precision != oracle::precision(conf[j][0], conf[j][1])) ++mismatches;
      if (rep.labels[j].recall != oracle::recall(conf[j][0], conf[j][2])) ++mismatches;
      if (precision(conf[j][0], conf[j][1]) != oracle::precision(conf[j][0], conf[j][1])) ++mismatches;
      if (recall(conf[j][0], conf[j][2]) != oracle::recall(conf[j][0], conf[j][2])) ++mismatches;
    }
  }
  for (int i = 0; i < 1000; ++i) {
    const auto m = oracle::random_multilabel(gen, 30, 1);
    if (jaccard_score(m.pred, m.truth) != subset_accuracy(m.pred, m.truth)) ++jaccard_binary;
  }
  for (int i = 0; i < 1000; ++i) {
    const auto r = oracle::random_rankings(gen);
    double prev = 0.0;
    for (std::size_t k = 1; k <= r.classes; ++k) {
      const double a = accuracy_at_k(r.rankings, r.truth, k);
      if (a != oracle::accuracy_at_k(r, k)) ++mismatches;
      if (a < prev) ++monotone;
      prev = a;
    }
  }
  const bool ok = mismatches == 0 && jaccard_binary == 0 && monotone == 0;
  return {ok, fmt::format("1000 instances per metric: {} oracle mismatches, {} binary Jaccard != subset accuracy, "
                          "{} acc@k decreases",
                          mismatches, jaccard_binary, monotone)};
}

Outcome gradient_check() {
  std::mt19937_64 gen(314159);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) worst = std::max(worst, oracle::max_gradient_relative_error(gen));
  return {worst < 1e-5, fmt::format("100 instances, max relative error {:.3e} (limit 1e-5)", worst)};
}

std::size_t positives(const Dataset& ds, std::size_t label) {
  std::size_t n = 0;
  for (const auto& r : ds.rows) n += r.labels[label];
  return n;
}

Outcome detection(Pipeline& p) {
  const auto start = Clock::now();
  DatasetOptions opts;
  opts.seed = kDatasetSeed;
  p.detection = build_detection_dataset(p.store, p.detection_schema, p.taxonomy, opts);
  const auto& ds = *p.detection;
  const int abundant = p.taxonomy.by_name("tender1").id;
  const int scarce = p.taxonomy.by_name("tender3").id;
  const auto n_abundant = positives(ds, static_cast<std::size_t>(abundant));
  const auto n_scarce = positives(ds, static_cast<std::size_t>(scarce));

  const ForestParams params;
  const auto per_abundant = ForestModel::train(ds, ForestMode::kPerLabel, {abundant}, params, kModelSeed);
  const auto per_scarce = ForestModel::train(ds, ForestMode::kPerLabel, {scarce}, params, kModelSeed);
  std::vector<int> all;
  for (const auto& c : p.taxonomy.classes) all.push_back(c.id);
  p.joint = ForestModel::train(ds, ForestMode::kJoint, all, params, kModelSeed);

  const auto ra = evaluate_forest(per_abundant, ds, Split::kTest).labels[0];
  const auto rs = evaluate_forest(per_scarce, ds, Split::kTest).labels[0];
  const auto rj = evaluate_forest(*p.joint, ds, Split::kTest);
  const double elapsed = seconds_since(start);

  Checks c;
  c.expect(n_abundant >= 1000, fmt::format("tender1 has {} positives (need >= 1000)", n_abundant));
  c.expect(n_scarce <= 100, fmt::format("tender3 has {} positives (need <= 100)", n_scarce));
  c.expect(ra.precision >= 0.90, fmt::format("tender1 precision {:.4f} < 0.90", ra.precision));
  c.expect(ra.recall >= 0.90, fmt::format("tender1 recall {:.4f} < 0.90", ra.recall));
  c.expect(rs.recall < ra.recall, fmt::format("tender3 recall {:.4f} not below tender1 {:.4f}", rs.recall, ra.recall));
  c.expect(rj.subset_accuracy >= 0.80, fmt::format("joint subset accuracy {:.4f} < 0.80", rj.subset_accuracy));
  c.expect(elapsed < 120.0, fmt::format("runtime {:.1f} s >= 120 s", elapsed));
  return c.outcome(fmt::format(
      "{} rows; per-label tender1 ({} positives) P={:.4f} R={:.4f}; tender3 ({} positives) P={:.4f} R={:.4f}; "
      "joint subset accuracy {:.4f}, Jaccard {:.4f}; {:.1f} s (limit 120 s)",
      ds.rows.size(), n_abundant, ra.precision, ra.recall, n_scarce, rs.precision, rs.recall, rj.subset_accuracy,
      rj.jaccard, elapsed));
}

Outcome correction(Pipeline& p) {
  const auto start = Clock::now();
  DatasetOptions opts;
  opts.seed = kDatasetSeed;
  const int cls = p.taxonomy.by_name("tender1").id;
  p.correction = build_correction_dataset(p.store, p.correction_schema, p.taxonomy, cls, opts);
  p.corrector = OvrLogisticModel::train(*p.correction, LogisticParams{}, kModelSeed);
  const auto rep = evaluate_logistic(*p.corrector, *p.correction, Split::kTest);
  const auto& acc = rep.accuracy_at_k;
  const std::size_t k = p.corrector->class_count();
  Checks c;
  c.expect(k == 5, fmt::format("domain has {} values (expected 5)", k));
  c.expect(acc.size() == k, "report lacks acc@k for every k");
  if (acc.size() == k && k >= 5) {
    c.expect(acc[0] >= 0.70, fmt::format("acc@1 {:.4f} < 0.70", acc[0]));
    c.expect(acc[4] >= 0.90, fmt::format("acc@5 {:.4f} < 0.90", acc[4]));
    c.expect(acc[4] >= acc[0], "acc@5 < acc@1");
    for (std::size_t i = 1; i < k; ++i) c.expect(acc[i] >= acc[i - 1], fmt::format("acc@{} decreases", i + 1));
    c.expect(acc[k - 1] == 1.0, fmt::format("acc@K {:.6f} != 1", acc[k - 1]));
  }
  std::string accs;
  for (std::size_t i = 0; i < acc.size(); ++i) accs += fmt::format("{}acc@{}={:.4f}", i ? " " : "", i + 1, acc[i]);
  return c.outcome(fmt::format("{} rows ({} test); {}; penalty {}, converged {}; {:.1f} s", p.correction->rows.size(),
                               rep.sample_count, accs, p.corrector->penalty(), p.corrector->converged(),
                               seconds_since(start)));
}

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(TXFIX_CLI_PATH) + " " + args + " 2>&1";
  RunResult r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

// The documented command sequence, run in `dir`.
void run_pipeline(const fs::path& dir) {
  const auto d = dir.string();
  const std::vector<std::string> steps = {
      fmt::format("synth --profile easy --seed {} --out {}/corpus", kCorpusSeed, d),
      fmt::format("ingest --corpus {0}/corpus --store {0}/store", d),
      fmt::format("reconstruct --store {0}/store --verify --truth {0}/corpus/ground_truth.csv", d),
      fmt::format("extract --store {0}/store --kind detection --seed {1} --out {0}/detection.features", d, kDatasetSeed),
      fmt::format("extract --store {0}/store --kind correction --class tender1 --seed {1} --out {0}/tender1.features", d,
                  kDatasetSeed),
      fmt::format("train-detector --features {0}/detection.features --registry {0}/models --mode joint --seed {1}", d,
                  kModelSeed),
      fmt::format("train-corrector --features {0}/tender1.features --registry {0}/models --seed {1}", d, kModelSeed),
      fmt::format("evaluate --registry {0}/models --model detection/v1 --features {0}/detection.features --split test "
                  "--out {0}/detection.report.json",
                  d),
      fmt::format("evaluate --registry {0}/models --model correction:0/v1 --features {0}/tender1.features --split test "
                  "--out {0}/tender1.report.json",
                  d),
  };
  for (const auto& s : steps) {
    const auto r = run_cli(s);
    if (r.exit_code != 0) fail("acceptance.PipelineFailed", "txfix " + s + " exited " + std::to_string(r.exit_code) + ": " + r.output);
  }
}

Outcome determinism() {
  testing::TempDir a, b;
  const auto start = Clock::now();
  run_pipeline(a.path());
  run_pipeline(b.path());
  const std::vector<std::string> files = {"corpus/tlog.csv",
                                          "corpus/plog.csv",
                                          "corpus/ground_truth.csv",
                                          "detection.features",
                                          "tender1.features",
                                          "models/detection/1/payload.bin",
                                          "models/correction:0/1/payload.bin",
                                          "detection.report.json",
                                          "tender1.report.json"};
  Checks c;
  for (const auto& f : files) {
    const auto x = read_file_bytes(a / f);
    const auto y = read_file_bytes(b / f);
    c.expect(!x.empty() && x == y, f + " differs");
  }
  const auto ma = Registry(a.path()/ "models").manifest(detection_purpose(), 1);
  const auto mb = Registry(b.path() / "models").manifest(detection_purpose(), 1);
  c.expect(ma.evaluation && mb.evaluation && ma.evaluation->to_json() == mb.evaluation->to_json(),
           "attached detection reports differ");
  c.expect(ma.payload_sha256 == mb.payload_sha256, "manifest payload checksums differ");
  return c.outcome(fmt::format("two CLI runs, {} artifacts byte-identical, {:.1f} s", files.size(), seconds_since(start)));
}

Outcome goldens() {
  const fs::path dir = TXFIX_GOLDEN_DIR;
  auto golden = [&](const std::string& name) { return read_file_bytes(dir / name); };
  Checks c;
  for (const auto& [name, bytes] : golden::generate()) c.expect(golden(name) == bytes, name + " regenerates differently");

  LogStore store;
  std::istringstream tlog(golden("tlog.csv")), plog(golden("plog.csv"));
  store.ingest_tlog(tlog);
  store.ingest_plog(plog);
  std::ostringstream tlog_out, plog_out;
  store.write_tlog(tlog_out);
  store.write_plog(plog_out);
  c.expect(tlog_out.str() == golden("tlog.csv"), "tlog.csv round trip");
  c.expect(plog_out.str() == golden("plog.csv"), "plog.csv round trip");

  const auto features = golden("detection.features");
  c.expect(serialize_dataset(deserialize_dataset(features)) == features, "feature file round trip");
  const auto manifest_text = golden("manifest.json");
  c.expect(ModelManifest::from_json(json::parse(manifest_text)).to_json().dump(2) + "\n" == manifest_text,
           "manifest round trip");
  const auto payload = golden("detection.payload");
  c.expect(ForestModel::deserialize(payload).serialize() == payload, "model payload round trip");

  testing::TempDir tmp;
  write_file_atomic(tmp / "f.bin", features);
  auto other = FeatureSchema::detection_default();
  other.max_item_slots = 10;
  c.expect(testing::error_code_of([&] { read_feature_file(tmp / "f.bin", {other.fingerprint(), std::nullopt}); }) ==
               "features.FingerprintMismatch",
           "foreign schema not rejected with features.FingerprintMismatch");
  auto future = features;
  future[8] = static_cast<char>(kFeatureFileVersion + 1);
  c.expect(testing::error_code_of([&] { deserialize_dataset(future); }) == "features.CorruptFile",
           "future feature file version not rejected with features.CorruptFile");
  auto bad_payload = payload;
  bad_payload[8] = static_cast<char>(bad_payload[8] + 1);
  c.expect(testing::error_code_of([&] { ForestModel::deserialize(bad_payload); }) == "learn.PayloadCorrupt",
           "future payload version not rejected with learn.PayloadCorrupt");
  auto ds = deserialize_dataset(features);
  ds.schema_fingerprint = "0";
  c.expect(testing::error_code_of([&] { evaluate_forest(ForestModel::deserialize(payload), ds, Split::kTest); }) ==
               "learn.FingerprintMismatch",
           "model/dataset fingerprint mismatch not rejected");
  return c.outcome("tlog, plog, feature file, payload and manifest fixtures");
}

class Http {
 public:
  explicit Http(int port) : client_("127.0.0.1", port) {}
  std::pair<int, json> post(const std::string& path, const json& body, const std::string& op = "") {
    httplib::Headers h;
    if (!op.empty()) h.emplace("X-Operator", op);
    auto res = client_.Post(path, h, body.dump(), "application/json");
    if (!res) return {0, {}};
    return {res->status, json::parse(res->body)};
  }
  std::pair<int, json> get(const std::string& path) {
    auto res = client_.Get(path);
    if (!res) return {0, {}};
    return {res->status, json::parse(res->body)};
  }

 private:
  httplib::Client client_;
};

Outcome service_contract(Pipeline& p) {
  testing::TempDir dir;
  const auto store_dir = dir / "store";
  const auto registry_dir = dir / "models";
  {
    LogStore durable(store_dir);
    testing::load_corpus(durable, p.corpus);
  }
  Registry reg(registry_dir);
  ModelManifest dm;
  dm.purpose = detection_purpose();
  dm.kind = "forest";
  dm.hyperparameters = {{"feature_schema", p.detection_schema.to_json()}, {"taxonomy", p.taxonomy.to_json()}};
  dm.schema_fingerprint = p.detection_schema.fingerprint();
  dm.taxonomy_fingerprint = p.taxonomy.fingerprint();
  reg.save(dm, p.joint->serialize());
  reg.save(dm, p.joint->serialize());
  reg.activate(detection_purpose(), 1);
  ModelManifest cm = dm;
  cm.purpose = correction_purpose(p.corrector->class_id());
  cm.kind = "ovr_logistic";
  cm.hyperparameters = {{"feature_schema", p.correction_schema.to_json()}};
  cm.schema_fingerprint = p.correction_schema.fingerprint();
  reg.save(cm, p.corrector->serialize());
  reg.activate(cm.purpose, 1);

  // New arrivals holding injected tender 1 errors, taken from TEST rows.
  const auto policy = FilterPolicy::defaults();
  std::vector<Transaction> arrivals;
  std::vector<std::string> truths;
  std::set<TransactionKey> test_keys;
  for (const auto* r : p.detection->rows_in(Split::kTest)) test_keys.insert(r->key);
  std::uint64_t next_index = 5000000;
  for (const auto& t : p.corpus.truth) {
    if (t.tender_ordinal != 1 || !test_keys.contains(t.key) || arrivals.size() >= 6) continue;
    const auto r = reconstruct(*p.store.transaction(t.key), p.store.history(t.key));
    const auto fv = extract(normalize(r.erroneous, policy), p.detection_schema);
    if (p.joint->predict_proba(fv)[0] < 0.5) continue;
    auto j = to_json(r.erroneous);
    j["key"]["transaction_index"] = next_index++;
    arrivals.push_back(transaction_from_json(j));
    truths.push_back(t.correct_value);
  }
  Checks c;
  c.expect(arrivals.size() >= 4, "fewer than 4 flagged arrivals available");
  if (arrivals.size() < 4) return c.outcome("");

  ServiceConfig config;
  config.port = 0;
  config.store_path = store_dir;
  config.registry_path = registry_dir;
  config.log_requests = false;
  auto service = std::make_unique<Service>(config);
  const int port = service->start();
  Http http(port);

  // /detect
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto [s, b] = http.post("/detect", {{"transaction", to_json(arrivals[i])}});
    c.expect(s == 200 && b["review_item"].is_string() && b["model_version"] == 1, "detect enqueues flagged arrival");
    if (b["review_item"].is_string()) ids.push_back(b["review_item"]);
  }
  c.expect(http.post("/detect", json::object()).first == 400, "detect without transaction is 400");
  std::vector<std::int64_t> prices(25, 100);
  const auto big = testing::make_txn(testing::make_key(99, 1), prices, 0, {{"CASH", "DRAWER", 2500}});
  c.expect(http.post("/detect", {{"transaction", to_json(big)}}).first == 409, "over-sized transaction is 409");

  // /correct
  const auto txn = to_json(arrivals[3]);
  const auto [s5, r5] = http.post("/correct", {{"transaction", txn}, {"class_id", 0}, {"k", 5}});
  const auto [s1, r1] = http.post("/correct", {{"transaction", txn}, {"class_id", 0}, {"k", 1}});
  c.expect(s5 == 200 && r5["recommendations"].size() == 5, "correct returns 5 recommendations");
  c.expect(s1 == 200 && r1["recommendations"].size() == 1 && r1["recommendations"][0] == r5["recommendations"][0],
           "top-1 is the prefix of top-5");
  c.expect(http.post("/correct", {{"transaction", txn}, {"class_id", 42}}).first == 404, "unknown class is 404");
  c.expect(http.post("/correct", {{"transaction", txn}, {"class_id", 0}, {"k", 9}}).first == 422, "bad k is 422");
  c.expect(http.post("/correct", {{"transaction", txn}, {"class_id", 1}}).first == 503, "class without corrector is 503");

  // /queue
  const auto [qs, page] = http.get("/queue?offset=1&limit=1");
  c.expect(qs == 200 && page["total"] == 3 && page["items"].size() == 1 && !ids.empty() &&
               page["items"][0]["id"] == ids.at(1),
           "queue pagination");
  c.expect(http.get("/queue?limit=0").first == 422, "bad page is 422");
  c.expect(ids.size() == 3, "three review items");
  if (ids.size() != 3) return c.outcome("");

  // ACCEPT with audit entry, then double decision.
  const auto [as, ab] =
      http.post("/queue/" + ids[0] + "/decision", {{"action", "ACCEPT"}, {"class_id", 0}, {"value", truths[0]}}, "op1");
  c.expect(as == 200 && ab["status"] == "ACCEPTED", "ACCEPT succeeds");
  const auto [hs, item] = http.get("/queue/" + ids[0]);
  const auto& history = item["history"];
  const bool audited = history.is_array() && history.size() == 2 && history[1]["kind"] == "FIELD_CHANGED" &&
                       history[1]["new_value"]["value"] == truths[0] &&
                       history[1]["task_name"].get<std::string>().find("op1") != std::string::npos;
  c.expect(hs == 200 && audited, "audit PLOG entry after ACCEPT");
  c.expect(http.post("/queue/" + ids[0] + "/decision", {{"action", "DISMISS"}}).first == 409, "second decision is 409");

  // Race.
  std::atomic<int> ok{0}, conflict{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      Http h(port);
      const auto s = h.post("/queue/" + ids[1] + "/decision",
                            {{"action", "OVERRIDE"}, {"class_id", 0}, {"value", truths[1]}}, fmt::format("op{}", t))
                         .first;
      if (s == 200) ++ok;
      if (s == 409) ++conflict;
    });
  }
  for (auto& t : threads) t.join();
  c.expect(ok == 1 && conflict == 3, fmt::format("race: {} successes, {} conflicts", ok.load(), conflict.load()));

  // DISMISS writes nothing.
  c.expect(http.post("/queue/" + ids[2] + "/decision", {{"action", "DISMISS"}}).first == 200, "DISMISS succeeds");
  c.expect(http.get("/queue/" + ids[2]).second["history"].empty(), "DISMISS writes no PLOG entry");
  c.expect(http.get("/queue").second["total"] == 0, "queue drained");

  // Registry endpoints.
  const auto [ms, models] = http.get("/models");
  c.expect(ms == 200 && models["models"].size() == 3, "models lists three versions");
  c.expect(http.post("/models/detection/2/activate", json::object()).first == 200, "activate v2");
  c.expect(http.post("/detect", {{"transaction", txn}, {"enqueue", false}}).second["model_version"] == 2,
           "detect reports v2 after activation");
  c.expect(http.post("/models/detection/9/activate", json::object()).first == 404, "unknown version is 404");

  // Restart keeps decisions.
  service->stop();
  service = std::make_unique<Service>(config);
  Http again(service->start());
  c.expect(again.get("/queue/" + ids[0]).second["status"] == "ACCEPTED", "decisions survive restart");
  service->stop();
  return c.outcome("detect, correct, queue, decision and registry endpoints against the acceptance corpus");
}

}  // namespace
}  // namespace txfix::acceptance

int main() {
  using namespace txfix::acceptance;
  const auto start = Clock::now();
  Pipeline p;
  criterion("replay round-trip", [&] { return replay_round_trip(p); });
  criterion("metric oracles", [] { return metric_oracles(); });
  criterion("gradient check", [] { return gradient_check(); });
  criterion("detection on EASY corpus", [&] { return detection(p); });
  criterion("correction on EASY corpus", [&] { return correction(p); });
  criterion("determinism", [] { return determinism(); });
  criterion("file-format goldens", [] { return goldens(); });
  criterion("service contract", [&] {
    if (!p.joint || !p.corrector) return Outcome{false, "models from the detection and correction runs are missing"};
    return service_contract(p);
  });
  std::cout << fmt::format("{} failed, total {:.1f} s", failures, seconds_since(start)) << std::endl;
  return failures == 0 ? 0 : 1;
}
