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


#include "txfix/service.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "txfix/binary_io.hpp"
#include "txfix/error.hpp"
#include "txfix/features.hpp"
#include "txfix/forest.hpp"
#include "txfix/json_codec.hpp"
#include "txfix/logistic.hpp"
#include "txfix/logstore.hpp"
#include "txfix/prep.hpp"
#include "txfix/registry.hpp"

// After Eigen: resolv.h defines _res.
#include <httplib.h>

namespace txfix {
namespace {

using nlohmann::json;

constexpr std::size_t kDefaultLimit = 50;
constexpr std::size_t kMaxLimit = 500;

std::string now_text() {
  return format_timestamp(std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
}

HttpResponse error_response(int status, std::string_view code, std::string_view message) {
  return {status, {{"error", code}, {"message", message}}};
}

HttpResponse error_response(int status, const Error& e) {
  return error_response(status, e.code(), e.what());
}

json parse_body(const std::string& body) {
  try {
    auto j = json::parse(body);
    if (!j.is_object()) fail("service.BadPayload", "body must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    fail("service.BadPayload", std::string("invalid JSON: ") + e.what());
  }
}

std::string url_decode(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      out.push_back(static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16)));
      i += 2;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto slash = path.find('/', start);
    const auto end = slash == std::string_view::npos ? path.size() : slash;
    if (end > start) parts.push_back(url_decode(path.substr(start, end - start)));
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  return parts;
}

struct DetectorHandle {
  std::shared_ptr<const ForestModel> model;
  FeatureSchema schema;
  int version = 0;
};

struct CorrectorHandle {
  std::shared_ptr<const OvrLogisticModel> model;
  FeatureSchema schema;
  int version = 0;
};

struct Models {
  std::optional<DetectorHandle> detector;
  std::map<int, CorrectorHandle> correctors;
};

struct Detected {
  int class_id = 0;
  std::string name;
  double probability = 0.0;
};

struct ReviewItem {
  std::string id;
  TransactionKey key;
  std::vector<Detected> detected;
  std::vector<int> flagged;
  std::map<int, std::vector<Recommendation>> recommendations;
  std::map<int, int> corrector_versions;
  int detector_version = 0;
  std::string created_at;
  std::string status = "PENDING";
  std::string decided_by;
  std::string decided_at;
  std::string action;
  std::optional<int> decision_class;
  std::string decision_value;
  std::string note;
};

json to_json(const Recommendation& r) {
  return {{"index", r.index}, {"value", r.value}, {"score", r.score}};
}

json item_json(const ReviewItem& item) {
  json detected = json::array();
  double max_p = 0.0;
  for (const auto& d : item.detected) {
    detected.push_back({{"class_id", d.class_id}, {"name", d.name}, {"probability", d.probability}});
    max_p = std::max(max_p, d.probability);
  }
  json recs = json::object();
  for (const auto& [cls, list] : item.recommendations) {
    json arr = json::array();
    for (const auto& r : list) arr.push_back(to_json(r));
    recs[std::to_string(cls)] = arr;
  }
  json corrector_versions = json::object();
  for (const auto& [cls, v] : item.corrector_versions) corrector_versions[std::to_string(cls)] = v;
  const bool decided = item.status != "PENDING";
  return {{"id", item.id},
          {"key", txfix::to_json(item.key)},
          {"detected", detected},
          {"flagged", item.flagged},
          {"max_probability", max_p},
          {"recommendations", recs},
          {"detector_version", item.detector_version},
          {"corrector_versions", corrector_versions},
          {"created_at", item.created_at},
          {"status", item.status},
          {"decided_by", decided ? json(item.decided_by) : json(nullptr)},
          {"decided_at", decided ? json(item.decided_at) : json(nullptr)},
          {"decision",
           decided ? json{{"action", item.action},
                          {"class_id", item.decision_class ? json(*item.decision_class) : json(nullptr)},
                          {"value", item.decision_value},
                          {"note", item.note}}
                   : json(nullptr)}};
}

ReviewItem item_from_json(const json& j) {
  ReviewItem item;
  item.id = j.at("id").get<std::string>();
  item.key = key_from_json(j.at("key"));
  for (const auto& d : j.at("detected")) {
    item.detected.push_back({d.at("class_id").get<int>(), d.at("name").get<std::string>(),
                             d.at("probability").get<double>()});
  }
  item.flagged = j.at("flagged").get<std::vector<int>>();
  for (const auto& [cls, list] : j.at("recommendations").items()) {
    auto& out = item.recommendations[std::stoi(cls)];
    for (const auto& r : list) {
      out.push_back({r.at("index").get<int>(), r.at("value").get<std::string>(), r.at("score").get<double>()});
    }
  }
  for (const auto& [cls, v] : j.at("corrector_versions").items()) {
    item.corrector_versions[std::stoi(cls)] = v.get<int>();
  }
  item.detector_version = j.at("detector_version").get<int>();
  item.created_at = j.at("created_at").get<std::string>();
  item.status = j.at("status").get<std::string>();
  if (item.status != "PENDING") {
    item.decided_by = j.at("decided_by").get<std::string>();
    item.decided_at = j.at("decided_at").get<std::string>();
    const auto& d = j.at("decision");
    item.action = d.at("action").get<std::string>();
    if (!d.at("class_id").is_null()) item.decision_class = d.at("class_id").get<int>();
    item.decision_value = d.at("value").get<std::string>();
    item.note = d.at("note").get<std::string>();
  }
  return item;
}

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

void set_bind_address(ServiceConfig& c, const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0) fail("service.BadConfig", "bind address must be host:port: " + text);
  c.host = text.substr(0, colon);
  try {
    c.port = std::stoi(text.substr(colon + 1));
  } catch (const std::exception&) {
    fail("service.BadConfig", "bad port in bind address " + text);
  }
  if (c.port < 0 || c.port > 65535) fail("service.BadConfig", "port out of range in " + text);
}

}  // namespace

ServiceConfig ServiceConfig::from_json(const json& j) {
  ServiceConfig c;
  try {
    if (j.contains("bind_address")) set_bind_address(c, j.at("bind_address").get<std::string>());
    if (j.contains("registry_path")) c.registry_path = j.at("registry_path").get<std::string>();
    if (j.contains("store_path")) c.store_path = j.at("store_path").get<std::string>();
    if (j.contains("taxonomy_path")) c.taxonomy_path = j.at("taxonomy_path").get<std::string>();
    if (j.contains("policy_path")) c.policy_path = j.at("policy_path").get<std::string>();
    c.flag_threshold = j.value("flag_threshold", c.flag_threshold);
    c.log_requests = j.value("log_requests", c.log_requests);
  } catch (const json::exception& e) {
    fail("service.BadConfig", e.what());
  }
  return c;
}

ServiceConfig ServiceConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("service.BadConfig", "cannot open " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    fail("service.BadConfig", path.string() + ": " + e.what());
  }
}

void ServiceConfig::apply_environment() {
  if (const auto v = env("TXFIX_BIND_ADDRESS")) set_bind_address(*this, *v);
  if (const auto v = env("TXFIX_REGISTRY_PATH")) registry_path = *v;
  if (const auto v = env("TXFIX_STORE_PATH")) store_path = *v;
}

struct Service::Impl {
  explicit Impl(ServiceConfig c)
      : config(std::move(c)),
        registry(config.registry_path),
        store(config.store_path),
        taxonomy(config.taxonomy_path ? ErrorTaxonomy::load(*config.taxonomy_path)
                                      : ErrorTaxonomy::defaults()),
        policy(config.policy_path ? FilterPolicy::load(*config.policy_path) : FilterPolicy::defaults()),
        queue_path(config.store_path / "queue.jsonl") {
    load_queue();
    reload_models();
  }

  ServiceConfig config;
  Registry registry;
  LogStore store;
  ErrorTaxonomy taxonomy;
  FilterPolicy policy;

  std::mutex models_mutex;
  std::shared_ptr<const Models> models = std::make_shared<Models>();

  std::mutex queue_mutex;
  std::vector<ReviewItem> items;
  std::map<std::string, std::size_t, std::less<>> item_index;
  std::filesystem::path queue_path;

  httplib::Server server;
  std::thread thread;

  std::shared_ptr<const Models> snapshot() {
    std::lock_guard lock(models_mutex);
    return models;
  }

  void load_queue() {
    std::ifstream in(queue_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        auto item = item_from_json(json::parse(line));
        const auto it = item_index.find(item.id);
        if (it == item_index.end()) {
          item_index.emplace(item.id, items.size());
          items.push_back(std::move(item));
        } else {
          items[it->second] = std::move(item);
        }
      } catch (const std::exception& e) {
        fail("service.CorruptQueue", queue_path.string() + ": " + e.what());
      }
    }
  }

  void persist(const ReviewItem& item) {
    std::filesystem::create_directories(queue_path.parent_path());
    std::ofstream out(queue_path, std::ios::app | std::ios::binary);
    out << item_json(item).dump() << '\n';
    out.flush();
    if (!out) fail("service.WriteFailed", "cannot append to " + queue_path.string());
  }

  FeatureSchema schema_for(const ModelManifest& m, FeatureSchema fallback) {
    if (m.hyperparameters.contains("feature_schema")) {
      return FeatureSchema::from_json(m.hyperparameters.at("feature_schema"));
    }
    return fallback;
  }

  void log_warning(const std::string& message) {
    std::cerr << json{{"ts", now_text()}, {"level", "warning"}, {"message", message}}.dump() << '\n';
  }

  void reload_models() {
    auto next = std::make_shared<Models>();
    if (const auto v = registry.active(detection_purpose())) {
      try {
        auto loaded = registry.load(detection_purpose(), *v);
        auto model = std::make_shared<ForestModel>(ForestModel::deserialize(loaded.payload));
        auto schema = schema_for(loaded.manifest, FeatureSchema::detection_default());
        if (schema.fingerprint() != model->schema_fingerprint() ||
            model->taxonomy_fingerprint() != taxonomy.fingerprint()) {
          fail("learn.FingerprintMismatch", "detection model does not match schema or taxonomy");
        }
        next->detector = DetectorHandle{std::move(model), std::move(schema), *v};
      } catch (const Error& e) {
        log_warning(fmt::format("detection v{} not loaded: {}", *v, e.what()));
      }
    }
    for (const auto& c : taxonomy.classes) {
      const auto purpose = correction_purpose(c.id);
      const auto v = registry.active(purpose);
      if (!v) continue;
      try {
        auto loaded = registry.load(purpose, *v);
        auto model = std::make_shared<OvrLogisticModel>(OvrLogisticModel::deserialize(loaded.payload));
        auto schema = schema_for(loaded.manifest, FeatureSchema::correction_default());
        if (schema.fingerprint() != model->schema_fingerprint() || model->class_id() != c.id ||
            model->domain() != taxonomy.domain(c)) {
          fail("learn.FingerprintMismatch", "correction model does not match schema or class");
        }
        next->correctors.emplace(c.id, CorrectorHandle{std::move(model), std::move(schema), *v});
      } catch (const Error& e) {
        log_warning(fmt::format("{} v{} not loaded: {}", purpose, *v, e.what()));
      }
    }
    std::lock_guard lock(models_mutex);
    models = std::move(next);
  }

  // Parses and qualifies a request transaction; on failure returns the
  // error response.
  std::variant<Transaction, HttpResponse> admit(const json& body) {
    if (!body.contains("transaction")) {
      return error_response(400, "service.BadPayload", "missing member transaction");
    }
    try {
      auto txn = transaction_from_json(body.at("transaction"));
      const auto q = qualify(txn, policy);
      if (!q.accepted()) {
        json reasons = json::array();
        for (const auto& r : q.reasons) {
          reasons.push_back({{"code", r.code}, {"detail", r.detail}, {"text", r.to_string()}});
        }
        return HttpResponse{409, {{"error", "service.Rejected"},
                                  {"message", "transaction rejected by qualification"},
                                  {"reasons", reasons}}};
      }
      return txn;
    } catch (const Error& e) {
      return error_response(400, e);
    }
  }

  HttpResponse detect(const json& body) {
    auto admitted = admit(body);
    if (auto* r = std::get_if<HttpResponse>(&admitted)) return std::move(*r);
    const auto& txn = std::get<Transaction>(admitted);
    const bool enqueue = body.value("enqueue", true);

    const auto m = snapshot();
    if (!m->detector) return error_response(503, "service.NoActiveModel", "no active detection model");
    const auto& det = *m->detector;
    const auto normalized = normalize(txn, policy);
    const auto fv = extract(normalized, det.schema);
    const auto proba = det.model->predict_proba(fv);

    ReviewItem item;
    item.key = txn.key();
    item.detector_version = det.version;
    json probabilities = json::array();
    json flagged = json::array();
    for (std::size_t l = 0; l < proba.size(); ++l) {
      const int cls = det.model->label_ids()[l];
      const auto& name = det.model->label_names()[l];
      probabilities.push_back({{"class_id", cls}, {"name", name}, {"probability", proba[l]}});
      item.detected.push_back({cls, name, proba[l]});
      if (proba[l] >= config.flag_threshold) {
        flagged.push_back({{"class_id", cls}, {"name", name}});
        item.flagged.push_back(cls);
      }
    }

    json review = nullptr;
    if (enqueue && !item.flagged.empty()) {
      for (const int cls : item.flagged) {
        const auto it = m->correctors.find(cls);
        if (it == m->correctors.end()) continue;
        const auto& corr = it->second;
        item.recommendations[cls] =
            corr.model->recommend(extract(normalized, corr.schema), corr.model->class_count());
        item.corrector_versions[cls] = corr.version;
      }
      std::lock_guard lock(queue_mutex);
      const ReviewItem* existing = nullptr;
      for (const auto& i : items) {
        if (i.key == item.key && i.status == "PENDING") existing = &i;
      }
      if (existing != nullptr) {
        review = existing->id;
      } else {
        if (!store.contains(txn.key())) store.ingest_transaction(txn);
        item.id = fmt::format("r{:06d}", items.size() + 1);
        item.created_at = now_text();
        persist(item);
        item_index.emplace(item.id, items.size());
        items.push_back(item);
        review = item.id;
      }
    }
    return {200,
            {{"model_version", det.version},
             {"schema_fingerprint", det.schema.fingerprint()},
             {"probabilities", probabilities},
             {"flagged", flagged},
             {"review_item", review}}};
  }

  HttpResponse correct(const json& body) {
    if (!body.contains("transaction")) {
      return error_response(400, "service.BadPayload", "missing member transaction");
    }
    if (!body.contains("class_id") || !body.at("class_id").is_number_integer()) {
      return error_response(400, "service.BadPayload", "class_id must be an integer");
    }
    const int class_id = body.at("class_id").get<int>();
    if (class_id < 0 || static_cast<std::size_t>(class_id) >= taxonomy.size()) {
      return error_response(404, "features.UnknownClass", fmt::format("no error class {}", class_id));
    }
    const auto m = snapshot();
    const auto it = m->correctors.find(class_id);
    if (it == m->correctors.end()) {
      return error_response(503, "service.NoActiveModel",
                            fmt::format("no active correction model for class {}", class_id));
    }
    const auto& corr = it->second;
    const auto& kj = body.contains("k") ? body.at("k") : json(5);
    if (!kj.is_number_integer()) return error_response(400, "service.BadPayload", "k must be an integer");
    const auto k = kj.get<std::int64_t>();
    if (k < 1 || static_cast<std::size_t>(k) > corr.model->class_count()) {
      return error_response(422, "learn.KOutOfRange",
                            fmt::format("k={} outside 1..{}", k, corr.model->class_count()));
    }
    auto admitted = admit(body);
    if (auto* r = std::get_if<HttpResponse>(&admitted)) return std::move(*r);
    const auto normalized = normalize(std::get<Transaction>(admitted), policy);
    const auto recs = corr.model->recommend(extract(normalized, corr.schema), static_cast<std::size_t>(k));
    json list = json::array();
    for (const auto& r : recs) list.push_back(to_json(r));
    return {200,
            {{"class_id", class_id},
             {"name", taxonomy.by_id(class_id).name},
             {"model_version", corr.version},
             {"recommendations", list}}};
  }

  HttpResponse queue_list(const std::map<std::string, std::string>& query) {
    long long offset_arg = 0, limit_arg = static_cast<long long>(kDefaultLimit);
    try {
      if (query.contains("offset")) offset_arg = std::stoll(query.at("offset"));
      if (query.contains("limit")) limit_arg = std::stoll(query.at("limit"));
    } catch (const std::exception&) {
      return error_response(400, "service.BadPayload", "offset and limit must be integers");
    }
    if (offset_arg < 0) return error_response(422, "service.BadPage", "offset must be >= 0");
    if (limit_arg < 1 || limit_arg > static_cast<long long>(kMaxLimit)) {
      return error_response(422, "service.BadPage", fmt::format("limit must be in 1..{}", kMaxLimit));
    }
    const auto offset = static_cast<std::size_t>(offset_arg);
    const auto limit = static_cast<std::size_t>(limit_arg);
    std::lock_guard lock(queue_mutex);
    std::vector<const ReviewItem*> pending;
    for (const auto& i : items) {
      if (i.status == "PENDING") pending.push_back(&i);
    }
    json out = json::array();
    for (std::size_t i = offset; i < pending.size() && i < offset + limit; ++i) {
      out.push_back(item_json(*pending[i]));
    }
    return {200, {{"items", out}, {"total", pending.size()}, {"offset", offset}, {"limit", limit}}};
  }

  HttpResponse queue_item(const std::string& id) {
    std::lock_guard lock(queue_mutex);
    const auto it = item_index.find(id);
    if (it == item_index.end()) return error_response(404, "service.UnknownItem", "no review item " + id);
    const auto& item = items[it->second];
    auto body = item_json(item);
    if (const auto txn = store.transaction(item.key)) body["transaction"] = txfix::to_json(*txn);
    json history = json::array();
    for (const auto& e : store.history(item.key)) history.push_back(txfix::to_json(e));
    body["history"] = history;
    return {200, body};
  }

  HttpResponse decide(const std::string& id, const json& body, const std::string& operator_id) {
    std::lock_guard lock(queue_mutex);
    const auto it = item_index.find(id);
    if (it == item_index.end()) return error_response(404, "service.UnknownItem", "no review item " + id);
    ReviewItem& item = items[it->second];
    if (item.status != "PENDING") {
      return error_response(409, "service.AlreadyDecided",
                            fmt::format("item {} is already {}", id, item.status));
    }
    const auto action = body.value("action", std::string());
    const auto note = body.contains("note") && body.at("note").is_string()
                          ? body.at("note").get<std::string>()
                          : std::string();
    if (action != "ACCEPT" && action != "OVERRIDE" && action != "DISMISS") {
      return error_response(422, "service.BadDecision", "action must be ACCEPT, OVERRIDE or DISMISS");
    }

    json sequences = json::array();
    ReviewItem decided = item;
    if (action != "DISMISS") {
      if (!body.contains("class_id") || !body.at("class_id").is_number_integer()) {
        return error_response(422, "service.BadDecision", "class_id must be an integer");
      }
      const int class_id = body.at("class_id").get<int>();
      if (class_id < 0 || static_cast<std::size_t>(class_id) >= taxonomy.size()) {
        return error_response(422, "service.BadDecision", fmt::format("no error class {}", class_id));
      }
      const auto& cls = taxonomy.by_id(class_id);
      const auto& domain = taxonomy.domain(cls);
      std::string value = body.contains("value") && body.at("value").is_string()
                              ? body.at("value").get<std::string>()
                              : std::string();
      const auto recs = item.recommendations.find(class_id);
      if (action == "ACCEPT") {
        if (recs == item.recommendations.end() || recs->second.empty()) {
          return error_response(422, "service.BadDecision",
                                fmt::format("item has no recommendations for class {}", class_id));
        }
        if (value.empty()) value = recs->second.front().value;
        if (std::none_of(recs->second.begin(), recs->second.end(),
                         [&](const Recommendation& r) { return r.value == value; })) {
          return error_response(422, "service.BadDecision", value + " was not recommended");
        }
      }
      if (std::find(domain.begin(), domain.end(), value) == domain.end()) {
        return error_response(422, "features.ValueOutsideDomain",
                              fmt::format("{} is not in {}", value, cls.value_domain));
      }
      const auto txn = store.transaction(item.key);
      if (!txn) return error_response(409, "logstore.UnknownKey", "transaction is not in the store");
      const auto* record = txn->find_by_ordinal(cls.target.qualifier, cls.ordinal);
      if (record == nullptr) {
        return error_response(422, "service.BadDecision",
                              fmt::format("transaction has no {} #{}", to_string(cls.target.qualifier),
                                          cls.ordinal));
      }
      const FieldValue current = txn->get_field(record->row_id, cls.target.field);
      const FieldValue next = Code{cls.value_domain, value};
      if (current == next) {
        return error_response(422, "logstore.NoOpChange", "value equals the current field value");
      }

      const auto history = store.history(item.key);
      const auto ts = parse_timestamp(now_text());
      const auto corrector = item.corrector_versions.find(class_id);
      const std::string task = fmt::format(
          "{} by {} item {} detector v{} corrector {}", action, operator_id, item.id,
          item.detector_version,
          corrector == item.corrector_versions.end() ? std::string("none")
                                                     : fmt::format("v{}", corrector->second));
      std::vector<ChangeLogEntry> entries;
      if (std::none_of(history.begin(), history.end(), [](const auto& e) { return e.is_error(); })) {
        ChangeLogEntry e;
        e.kind = ErrorLogged{"DETECTED_" + cls.name, fmt::format("detector v{}", item.detector_version)};
        e.logged_at = ts;
        entries.push_back(std::move(e));
      }
      ChangeLogEntry change;
      change.kind = FieldChanged{record->row_id, cls.target.field, current, next, task};
      change.logged_at = ts;
      entries.push_back(std::move(change));
      try {
        for (const auto s : store.append_feedback(item.key, std::move(entries), history.size())) {
          sequences.push_back(s);
        }
      } catch (const Error& e) {
        if (e.code() == "logstore.SequenceConflict") return error_response(409, e);
        return error_response(422, e);
      }
      decided.decision_class = class_id;
      decided.decision_value = value;
    }
    decided.status = action == "ACCEPT" ? "ACCEPTED" : action == "OVERRIDE" ? "OVERRIDDEN" : "DISMISSED";
    decided.action = action;
    decided.note = note;
    decided.decided_by = operator_id;
    decided.decided_at = now_text();
    persist(decided);
    item = std::move(decided);
    auto out = item_json(item);
    out["sequences"] = sequences;
    return {200, out};
  }

  HttpResponse list_models() {
    json out = json::array();
    for (const auto& m : registry.list()) {
      auto j = m.to_json();
      j.erase("hyperparameters");
      j["hyperparameters"] = m.hyperparameters.contains("feature_schema")
                                 ? json{{"feature_schema_fingerprint", m.schema_fingerprint}}
                                 : m.hyperparameters;
      for (const auto& [k, v] : m.hyperparameters.items()) {
        if (k != "feature_schema" && k != "taxonomy") j["hyperparameters"][k] = v;
      }
      j["active"] = registry.active(m.purpose) == m.version;
      out.push_back(std::move(j));
    }
    return {200, {{"models", out}}};
  }

  HttpResponse activate(const std::string& purpose, const std::string& version_text) {
    try {
      const int version = parse_version(version_text);
      registry.activate(purpose, version);
      reload_models();
      return {200, {{"purpose", purpose}, {"version", version}, {"active", true}}};
    } catch (const Error& e) {
      return error_response(404, e);
    }
  }

  HttpResponse dispatch(const std::string& method, const std::string& path,
                        const std::map<std::string, std::string>& query, const std::string& body,
                        const std::map<std::string, std::string>& headers) {
    const auto parts = split_path(path);
    auto json_body = [&]() { return parse_body(body); };
    if (method == "POST" && parts == std::vector<std::string>{"detect"}) return detect(json_body());
    if (method == "POST" && parts == std::vector<std::string>{"correct"}) return correct(json_body());
    if (!parts.empty() && parts[0] == "queue") {
      if (method == "GET" && parts.size() == 1) return queue_list(query);
      if (method == "GET" && parts.size() == 2) return queue_item(parts[1]);
      if (method == "POST" && parts.size() == 3 && parts[2] == "decision") {
        const auto op = headers.find("X-Operator");
        const std::string operator_id = op == headers.end() || op->second.empty() ? "anonymous" : op->second;
        HttpResponse r;
        try {
          r = decide(parts[1], json_body(), operator_id);
        } catch (const Error& e) {
          if (e.code() == "service.BadPayload") return error_response(422, e);
          throw;
        }
        return r;
      }
    }
    if (!parts.empty() && parts[0] == "models") {
      if (method == "GET" && parts.size() == 1) return list_models();
      if (method == "POST" && parts.size() == 4 && parts[3] == "activate") {
        return activate(parts[1], parts[2]);
      }
    }
    return error_response(404, "service.NotFound", method + " " + path);
  }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query, headers;
    for (const auto& [k, v] : req.params) query[k] = v;
    for (const auto& [k, v] : req.headers) headers[k] = v;
    const auto r = handle(req.method, req.path, query, req.body, headers);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  impl_->server.Get(R"(/.*)", handler);
  impl_->server.Post(R"(/.*)", handler);
  impl_->server.set_logger([this](const httplib::Request& req, const httplib::Response& res) {
    if (!impl_->config.log_requests) return;
    std::cerr << json{{"ts", now_text()},
                      {"method", req.method},
                      {"path", req.path},
                      {"status", res.status},
                      {"remote", req.remote_addr},
                      {"operator", req.get_header_value("X-Operator")}}
                     .dump()
              << '\n';
  });
}

Service::~Service() { stop(); }

HttpResponse Service::handle(const std::string& method, const std::string& path,
                             const std::map<std::string, std::string>& query, const std::string& body,
                             const std::map<std::string, std::string>& headers) {
  try {
    return impl_->dispatch(method, path, query, body, headers);
  } catch (const Error& e) {
    if (e.code().starts_with("service.BadPayload") || e.code().starts_with("json.")) {
      return error_response(400, e);
    }
    if (e.code() == "features.TooManyItems") return error_response(409, e);
    return error_response(500, e);
  } catch (const std::exception& e) {
    return error_response(500, "service.Internal", e.what());
  }
}

void Service::reload_models() { impl_->reload_models(); }

int Service::start() {
  auto& s = impl_->server;
  const int port = impl_->config.port == 0 ? s.bind_to_any_port(impl_->config.host)
                                           : (s.bind_to_port(impl_->config.host, impl_->config.port)
                                                  ? impl_->config.port
                                                  : -1);
  if (port <= 0) {
    fail("service.BindFailed", fmt::format("cannot bind {}:{}", impl_->config.host, impl_->config.port));
  }
  impl_->thread = std::thread([&s] { s.listen_after_bind(); });
  s.wait_until_ready();
  return port;
}

void Service::run() {
  if (!impl_->server.listen(impl_->config.host, impl_->config.port)) {
    fail("service.BindFailed", fmt::format("cannot bind {}:{}", impl_->config.host, impl_->config.port));
  }
}

void Service::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace txfix
