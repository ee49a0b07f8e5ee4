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


#include "txfix/registry.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>

#include "txfix/binary_io.hpp"
#include "txfix/error.hpp"
#include "txfix/hash.hpp"

namespace txfix {
namespace fs = std::filesystem;
namespace {

void check_purpose(std::string_view purpose) {
  const bool ok = purpose == "detection" ||
                  (purpose.starts_with("correction:") && purpose.size() > 11 &&
                   std::all_of(purpose.begin() + 11, purpose.end(),
                               [](char c) { return c >= '0' && c <= '9'; }));
  if (!ok) {
    fail("registry.BadPurpose",
         "purpose must be detection or correction:<class-id>, got " + std::string(purpose));
  }
}

std::optional<int> parse_int(std::string_view text) {
  int v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || v < 1) return std::nullopt;
  return v;
}

}  // namespace

nlohmann::json ModelManifest::to_json() const {
  return {{"purpose", purpose},
          {"version", version},
          {"kind", kind},
          {"hyperparameters", hyperparameters},
          {"seed", seed},
          {"schema_fingerprint", schema_fingerprint},
          {"taxonomy_fingerprint", taxonomy_fingerprint},
          {"dataset_sha256", dataset_sha256},
          {"split_ratios", {ratios.train, ratios.test, ratios.validation}},
          {"evaluation", evaluation ? evaluation->to_json() : nlohmann::json(nullptr)},
          {"created_at", created_at},
          {"payload_sha256", payload_sha256},
          {"payload_size", payload_size}};
}

ModelManifest ModelManifest::from_json(const nlohmann::json& j) {
  ModelManifest m;
  try {
    m.purpose = j.at("purpose").get<std::string>();
    m.version = j.at("version").get<int>();
    m.kind = j.at("kind").get<std::string>();
    m.hyperparameters = j.at("hyperparameters");
    m.seed = j.at("seed").get<std::uint64_t>();
    m.schema_fingerprint = j.at("schema_fingerprint").get<std::string>();
    m.taxonomy_fingerprint = j.at("taxonomy_fingerprint").get<std::string>();
    m.dataset_sha256 = j.at("dataset_sha256").get<std::string>();
    const auto r = j.at("split_ratios").get<std::vector<double>>();
    if (r.size() != 3) fail("registry.BadManifest", "split_ratios must have 3 entries");
    m.ratios = {r[0], r[1], r[2]};
    if (!j.at("evaluation").is_null()) m.evaluation = EvaluationReport::from_json(j.at("evaluation"));
    m.created_at = j.at("created_at").get<std::string>();
    m.payload_sha256 = j.at("payload_sha256").get<std::string>();
    m.payload_size = j.at("payload_size").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    fail("registry.BadManifest", e.what());
  }
  return m;
}

Registry::Registry(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

fs::path Registry::version_dir(std::string_view purpose, int version) const {
  return root_ / std::string(purpose) / std::to_string(version);
}

ModelManifest Registry::read_manifest(std::string_view purpose, int version) const {
  const auto path = version_dir(purpose, version) / "manifest.json";
  if (!fs::exists(path)) {
    fail("registry.UnknownVersion", fmt::format("{} has no version {}", purpose, version));
  }
  try {
    return ModelManifest::from_json(nlohmann::json::parse(read_file_bytes(path)));
  } catch (const nlohmann::json::exception& e) {
    fail("registry.BadManifest", path.string() + ": " + e.what());
  }
}

int Registry::save(ModelManifest manifest, std::string_view payload) {
  check_purpose(manifest.purpose);
  std::lock_guard lock(mutex_);
  const auto purpose_dir = root_ / manifest.purpose;
  fs::create_directories(purpose_dir);
  int next = 1;
  for (const auto& entry : fs::directory_iterator(purpose_dir)) {
    if (!entry.is_directory()) continue;
    if (const auto v = parse_int(entry.path().filename().string())) next = std::max(next, *v + 1);
  }
  manifest.version = next;
  manifest.payload_sha256 = sha256_hex(payload);
  manifest.payload_size = payload.size();
  const auto dir = version_dir(manifest.purpose, next);
  fs::create_directories(dir);
  write_file_atomic(dir / "payload.bin", payload);
  write_file_atomic(dir / "manifest.json", manifest.to_json().dump(2) + "\n");
  return next;
}

ModelManifest Registry::manifest(std::string_view purpose, int version) const {
  std::lock_guard lock(mutex_);
  return read_manifest(purpose, version);
}

LoadedModel Registry::load(std::string_view purpose, int version) const {
  std::lock_guard lock(mutex_);
  LoadedModel out;
  out.manifest = read_manifest(purpose, version);
  out.payload = read_file_bytes(version_dir(purpose, version) / "payload.bin");
  if (out.payload.size() != out.manifest.payload_size ||
      sha256_hex(out.payload) != out.manifest.payload_sha256) {
    fail("registry.PayloadCorrupt",
         fmt::format("{} version {} payload checksum mismatch", purpose, version));
  }
  return out;
}

void Registry::activate(std::string_view purpose, int version) {
  std::lock_guard lock(mutex_);
  read_manifest(purpose, version);
  write_file_atomic(root_ / std::string(purpose) / "ACTIVE", std::to_string(version) + "\n");
}

std::optional<int> Registry::active(std::string_view purpose) const {
  std::lock_guard lock(mutex_);
  const auto path = root_ / std::string(purpose) / "ACTIVE";
  if (!fs::exists(path)) return std::nullopt;
  auto text = read_file_bytes(path);
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  return parse_int(text);
}

void Registry::attach_evaluation(std::string_view purpose, int version, const EvaluationReport& report) {
  std::lock_guard lock(mutex_);
  auto m = read_manifest(purpose, version);
  m.evaluation = report;
  write_file_atomic(version_dir(purpose, version) / "manifest.json", m.to_json().dump(2) + "\n");
}

std::vector<std::string> Registry::purposes() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(root_)) {
    if (entry.is_directory()) out.push_back(entry.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> Registry::versions(std::string_view purpose) const {
  std::lock_guard lock(mutex_);
  std::vector<int> out;
  const auto dir = root_ / std::string(purpose);
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto v = parse_int(entry.path().filename().string());
    if (v && fs::exists(entry.path() / "manifest.json")) out.push_back(*v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ModelManifest> Registry::list() const {
  std::vector<ModelManifest> out;
  for (const auto& purpose : purposes()) {
    for (const int v : versions(purpose)) out.push_back(manifest(purpose, v));
  }
  return out;
}

int parse_version(std::string_view text) {
  if (!text.empty() && (text.front() == 'v' || text.front() == 'V')) text.remove_prefix(1);
  const auto v = parse_int(text);
  if (!v) fail("registry.UnknownVersion", "not a version: " + std::string(text));
  return *v;
}

std::string detection_purpose() { return "detection"; }

std::string correction_purpose(int class_id) { return fmt::format("correction:{}", class_id); }

}  // namespace txfix
