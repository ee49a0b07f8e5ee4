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


// Versioned model store.
//
//   <root>/<purpose>/<version>/manifest.json
//   <root>/<purpose>/<version>/payload.bin
//   <root>/<purpose>/ACTIVE            version number as text
//
// Purposes are "detection" or "correction:<class-id>". Versions are
// positive integers assigned in increasing order per purpose and never
// reused. A version exists once its manifest is written.

#ifndef TXFIX_REGISTRY_HPP_
#define TXFIX_REGISTRY_HPP_

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "txfix/features.hpp"
#include "txfix/metrics.hpp"

namespace txfix {

struct ModelManifest {
  std::string purpose;
  int version = 0;        // assigned by save()
  std::string kind;       // "forest" | "ovr_logistic"
  nlohmann::json hyperparameters = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::string schema_fingerprint;
  std::string taxonomy_fingerprint;
  std::string dataset_sha256;
  SplitRatios ratios;
  std::optional<EvaluationReport> evaluation;
  std::string created_at;
  std::string payload_sha256;  // assigned by save()
  std::uint64_t payload_size = 0;

  nlohmann::json to_json() const;
  // Throws registry.BadManifest.
  static ModelManifest from_json(const nlohmann::json& j);
};

struct LoadedModel {
  ModelManifest manifest;
  std::string payload;
};

// Thread-safe within a process.
class Registry {
 public:
  explicit Registry(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  // Assigns the next version and the payload checksum, writes payload then
  // manifest. Returns the version. Throws registry.BadPurpose.
  int save(ModelManifest manifest, std::string_view payload);
  // Throws registry.UnknownVersion, registry.PayloadCorrupt.
  LoadedModel load(std::string_view purpose, int version) const;
  ModelManifest manifest(std::string_view purpose, int version) const;
  // Throws registry.UnknownVersion.
  void activate(std::string_view purpose, int version);
  std::optional<int> active(std::string_view purpose) const;
  // Throws registry.UnknownVersion.
  void attach_evaluation(std::string_view purpose, int version, const EvaluationReport& report);

  std::vector<std::string> purposes() const;
  // Ascending (purpose, version).
  std::vector<ModelManifest> list() const;
  std::vector<int> versions(std::string_view purpose) const;

 private:
  std::filesystem::path version_dir(std::string_view purpose, int version) const;
  ModelManifest read_manifest(std::string_view purpose, int version) const;

  std::filesystem::path root_;
  mutable std::mutex mutex_;
};

// Accepts "3" and "v3". Throws registry.UnknownVersion.
int parse_version(std::string_view text);
std::string detection_purpose();
std::string correction_purpose(int class_id);

}  // namespace txfix

#endif  // TXFIX_REGISTRY_HPP_
