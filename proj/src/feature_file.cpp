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


#include "txfix/feature_file.hpp"

#include <chrono>

#include <fmt/format.h>

#include "txfix/binary_io.hpp"
#include "txfix/csv.hpp"
#include "txfix/error.hpp"

namespace txfix {
namespace {

constexpr std::string_view kMagic{"TXFIXFT\0", 8};

nlohmann::json header_json(const Dataset& ds) {
  nlohmann::json columns = nlohmann::json::array();
  for (const auto& c : ds.columns) columns.push_back({{"name", c.name}, {"cardinality", c.cardinality}});
  return {{"kind", ds.kind == DatasetKind::kDetection ? "detection" : "correction"},
          {"schema_fingerprint", ds.schema_fingerprint},
          {"taxonomy_fingerprint", ds.taxonomy_fingerprint},
          {"columns", columns},
          {"label_names", ds.label_names},
          {"class_id", ds.class_id},
          {"target_domain", ds.target_domain},
          {"ratios", {ds.ratios.train, ds.ratios.test, ds.ratios.validation}},
          {"seed", ds.seed}};
}

Dataset from_header(const nlohmann::json& j) {
  Dataset ds;
  const auto kind = j.at("kind").get<std::string>();
  if (kind != "detection" && kind != "correction") fail("features.CorruptFile", "unknown kind " + kind);
  ds.kind = kind == "detection" ? DatasetKind::kDetection : DatasetKind::kCorrection;
  ds.schema_fingerprint = j.at("schema_fingerprint").get<std::string>();
  ds.taxonomy_fingerprint = j.at("taxonomy_fingerprint").get<std::string>();
  for (const auto& c : j.at("columns")) {
    ds.columns.push_back({c.at("name").get<std::string>(), c.at("cardinality").get<std::uint32_t>()});
  }
  ds.label_names = j.at("label_names").get<std::vector<std::string>>();
  ds.class_id = j.at("class_id").get<int>();
  ds.target_domain = j.at("target_domain").get<std::vector<std::string>>();
  const auto ratios = j.at("ratios").get<std::vector<double>>();
  if (ratios.size() != 3) fail("features.CorruptFile", "ratios must have 3 entries");
  ds.ratios = {ratios[0], ratios[1], ratios[2]};
  ds.seed = j.at("seed").get<std::uint64_t>();
  return ds;
}

double days_of(const Date& d) {
  return static_cast<double>(std::chrono::sys_days(d).time_since_epoch().count());
}

double seconds_of(const Timestamp& ts) { return static_cast<double>(ts.time_since_epoch().count()); }

std::size_t outcome_width(const Dataset& ds) {
  return ds.kind == DatasetKind::kDetection ? ds.label_names.size() : 1;
}

}  // namespace

std::string serialize_dataset(const Dataset& ds) {
  const std::size_t d = ds.columns.size();
  const std::size_t outcomes = outcome_width(ds);
  for (const auto& r : ds.rows) {
    if (r.features.size() != d) {
      fail("features.SchemaMismatch",
           fmt::format("row {} has {} features, expected {}", to_string(r.key), r.features.size(), d));
    }
    if (ds.kind == DatasetKind::kDetection && r.labels.size() != outcomes) {
      fail("features.SchemaMismatch", "row " + to_string(r.key) + " label width differs");
    }
  }
  ByteWriter w;
  w.bytes(kMagic);
  w.u32(kFeatureFileVersion);
  w.u32(0);
  w.blob(header_json(ds).dump());
  w.u64(ds.rows.size());
  for (const auto& r : ds.rows) w.f64(r.key.store_number);
  for (const auto& r : ds.rows) w.f64(days_of(r.key.business_date));
  for (const auto& r : ds.rows) w.f64(static_cast<double>(r.key.transaction_index));
  for (const auto& r : ds.rows) w.f64(seconds_of(r.key.timestamp));
  for (const auto& r : ds.rows) w.f64(static_cast<double>(r.split));
  for (std::size_t c = 0; c < d; ++c) {
    for (const auto& r : ds.rows) w.f64(r.features[c]);
  }
  if (ds.kind == DatasetKind::kDetection) {
    for (std::size_t c = 0; c < outcomes; ++c) {
      for (const auto& r : ds.rows) w.f64(r.labels[c]);
    }
  } else {
    for (const auto& r : ds.rows) w.f64(r.target);
  }
  return w.take();
}

Dataset deserialize_dataset(std::string_view bytes) {
  ByteReader in(bytes, "features.CorruptFile");
  if (in.bytes(kMagic.size()) != kMagic) fail("features.CorruptFile", "not a feature file");
  const auto version = in.u32();
  if (version != kFeatureFileVersion) {
    fail("features.CorruptFile", fmt::format("unsupported feature file version {}", version));
  }
  in.u32();
  Dataset ds;
  try {
    ds = from_header(nlohmann::json::parse(in.blob()));
  } catch (const nlohmann::json::exception& e) {
    fail("features.CorruptFile", std::string("bad header: ") + e.what());
  }
  const auto n = in.u64();
  const std::size_t d = ds.columns.size();
  const std::size_t outcomes = outcome_width(ds);
  if (n > in.remaining() / 8 / (5 + d + outcomes)) fail("features.CorruptFile", "row count exceeds data");
  ds.rows.resize(n);
  for (auto& r : ds.rows) r.key.store_number = static_cast<std::uint32_t>(in.f64());
  for (auto& r : ds.rows) {
    r.key.business_date = Date(std::chrono::sys_days(std::chrono::days(static_cast<int>(in.f64()))));
  }
  for (auto& r : ds.rows) r.key.transaction_index = static_cast<std::uint64_t>(in.f64());
  for (auto& r : ds.rows) {
    r.key.timestamp = Timestamp(std::chrono::seconds(static_cast<std::int64_t>(in.f64())));
  }
  for (auto& r : ds.rows) {
    const double s = in.f64();
    if (s != 0.0 && s != 1.0 && s != 2.0) fail("features.CorruptFile", "bad split value");
    r.split = static_cast<Split>(static_cast<int>(s));
  }
  for (auto& r : ds.rows) r.features.resize(d);
  for (std::size_t c = 0; c < d; ++c) {
    for (auto& r : ds.rows) r.features[c] = in.f64();
  }
  if (ds.kind == DatasetKind::kDetection) {
    for (auto& r : ds.rows) r.labels.resize(outcomes);
    for (std::size_t c = 0; c < outcomes; ++c) {
      for (auto& r : ds.rows) r.labels[c] = static_cast<std::uint8_t>(in.f64());
    }
  } else {
    for (auto& r : ds.rows) r.target = static_cast<int>(in.f64());
  }
  if (!in.done()) fail("features.CorruptFile", "trailing bytes");
  return ds;
}

void write_feature_file(const Dataset& ds, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_dataset(ds));
}

Dataset read_feature_file(const std::filesystem::path& path, const ExpectedFingerprints& expected) {
  Dataset ds = deserialize_dataset(read_file_bytes(path));
  if (expected.schema && *expected.schema != ds.schema_fingerprint) {
    fail("features.FingerprintMismatch",
         fmt::format("{} was built with schema {}, expected {}", path.string(),
                     ds.schema_fingerprint, *expected.schema));
  }
  if (expected.taxonomy && *expected.taxonomy != ds.taxonomy_fingerprint) {
    fail("features.FingerprintMismatch",
         fmt::format("{} was built with taxonomy {}, expected {}", path.string(),
                     ds.taxonomy_fingerprint, *expected.taxonomy));
  }
  return ds;
}

void export_csv(const Dataset& ds, std::ostream& out) {
  std::vector<std::string> header = {"key", "split"};
  for (const auto& c : ds.columns) header.push_back(c.name);
  if (ds.kind == DatasetKind::kDetection) {
    for (const auto& l : ds.label_names) header.push_back("label_" + l);
  } else {
    header.push_back("target");
  }
  csv::write_row(out, header);
  for (const auto& r : ds.rows) {
    std::vector<std::string> row = {to_string(r.key), std::string(to_string(r.split))};
    for (const double v : r.features) row.push_back(fmt::format("{}", v));
    if (ds.kind == DatasetKind::kDetection) {
      for (const auto b : r.labels) row.push_back(std::to_string(b));
    } else {
      row.push_back(std::to_string(r.target));
    }
    csv::write_row(out, row);
  }
}

}  // namespace txfix
