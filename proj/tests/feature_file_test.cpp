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


#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "support.hpp"
#include "txfix/feature_file.hpp"
#include "txfix/hash.hpp"

namespace txfix {
namespace {

using testing::TempDir;
using testing::toy_correction;
using testing::toy_detection;

TEST(FeatureFile, DetectionRoundTripIsExact) {
  auto ds = toy_detection(50, 1);
  ds.rows[3].split = Split::kValidation;
  const auto bytes = serialize_dataset(ds);
  const auto back = deserialize_dataset(bytes);
  EXPECT_EQ(back, ds);
  EXPECT_EQ(serialize_dataset(back), bytes);
}

TEST(FeatureFile, CorrectionRoundTripIsExact) {
  const auto ds = toy_correction(40, 4, 2);
  EXPECT_EQ(deserialize_dataset(serialize_dataset(ds)), ds);
}

TEST(FeatureFile, EmptyDatasetRoundTrip) {
  auto ds = toy_detection(0, 3);
  EXPECT_EQ(deserialize_dataset(serialize_dataset(ds)), ds);
}

TEST(FeatureFile, FileAndFingerprintChecks) {
  TempDir dir;
  const auto ds = toy_detection(20, 4);
  write_feature_file(ds, dir / "d.bin");
  EXPECT_EQ(read_feature_file(dir / "d.bin"), ds);
  EXPECT_EQ(read_feature_file(dir / "d.bin", {"toy-schema", "toy-taxonomy"}), ds);
  EXPECT_TXFIX_ERROR(read_feature_file(dir / "d.bin", {"other", std::nullopt}), "features.FingerprintMismatch");
  EXPECT_TXFIX_ERROR(read_feature_file(dir / "d.bin", {std::nullopt, "other"}), "features.FingerprintMismatch");
  EXPECT_TXFIX_ERROR(read_feature_file(dir / "missing.bin"), "io.UnreadableSource");
}

TEST(FeatureFile, CorruptInputsRejected) {
  const auto bytes = serialize_dataset(toy_detection(10, 5));
  EXPECT_TXFIX_ERROR(deserialize_dataset("TXFIXFT"), "features.CorruptFile");
  EXPECT_TXFIX_ERROR(deserialize_dataset(bytes.substr(0, bytes.size() - 8)), "features.CorruptFile");
  EXPECT_TXFIX_ERROR(deserialize_dataset(bytes + "x"), "features.CorruptFile");
  auto wrong_version = bytes;
  wrong_version[8] = 9;
  EXPECT_TXFIX_ERROR(deserialize_dataset(wrong_version), "features.CorruptFile");
  auto wrong_magic = bytes;
  wrong_magic[0] = 'X';
  EXPECT_TXFIX_ERROR(deserialize_dataset(wrong_magic), "features.CorruptFile");
}

TEST(FeatureFile, RaggedRowsRejectedOnWrite) {
  auto ds = toy_detection(5, 6);
  ds.rows[2].features.pop_back();
  EXPECT_TXFIX_ERROR(serialize_dataset(ds), "features.SchemaMismatch");
}

TEST(FeatureFile, CsvExport) {
  const auto ds = toy_detection(3, 7);
  std::ostringstream out;
  export_csv(ds, out);
  std::istringstream in(out.str());
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_NE(lines[0].find("x0"), std::string::npos);
  EXPECT_NE(lines[0].find("a"), std::string::npos);
  EXPECT_NE(lines[1].find("train"), std::string::npos);
}

}  // namespace
}  // namespace txfix
