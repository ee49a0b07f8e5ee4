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


#include <set>

#include <gtest/gtest.h>

#include "support.hpp"
#include "txfix/features.hpp"
#include "txfix/prep.hpp"
#include "txfix/replay.hpp"
#include "txfix/synth.hpp"

namespace txfix {
namespace {

using testing::load_corpus;
using testing::small_profile;
using testing::TempDir;

std::vector<ReconstructionResult> reconstruct_all(const LogStore& store) {
  std::vector<ReconstructionResult> out;
  for (const auto& ct : store.corrected_transactions()) out.push_back(reconstruct(ct.transaction, ct.history));
  return out;
}

TEST(Synth, ZeroRatesProduceNoChanges) {
  auto p = small_profile(1, 50);
  for (auto& e : p.errors) e.rate = 0.0;
  p.error_only_rate = 0.0;
  const auto c = generate_corpus(p);
  EXPECT_TRUE(c.truth.empty());
  LogStore store;
  load_corpus(store, c);
  EXPECT_EQ(store.plog_entry_count(), 0u);
  EXPECT_EQ(store.transaction_count(), 250u);
}

TEST(Synth, ByteIdenticalAcrossRuns) {
  const auto a = generate_corpus(small_profile(3, 100));
  const auto b = generate_corpus(small_profile(3, 100));
  EXPECT_EQ(a.tlog, b.tlog);
  EXPECT_EQ(a.plog, b.plog);
  EXPECT_EQ(a.manifest, b.manifest);
  const auto c = generate_corpus(small_profile(4, 100));
  EXPECT_NE(a.tlog, c.tlog);
}

TEST(Synth, InjectionRateIsRespected) {
  auto p = small_profile(5, 200);
  p.errors = {{1, 0.1, Learnability::kEasy}};
  const auto c = generate_corpus(p);
  ASSERT_EQ(c.transaction_count, 1000u);
  EXPECT_GE(c.truth.size(), 60u);
  EXPECT_LE(c.truth.size(), 140u);
  for (const auto& t : c.truth) EXPECT_EQ(t.tender_ordinal, 1);
}

TEST(Synth, GeneratedTransactionsAreValidAndMostlyQualify) {
  const auto c = generate_corpus(small_profile(6, 100));
  LogStore store;
  load_corpus(store, c);
  EXPECT_EQ(store.transaction_count(), c.transaction_count);
  const auto policy = FilterPolicy::defaults();
  std::size_t qualified = 0;
  for (const auto& key : store.keys()) {
    const auto txn = store.transaction(key);
    ASSERT_TRUE(txn.has_value());
    const auto q = qualify(*txn, policy);
    if (q.accepted()) ++qualified;
    for (const auto& reason : q.reasons) EXPECT_EQ(reason.code, "TooManyItems") << reason.to_string();
  }
  EXPECT_GE(qualified, c.transaction_count * 95 / 100);
}

TEST(Synth, OracleAcceptsReplayAndFlagsTampering) {
  const auto c = generate_corpus(small_profile(7, 100));
  LogStore store;
  load_corpus(store, c);
  auto results = reconstruct_all(store);
  const auto report = oracle_check(c.truth, results);
  EXPECT_TRUE(report.ok());
  EXPECT_EQ(report.checked, c.truth.size());

  auto corrected = store.corrected_transactions();
  ASSERT_FALSE(corrected.empty());
  auto& ct = corrected.front();
  for (auto& e : ct.history) {
    if (auto* ch = std::get_if<FieldChanged>(&e.kind)) {
      ch->old_value = Code{"tender_type", "BOGUS"};
      break;
    }
  }
  results.front() = reconstruct(ct.transaction, ct.history);
  EXPECT_FALSE(oracle_check(c.truth, results).ok());

  auto truth = c.truth;
  truth.front().correct_value = "NOPE";
  EXPECT_FALSE(oracle_check(truth, reconstruct_all(store)).ok());
}

TEST(Synth, EmptyCorpus) {
  auto p = small_profile(8);
  p.transactions_per_store = 0;
  const auto c = generate_corpus(p);
  EXPECT_EQ(c.transaction_count, 0u);
  LogStore store;
  load_corpus(store, c);
  EXPECT_EQ(store.transaction_count(), 0u);
}

TEST(Synth, InvalidProfiles) {
  auto p = small_profile();
  p.errors[0].rate = 1.5;
  EXPECT_TXFIX_ERROR(generate_corpus(p), "synth.InvalidProfile");
  p = small_profile();
  p.tender_count_weights = {0, 0, 0};
  EXPECT_TXFIX_ERROR(p.validate(), "synth.InvalidProfile");
  p = small_profile();
  p.errors.push_back(p.errors[0]);
  EXPECT_TXFIX_ERROR(p.validate(), "synth.InvalidProfile");
  EXPECT_TXFIX_ERROR(GeneratorProfile::from_json({{"errors", {{{"tender_ordinal", 1}, {"rate", 0.1}, {"learnability", "MEDIUM"}}}}}),
                     "synth.InvalidProfile");
  EXPECT_TXFIX_ERROR(GeneratorProfile::from_json({{"seed", "x"}}), "synth.InvalidProfile");
}

TEST(Synth, ProfileJsonRoundTrip) {
  const auto p = GeneratorProfile::hard();
  EXPECT_EQ(GeneratorProfile::from_json(p.to_json()).to_json(), p.to_json());
  EXPECT_EQ(GeneratorProfile::from_json(nlohmann::json::object()).to_json(), GeneratorProfile::easy().to_json());
}

TEST(Synth, GroundTruthRoundTrip) {
  const auto c = generate_corpus(small_profile(9, 50));
  EXPECT_EQ(parse_ground_truth(c.manifest), c.truth);
  EXPECT_EQ(format_ground_truth(c.truth), c.manifest);
  EXPECT_TXFIX_ERROR(parse_ground_truth("bad,header\n"), "synth.BadManifest");
}

TEST(Synth, WriteCorpusFiles) {
  TempDir dir;
  const auto c = generate_corpus(small_profile(10, 20));
  write_corpus(c, dir.path());
  for (const char* f : {"tlog.csv", "plog.csv", "ground_truth.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
}

// In the easy profile a rule on tender 1's type and entry method alone
// separates erroneous from clean tender 1 values.
TEST(Synth, EasyErrorsAreSeparableByOneRule) {
  const auto c = generate_corpus(small_profile(11, 200));
  LogStore store;
  load_corpus(store, c);
  const auto rules = FeatureSchema::detection_default().tender_rules;
  std::set<TransactionKey> erroneous;
  for (const auto& t : c.truth) {
    if (t.tender_ordinal == 1) erroneous.insert(t.key);
  }
  std::map<TransactionKey, Transaction> before;
  for (const auto& r : reconstruct_all(store)) before.emplace(r.erroneous.key(), r.erroneous);
  std::size_t hits = 0, n = 0;
  for (const auto& key : store.keys()) {
    const auto it = before.find(key);
    const Transaction txn = it != before.end() ? it->second : *store.transaction(key);
    const auto* tender = txn.find_by_ordinal(RecordQualifier::kTender, 1);
    if (tender == nullptr) continue;
    const auto type = txn.get_field(tender->row_id, fields::kTenderTypeCode);
    const auto method = txn.get_field(tender->row_id, fields::kEntryMethod);
    const auto* t = std::get_if<Code>(&type);
    const auto* m = std::get_if<Code>(&method);
    bool flagged = true;
    if (t != nullptr && m != nullptr) {
      const auto rule = rules.find(m->value);
      flagged = rule == rules.end() ||
                std::find(rule->second.begin(), rule->second.end(), t->value) == rule->second.end();
    }
    hits += flagged == erroneous.contains(key);
    ++n;
  }
  EXPECT_GE(static_cast<double>(hits) / static_cast<double>(n), 0.9);
}

}  // namespace
}  // namespace txfix
