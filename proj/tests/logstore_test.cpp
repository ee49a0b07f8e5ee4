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


#include <sstream>
#include <thread>

#include <gtest/gtest.h>

#include "support.hpp"
#include "txfix/csv.hpp"
#include "txfix/logstore.hpp"

namespace txfix {
namespace {

using testing::make_key;
using testing::simple_txn;
using testing::tender_type;

std::string tlog_text(const std::vector<Transaction>& txns) {
  std::ostringstream out;
  csv::write_row(out, tlog_columns());
  for (const auto& t : txns) {
    for (const auto& r : t.records()) csv::write_row(out, format_tlog_row(r));
  }
  return out.str();
}

ChangeLogEntry error_logged(const TransactionKey& key, std::uint64_t seq) {
  ChangeLogEntry e;
  e.key = key;
  e.sequence = seq;
  e.kind = ErrorLogged{"TENDER_TYPE_MISMATCH", "pos-validation"};
  e.logged_at = key.timestamp + std::chrono::hours(1);
  return e;
}

ChangeLogEntry changed(const TransactionKey& key, std::uint64_t seq, RowId row, std::string from,
                       std::string to) {
  ChangeLogEntry e;
  e.key = key;
  e.sequence = seq;
  e.kind = FieldChanged{row, "TENDER_TYPE_CODE", tender_type(std::move(from)), tender_type(std::move(to)),
                        "operator:test"};
  e.logged_at = key.timestamp + std::chrono::hours(2);
  return e;
}

std::string plog_text(const std::vector<ChangeLogEntry>& entries) {
  std::ostringstream out;
  csv::write_row(out, plog_columns());
  for (const auto& e : entries) csv::write_row(out, format_plog_row(e));
  return out.str();
}

IngestReport ingest_tlog_text(LogStore& s, const std::string& text) {
  std::istringstream in(text);
  return s.ingest_tlog(in);
}

IngestReport ingest_plog_text(LogStore& s, const std::string& text) {
  std::istringstream in(text);
  return s.ingest_plog(in);
}

constexpr RowId kTenderRow = 4;  // simple_txn: header 1, item 2, tax 3, tender 4

TEST(IngestTlog, WellFormedRows) {
  LogStore s;
  const auto r = ingest_tlog_text(s, tlog_text({simple_txn()}));
  EXPECT_EQ(r.rows_added, 4u);
  EXPECT_TRUE(r.errors.empty());
  EXPECT_EQ(s.transaction(make_key()), simple_txn());
}

TEST(IngestTlog, ReportsMissingKeyFieldWithLine) {
  auto text = tlog_text({simple_txn()});
  const auto second_line = text.find('\n') + 1;
  text.insert(second_line, ",2026-03-02,9,2026-03-02T10:00:09Z,1,HEADER,,\n");
  LogStore s;
  const auto r = ingest_tlog_text(s, text);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].reason, "MissingKeyField");
  EXPECT_EQ(r.errors[0].line, 2u);
  EXPECT_EQ(r.rows_added, 4u);
}

TEST(IngestTlog, HeaderMismatch) {
  LogStore s;
  EXPECT_TXFIX_ERROR(ingest_tlog_text(s, "store,date\n1,2\n"), "logstore.HeaderMismatch");
  EXPECT_TXFIX_ERROR(ingest_plog_text(s, "a,b\n"), "logstore.HeaderMismatch");
}

TEST(IngestTlog, IdempotentOnIdenticalInput) {
  LogStore s;
  const auto text = tlog_text({simple_txn(), simple_txn(make_key(2, 5))});
  ingest_tlog_text(s, text);
  const auto again = ingest_tlog_text(s, text);
  EXPECT_EQ(again.rows_added, 0u);
  EXPECT_EQ(again.duplicates, 8u);
  EXPECT_EQ(s.tlog_row_count(), 8u);
}

TEST(IngestTlog, SerializeRoundTripsExactly) {
  const auto t = testing::make_txn(make_key(3, 7), {1234, 99, 5}, 107, {{"CREDIT", "CHIP", 1445}});
  const auto u = t.with_field(2, "NOTE", Text{"a,b;\"c\"=d"}).with_field(2, "WEIGHT", Decimal(1500, 4));
  const auto text = tlog_text({u, simple_txn()});
  LogStore s;
  ingest_tlog_text(s, text);
  std::ostringstream out;
  s.write_tlog(out);
  LogStore reparsed;
  ingest_tlog_text(reparsed, out.str());
  EXPECT_EQ(reparsed.transaction(u.key()), u);
  std::ostringstream again;
  reparsed.write_tlog(again);
  EXPECT_EQ(again.str(), out.str());
  EXPECT_EQ(std::get<Decimal>(reparsed.transaction(u.key())->get_field(2, "WEIGHT")).scale(), 4);
}

TEST(IngestPlog, SequencesAndValidation) {
  LogStore s;
  ingest_tlog_text(s, tlog_text({simple_txn()}));
  const auto key = make_key();
  const auto r = ingest_plog_text(
      s, plog_text({error_logged(key, 1), changed(key, 2, kTenderRow, "CREDIT", "CASH")}));
  EXPECT_EQ(r.rows_added, 2u);
  const auto h = s.history(key);
  ASSERT_EQ(h.size(), 2u);
  EXPECT_EQ(h[0].sequence, 1u);
  EXPECT_EQ(h[1].sequence, 2u);
}

TEST(IngestPlog, NoOpChangeRejected) {
  LogStore s;
  ingest_tlog_text(s, tlog_text({simple_txn()}));
  const auto r = ingest_plog_text(s, plog_text({changed(make_key(), 1, kTenderRow, "CASH", "CASH")}));
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].reason, "NoOpChange");
  EXPECT_EQ(s.plog_entry_count(), 0u);
}

TEST(IngestPlog, OrphanQuarantined) {
  LogStore s;
  ingest_tlog_text(s, tlog_text({simple_txn()}));
  const auto r = ingest_plog_text(s, plog_text({error_logged(make_key(9, 9), 1)}));
  EXPECT_EQ(r.quarantined, 1u);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].reason, "OrphanEntry");
  EXPECT_EQ(s.quarantined().size(), 1u);
}

TEST(IngestPlog, SequenceGapReported) {
  LogStore s;
  ingest_tlog_text(s, tlog_text({simple_txn()}));
  const auto r = ingest_plog_text(s, plog_text({error_logged(make_key(), 2)}));
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].reason, "SequenceGap");
}

class QueryTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::vector<Transaction> txns;
    for (std::uint64_t i = 1; i <= 8; ++i) txns.push_back(simple_txn(make_key(1, i)));
    ingest_tlog_text(store, tlog_text(txns));
    std::vector<ChangeLogEntry> entries;
    // 1 and 2 corrected, 3 error-only, 4..8 clean.
    entries.push_back(error_logged(make_key(1, 1), 1));
    entries.push_back(changed(make_key(1, 1), 2, kTenderRow, "DEBIT", "CREDIT"));
    entries.push_back(changed(make_key(1, 1), 3, kTenderRow, "CREDIT", "CASH"));
    entries.push_back(error_logged(make_key(1, 2), 1));
    entries.push_back(changed(make_key(1, 2), 2, kTenderRow, "GIFT", "CASH"));
    entries.push_back(error_logged(make_key(1, 3), 1));
    ingest_plog_text(store, plog_text(entries));
  }
  LogStore store;
};

TEST_F(QueryTest, CorruptedCleanAndErrorOnlyPartition) {
  const auto corrected = store.corrected_transactions();
  ASSERT_EQ(corrected.size(), 2u);
  EXPECT_EQ(corrected[0].transaction.key(), make_key(1, 1));
  ASSERT_EQ(corrected[0].history.size(), 3u);
  EXPECT_EQ(corrected[0].history[2].sequence, 3u);
  EXPECT_EQ(store.clean_transactions().size(), 5u);
  EXPECT_EQ(store.error_only_keys(), std::vector<TransactionKey>{make_key(1, 3)});
  EXPECT_EQ(corrected.size() + store.clean_transactions().size() + store.error_only_keys().size(),
            store.transaction_count());
}

TEST(Query, EmptyStore) {
  const LogStore s;
  EXPECT_TRUE(s.corrected_transactions().empty());
  EXPECT_TRUE(s.clean_transactions().empty());
}

TEST_F(QueryTest, AppendFeedbackAssignsNextSequenceAndApplies) {
  const auto key = make_key(1, 2);
  const auto seqs = store.append_feedback(key, {changed(key, 0, kTenderRow, "CASH", "DEBIT")});
  EXPECT_EQ(seqs, std::vector<std::uint64_t>{3});
  EXPECT_EQ(store.transaction(key)->get_field(kTenderRow, "TENDER_TYPE_CODE"),
            FieldValue(tender_type("DEBIT")));
  EXPECT_EQ(store.last_sequence(key), 3u);
}

TEST_F(QueryTest, AppendFeedbackErrors) {
  const auto key = make_key(1, 2);
  EXPECT_TXFIX_ERROR(store.append_feedback(make_key(7, 7), {error_logged(make_key(7, 7), 0)}),
                     "logstore.UnknownKey");
  EXPECT_TXFIX_ERROR(store.append_feedback(key, {changed(key, 0, kTenderRow, "CASH", "DEBIT")}, 1),
                     "logstore.SequenceConflict");
  EXPECT_TXFIX_ERROR(store.append_feedback(key, {changed(key, 0, kTenderRow, "CASH", "CASH")}),
                     "logstore.NoOpChange");
  EXPECT_TXFIX_ERROR(store.append_feedback(key, {changed(key, 0, kTenderRow, "GIFT", "DEBIT")}),
                     "logstore.StaleValue");
  EXPECT_EQ(store.last_sequence(key), 2u);
}

TEST_F(QueryTest, ConcurrentAppendsOneWins) {
  const auto key = make_key(1, 5);
  std::atomic<int> wins = 0, conflicts = 0;
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] {
      try {
        store.append_feedback(key, {error_logged(key, 0)}, 0);
        ++wins;
      } catch (const Error& e) {
        if (e.code() == "logstore.SequenceConflict") ++conflicts;
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(wins.load(), 1);
  EXPECT_EQ(conflicts.load(), 7);
}

TEST(Durable, FeedbackSurvivesRestart) {
  testing::TempDir dir;
  const auto key = make_key();
  {
    LogStore s(dir.path());
    ingest_tlog_text(s, tlog_text({simple_txn()}));
    s.append_feedback(key, {error_logged(key, 0), changed(key, 0, kTenderRow, "CASH", "GIFT")});
  }
  LogStore reopened(dir.path());
  EXPECT_EQ(reopened.history(key).size(), 2u);
  EXPECT_EQ(reopened.transaction(key)->get_field(kTenderRow, "TENDER_TYPE_CODE"),
            FieldValue(tender_type("GIFT")));
  EXPECT_EQ(reopened.corrected_transactions().size(), 1u);
}

TEST(Attributes, EncodeDecode) {
  const Attributes a = {{"A", Text{"x;y"}}, {"B", Decimal(5, 1)}, {"C", Code{"tender_type", "CASH"}}};
  EXPECT_EQ(decode_attributes(encode_attributes(a)), a);
  EXPECT_TXFIX_ERROR(decode_attributes("A"), "txmodel.BadAttributes");
}

}  // namespace
}  // namespace txfix
