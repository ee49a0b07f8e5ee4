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


#include <gtest/gtest.h>

#include "support.hpp"
#include "txfix/prep.hpp"

namespace txfix {
namespace {

using testing::make_key;
using testing::make_txn;
using Q = RecordQualifier;

TEST(Qualify, AcceptsConsistentTransaction) {
  EXPECT_TRUE(qualify(testing::simple_txn(), FilterPolicy::defaults()).accepted());
}

TEST(Qualify, TooManyItems) {
  const std::vector<std::int64_t> prices(21, 100);
  const auto t = make_txn(make_key(), prices, 168, {{"CASH", "DRAWER", 2268}});
  const auto q = qualify(t, FilterPolicy::defaults());
  ASSERT_EQ(q.reasons.size(), 1u);
  EXPECT_EQ(q.reasons[0].code, "TooManyItems");
  const std::vector<std::int64_t> twenty(20, 100);
  EXPECT_TRUE(qualify(make_txn(make_key(), twenty, 160, {{"CASH", "DRAWER", 2160}}), FilterPolicy::defaults())
                  .accepted());
}

TEST(Qualify, MissingRequiredField) {
  const auto t = testing::simple_txn().with_field(2, "QUANTITY", Missing{});
  const auto q = qualify(t, FilterPolicy::defaults());
  ASSERT_EQ(q.reasons.size(), 1u);
  EXPECT_EQ(q.reasons[0].to_string(), "MissingField(ITEM, QUANTITY)");
}

TEST(Qualify, InconsistentTotalsWithinOneMinorUnit) {
  const auto base = testing::simple_txn();
  const auto off_by_one = base.with_field(1, "TOTAL_AMOUNT", testing::cents(1081)).with_field(
      4, "TENDER_AMOUNT", testing::cents(1081));
  EXPECT_TRUE(qualify(off_by_one, FilterPolicy::defaults()).accepted());
  const auto off_by_two = base.with_field(1, "TOTAL_AMOUNT", testing::cents(1082));
  const auto q = qualify(off_by_two, FilterPolicy::defaults());
  ASSERT_EQ(q.reasons.size(), 2u);
  EXPECT_EQ(q.reasons[0].code, "Inconsistent");
  EXPECT_NE(q.reasons[0].detail.find("totals_reconcile"), std::string::npos);
  EXPECT_NE(q.reasons[1].detail.find("tenders_cover_total"), std::string::npos);
}

TEST(Qualify, ListsEveryReason) {
  const std::vector<std::int64_t> prices(21, 100);
  const auto t = make_txn(make_key(), prices, 0, {{"CASH", "DRAWER", 1}})
                     .with_field(2, "UNIT_PRICE", Missing{})
                     .with_field(1, "TOTAL_AMOUNT", testing::cents(5));
  EXPECT_EQ(qualify(t, FilterPolicy::defaults()).reasons.size(), 4u);
}

TEST(Normalize, CodesTrimmedAndUpperCased) {
  const auto t = testing::simple_txn().with_field(4, "TENDER_TYPE_CODE", Code{"tender_type", " cash "});
  EXPECT_EQ(normalize(t).get_field(4, "TENDER_TYPE_CODE"), FieldValue(Code{"tender_type", "CASH"}));
}

TEST(Normalize, ImputesOptionalNumericWithMarker) {
  auto t = testing::simple_txn();
  std::vector<TransactionRecord> recs(t.records().begin(), t.records().end());
  recs.push_back({make_key(), 10, Q::kItemDiscount, RowId{2}, {{"REASON_CODE", Text{"PROMO"}}}});
  const auto n = normalize(Transaction::build(recs));
  EXPECT_EQ(n.get_field(10, "DISCOUNT_AMOUNT"), FieldValue(Decimal(0, 2)));
  EXPECT_EQ(n.get_field(10, "DISCOUNT_AMOUNT_IMPUTED"), FieldValue(Decimal(1, 0)));
}

TEST(Normalize, DatesCanonicalized) {
  const auto t = testing::simple_txn().with_field(1, "POSTING_DATE", Text{"2019/03/07"}).with_field(
      1, "ENTRY_TIMESTAMP", Text{"2019-03-07 08:09:10"});
  const auto n = normalize(t);
  EXPECT_EQ(n.get_field(1, "POSTING_DATE"), FieldValue(Text{"2019-03-07"}));
  EXPECT_EQ(n.get_field(1, "ENTRY_TIMESTAMP"), FieldValue(Text{"2019-03-07T08:09:10Z"}));
  EXPECT_EQ(canonical_date("20190307"), "2019-03-07");
  EXPECT_EQ(canonical_date("07.03.2019"), "2019-03-07");
  EXPECT_TXFIX_ERROR(canonical_date("March 7"), "prep.UnparseableValue");
  EXPECT_TXFIX_ERROR(normalize(t.with_field(1, "POSTING_DATE", Text{"2019-02-31"})), "prep.UnparseableValue");
}

TEST(Normalize, IdempotentAndShapePreserving) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto corpus = generate_corpus(testing::small_profile(seed, 40));
    LogStore store;
    testing::load_corpus(store, corpus);
    for (const auto& key : store.keys()) {
      auto t = *store.transaction(key);
      t = t.with_field(t.header().row_id, "BUSINESS_DATE_TEXT_DATE", Text{" 02.03.2026 "});
      const auto once = normalize(t);
      EXPECT_EQ(normalize(once), once);
      EXPECT_EQ(once.size(), t.size());
      EXPECT_EQ(once.item_count(), t.item_count());
      const auto before = qualify(t, FilterPolicy::defaults());
      const auto after = qualify(once, FilterPolicy::defaults());
      EXPECT_EQ(before.accepted(), after.accepted());
    }
  }
}

TEST(Policy, JsonRoundTripAndValidation) {
  const auto p = FilterPolicy::defaults();
  const auto q = FilterPolicy::from_json(p.to_json());
  EXPECT_EQ(q.to_json(), p.to_json());
  EXPECT_EQ(FilterPolicy::from_json({{"max_items", 5}}).max_items, 5u);
  EXPECT_TXFIX_ERROR(FilterPolicy::from_json({{"max_items", 0}}), "prep.BadPolicy");
  EXPECT_TXFIX_ERROR(FilterPolicy::from_json({{"consistency_checks", {"nope"}}}), "prep.BadPolicy");
  EXPECT_TXFIX_ERROR(FilterPolicy::from_json({{"required_fields", {"ITEM"}}}), "prep.BadPolicy");
  EXPECT_TXFIX_ERROR(FilterPolicy::from_json({{"required_fields", {"COUPON.X"}}}), "txmodel.UnknownQualifier");
}

}  // namespace
}  // namespace txfix
