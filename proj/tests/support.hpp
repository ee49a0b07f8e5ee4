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


// Builders shared by the test binaries.

#ifndef TXFIX_TESTS_SUPPORT_HPP_
#define TXFIX_TESTS_SUPPORT_HPP_

#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "txfix/error.hpp"
#include "txfix/features.hpp"
#include "txfix/fields.hpp"
#include "txfix/logstore.hpp"
#include "txfix/rng.hpp"
#include "txfix/synth.hpp"
#include "txfix/txmodel.hpp"

namespace txfix::testing {

// Runs `fn` and returns the module-qualified code it threw, or "" when it
// returned normally.
template <class Fn>
std::string error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return {};
}

#define EXPECT_TXFIX_ERROR(stmt, code) \
  EXPECT_EQ(::txfix::testing::error_code_of([&] { (void)(stmt); }), code)

inline TransactionKey make_key(std::uint32_t store = 1, std::uint64_t index = 1) {
  TransactionKey k;
  k.store_number = store;
  k.business_date = parse_date("2026-03-02");
  k.transaction_index = index;
  k.timestamp = parse_timestamp("2026-03-02T10:00:00Z") + std::chrono::seconds(index);
  return k;
}

inline Decimal cents(std::int64_t c) { return Decimal(c, 2); }

inline Code tender_type(std::string value) { return Code{"tender_type", std::move(value)}; }

struct TenderSpec {
  std::string type;
  std::string method;
  std::int64_t amount_cents = 0;
};

// Header, one item per price (quantity 1), an 8% tax row and the given
// tenders. Totals reconcile when the tenders add up to price sum + tax.
inline Transaction make_txn(const TransactionKey& key, const std::vector<std::int64_t>& prices,
                            std::int64_t tax_cents, const std::vector<TenderSpec>& tenders) {
  using Q = RecordQualifier;
  std::vector<TransactionRecord> recs;
  std::int64_t total = tax_cents;
  for (const auto p : prices) total += p;
  recs.push_back({key,
                  1,
                  Q::kHeader,
                  std::nullopt,
                  {{std::string(fields::kTransactionType), Code{"transaction_type", "SALE"}},
                   {std::string(fields::kTotalAmount), cents(total)}}});
  RowId id = 2;
  for (std::size_t i = 0; i < prices.size(); ++i) {
    recs.push_back({key,
                    id++,
                    Q::kItem,
                    RowId{1},
                    {{std::string(fields::kProductCode), Code{"product", "P00" + std::to_string(1 + i % 9)}},
                     {std::string(fields::kQuantity), Decimal(1, 0)},
                     {std::string(fields::kUnitPrice), cents(prices[i])},
                     {std::string(fields::kExtendedAmount), cents(prices[i])}}});
  }
  recs.push_back({key, id++, Q::kTax, RowId{1}, {{std::string(fields::kTaxAmount), cents(tax_cents)}}});
  for (const auto& t : tenders) {
    recs.push_back({key,
                    id++,
                    Q::kTender,
                    RowId{1},
                    {{std::string(fields::kTenderTypeCode), tender_type(t.type)},
                     {std::string(fields::kEntryMethod), Code{"entry_method", t.method}},
                     {std::string(fields::kTenderAmount), cents(t.amount_cents)}}});
  }
  return Transaction::build(std::move(recs));
}

inline Transaction simple_txn(const TransactionKey& key = make_key()) {
  return make_txn(key, {1000}, 80, {{"CASH", "DRAWER", 1080}});
}

inline GeneratorProfile small_profile(std::uint64_t seed = 42, std::uint32_t per_store = 200) {
  auto p = GeneratorProfile::easy();
  p.seed = seed;
  p.store_count = 5;
  p.transactions_per_store = per_store;
  p.errors = {{1, 0.15, Learnability::kEasy}, {2, 0.15, Learnability::kEasy}, {3, 0.3, Learnability::kEasy}};
  return p;
}

inline void load_corpus(LogStore& store, const Corpus& corpus) {
  std::istringstream tlog(corpus.tlog);
  store.ingest_tlog(tlog);
  std::istringstream plog(corpus.plog);
  store.ingest_plog(plog);
}

// Numeric toy datasets: label 0 is x0 > 0.5, label 1 is x1 > x2. Every
// fifth row is TEST.
inline Dataset toy_detection(std::size_t n, std::uint64_t seed) {
  Dataset ds;
  ds.kind = DatasetKind::kDetection;
  ds.schema_fingerprint = "toy-schema";
  ds.taxonomy_fingerprint = "toy-taxonomy";
  ds.columns = {{"x0", 0}, {"x1", 0}, {"x2", 0}};
  ds.label_names = {"a", "b"};
  ds.seed = seed;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    DatasetRow r;
    r.key = make_key(1, i + 1);
    r.split = i % 5 == 4 ? Split::kTest : Split::kTrain;
    r.features = {rng.uniform01(), rng.uniform01(), rng.uniform01()};
    r.labels = {static_cast<std::uint8_t>(r.features[0] > 0.5),
                static_cast<std::uint8_t>(r.features[1] > r.features[2])};
    ds.rows.push_back(std::move(r));
  }
  return ds;
}

// Target is the nearest of `k` centers on a line in x0, plus a
// categorical column holding the target code in half of the rows.
inline Dataset toy_correction(std::size_t n, int k, std::uint64_t seed) {
  Dataset ds;
  ds.kind = DatasetKind::kCorrection;
  ds.schema_fingerprint = "toy-schema";
  ds.taxonomy_fingerprint = "toy-taxonomy";
  ds.columns = {{"x0", 0}, {"x1", 0}, {"hint", static_cast<std::uint32_t>(k)}};
  ds.class_id = 0;
  for (int c = 0; c < k; ++c) ds.target_domain.push_back("V" + std::to_string(c));
  ds.seed = seed;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    DatasetRow r;
    r.key = make_key(1, i + 1);
    r.split = i % 5 == 4 ? Split::kTest : Split::kTrain;
    r.target = static_cast<int>(i % static_cast<std::size_t>(k));
    r.features = {r.target * 3.0 + rng.uniform01() - 0.5, rng.uniform01(),
                  rng.bernoulli(0.5) ? r.target + 1.0 : 0.0};
    ds.rows.push_back(std::move(r));
  }
  return ds;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("txfix-test-" + std::to_string(rd()) + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace txfix::testing

#endif  // TXFIX_TESTS_SUPPORT_HPP_
