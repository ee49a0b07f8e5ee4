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


#include "txfix/synth.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "txfix/binary_io.hpp"
#include "txfix/csv.hpp"
#include "txfix/error.hpp"
#include "txfix/fields.hpp"
#include "txfix/logstore.hpp"
#include "txfix/rng.hpp"

namespace txfix {
namespace {

using Q = RecordQualifier;

constexpr std::array<std::string_view, 5> kTypes = {"CASH", "CREDIT", "DEBIT", "GIFT", "VOUCHER"};
constexpr std::array<std::string_view, 5> kMethods = {"DRAWER", "CHIP", "SWIPE", "SCAN", "KEYED"};
constexpr std::array<double, 5> kMethodWeights = {0.30, 0.35, 0.15, 0.10, 0.10};
constexpr std::int64_t kChipCreditThreshold = 4000;  // cents
constexpr std::int64_t kTaxPercent = 8;

const std::vector<std::string_view>& allowed_types(std::string_view method) {
  static const std::map<std::string_view, std::vector<std::string_view>> rules = {
      {"DRAWER", {"CASH"}},
      {"CHIP", {"CREDIT", "DEBIT"}},
      {"SWIPE", {"CREDIT", "DEBIT", "GIFT"}},
      {"SCAN", {"GIFT", "VOUCHER"}},
      {"KEYED", {"VOUCHER", "CREDIT"}}};
  return rules.at(method);
}

std::string_view draw_type(Rng& rng, std::string_view method, std::int64_t cents) {
  auto pick = [&](std::initializer_list<std::pair<std::string_view, double>> options) {
    std::vector<double> w;
    for (const auto& o : options) w.push_back(o.second);
    return (options.begin() + rng.weighted(w))->first;
  };
  if (method == "DRAWER") return "CASH";
  if (method == "CHIP") {
    return cents >= kChipCreditThreshold ? pick({{"CREDIT", 0.85}, {"DEBIT", 0.15}})
                                         : pick({{"CREDIT", 0.15}, {"DEBIT", 0.85}});
  }
  if (method == "SWIPE") return pick({{"CREDIT", 0.60}, {"DEBIT", 0.25}, {"GIFT", 0.15}});
  if (method == "SCAN") return pick({{"GIFT", 0.70}, {"VOUCHER", 0.30}});
  return pick({{"VOUCHER", 0.60}, {"CREDIT", 0.40}});
}

std::string_view draw_other(Rng& rng, std::initializer_list<std::string_view> excluded,
                            const std::vector<std::string_view>* also_excluded = nullptr) {
  std::vector<std::string_view> options;
  for (const auto t : kTypes) {
    const bool skip = std::find(excluded.begin(), excluded.end(), t) != excluded.end() ||
                      (also_excluded != nullptr &&
                       std::find(also_excluded->begin(), also_excluded->end(), t) != also_excluded->end());
    if (!skip) options.push_back(t);
  }
  return options[rng.uniform_index(options.size())];
}

Decimal cents(std::int64_t c) { return Decimal(c, 2); }

Code code(std::string_view vocab, std::string_view value) {
  return Code{std::string(vocab), std::string(value)};
}

struct TenderDraft {
  RowId row_id = 0;
  std::string_view method;
  std::string_view type;
  std::int64_t amount = 0;
};

struct Generated {
  std::vector<TransactionRecord> records;
  std::vector<TenderDraft> tenders;
};

Generated generate_transaction(const GeneratorProfile& p, const TransactionKey& key,
                               const std::vector<std::int64_t>& prices, Rng& rng) {
  Generated g;
  RowId next_id = 1;
  auto add = [&](Q q, std::optional<RowId> parent, Attributes attrs) {
    g.records.push_back({key, next_id, q, parent, std::move(attrs)});
    return next_id++;
  };

  const RowId header_id = add(Q::kHeader, std::nullopt, {});

  std::uint32_t items = 1;
  while (items < p.max_items && !rng.bernoulli(p.item_geometric_p)) ++items;

  std::int64_t subtotal = 0, discounts = 0;
  for (std::uint32_t i = 0; i < items; ++i) {
    const auto product = rng.uniform_index(p.product_count);
    const auto qty = static_cast<std::int64_t>(1 + rng.uniform_index(3));
    const auto price = prices[product];
    const auto extended = qty * price;
    subtotal += extended;
    const RowId item_id =
        add(Q::kItem, header_id,
            {{std::string(fields::kProductCode), code("product", fmt::format("P{:03d}", product + 1))},
             {std::string(fields::kQuantity), Decimal(qty, 0)},
             {std::string(fields::kUnitPrice), cents(price)},
             {std::string(fields::kExtendedAmount), cents(extended)}});
    if (rng.bernoulli(p.item_discount_rate)) {
      const auto d = std::max<std::int64_t>(1, extended / 10);
      discounts += d;
      add(Q::kItemDiscount, item_id,
          {{std::string(fields::kDiscountAmount), cents(d)},
           {std::string(fields::kReasonCode), Text{"PROMO"}}});
    }
  }
  if (rng.bernoulli(p.txn_discount_rate)) {
    const auto d = std::max<std::int64_t>(1, (subtotal - discounts) / 20);
    discounts += d;
    add(Q::kTxnDiscount, header_id,
        {{std::string(fields::kDiscountAmount), cents(d)},
         {std::string(fields::kReasonCode), Text{"LOYALTY"}}});
  }
  const std::int64_t net = subtotal - discounts;
  const std::int64_t tax = (net * kTaxPercent + 50) / 100;
  add(Q::kTax, header_id,
      {{std::string(fields::kTaxAmount), cents(tax)}, {std::string(fields::kTaxCode), Text{"VAT8"}}});
  const std::int64_t total = net + tax;

  auto count = 1 + rng.weighted(p.tender_count_weights);
  if (total < static_cast<std::int64_t>(count)) count = 1;
  std::int64_t remaining = total;
  for (std::size_t t = 0; t < count; ++t) {
    TenderDraft d;
    const auto left = static_cast<std::int64_t>(count - t - 1);
    if (left == 0) {
      d.amount = remaining;
    } else {
      const double share = 0.2 + 0.5 * rng.uniform01();
      d.amount = std::clamp<std::int64_t>(static_cast<std::int64_t>(static_cast<double>(remaining) * share),
                                          1, remaining - left);
    }
    remaining -= d.amount;
    d.method = kMethods[rng.weighted(kMethodWeights)];
    d.type = draw_type(rng, d.method, d.amount);
    d.row_id = add(Q::kTender, header_id,
                   {{std::string(fields::kTenderTypeCode), code("tender_type", d.type)},
                    {std::string(fields::kEntryMethod), code("entry_method", d.method)},
                    {std::string(fields::kTenderAmount), cents(d.amount)}});
    g.tenders.push_back(d);
  }

  g.records.front().attributes = {
      {std::string(fields::kTransactionType),
       code("transaction_type", rng.bernoulli(p.return_rate) ? "RETURN" : "SALE")},
      {std::string(fields::kWorkstation), Text{fmt::format("WS{}", 1 + rng.uniform_index(4))}},
      {std::string(fields::kTotalAmount), cents(total)}};
  return g;
}

ChangeLogEntry change_entry(const TransactionKey& key, std::uint64_t seq, RowId row,
                            std::string_view from, std::string_view to) {
  ChangeLogEntry e;
  e.key = key;
  e.sequence = seq;
  e.kind = FieldChanged{row, std::string(fields::kTenderTypeCode), code("tender_type", from),
                        code("tender_type", to), "operator:synth"};
  e.logged_at = key.timestamp + std::chrono::hours(2) + std::chrono::minutes(seq);
  return e;
}

ChangeLogEntry error_entry(const TransactionKey& key, std::uint64_t seq, std::string code_name) {
  ChangeLogEntry e;
  e.key = key;
  e.sequence = seq;
  e.kind = ErrorLogged{std::move(code_name), "pos-validation"};
  e.logged_at = key.timestamp + std::chrono::hours(1);
  return e;
}

std::string learnability_name(Learnability l) { return l == Learnability::kEasy ? "EASY" : "HARD"; }

const std::vector<std::string>& manifest_columns() {
  static const std::vector<std::string> columns = {
      "store_number", "business_date",   "transaction_index", "timestamp",
      "tender_ordinal", "row_id", "erroneous_value", "correct_value"};
  return columns;
}

std::string code_text(const FieldValue& v) {
  if (const auto* c = std::get_if<Code>(&v)) return c->value;
  if (const auto* t = std::get_if<Text>(&v)) return t->value;
  return display(v);
}

}  // namespace

GeneratorProfile GeneratorProfile::easy() { return GeneratorProfile{}; }

GeneratorProfile GeneratorProfile::hard() {
  GeneratorProfile p;
  for (auto& e : p.errors) e.learnability = Learnability::kHard;
  return p;
}

GeneratorProfile GeneratorProfile::from_json(const nlohmann::json& j) {
  GeneratorProfile p = easy();
  try {
    p.seed = j.value("seed", p.seed);
    p.store_count = j.value("store_count", p.store_count);
    p.transactions_per_store = j.value("transactions_per_store", p.transactions_per_store);
    p.days = j.value("days", p.days);
    p.start_date = j.value("start_date", p.start_date);
    p.item_geometric_p = j.value("item_geometric_p", p.item_geometric_p);
    p.max_items = j.value("max_items", p.max_items);
    p.tender_count_weights = j.value("tender_count_weights", p.tender_count_weights);
    p.product_count = j.value("product_count", p.product_count);
    p.return_rate = j.value("return_rate", p.return_rate);
    p.item_discount_rate = j.value("item_discount_rate", p.item_discount_rate);
    p.txn_discount_rate = j.value("txn_discount_rate", p.txn_discount_rate);
    p.two_step_rate = j.value("two_step_rate", p.two_step_rate);
    p.error_only_rate = j.value("error_only_rate", p.error_only_rate);
    if (j.contains("errors")) {
      p.errors.clear();
      for (const auto& e : j.at("errors")) {
        const auto l = e.value("learnability", std::string("EASY"));
        if (l != "EASY" && l != "HARD") fail("synth.InvalidProfile", "learnability must be EASY or HARD");
        p.errors.push_back({e.at("tender_ordinal").get<int>(), e.at("rate").get<double>(),
                            l == "EASY" ? Learnability::kEasy : Learnability::kHard});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail("synth.InvalidProfile", e.what());
  }
  p.validate();
  return p;
}

GeneratorProfile GeneratorProfile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("synth.InvalidProfile", "cannot open " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    fail("synth.InvalidProfile", path.string() + ": " + e.what());
  }
}

nlohmann::json GeneratorProfile::to_json() const {
  nlohmann::json errs = nlohmann::json::array();
  for (const auto& e : errors) {
    errs.push_back({{"tender_ordinal", e.tender_ordinal},
                    {"rate", e.rate},
                    {"learnability", learnability_name(e.learnability)}});
  }
  return {{"seed", seed},
          {"store_count", store_count},
          {"transactions_per_store", transactions_per_store},
          {"days", days},
          {"start_date", start_date},
          {"item_geometric_p", item_geometric_p},
          {"max_items", max_items},
          {"tender_count_weights", tender_count_weights},
          {"product_count", product_count},
          {"return_rate", return_rate},
          {"item_discount_rate", item_discount_rate},
          {"txn_discount_rate", txn_discount_rate},
          {"errors", errs},
          {"two_step_rate", two_step_rate},
          {"error_only_rate", error_only_rate}};
}

void GeneratorProfile::validate() const {
  auto rate = [](double r, const char* name) {
    if (!(r >= 0.0 && r <= 1.0)) fail("synth.InvalidProfile", fmt::format("{} must be in [0,1]", name));
  };
  rate(return_rate, "return_rate");
  rate(item_discount_rate, "item_discount_rate");
  rate(txn_discount_rate, "txn_discount_rate");
  rate(two_step_rate, "two_step_rate");
  rate(error_only_rate, "error_only_rate");
  if (!(item_geometric_p > 0.0 && item_geometric_p <= 1.0)) {
    fail("synth.InvalidProfile", "item_geometric_p must be in (0,1]");
  }
  if (max_items < 1) fail("synth.InvalidProfile", "max_items must be >= 1");
  if (days < 1) fail("synth.InvalidProfile", "days must be >= 1");
  if (product_count < 1 || product_count > 999) fail("synth.InvalidProfile", "product_count must be in 1..999");
  if (tender_count_weights.size() != 3) fail("synth.InvalidProfile", "tender_count_weights needs 3 entries");
  double sum = 0.0;
  for (const double w : tender_count_weights) {
    if (w < 0.0) fail("synth.InvalidProfile", "tender_count_weights must be non-negative");
    sum += w;
  }
  if (sum <= 0.0) fail("synth.InvalidProfile", "tender_count_weights must not all be zero");
  std::set<int> seen;
  for (const auto& e : errors) {
    if (e.tender_ordinal < 1 || e.tender_ordinal > 3) fail("synth.InvalidProfile", "tender_ordinal must be 1..3");
    if (!seen.insert(e.tender_ordinal).second) fail("synth.InvalidProfile", "duplicate tender_ordinal");
    rate(e.rate, "error rate");
  }
  try {
    parse_date(start_date);
  } catch (const Error& e) {
    fail("synth.InvalidProfile", e.what());
  }
}

Corpus generate_corpus(const GeneratorProfile& profile) {
  profile.validate();
  Corpus corpus;
  std::ostringstream tlog, plog;
  csv::write_row(tlog, tlog_columns());
  csv::write_row(plog, plog_columns());

  std::vector<std::int64_t> prices(profile.product_count);
  {
    Rng rng(mix_seed(profile.seed, 0xC0FFEE));
    for (auto& price : prices) price = 99 + static_cast<std::int64_t>(rng.uniform_index(4901));
  }

  const auto start = std::chrono::sys_days(parse_date(profile.start_date));
  const std::uint32_t per_day_base = profile.transactions_per_store / profile.days;
  const std::uint32_t extra = profile.transactions_per_store % profile.days;
  std::uint64_t stream = 0;
  for (std::uint32_t store = 1; store <= profile.store_count; ++store) {
    for (std::uint32_t day = 0; day < profile.days; ++day) {
      const std::uint32_t per_day = per_day_base + (day < extra ? 1 : 0);
      const auto spacing = std::max<std::int64_t>(1, 50400 / std::max<std::uint32_t>(per_day, 1));
      const auto date = start + std::chrono::days(day);
      for (std::uint32_t idx = 1; idx <= per_day; ++idx, ++stream) {
        TransactionKey key;
        key.store_number = store;
        key.business_date = Date(date);
        key.transaction_index = idx;
        key.timestamp = Timestamp(date) + std::chrono::hours(8) + std::chrono::seconds(spacing * idx);

        Rng base_rng(mix_seed(profile.seed, 2 * stream));
        Rng error_rng(mix_seed(profile.seed, 2 * stream + 1));
        const auto g = generate_transaction(profile, key, prices, base_rng);
        for (const auto& r : g.records) csv::write_row(tlog, format_tlog_row(r));
        ++corpus.transaction_count;

        std::vector<ChangeLogEntry> changes;
        std::uint64_t seq = 1;
        for (const auto& err : profile.errors) {
          const auto k = static_cast<std::size_t>(err.tender_ordinal);
          if (k > g.tenders.size()) continue;
          if (!error_rng.bernoulli(err.rate)) continue;
          const auto& tender = g.tenders[k - 1];
          const auto corrupted = err.learnability == Learnability::kEasy
                                     ? draw_other(error_rng, {}, &allowed_types(tender.method))
                                     : draw_other(error_rng, {tender.type});
          if (error_rng.bernoulli(profile.two_step_rate)) {
            const auto intermediate = draw_other(error_rng, {tender.type, corrupted});
            changes.push_back(change_entry(key, 0, tender.row_id, corrupted, intermediate));
            changes.push_back(change_entry(key, 0, tender.row_id, intermediate, tender.type));
          } else {
            changes.push_back(change_entry(key, 0, tender.row_id, corrupted, tender.type));
          }
          corpus.truth.push_back({key, err.tender_ordinal, tender.row_id, std::string(corrupted),
                                  std::string(tender.type)});
        }
        if (!changes.empty()) {
          csv::write_row(plog, format_plog_row(error_entry(key, seq++, "TENDER_TYPE_MISMATCH")));
          for (auto& c : changes) {
            c.sequence = seq;
            c.logged_at = key.timestamp + std::chrono::hours(2) + std::chrono::minutes(seq);
            ++seq;
            csv::write_row(plog, format_plog_row(c));
          }
        } else if (error_rng.bernoulli(profile.error_only_rate)) {
          csv::write_row(plog, format_plog_row(error_entry(key, seq++, "TOTAL_REVIEW")));
        }
      }
    }
  }
  corpus.tlog = tlog.str();
  corpus.plog = plog.str();
  corpus.manifest = format_ground_truth(corpus.truth);
  return corpus;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "tlog.csv", corpus.tlog);
  write_file_atomic(dir / "plog.csv", corpus.plog);
  write_file_atomic(dir / "ground_truth.csv", corpus.manifest);
}

std::string format_ground_truth(std::span<const GroundTruthEntry> truth) {
  std::ostringstream out;
  csv::write_row(out, manifest_columns());
  for (const auto& t : truth) {
    const std::vector<std::string> row = {std::to_string(t.key.store_number),
                                          format_date(t.key.business_date),
                                          std::to_string(t.key.transaction_index),
                                          format_timestamp(t.key.timestamp),
                                          std::to_string(t.tender_ordinal),
                                          std::to_string(t.row_id),
                                          t.erroneous_value,
                                          t.correct_value};
    csv::write_row(out, row);
  }
  return out.str();
}

std::vector<GroundTruthEntry> parse_ground_truth(std::string_view text) {
  std::istringstream in{std::string(text)};
  csv::Reader reader(in);
  std::vector<std::string> f;
  if (!reader.next(f) || f != manifest_columns()) fail("synth.BadManifest", "unexpected header");
  std::vector<GroundTruthEntry> out;
  while (reader.next(f)) {
    if (f.size() != manifest_columns().size()) {
      fail("synth.BadManifest", fmt::format("line {}: expected 8 fields", reader.line()));
    }
    try {
      GroundTruthEntry e;
      e.key.store_number = static_cast<std::uint32_t>(std::stoul(f[0]));
      e.key.business_date = parse_date(f[1]);
      e.key.transaction_index = std::stoull(f[2]);
      e.key.timestamp = parse_timestamp(f[3]);
      e.tender_ordinal = std::stoi(f[4]);
      e.row_id = static_cast<RowId>(std::stoul(f[5]));
      e.erroneous_value = f[6];
      e.correct_value = f[7];
      out.push_back(std::move(e));
    } catch (const std::exception& e) {
      fail("synth.BadManifest", fmt::format("line {}: {}", reader.line(), e.what()));
    }
  }
  return out;
}

OracleReport oracle_check(std::span<const GroundTruthEntry> truth,
                          std::span<const ReconstructionResult> results) {
  OracleReport report;
  std::map<TransactionKey, const ReconstructionResult*> by_key;
  for (const auto& r : results) by_key.emplace(r.corrected.key(), &r);
  std::set<std::tuple<TransactionKey, RowId, std::string>> expected;

  for (const auto& t : truth) {
    ++report.checked;
    expected.emplace(t.key, t.row_id, std::string(fields::kTenderTypeCode));
    const auto it = by_key.find(t.key);
    if (it == by_key.end()) {
      report.mismatches.push_back({t.key, "injected error was not reconstructed"});
      continue;
    }
    const auto& r = *it->second;
    if (r.erroneous.find(t.row_id) == nullptr) {
      report.mismatches.push_back({t.key, fmt::format("row {} missing", t.row_id)});
      continue;
    }
    const auto got = code_text(r.erroneous.get_field(t.row_id, fields::kTenderTypeCode));
    const auto fixed = code_text(r.corrected.get_field(t.row_id, fields::kTenderTypeCode));
    if (got != t.erroneous_value) {
      report.mismatches.push_back(
          {t.key, fmt::format("row {} reconstructed {} but {} was injected", t.row_id, got,
                              t.erroneous_value)});
    }
    if (fixed != t.correct_value) {
      report.mismatches.push_back(
          {t.key, fmt::format("row {} corrected value {} but manifest says {}", t.row_id, fixed,
                              t.correct_value)});
    }
  }

  for (const auto& r : results) {
    for (const auto& s : r.skipped) {
      report.mismatches.push_back({r.corrected.key(), "skipped entry: " + s.reason});
    }
    for (const auto& rec : r.corrected.records()) {
      const auto& before = r.erroneous.record(rec.row_id).attributes;
      std::set<std::string> names;
      for (const auto& [n, v] : before) names.insert(n);
      for (const auto& [n, v] : rec.attributes) names.insert(n);
      for (const auto& n : names) {
        if (r.erroneous.get_field(rec.row_id, n) == r.corrected.get_field(rec.row_id, n)) continue;
        if (!expected.contains({r.corrected.key(), rec.row_id, n})) {
          report.mismatches.push_back(
              {r.corrected.key(), fmt::format("row {} field {} changed but no error was injected",
                                              rec.row_id, n)});
        }
      }
    }
  }
  return report;
}

}  // namespace txfix
