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


#include "txfix/json_codec.hpp"

#include "txfix/error.hpp"

namespace txfix {
namespace {

using nlohmann::json;

const json& member(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) fail("json.BadPayload", std::string("missing member ") + name);
  return j.at(name);
}

std::string string_member(const json& j, const char* name) {
  const auto& v = member(j, name);
  if (!v.is_string()) fail("json.BadPayload", std::string(name) + " must be a string");
  return v.get<std::string>();
}

std::uint64_t uint_member(const json& j, const char* name) {
  const auto& v = member(j, name);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    fail("json.BadPayload", std::string(name) + " must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

}  // namespace

json to_json(const FieldValue& v) {
  if (const auto* d = std::get_if<Decimal>(&v)) return {{"kind", "number"}, {"value", d->to_string()}};
  if (const auto* t = std::get_if<Text>(&v)) return {{"kind", "text"}, {"value", t->value}};
  if (const auto* c = std::get_if<Code>(&v)) {
    return {{"kind", "code"}, {"vocabulary", c->vocabulary}, {"value", c->value}};
  }
  return nullptr;
}

FieldValue field_value_from_json(const json& j) {
  if (j.is_null()) return Missing{};
  const auto kind = string_member(j, "kind");
  try {
    if (kind == "number") return Decimal::parse(string_member(j, "value"));
  } catch (const Error& e) {
    fail("json.BadPayload", e.what());
  }
  if (kind == "text") return Text{string_member(j, "value")};
  if (kind == "code") return Code{string_member(j, "vocabulary"), string_member(j, "value")};
  fail("json.BadPayload", "unknown value kind " + kind);
}

json to_json(const TransactionKey& key) {
  return {{"store_number", key.store_number},
          {"business_date", format_date(key.business_date)},
          {"transaction_index", key.transaction_index},
          {"timestamp", format_timestamp(key.timestamp)}};
}

TransactionKey key_from_json(const json& j) {
  TransactionKey key;
  const auto store = uint_member(j, "store_number");
  if (store == 0 || store > UINT32_MAX) fail("json.BadPayload", "store_number out of range");
  key.store_number = static_cast<std::uint32_t>(store);
  try {
    key.business_date = parse_date(string_member(j, "business_date"));
    key.timestamp = parse_timestamp(string_member(j, "timestamp"));
  } catch (const Error& e) {
    if (e.code().starts_with("json.")) throw;
    fail("json.BadPayload", e.what());
  }
  key.transaction_index = uint_member(j, "transaction_index");
  return key;
}

json to_json(const Transaction& txn) {
  json records = json::array();
  for (const auto& r : txn.records()) {
    json attrs = json::object();
    for (const auto& [name, value] : r.attributes) attrs[name] = to_json(value);
    records.push_back({{"row_id", r.row_id},
                       {"qualifier", to_string(r.qualifier)},
                       {"parent_row_id", r.parent_row_id ? json(*r.parent_row_id) : json(nullptr)},
                       {"attributes", attrs}});
  }
  return {{"key", to_json(txn.key())}, {"records", records}};
}

Transaction transaction_from_json(const json& j) {
  const auto key = key_from_json(member(j, "key"));
  const auto& records = member(j, "records");
  if (!records.is_array()) fail("json.BadPayload", "records must be an array");
  std::vector<TransactionRecord> out;
  for (const auto& r : records) {
    TransactionRecord rec;
    rec.key = key;
    const auto id = uint_member(r, "row_id");
    if (id == 0 || id > UINT32_MAX) fail("json.BadPayload", "row_id out of range");
    rec.row_id = static_cast<RowId>(id);
    try {
      rec.qualifier = parse_qualifier(string_member(r, "qualifier"));
    } catch (const Error& e) {
      if (e.code().starts_with("json.")) throw;
      fail("json.BadPayload", e.what());
    }
    if (r.contains("parent_row_id") && !r.at("parent_row_id").is_null()) {
      rec.parent_row_id = static_cast<RowId>(uint_member(r, "parent_row_id"));
    }
    if (r.contains("attributes")) {
      const auto& attrs = r.at("attributes");
      if (!attrs.is_object()) fail("json.BadPayload", "attributes must be an object");
      for (const auto& [name, value] : attrs.items()) {
        auto v = field_value_from_json(value);
        if (!is_missing(v)) rec.attributes.emplace(name, std::move(v));
      }
    }
    out.push_back(std::move(rec));
  }
  return Transaction::build(std::move(out));
}

json to_json(const ChangeLogEntry& e) {
  json j = {{"key", to_json(e.key)},
            {"sequence", e.sequence},
            {"logged_at", format_timestamp(e.logged_at)}};
  if (const auto* c = e.change()) {
    j["kind"] = "FIELD_CHANGED";
    j["row_id"] = c->row_id;
    j["field_name"] = c->field_name;
    j["old_value"] = to_json(c->old_value);
    j["new_value"] = to_json(c->new_value);
    j["task_name"] = c->task_name;
  } else {
    const auto& err = std::get<ErrorLogged>(e.kind);
    j["kind"] = "ERROR_LOGGED";
    j["error_code"] = err.error_code;
    j["task_name"] = err.task_name;
  }
  return j;
}

}  // namespace txfix
