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


// JSON forms of transactions and change log entries used by the HTTP API.
//
//   value        {"kind":"number","value":"12.50"}
//                {"kind":"text","value":"WS1"}
//                {"kind":"code","vocabulary":"tender_type","value":"CASH"}
//   key          {"store_number":1,"business_date":"2026-03-02",
//                 "transaction_index":7,"timestamp":"2026-03-02T08:05:00Z"}
//   transaction  {"key":{...},"records":[{"row_id":1,"qualifier":"HEADER",
//                 "parent_row_id":null,"attributes":{"NAME":value,...}},...]}

#ifndef TXFIX_JSON_CODEC_HPP_
#define TXFIX_JSON_CODEC_HPP_

#include "json.hpp"

#include "txfix/logstore.hpp"
#include "txfix/txmodel.hpp"

namespace txfix {

// All decoders throw json.BadPayload for structural problems; transaction
// validation errors (txmodel.*) propagate unchanged.
nlohmann::json to_json(const FieldValue& v);
FieldValue field_value_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TransactionKey& key);
TransactionKey key_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Transaction& txn);
Transaction transaction_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ChangeLogEntry& e);

}  // namespace txfix

#endif  // TXFIX_JSON_CODEC_HPP_
