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

// Attribute names of the shipped retail record layout.

#ifndef TXFIX_FIELDS_HPP_
#define TXFIX_FIELDS_HPP_

#include <string_view>

namespace txfix::fields {

// HEADER
inline constexpr std::string_view kTransactionType = "TRANSACTION_TYPE";
inline constexpr std::string_view kTotalAmount = "TOTAL_AMOUNT";
inline constexpr std::string_view kWorkstation = "WORKSTATION_ID";
// ITEM
inline constexpr std::string_view kProductCode = "PRODUCT_CODE";
inline constexpr std::string_view kQuantity = "QUANTITY";
inline constexpr std::string_view kUnitPrice = "UNIT_PRICE";
inline constexpr std::string_view kExtendedAmount = "EXTENDED_AMOUNT";
// ITEM_DISCOUNT, TXN_DISCOUNT
inline constexpr std::string_view kDiscountAmount = "DISCOUNT_AMOUNT";
inline constexpr std::string_view kReasonCode = "REASON_CODE";
// TAX
inline constexpr std::string_view kTaxAmount = "TAX_AMOUNT";
inline constexpr std::string_view kTaxCode = "TAX_CODE";
// TENDER
inline constexpr std::string_view kTenderTypeCode = "TENDER_TYPE_CODE";
inline constexpr std::string_view kTenderAmount = "TENDER_AMOUNT";
inline constexpr std::string_view kEntryMethod = "ENTRY_METHOD";

inline constexpr std::string_view kImputedSuffix = "_IMPUTED";

}  // namespace txfix::fields

#endif  // TXFIX_FIELDS_HPP_
