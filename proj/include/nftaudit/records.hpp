#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

#include "nftaudit/money.hpp"
#include "nftaudit/time_utils.hpp"

namespace nftaudit {

// One NFT sale. Self-trades (buyer == seller) are representable on purpose;
// they are one of the wash signals.
struct SaleRecord {
    std::string tx_id;
    UnixSeconds block_time = 0;
    std::string collection_id;
    std::string token_id;
    std::string buyer;
    std::string seller;
    std::int64_t price_lamports = 0;
    UsdCents price_usd_cents = 0;
    std::string marketplace;

    bool operator==(const SaleRecord&) const = default;
};

struct HolderSnapshot {
    std::string collection_id;
    std::string holder;
    int rank = 0;  // 1 = largest holder
    std::int64_t tokens_held = 0;
    std::int64_t supply = 0;
    UnixSeconds snapshot_time = 0;

    bool operator==(const HolderSnapshot&) const = default;
};

struct QueryWindow {
    UnixSeconds start_time = 0;
    UnixSeconds end_time = 0;  // exclusive
    int page_size = 1000;
};

// Returns a rejection reason, or nullopt when the record is valid.
std::optional<std::string> validate_sale(const SaleRecord& r);
std::optional<std::string> validate_holder(const HolderSnapshot& h);
std::optional<std::string> validate_window(const QueryWindow& w);

// Canonical corpus ordering: (block_time, tx_id).
inline bool sale_before(const SaleRecord& a, const SaleRecord& b) {
    if (a.block_time != b.block_time) return a.block_time < b.block_time;
    return a.tx_id < b.tx_id;
}

// JSONL (de)serialization. Serialization is byte-stable: fixed field order,
// price_usd always printed with 2 decimals.
std::string sale_to_jsonl(const SaleRecord& r);
std::string holder_to_jsonl(const HolderSnapshot& h);

// Parses one JSONL line; on failure returns the reason via `error`.
std::optional<SaleRecord> sale_from_jsonl(const std::string& line, std::string& error);
std::optional<HolderSnapshot> holder_from_jsonl(const std::string& line, std::string& error);

}  // namespace nftaudit
