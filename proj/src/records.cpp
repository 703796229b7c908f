#include "nftaudit/records.hpp"

#include <json.hpp>

namespace nftaudit {

namespace {

using nlohmann::json;

std::string quoted(const std::string& s) { return json(s).dump(); }

const json* find_field(const json& j, const char* key, std::string& error) {
    auto it = j.find(key);
    if (it == j.end()) {
        error = std::string("missing field '") + key + "'";
        return nullptr;
    }
    return &*it;
}

bool get_string(const json& j, const char* key, std::string& out, std::string& error) {
    const json* f = find_field(j, key, error);
    if (!f) return false;
    if (!f->is_string()) {
        error = std::string("field '") + key + "' must be a string";
        return false;
    }
    out = f->get<std::string>();
    return true;
}

bool get_int(const json& j, const char* key, std::int64_t& out, std::string& error) {
    const json* f = find_field(j, key, error);
    if (!f) return false;
    if (!f->is_number_integer()) {
        error = std::string("field '") + key + "' must be an integer";
        return false;
    }
    out = f->get<std::int64_t>();
    return true;
}

bool get_time(const json& j, const char* key, UnixSeconds& out, std::string& error) {
    std::string raw;
    if (!get_string(j, key, raw, error)) return false;
    auto ts = parse_iso8601_utc(raw);
    if (!ts) {
        error = std::string("field '") + key + "' is not an ISO-8601 UTC timestamp: " + raw;
        return false;
    }
    out = *ts;
    return true;
}

std::optional<json> parse_line(const std::string& line, std::string& error) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
        error = "malformed JSON";
        return std::nullopt;
    }
    if (!j.is_object()) {
        error = "line is not a JSON object";
        return std::nullopt;
    }
    return j;
}

}  // namespace

std::optional<std::string> validate_sale(const SaleRecord& r) {
    if (r.tx_id.empty()) return "tx_id is empty";
    if (r.collection_id.empty()) return "collection_id is empty";
    if (r.token_id.empty()) return "token_id is empty";
    if (r.buyer.empty()) return "buyer is empty";
    if (r.seller.empty()) return "seller is empty";
    if (r.marketplace.empty()) return "marketplace is empty";
    if (r.price_lamports < 0) return "price_lamports is negative";
    if (r.price_usd_cents < 0) return "price_usd is negative";
    return std::nullopt;
}

std::optional<std::string> validate_holder(const HolderSnapshot& h) {
    if (h.collection_id.empty()) return "collection_id is empty";
    if (h.holder.empty()) return "holder is empty";
    if (h.rank < 1) return "rank must be >= 1";
    if (h.supply < 1) return "supply must be >= 1";
    if (h.tokens_held < 0) return "tokens_held is negative";
    if (h.tokens_held > h.supply) return "tokens_held exceeds supply";
    return std::nullopt;
}

std::optional<std::string> validate_window(const QueryWindow& w) {
    if (w.start_time >= w.end_time) return "start_time must precede end_time";
    if (w.page_size < 1) return "page_size must be >= 1";
    return std::nullopt;
}

std::string sale_to_jsonl(const SaleRecord& r) {
    std::string out;
    out.reserve(256);
    out += "{\"tx_id\":" + quoted(r.tx_id);
    out += ",\"block_time\":" + quoted(format_iso8601_utc(r.block_time));
    out += ",\"collection_id\":" + quoted(r.collection_id);
    out += ",\"token_id\":" + quoted(r.token_id);
    out += ",\"buyer\":" + quoted(r.buyer);
    out += ",\"seller\":" + quoted(r.seller);
    out += ",\"price_lamports\":" + std::to_string(r.price_lamports);
    out += ",\"price_usd\":" + format_usd(r.price_usd_cents);
    out += ",\"marketplace\":" + quoted(r.marketplace);
    out += "}";
    return out;
}

std::string holder_to_jsonl(const HolderSnapshot& h) {
    std::string out;
    out.reserve(160);
    out += "{\"collection_id\":" + quoted(h.collection_id);
    out += ",\"holder\":" + quoted(h.holder);
    out += ",\"rank\":" + std::to_string(h.rank);
    out += ",\"tokens_held\":" + std::to_string(h.tokens_held);
    out += ",\"supply\":" + std::to_string(h.supply);
    out += ",\"snapshot_time\":" + quoted(format_iso8601_utc(h.snapshot_time));
    out += "}";
    return out;
}

std::optional<SaleRecord> sale_from_jsonl(const std::string& line, std::string& error) {
    auto j = parse_line(line, error);
    if (!j) return std::nullopt;

    SaleRecord r;
    if (!get_string(*j, "tx_id", r.tx_id, error)) return std::nullopt;
    if (!get_time(*j, "block_time", r.block_time, error)) return std::nullopt;
    if (!get_string(*j, "collection_id", r.collection_id, error)) return std::nullopt;
    if (!get_string(*j, "token_id", r.token_id, error)) return std::nullopt;
    if (!get_string(*j, "buyer", r.buyer, error)) return std::nullopt;
    if (!get_string(*j, "seller", r.seller, error)) return std::nullopt;
    if (!get_int(*j, "price_lamports", r.price_lamports, error)) return std::nullopt;

    const json* price = find_field(*j, "price_usd", error);
    if (!price) return std::nullopt;
    if (!price->is_number()) {
        error = "field 'price_usd' must be a number";
        return std::nullopt;
    }
    auto cents = usd_cents_from_double(price->get<double>());
    if (!cents) {
        error = "field 'price_usd' must be a non-negative amount with at most 2 decimals";
        return std::nullopt;
    }
    r.price_usd_cents = *cents;

    if (!get_string(*j, "marketplace", r.marketplace, error)) return std::nullopt;

    if (auto reason = validate_sale(r)) {
        error = *reason;
        return std::nullopt;
    }
    return r;
}

std::optional<HolderSnapshot> holder_from_jsonl(const std::string& line, std::string& error) {
    auto j = parse_line(line, error);
    if (!j) return std::nullopt;

    HolderSnapshot h;
    std::int64_t rank = 0;
    if (!get_string(*j, "collection_id", h.collection_id, error)) return std::nullopt;
    if (!get_string(*j, "holder", h.holder, error)) return std::nullopt;
    if (!get_int(*j, "rank", rank, error)) return std::nullopt;
    h.rank = static_cast<int>(rank);
    if (!get_int(*j, "tokens_held", h.tokens_held, error)) return std::nullopt;
    if (!get_int(*j, "supply", h.supply, error)) return std::nullopt;
    if (!get_time(*j, "snapshot_time", h.snapshot_time, error)) return std::nullopt;

    if (auto reason = validate_holder(h)) {
        error = *reason;
        return std::nullopt;
    }
    return h;
}

}  // namespace nftaudit
