#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "nftaudit/records.hpp"

namespace nftaudit {

class CorpusError : public std::runtime_error {
public:
    explicit CorpusError(const std::string& what) : std::runtime_error(what) {}
};

// Immutable after load/build; records kept in canonical (block_time, tx_id)
// order, indexes hold positions into `records`.
class Corpus {
public:
    Corpus() = default;

    // Builds the indexes; throws CorpusError on duplicate tx_id or invalid
    // records. Takes ownership of the vector.
    static Corpus from_records(std::vector<SaleRecord> records,
                               std::vector<HolderSnapshot> holders = {});

    const std::vector<SaleRecord>& records() const { return records_; }
    const std::vector<HolderSnapshot>& holders() const { return holders_; }

    // Sorted for deterministic iteration.
    const std::vector<std::string>& collection_ids() const { return collection_ids_; }

    bool has_collection(const std::string& collection_id) const;

    // Record positions for one collection, in canonical order.
    const std::vector<std::size_t>& collection_records(const std::string& collection_id) const;

    // Record positions an address participates in (buyer or seller).
    const std::vector<std::size_t>& address_records(const std::string& address) const;

    UsdCents total_usd_cents() const { return total_usd_cents_; }

private:
    std::vector<SaleRecord> records_;
    std::vector<HolderSnapshot> holders_;
    std::vector<std::string> collection_ids_;
    std::unordered_map<std::string, std::vector<std::size_t>> by_collection_;
    std::unordered_map<std::string, std::vector<std::size_t>> by_address_;
    UsdCents total_usd_cents_ = 0;
};

// Strict loaders: any schema violation or duplicate tx_id aborts the load
// with a CorpusError naming the offending line(s).
Corpus load_corpus(const std::filesystem::path& sales_path);
Corpus load_corpus(const std::filesystem::path& sales_path,
                   const std::filesystem::path& holders_path);
std::vector<HolderSnapshot> load_holders(const std::filesystem::path& path);

// JSONL output sorted by (block_time, tx_id); reruns diff clean.
void write_corpus(const Corpus& corpus, const std::filesystem::path& sales_path);
void write_holders(const std::vector<HolderSnapshot>& holders,
                   const std::filesystem::path& path);

}  // namespace nftaudit
