#include "nftaudit/corpus.hpp"

#include <algorithm>
#include <fstream>

namespace nftaudit {

namespace {

std::ifstream open_for_read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open " + path.string());
    return in;
}

}  // namespace

Corpus Corpus::from_records(std::vector<SaleRecord> records,
                            std::vector<HolderSnapshot> holders) {
    Corpus c;
    c.records_ = std::move(records);
    c.holders_ = std::move(holders);
    std::sort(c.records_.begin(), c.records_.end(),
              [](const SaleRecord& a, const SaleRecord& b) { return sale_before(a, b); });

    std::unordered_map<std::string, std::size_t> seen_tx;
    seen_tx.reserve(c.records_.size());
    for (std::size_t i = 0; i < c.records_.size(); ++i) {
        const SaleRecord& r = c.records_[i];
        if (auto reason = validate_sale(r))
            throw CorpusError("invalid record tx_id='" + r.tx_id + "': " + *reason);
        if (!seen_tx.emplace(r.tx_id, i).second)
            throw CorpusError("duplicate tx_id '" + r.tx_id + "'");
        c.by_collection_[r.collection_id].push_back(i);
        c.by_address_[r.buyer].push_back(i);
        if (r.seller != r.buyer) c.by_address_[r.seller].push_back(i);
        c.total_usd_cents_ += r.price_usd_cents;
    }
    c.collection_ids_.reserve(c.by_collection_.size());
    for (const auto& [id, _] : c.by_collection_) c.collection_ids_.push_back(id);
    std::sort(c.collection_ids_.begin(), c.collection_ids_.end());
    return c;
}

bool Corpus::has_collection(const std::string& collection_id) const {
    return by_collection_.count(collection_id) > 0;
}

const std::vector<std::size_t>& Corpus::collection_records(
    const std::string& collection_id) const {
    auto it = by_collection_.find(collection_id);
    if (it == by_collection_.end())
        throw CorpusError("unknown collection '" + collection_id + "'");
    return it->second;
}

const std::vector<std::size_t>& Corpus::address_records(const std::string& address) const {
    static const std::vector<std::size_t> empty;
    auto it = by_address_.find(address);
    return it == by_address_.end() ? empty : it->second;
}

Corpus load_corpus(const std::filesystem::path& sales_path) {
    std::ifstream in = open_for_read(sales_path);
    std::vector<SaleRecord> records;
    std::unordered_map<std::string, std::size_t> tx_line;  // tx_id -> first line no.
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::string error;
        auto rec = sale_from_jsonl(line, error);
        if (!rec)
            throw CorpusError(sales_path.string() + ":" + std::to_string(line_no) + ": " + error);
        auto [it, inserted] = tx_line.emplace(rec->tx_id, line_no);
        if (!inserted)
            throw CorpusError(sales_path.string() + ": duplicate tx_id '" + rec->tx_id +
                              "' at lines " + std::to_string(it->second) + " and " +
                              std::to_string(line_no));
        records.push_back(std::move(*rec));
    }
    return Corpus::from_records(std::move(records));
}

std::vector<HolderSnapshot> load_holders(const std::filesystem::path& path) {
    std::ifstream in = open_for_read(path);
    std::vector<HolderSnapshot> holders;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::string error;
        auto h = holder_from_jsonl(line, error);
        if (!h) throw CorpusError(path.string() + ":" + std::to_string(line_no) + ": " + error);
        holders.push_back(std::move(*h));
    }
    return holders;
}

Corpus load_corpus(const std::filesystem::path& sales_path,
                   const std::filesystem::path& holders_path) {
    Corpus c = load_corpus(sales_path);
    auto holders = load_holders(holders_path);
    std::vector<SaleRecord> records = c.records();
    return Corpus::from_records(std::move(records), std::move(holders));
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& sales_path) {
    std::ofstream out(sales_path, std::ios::trunc);
    if (!out) throw CorpusError("cannot open " + sales_path.string() + " for writing");
    for (const SaleRecord& r : corpus.records()) out << sale_to_jsonl(r) << '\n';
    if (!out) throw CorpusError("write failed: " + sales_path.string());
}

void write_holders(const std::vector<HolderSnapshot>& holders,
                   const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw CorpusError("cannot open " + path.string() + " for writing");
    std::vector<HolderSnapshot> sorted = holders;
    std::sort(sorted.begin(), sorted.end(), [](const HolderSnapshot& a, const HolderSnapshot& b) {
        return std::tie(a.collection_id, a.rank, a.holder) <
               std::tie(b.collection_id, b.rank, b.holder);
    });
    for (const HolderSnapshot& h : sorted) out << holder_to_jsonl(h) << '\n';
    if (!out) throw CorpusError("write failed: " + path.string());
}

}  // namespace nftaudit
