#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>

#include "nftaudit/records.hpp"

namespace testutil {

// Scratch directory under the test working dir, wiped on entry so reruns
// start clean.
inline std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::current_path() / ("tmp_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline nftaudit::SaleRecord sale(std::string tx, nftaudit::UnixSeconds t, std::string collection,
                                 std::string token, std::string buyer, std::string seller,
                                 nftaudit::UsdCents cents, std::string marketplace = "TENSOR") {
    nftaudit::SaleRecord r;
    r.tx_id = std::move(tx);
    r.block_time = t;
    r.collection_id = std::move(collection);
    r.token_id = std::move(token);
    r.buyer = std::move(buyer);
    r.seller = std::move(seller);
    r.price_lamports = cents * 500000;  // 1 SOL = $20 in fixtures
    r.price_usd_cents = cents;
    r.marketplace = std::move(marketplace);
    return r;
}

// Tiny deterministic generator for fixture data; keeps tests independent of
// library RNG choices.
class Lcg {
public:
    explicit Lcg(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next() {
        state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
        return state_ >> 16;
    }

    std::int64_t below(std::int64_t n) { return static_cast<std::int64_t>(next() % n); }

    double real01() { return static_cast<double>(next() % (1ULL << 52)) / (1ULL << 52); }

private:
    std::uint64_t state_;
};

}  // namespace testutil
