#include "nftaudit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>

#include <json.hpp>

namespace nftaudit {

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<std::int64_t>(next());  // full 64-bit span
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t v;
    do {
        v = next();
    } while (v >= limit);
    return lo + static_cast<std::int64_t>(v % range);
}

double Rng::uniform_real(double lo, double hi) {
    const double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

double Rng::normal(double mean, double stddev) {
    if (has_spare_) {
        has_spare_ = false;
        return mean + stddev * spare_;
    }
    double u1 = uniform_real(0.0, 1.0);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = uniform_real(0.0, 1.0);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return mean + stddev * radius * std::cos(angle);
}

double Rng::lognormal(double mu, double sigma) { return std::exp(normal(mu, sigma)); }

std::size_t Rng::weighted_index(const std::vector<double>& cumulative) {
    const double total = cumulative.back();
    const double x = uniform_real(0.0, total);
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
    if (it == cumulative.end()) --it;
    return static_cast<std::size_t>(it - cumulative.begin());
}

void validate_scenario(const ScenarioConfig& c) {
    if (c.collection_id.empty()) throw SynthError("collection_id is empty");
    if (c.n_tokens < 0 || c.n_organic_addresses < 0 || c.n_wash_rings < 0 ||
        c.wash_trades_per_ring < 0 || c.organic_trades < 0)
        throw SynthError("counts must be >= 0");
    if (c.ring_size < 1) throw SynthError("ring_size must be >= 1");
    if (c.wash_price_multiplier <= 0.0) throw SynthError("wash_price_multiplier must be > 0");
    if (c.wash_gap_min_s <= 0.0 || c.wash_gap_max_s < c.wash_gap_min_s)
        throw SynthError("wash gap bounds must satisfy 0 < min <= max");
    if (c.span_days <= 0.0) throw SynthError("span_days must be > 0");

    const bool any_trades =
        c.organic_trades > 0 || (c.n_wash_rings > 0 && c.wash_trades_per_ring > 0);
    if (any_trades && c.n_tokens < 1) throw SynthError("no tokens to trade");
    if (c.organic_trades > 0 && c.n_organic_addresses < 2)
        throw SynthError("organic trades need at least 2 organic addresses");
    if (c.n_wash_rings > 0 && c.n_wash_rings > c.n_tokens)
        throw SynthError("more wash rings than tokens: each ring needs its own token");

    if (any_trades) {
        if (c.marketplace_mix.empty()) throw SynthError("marketplace_mix is empty");
        double sum = 0.0;
        for (const auto& [tag, w] : c.marketplace_mix) {
            if (tag.empty()) throw SynthError("marketplace tag is empty");
            if (w < 0.0) throw SynthError("marketplace weight is negative");
            sum += w;
        }
        if (std::fabs(sum - 1.0) > 1e-9) throw SynthError("marketplace weights must sum to 1");
    }
}

namespace {

constexpr double kSolUsd = 20.0;  // fixed synthetic SOL/USD rate for lamports

std::string seq_name(const char* prefix, int i, int width) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, i);
    return buf;
}

SaleRecord make_sale(int seq, UnixSeconds t, const std::string& collection,
                     const std::string& token, const std::string& buyer,
                     const std::string& seller, double price_usd, const std::string& marketplace) {
    SaleRecord r;
    r.tx_id = seq_name("tx", seq, 8);
    r.block_time = t;
    r.collection_id = collection;
    r.token_id = token;
    r.buyer = buyer;
    r.seller = seller;
    const double usd = std::max(0.01, price_usd);
    r.price_usd_cents = static_cast<UsdCents>(std::llround(usd * 100.0));
    r.price_lamports = std::llround(usd / kSolUsd * 1e9);
    r.marketplace = marketplace;
    return r;
}

}  // namespace

LabeledCorpus generate(const ScenarioConfig& c) {
    validate_scenario(c);
    Rng rng(c.seed);

    std::vector<std::string> marketplaces;
    std::vector<double> mix_cumulative;
    double acc = 0.0;
    for (const auto& [tag, w] : c.marketplace_mix) {
        marketplaces.push_back(tag);
        acc += w;
        mix_cumulative.push_back(acc);
    }

    const double span_s = c.span_days * 86400.0;
    const double organic_mean_usd =
        std::exp(c.price_lognormal_mu + 0.5 * c.price_lognormal_sigma * c.price_lognormal_sigma);

    std::vector<SaleRecord> records;
    LabeledCorpus labeled;
    int seq = 0;

    for (int i = 0; i < c.organic_trades; ++i) {
        const std::string token =
            seq_name("tok", static_cast<int>(rng.uniform_int(0, c.n_tokens - 1)), 4);
        const auto seller_idx = rng.uniform_int(0, c.n_organic_addresses - 1);
        auto buyer_idx = rng.uniform_int(0, c.n_organic_addresses - 2);
        if (buyer_idx >= seller_idx) ++buyer_idx;  // distinct buyer
        const UnixSeconds t = c.start_time + static_cast<UnixSeconds>(rng.uniform_real(0, span_s));
        records.push_back(make_sale(
            seq++, t, c.collection_id, token, seq_name("org", static_cast<int>(buyer_idx), 3),
            seq_name("org", static_cast<int>(seller_idx), 3),
            rng.lognormal(c.price_lognormal_mu, c.price_lognormal_sigma),
            marketplaces[rng.weighted_index(mix_cumulative)]));
    }

    for (int ring = 0; ring < c.n_wash_rings; ++ring) {
        std::vector<std::string> members;
        for (int m = 0; m < c.ring_size; ++m)
            members.push_back(seq_name(("wash_r" + std::to_string(ring) + "_").c_str(), m, 2));
        for (const auto& m : members) labeled.wash_addresses.insert(m);

        // Each ring churns one dedicated token in a tight burst of trades.
        const std::string token = seq_name("tok", ring, 4);
        const double burst = static_cast<double>(c.wash_trades_per_ring) * c.wash_gap_max_s;
        const double latest_start = std::max(1.0, span_s - burst);
        double t = static_cast<double>(c.start_time) + rng.uniform_real(0, latest_start);
        for (int j = 0; j < c.wash_trades_per_ring; ++j) {
            t += rng.uniform_real(c.wash_gap_min_s, c.wash_gap_max_s);
            const std::string& seller = members[static_cast<std::size_t>(j) % members.size()];
            const std::string& buyer =
                members[static_cast<std::size_t>(j + 1) % members.size()];
            const double price =
                c.wash_price_multiplier * organic_mean_usd * rng.uniform_real(0.95, 1.05);
            SaleRecord r = make_sale(seq++, static_cast<UnixSeconds>(t), c.collection_id, token,
                                     buyer, seller, price,
                                     marketplaces[rng.weighted_index(mix_cumulative)]);
            labeled.wash_tx_ids.insert(r.tx_id);
            records.push_back(std::move(r));
        }
    }

    labeled.corpus = Corpus::from_records(std::move(records));
    return labeled;
}

namespace {

using nlohmann::json;

template <typename T>
void read_if_present(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace

ScenarioConfig scenario_from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SynthError("cannot open scenario file " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw SynthError("scenario file is not a JSON object: " + path.string());

    ScenarioConfig c;
    read_if_present(j, "seed", c.seed);
    read_if_present(j, "collection_id", c.collection_id);
    read_if_present(j, "n_tokens", c.n_tokens);
    read_if_present(j, "n_organic_addresses", c.n_organic_addresses);
    read_if_present(j, "n_wash_rings", c.n_wash_rings);
    read_if_present(j, "ring_size", c.ring_size);
    read_if_present(j, "wash_trades_per_ring", c.wash_trades_per_ring);
    read_if_present(j, "organic_trades", c.organic_trades);
    read_if_present(j, "price_lognormal_mu", c.price_lognormal_mu);
    read_if_present(j, "price_lognormal_sigma", c.price_lognormal_sigma);
    read_if_present(j, "wash_price_multiplier", c.wash_price_multiplier);
    read_if_present(j, "wash_gap_min_s", c.wash_gap_min_s);
    read_if_present(j, "wash_gap_max_s", c.wash_gap_max_s);
    read_if_present(j, "span_days", c.span_days);
    if (auto it = j.find("start_time"); it != j.end()) {
        auto ts = parse_iso8601_utc(it->get<std::string>());
        if (!ts) throw SynthError("start_time is not an ISO-8601 UTC timestamp");
        c.start_time = *ts;
    }
    if (auto it = j.find("marketplace_mix"); it != j.end())
        c.marketplace_mix = it->get<std::map<std::string, double>>();

    validate_scenario(c);
    return c;
}

void write_scenario_json(const ScenarioConfig& c, const std::filesystem::path& path) {
    json j;
    j["seed"] = c.seed;
    j["collection_id"] = c.collection_id;
    j["n_tokens"] = c.n_tokens;
    j["n_organic_addresses"] = c.n_organic_addresses;
    j["n_wash_rings"] = c.n_wash_rings;
    j["ring_size"] = c.ring_size;
    j["wash_trades_per_ring"] = c.wash_trades_per_ring;
    j["organic_trades"] = c.organic_trades;
    j["price_lognormal_mu"] = c.price_lognormal_mu;
    j["price_lognormal_sigma"] = c.price_lognormal_sigma;
    j["wash_price_multiplier"] = c.wash_price_multiplier;
    j["wash_gap_min_s"] = c.wash_gap_min_s;
    j["wash_gap_max_s"] = c.wash_gap_max_s;
    j["span_days"] = c.span_days;
    j["start_time"] = format_iso8601_utc(c.start_time);
    j["marketplace_mix"] = c.marketplace_mix;
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw SynthError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

void write_ground_truth(const LabeledCorpus& labeled, const std::filesystem::path& path) {
    json j;
    j["wash_addresses"] = labeled.wash_addresses;
    j["wash_tx_ids"] = labeled.wash_tx_ids;
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw SynthError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SynthError("cannot open ground truth file " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw SynthError("ground truth file is not a JSON object: " + path.string());
    GroundTruth gt;
    gt.wash_addresses = j.at("wash_addresses").get<std::set<std::string>>();
    gt.wash_tx_ids = j.at("wash_tx_ids").get<std::set<std::string>>();
    return gt;
}

}  // namespace nftaudit
