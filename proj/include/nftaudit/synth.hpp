#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "nftaudit/corpus.hpp"

namespace nftaudit {

class SynthError : public std::runtime_error {
public:
    explicit SynthError(const std::string& what) : std::runtime_error(what) {}
};

// Deterministic across platforms: mt19937_64 is fully specified, and all
// value mappings (bounded ints, reals, normals) are our own.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    // Uniform in [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    // Uniform in [lo, hi).
    double uniform_real(double lo, double hi);

    double normal(double mean, double stddev);  // Box-Muller

    double lognormal(double mu, double sigma);

    // Index into cumulative weights (ascending, last == total).
    std::size_t weighted_index(const std::vector<double>& cumulative);

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

struct ScenarioConfig {
    std::uint64_t seed = 1;
    std::string collection_id = "SYNTH";
    int n_tokens = 50;
    int n_organic_addresses = 60;
    int n_wash_rings = 2;
    int ring_size = 3;  // 1 = pure self-trading
    int wash_trades_per_ring = 40;
    int organic_trades = 300;
    double price_lognormal_mu = 3.912;  // organic price model, USD
    double price_lognormal_sigma = 1.0;
    double wash_price_multiplier = 3.0;
    double wash_gap_min_s = 60.0;  // inter-trade gap inside a ring
    double wash_gap_max_s = 600.0;
    std::map<std::string, double> marketplace_mix = {
        {"TENSOR", 0.6}, {"MAGIC_EDEN", 0.3}, {"OTHER", 0.1}};
    UnixSeconds start_time = 1640995200;  // 2022-01-01T00:00:00Z
    double span_days = 180.0;
};

struct LabeledCorpus {
    Corpus corpus;
    std::set<std::string> wash_addresses;
    std::set<std::string> wash_tx_ids;
};

// Throws SynthError on an impossible config.
void validate_scenario(const ScenarioConfig& config);

LabeledCorpus generate(const ScenarioConfig& config);

ScenarioConfig scenario_from_json_file(const std::filesystem::path& path);
void write_scenario_json(const ScenarioConfig& config, const std::filesystem::path& path);

// Ground-truth sidecar: {"wash_addresses": [...], "wash_tx_ids": [...]}.
void write_ground_truth(const LabeledCorpus& labeled, const std::filesystem::path& path);
struct GroundTruth {
    std::set<std::string> wash_addresses;
    std::set<std::string> wash_tx_ids;
};
GroundTruth load_ground_truth(const std::filesystem::path& path);

}  // namespace nftaudit
