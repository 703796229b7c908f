#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "nftaudit/records.hpp"

namespace nftaudit {

class IngestError : public std::runtime_error {
public:
    explicit IngestError(const std::string& what) : std::runtime_error(what) {}
};

struct IngestConfig {
    std::string base_url = "http://localhost:8080";
    int page_size = 1000;
    double rate_limit_per_sec = 0.0;  // requests/s shared across workers; 0 = uncapped
    int max_retries = 5;              // retries after the first attempt
    double backoff_initial_s = 1.0;   // doubled per retry, jittered ±50%
    std::int64_t window_stride_s = 86400;  // sliding sub-window size
    int jobs = 1;                          // concurrent sub-window fetches
    std::string api_key;                   // sent as x-api-key when nonempty
};

struct IngestStats {
    std::int64_t accepted = 0;
    std::map<std::string, std::int64_t> rejected;  // reason -> count
    std::int64_t requests = 0;
    std::int64_t retries = 0;

    std::int64_t rejected_total() const;
};

struct IngestResult {
    std::vector<SaleRecord> records;  // canonical (block_time, tx_id) order
    IngestStats stats;
};

// End-exclusive partition of [start,end) into stride-sized sub-windows; the
// last one is truncated. Throws IngestError on an invalid window or stride.
std::vector<QueryWindow> split_window(const QueryWindow& window, std::int64_t stride_s);

// Pulls every sale in [window.start_time, window.end_time) from the sales API
// (GET /v1/sales, paginated), optionally narrowed to `collection_filter`.
// Transient failures (transport errors, 429, 5xx) are retried with bounded
// exponential backoff; other HTTP errors and exhausted retries raise
// IngestError naming the failing sub-window. Malformed records, records
// outside the window, and duplicate tx_ids are rejected per record and
// counted, never fatal.
IngestResult ingest_api(const IngestConfig& config, const QueryWindow& window,
                        const std::vector<std::string>& collection_filter = {});

}  // namespace nftaudit
