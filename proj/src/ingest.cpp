#include "nftaudit/ingest.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <random>
#include <thread>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

namespace nftaudit {

std::int64_t IngestStats::rejected_total() const {
    std::int64_t total = 0;
    for (const auto& [reason, count] : rejected) total += count;
    return total;
}

std::vector<QueryWindow> split_window(const QueryWindow& window, std::int64_t stride_s) {
    if (auto reason = validate_window(window)) throw IngestError("bad window: " + *reason);
    if (stride_s < 1) throw IngestError("window stride must be >= 1 second");

    std::vector<QueryWindow> parts;
    for (UnixSeconds t = window.start_time; t < window.end_time; t += stride_s) {
        QueryWindow w = window;
        w.start_time = t;
        w.end_time = std::min<UnixSeconds>(t + stride_s, window.end_time);
        parts.push_back(w);
    }
    return parts;
}

namespace {

std::string window_label(const QueryWindow& w) {
    return "[" + format_iso8601_utc(w.start_time) + ", " + format_iso8601_utc(w.end_time) + ")";
}

// Shared min-interval limiter; sleeping under the lock is deliberate, the
// whole point is to serialize request starts.
class RateLimiter {
public:
    explicit RateLimiter(double per_sec) {
        if (per_sec > 0.0)
            interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                std::chrono::duration<double>(1.0 / per_sec));
    }

    void acquire() {
        if (interval_.count() == 0) return;
        std::lock_guard<std::mutex> lock(mu_);
        const auto now = std::chrono::steady_clock::now();
        if (next_ > now) std::this_thread::sleep_until(next_);
        next_ = std::max(next_, now) + interval_;
    }

private:
    std::chrono::steady_clock::duration interval_{0};
    std::mutex mu_;
    std::chrono::steady_clock::time_point next_{};
};

double jitter_factor() {
    thread_local std::mt19937_64 gen(
        std::random_device{}() ^
        std::hash<std::thread::id>{}(std::this_thread::get_id()));
    return std::uniform_real_distribution<double>(0.5, 1.5)(gen);
}

struct WindowResult {
    std::vector<SaleRecord> records;
    IngestStats stats;
};

class Fetcher {
public:
    Fetcher(const IngestConfig& config, const std::vector<std::string>& collection_filter)
        : config_(config), limiter_(config.rate_limit_per_sec) {
        if (!collection_filter.empty()) {
            for (const auto& c : collection_filter) {
                if (!collections_param_.empty()) collections_param_ += ',';
                collections_param_ += c;
            }
        }
    }

    WindowResult fetch_window(const QueryWindow& window) {
        httplib::Client client(config_.base_url);
        client.set_connection_timeout(10);
        client.set_read_timeout(30);

        httplib::Headers headers;
        if (!config_.api_key.empty()) headers.emplace("x-api-key", config_.api_key);

        WindowResult out;
        for (int page = 1;; ++page) {
            httplib::Params params{
                {"start", std::to_string(window.start_time)},
                {"end", std::to_string(window.end_time)},
                {"page", std::to_string(page)},
                {"page_size", std::to_string(window.page_size)},
            };
            if (!collections_param_.empty()) params.emplace("collections", collections_param_);

            const std::string body = get_with_retries(client, params, headers, window, out.stats);
            if (!collect_page(body, window, out)) break;  // has_more == false
        }
        std::sort(out.records.begin(), out.records.end(), sale_before);
        return out;
    }

private:
    std::string get_with_retries(httplib::Client& client, const httplib::Params& params,
                                 const httplib::Headers& headers, const QueryWindow& window,
                                 IngestStats& stats) {
        std::string last_error;
        for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
            if (attempt > 0) {
                const double delay =
                    config_.backoff_initial_s * std::ldexp(1.0, attempt - 1) * jitter_factor();
                std::this_thread::sleep_for(std::chrono::duration<double>(delay));
                ++stats.retries;
            }
            limiter_.acquire();
            auto res = client.Get("/v1/sales", params, headers);
            ++stats.requests;
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 200) return res->body;
            if (res->status == 429 || res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            throw IngestError("window " + window_label(window) + ": HTTP " +
                              std::to_string(res->status));
        }
        throw IngestError("window " + window_label(window) + ": retries exhausted after " +
                          std::to_string(config_.max_retries + 1) + " attempts (" + last_error +
                          ")");
    }

    // Returns has_more. A malformed envelope is fatal (wrong server), a
    // malformed record is a counted rejection.
    bool collect_page(const std::string& body, const QueryWindow& window, WindowResult& out) {
        nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("sales") ||
            !j["sales"].is_array() || !j.contains("has_more") || !j["has_more"].is_boolean())
            throw IngestError("window " + window_label(window) +
                              ": response is not a {sales, has_more} object");

        for (const auto& element : j["sales"]) {
            std::string error;
            auto sale = sale_from_jsonl(element.dump(), error);
            if (!sale) {
                ++out.stats.rejected[error];
                continue;
            }
            if (sale->block_time < window.start_time || sale->block_time >= window.end_time) {
                ++out.stats.rejected["block_time outside query window"];
                continue;
            }
            out.records.push_back(std::move(*sale));
        }
        return j["has_more"].get<bool>();
    }

    const IngestConfig& config_;
    RateLimiter limiter_;
    std::string collections_param_;
};

}  // namespace

IngestResult ingest_api(const IngestConfig& config, const QueryWindow& window,
                        const std::vector<std::string>& collection_filter) {
    if (config.page_size < 1) throw IngestError("page_size must be >= 1");
    if (config.max_retries < 0) throw IngestError("max_retries must be >= 0");

    QueryWindow w = window;
    w.page_size = config.page_size;
    const auto parts = split_window(w, config.window_stride_s);

    Fetcher fetcher(config, collection_filter);
    std::vector<WindowResult> results(parts.size());

    const int jobs = std::max(1, std::min<int>(config.jobs, static_cast<int>(parts.size())));
    if (jobs == 1) {
        for (std::size_t i = 0; i < parts.size(); ++i) results[i] = fetcher.fetch_window(parts[i]);
    } else {
        std::atomic<std::size_t> next{0};
        std::mutex error_mu;
        std::string first_error;
        auto worker = [&] {
            for (std::size_t i = next.fetch_add(1); i < parts.size(); i = next.fetch_add(1)) {
                try {
                    results[i] = fetcher.fetch_window(parts[i]);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (first_error.empty()) first_error = e.what();
                }
            }
        };
        std::vector<std::thread> threads;
        for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
        if (!first_error.empty()) throw IngestError(first_error);
    }

    // Single-writer assembly in window order so the duplicate-wins record is
    // deterministic regardless of job count.
    IngestResult out;
    std::unordered_set<std::string> seen_tx;
    for (auto& part : results) {
        out.stats.requests += part.stats.requests;
        out.stats.retries += part.stats.retries;
        for (const auto& [reason, count] : part.stats.rejected)
            out.stats.rejected[reason] += count;
        for (auto& r : part.records) {
            if (!seen_tx.insert(r.tx_id).second) {
                ++out.stats.rejected["duplicate tx_id"];
                continue;
            }
            out.records.push_back(std::move(r));
        }
    }
    std::sort(out.records.begin(), out.records.end(), sale_before);
    out.stats.accepted = static_cast<std::int64_t>(out.records.size());
    return out;
}

}  // namespace nftaudit
