#include <doctest.h>

#include <atomic>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "nftaudit/ingest.hpp"

#include "test_util.hpp"

using namespace nftaudit;
using testutil::sale;

namespace {

// In-process sales API implementing the /v1/sales contract the client
// expects. Behavior knobs cover the failure modes under test.
class MockApi {
public:
    std::vector<SaleRecord> dataset;
    std::atomic<int> fail_first{0};      // N leading requests get `fail_status`
    int fail_status = 429;
    std::atomic<int> requests_seen{0};
    std::string expected_api_key;        // when set, mismatches get 401
    std::vector<SaleRecord> extra;       // appended to page 1 unfiltered

    MockApi() {
        server_.Get("/v1/sales", [this](const httplib::Request& req, httplib::Response& res) {
            ++requests_seen;
            if (!expected_api_key.empty() &&
                req.get_header_value("x-api-key") != expected_api_key) {
                res.status = 401;
                return;
            }
            if (fail_first.fetch_sub(1) > 0) {
                res.status = fail_status;
                return;
            }

            const auto start = std::stoll(req.get_param_value("start"));
            const auto end = std::stoll(req.get_param_value("end"));
            const auto page = std::stoll(req.get_param_value("page"));
            const auto page_size = std::stoll(req.get_param_value("page_size"));

            std::set<std::string> only;
            if (req.has_param("collections")) {
                std::string raw = req.get_param_value("collections");
                std::size_t pos = 0;
                while (pos <= raw.size()) {
                    const auto comma = raw.find(',', pos);
                    only.insert(raw.substr(pos, comma - pos));
                    if (comma == std::string::npos) break;
                    pos = comma + 1;
                }
            }

            std::vector<const SaleRecord*> in_window;
            for (const auto& r : dataset) {
                if (r.block_time < start || r.block_time >= end) continue;
                if (!only.empty() && !only.count(r.collection_id)) continue;
                in_window.push_back(&r);
            }

            nlohmann::json sales = nlohmann::json::array();
            const auto lo = static_cast<std::size_t>((page - 1) * page_size);
            const auto hi = std::min(in_window.size(), lo + static_cast<std::size_t>(page_size));
            for (std::size_t i = lo; i < std::min(in_window.size(), hi); ++i)
                sales.push_back(nlohmann::json::parse(sale_to_jsonl(*in_window[i])));
            if (page == 1)
                for (const auto& r : extra)
                    sales.push_back(nlohmann::json::parse(sale_to_jsonl(r)));

            nlohmann::json body{{"sales", std::move(sales)},
                                {"has_more", hi < in_window.size()}};
            res.set_content(body.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~MockApi() {
        server_.stop();
        thread_.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

IngestConfig fast_config(const MockApi& api) {
    IngestConfig c;
    c.base_url = api.base_url();
    c.backoff_initial_s = 0.01;  // keep retry tests quick
    return c;
}

std::vector<SaleRecord> make_dataset(int n, UnixSeconds start, UnixSeconds span) {
    testutil::Lcg rng(5150);
    std::vector<SaleRecord> out;
    for (int i = 0; i < n; ++i) {
        out.push_back(sale("tx" + std::to_string(i), start + rng.below(span),
                           "C" + std::to_string(rng.below(3)), "t" + std::to_string(i % 11),
                           "a" + std::to_string(rng.below(20)),
                           "a" + std::to_string(rng.below(20)), 1 + rng.below(90000)));
    }
    return out;
}

}  // namespace

TEST_CASE("split_window partitions end-exclusively") {
    const auto parts = split_window({0, 100, 50}, 30);
    REQUIRE(parts.size() == 4);
    CHECK(parts[0].start_time == 0);
    CHECK(parts[0].end_time == 30);
    CHECK(parts[3].start_time == 90);
    CHECK(parts[3].end_time == 100);  // truncated tail
    for (const auto& p : parts) CHECK(p.page_size == 50);

    CHECK(split_window({0, 100, 50}, 1000).size() == 1);
    CHECK_THROWS_AS(split_window({100, 100, 50}, 10), IngestError);
    CHECK_THROWS_AS(split_window({0, 100, 50}, 0), IngestError);
}

TEST_CASE("empty remote window yields an empty corpus and success") {
    MockApi api;
    api.dataset = make_dataset(50, 1000000, 86400);

    const auto result = ingest_api(fast_config(api), {0, 86400, 100});
    CHECK(result.records.empty());
    CHECK(result.stats.accepted == 0);
    CHECK(result.stats.rejected_total() == 0);
    CHECK(result.stats.requests == 1);
}

TEST_CASE("window partition and pagination do not change the record multiset") {
    MockApi api;
    const UnixSeconds day = 86400;
    api.dataset = make_dataset(400, 0, 10 * day);
    const QueryWindow whole{0, 10 * day, 1000};

    IngestConfig one_shot = fast_config(api);
    one_shot.window_stride_s = 10 * day;
    const auto baseline = ingest_api(one_shot, whole);
    CHECK(baseline.stats.accepted == 400);

    IngestConfig daily = fast_config(api);
    daily.window_stride_s = day;
    const auto split = ingest_api(daily, whole);

    IngestConfig paged = fast_config(api);
    paged.window_stride_s = day;
    paged.page_size = 7;
    paged.jobs = 4;
    const auto paged_parallel = ingest_api(paged, whole);

    // Canonical order makes multiset equality plain vector equality.
    CHECK(split.records == baseline.records);
    CHECK(paged_parallel.records == baseline.records);
    CHECK(paged_parallel.stats.requests > split.stats.requests);
}

TEST_CASE("collection filter narrows the pull") {
    MockApi api;
    api.dataset = make_dataset(200, 0, 86400);

    const auto result = ingest_api(fast_config(api), {0, 86400, 1000}, {"C0", "C2"});
    CHECK(result.stats.accepted > 0);
    for (const auto& r : result.records) CHECK(r.collection_id != "C1");
}

TEST_CASE("malformed and out-of-window records are rejected, not fatal") {
    MockApi api;
    api.dataset = make_dataset(20, 1000, 1000);

    SaleRecord negative = sale("txneg", 1500, "C0", "t", "a", "b", 100);
    negative.price_usd_cents = -100;  // serializes as price_usd:-1.00
    SaleRecord stale = sale("txstale", 999999, "C0", "t", "a", "b", 100);
    SaleRecord dup = api.dataset[0];
    api.extra = {negative, stale, dup};

    const auto result = ingest_api(fast_config(api), {1000, 2000, 1000});
    CHECK(result.stats.accepted == 20);
    CHECK(result.stats.rejected_total() == 3);
    CHECK(result.stats.rejected.at("block_time outside query window") == 1);
    CHECK(result.stats.rejected.at("duplicate tx_id") == 1);

    std::int64_t price_rejects = 0;
    for (const auto& [reason, count] : result.stats.rejected)
        if (reason.find("price_usd") != std::string::npos) price_rejects += count;
    CHECK(price_rejects == 1);
}

TEST_CASE("429 storms are retried with backoff until the server recovers") {
    MockApi api;
    api.dataset = make_dataset(30, 0, 1000);
    api.fail_first = 2;
    api.fail_status = 429;

    const auto result = ingest_api(fast_config(api), {0, 1000, 1000});
    CHECK(result.stats.accepted == 30);
    CHECK(result.stats.retries == 2);
    CHECK(result.stats.requests == 3);
}

TEST_CASE("transient 5xx also retries") {
    MockApi api;
    api.dataset = make_dataset(5, 0, 1000);
    api.fail_first = 1;
    api.fail_status = 503;

    const auto result = ingest_api(fast_config(api), {0, 1000, 1000});
    CHECK(result.stats.accepted == 5);
    CHECK(result.stats.retries == 1);
}

TEST_CASE("retries exhausted names the failing window") {
    MockApi api;
    api.fail_first = 1000;
    api.fail_status = 500;

    IngestConfig config = fast_config(api);
    config.max_retries = 2;
    CHECK_THROWS_WITH_AS(ingest_api(config, {0, 1000, 1000}),
                         doctest::Contains("retries exhausted"), IngestError);
    CHECK(api.requests_seen == 3);  // initial attempt + 2 retries
}

TEST_CASE("non-transient HTTP errors fail immediately") {
    MockApi api;
    api.fail_first = 1000;
    api.fail_status = 403;

    CHECK_THROWS_WITH_AS(ingest_api(fast_config(api), {0, 1000, 1000}),
                         doctest::Contains("HTTP 403"), IngestError);
    CHECK(api.requests_seen == 1);
}

TEST_CASE("api key from config reaches the server as x-api-key") {
    MockApi api;
    api.dataset = make_dataset(3, 0, 1000);
    api.expected_api_key = "sekrit";

    IngestConfig config = fast_config(api);
    config.max_retries = 0;
    CHECK_THROWS_AS(ingest_api(config, {0, 1000, 1000}), IngestError);  // 401 without key

    config.api_key = "sekrit";
    const auto result = ingest_api(config, {0, 1000, 1000});
    CHECK(result.stats.accepted == 3);
}
