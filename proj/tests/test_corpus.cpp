#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "nftaudit/corpus.hpp"

#include "test_util.hpp"

using namespace nftaudit;
using testutil::sale;

TEST_CASE("sale serialization is byte-stable with fixed field order") {
    const SaleRecord r = sale("tx01", 1640995200, "FROG", "mintA", "alice", "bob", 12345);
    CHECK(sale_to_jsonl(r) ==
          R"({"tx_id":"tx01","block_time":"2022-01-01T00:00:00Z","collection_id":"FROG",)"
          R"("token_id":"mintA","buyer":"alice","seller":"bob","price_lamports":6172500000,)"
          R"("price_usd":123.45,"marketplace":"TENSOR"})");
}

TEST_CASE("sale round-trips through jsonl") {
    const SaleRecord r = sale("tx02", 1650000000, "C", "t", "a", "a", 99, "MAGIC_EDEN");
    std::string error;
    const auto back = sale_from_jsonl(sale_to_jsonl(r), error);
    REQUIRE(back.has_value());
    CHECK(*back == r);
}

TEST_CASE("holder round-trips through jsonl") {
    HolderSnapshot h;
    h.collection_id = "FROG";
    h.holder = "whale";
    h.rank = 1;
    h.tokens_held = 152;
    h.supply = 5555;
    h.snapshot_time = 1660000000;
    std::string error;
    const auto back = holder_from_jsonl(holder_to_jsonl(h), error);
    REQUIRE(back.has_value());
    CHECK(*back == h);
}

TEST_CASE("sale parse reports the offending field") {
    std::string error;
    auto parse = [&](const std::string& line) { return sale_from_jsonl(line, error); };

    CHECK_FALSE(parse("not json"));
    CHECK(error == "malformed JSON");
    CHECK_FALSE(parse("[1,2]"));
    CHECK(error == "line is not a JSON object");

    const SaleRecord ok = sale("tx", 100, "C", "t", "a", "b", 100);
    std::string line = sale_to_jsonl(ok);

    CHECK_FALSE(parse(R"({"tx_id":"x"})"));
    CHECK(error.find("missing field") != std::string::npos);

    auto mutate = [&](const std::string& from, const std::string& to) {
        std::string s = line;
        const auto at = s.find(from);
        REQUIRE(at != std::string::npos);
        s.replace(at, from.size(), to);
        return s;
    };

    CHECK_FALSE(parse(mutate("1970-01-01T00:01:40Z", "1970-01-01 00:01:40Z")));
    CHECK(error.find("block_time") != std::string::npos);

    CHECK_FALSE(parse(mutate("\"price_usd\":1.00", "\"price_usd\":-1.00")));
    CHECK(error.find("price_usd") != std::string::npos);

    CHECK_FALSE(parse(mutate("\"price_usd\":1.00", "\"price_usd\":1.239")));
    CHECK(error.find("price_usd") != std::string::npos);

    CHECK_FALSE(parse(mutate("\"price_lamports\":50000000", "\"price_lamports\":\"50000000\"")));
    CHECK(error.find("price_lamports") != std::string::npos);

    CHECK_FALSE(parse(mutate("\"buyer\":\"a\"", "\"buyer\":\"\"")));
    CHECK(error == "buyer is empty");
}

TEST_CASE("validation catches bad field values") {
    SaleRecord r = sale("tx", 100, "C", "t", "a", "b", 100);
    CHECK_FALSE(validate_sale(r).has_value());
    r.price_lamports = -1;
    CHECK(validate_sale(r).has_value());

    HolderSnapshot h;
    h.collection_id = "C";
    h.holder = "x";
    h.rank = 1;
    h.tokens_held = 10;
    h.supply = 5;  // more held than exist
    h.snapshot_time = 0;
    CHECK(validate_holder(h) == "tokens_held exceeds supply");

    QueryWindow w{100, 100, 10};
    CHECK(validate_window(w).has_value());
    w.end_time = 200;
    CHECK_FALSE(validate_window(w).has_value());
}

TEST_CASE("corpus sorts records canonically and indexes by collection and address") {
    std::vector<SaleRecord> records = {
        sale("txb", 200, "C1", "t1", "a", "b", 100),
        sale("txa", 200, "C2", "t2", "c", "d", 100),
        sale("txc", 100, "C1", "t1", "a", "a", 100),  // self-trade
    };
    const Corpus corpus = Corpus::from_records(records);

    REQUIRE(corpus.records().size() == 3);
    CHECK(corpus.records()[0].tx_id == "txc");  // earliest time first
    CHECK(corpus.records()[1].tx_id == "txa");  // tx_id breaks the tie
    CHECK(corpus.records()[2].tx_id == "txb");

    CHECK(corpus.collection_ids() == std::vector<std::string>{"C1", "C2"});
    CHECK(corpus.collection_records("C1").size() == 2);
    CHECK(corpus.address_records("a").size() == 2);  // self-trade indexed once
    CHECK(corpus.address_records("nobody").empty());
    CHECK(corpus.total_usd_cents() == 300);
    CHECK_THROWS_AS((void)corpus.collection_records("missing"), CorpusError);
}

TEST_CASE("duplicate tx_id rejected at build") {
    std::vector<SaleRecord> records = {
        sale("tx1", 100, "C", "t", "a", "b", 100),
        sale("tx1", 200, "C", "t", "c", "d", 100),
    };
    CHECK_THROWS_WITH_AS(Corpus::from_records(records), doctest::Contains("duplicate tx_id"),
                         CorpusError);
}

TEST_CASE("write then load round-trips and is byte-stable across permutations") {
    const auto dir = testutil::fresh_dir("corpus_roundtrip");
    std::vector<SaleRecord> records;
    testutil::Lcg rng(21);
    for (int i = 0; i < 200; ++i) {
        records.push_back(sale("tx" + std::to_string(i), 1000 + rng.below(5000),
                               "C" + std::to_string(rng.below(4)), "t" + std::to_string(i % 17),
                               "a" + std::to_string(rng.below(30)),
                               "a" + std::to_string(rng.below(30)), 1 + rng.below(100000)));
    }

    const Corpus c1 = Corpus::from_records(records);
    std::reverse(records.begin(), records.end());
    const Corpus c2 = Corpus::from_records(records);

    write_corpus(c1, dir / "a.jsonl");
    write_corpus(c2, dir / "b.jsonl");

    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    CHECK(slurp(dir / "a.jsonl") == slurp(dir / "b.jsonl"));

    const Corpus loaded = load_corpus(dir / "a.jsonl");
    CHECK(loaded.records() == c1.records());
}

TEST_CASE("loader reports file, line, and reason") {
    const auto dir = testutil::fresh_dir("corpus_errors");
    {
        std::ofstream out(dir / "bad.jsonl");
        out << sale_to_jsonl(sale("tx1", 100, "C", "t", "a", "b", 100)) << '\n';
        out << "{\"broken\n";
    }
    CHECK_THROWS_WITH_AS(load_corpus(dir / "bad.jsonl"), doctest::Contains("bad.jsonl:2"),
                         CorpusError);

    {
        std::ofstream out(dir / "dup.jsonl");
        out << sale_to_jsonl(sale("tx9", 100, "C", "t", "a", "b", 100)) << '\n';
        out << sale_to_jsonl(sale("tx8", 150, "C", "t", "a", "b", 100)) << '\n';
        out << sale_to_jsonl(sale("tx9", 200, "C", "t", "c", "d", 100)) << '\n';
    }
    CHECK_THROWS_WITH_AS(load_corpus(dir / "dup.jsonl"), doctest::Contains("at lines 1 and 3"),
                         CorpusError);

    CHECK_THROWS_WITH_AS(load_corpus(dir / "missing.jsonl"), doctest::Contains("cannot open"),
                         CorpusError);
}

TEST_CASE("holders load alongside sales") {
    const auto dir = testutil::fresh_dir("corpus_holders");
    {
        std::ofstream out(dir / "sales.jsonl");
        out << sale_to_jsonl(sale("tx1", 100, "C", "t", "a", "b", 100)) << '\n';
    }
    {
        HolderSnapshot h;
        h.collection_id = "C";
        h.holder = "whale";
        h.rank = 1;
        h.tokens_held = 10;
        h.supply = 100;
        h.snapshot_time = 50;
        std::ofstream out(dir / "holders.jsonl");
        out << holder_to_jsonl(h) << '\n';
    }
    const Corpus corpus = load_corpus(dir / "sales.jsonl", dir / "holders.jsonl");
    REQUIRE(corpus.holders().size() == 1);
    CHECK(corpus.holders()[0].holder == "whale");
}

TEST_CASE("10k-line fixture matches a textual line-count oracle") {
    const auto dir = testutil::fresh_dir("corpus_10k");
    const auto path = dir / "big.jsonl";
    testutil::Lcg rng(1234);
    {
        std::ofstream out(path);
        for (int i = 0; i < 10000; ++i) {
            out << sale_to_jsonl(sale("tx" + std::to_string(i), rng.below(1000000),
                                      "C" + std::to_string(rng.below(37)),
                                      "t" + std::to_string(rng.below(400)),
                                      "a" + std::to_string(rng.below(900)),
                                      "a" + std::to_string(rng.below(900)),
                                      1 + rng.below(500000)))
                << '\n';
        }
    }

    // Oracle: per-collection counts recovered from the raw text, no JSON
    // machinery involved.
    std::map<std::string, std::size_t> expected;
    {
        std::ifstream in(path);
        std::string line;
        while (std::getline(in, line)) {
            const std::string needle = "\"collection_id\":\"";
            const auto at = line.find(needle);
            REQUIRE(at != std::string::npos);
            const auto start = at + needle.size();
            const auto end = line.find('"', start);
            ++expected[line.substr(start, end - start)];
        }
    }

    const Corpus corpus = load_corpus(path);
    CHECK(corpus.records().size() == 10000);
    REQUIRE(corpus.collection_ids().size() == expected.size());
    for (const auto& [id, count] : expected)
        CHECK(corpus.collection_records(id).size() == count);
}
