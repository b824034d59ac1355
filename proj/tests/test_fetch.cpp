#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <thread>

#include <httplib.h>

#include "attn/error.hpp"
#include "attn/fetch.hpp"
#include "attn/fsio.hpp"

using namespace attn;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = ATTN_FIXTURE_DIR;

fs::path temp_dir(const char* name) {
    auto p = fs::temp_directory_path() / ("attn-test-fetch-" + std::string(name));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

EndpointConfig endpoint(const fs::path& cache) {
    EndpointConfig cfg;
    cfg.base_url = "http://127.0.0.1:1";
    cfg.path_template = "/api/ngrams/{keyword}?language={language}";
    cfg.field_map = {"time", "", "", "freq"};
    cfg.records_pointer = "/data/{keyword}";
    cfg.rate_limit = 1000;
    cfg.cache_dir = cache;
    return cfg;
}

const DateRange kRange{parse_date("2014-02-01"), parse_date("2014-03-01")};

struct CountingTransport {
    std::vector<int> statuses; // consumed front to back; the last one repeats
    std::string body;
    std::shared_ptr<std::atomic<int>> calls = std::make_shared<std::atomic<int>>(0);

    HttpTransport make() {
        return [this](const std::string&, const std::string&) {
            const int i = (*calls)++;
            const int status = statuses[std::min<std::size_t>(static_cast<std::size_t>(i), statuses.size() - 1)];
            return HttpResponse{status, status == 200 ? body : std::string("oops")};
        };
    }
};

} // namespace

TEST_CASE("endpoint validation") {
    auto cfg = endpoint("cache");
    CHECK_NOTHROW(validate_endpoint(cfg));
    cfg.path_template = "/api/{keyword}";
    CHECK_THROWS_AS(validate_endpoint(cfg), ContractError);
    cfg = endpoint("cache");
    cfg.rate_limit = 0;
    CHECK_THROWS_AS(validate_endpoint(cfg), ContractError);
}

TEST_CASE("endpoint json and cache override") {
    const auto cfg = endpoint("somewhere");
    const auto j = endpoint_to_json(cfg);
    unsetenv("ATTN_CACHE_DIR");
    CHECK(endpoint_from_json(j).cache_dir == fs::path("somewhere"));
    setenv("ATTN_CACHE_DIR", "/tmp/elsewhere", 1);
    CHECK(endpoint_from_json(j).cache_dir == fs::path("/tmp/elsewhere"));
    unsetenv("ATTN_CACHE_DIR");
    CHECK(endpoint_from_json(j).records_pointer == cfg.records_pointer);
}

TEST_CASE("map_response") {
    const auto body = read_text_file(kFixtures / "response_3days.json");
    const auto cfg = endpoint("cache");
    SUBCASE("three days in date order") {
        const auto r = map_response(body, cfg, "Ukraine", "en", kRange);
        REQUIRE(r.size() == 3);
        CHECK(format_date(r[0].date) == "2014-02-17");
        CHECK(format_date(r[1].date) == "2014-02-18");
        CHECK(format_date(r[2].date) == "2014-02-19");
        CHECK(*r[1].freq == 4.0e-5);
        CHECK(r[0].language == "en");
    }
    SUBCASE("range filter") {
        const auto r = map_response(body, cfg, "Ukraine", "en", {parse_date("2014-02-18"), parse_date("2014-02-18")});
        CHECK(r.size() == 1);
    }
    SUBCASE("absent field") {
        auto bad = cfg;
        bad.field_map.freq = "frequency";
        try {
            map_response(body, bad, "Ukraine", "en", kRange);
            FAIL("expected a schema error");
        } catch (const SchemaError& e) {
            CHECK(std::string(e.what()).find("'frequency'") != std::string::npos);
        }
    }
    SUBCASE("bad pointer") {
        CHECK_THROWS_AS(map_response(body, cfg, "Ukraina", "en", kRange), SchemaError);
    }
}

TEST_CASE("cache and retries with an injected transport") {
    const auto dir = temp_dir("inject");
    const auto body = read_text_file(kFixtures / "response_3days.json");
    const RetryPolicy fast{3, std::chrono::milliseconds(1)};

    SUBCASE("warm cache performs no requests") {
        CountingTransport t{{200}, body};
        RemoteSource cold(endpoint(dir), t.make(), fast);
        const auto first = cold.fetch("Ukraine", "en", kRange);
        CHECK(cold.network_requests() == 1);
        RemoteSource warm(endpoint(dir), t.make(), fast);
        const auto second = warm.fetch("Ukraine", "en", kRange);
        CHECK(warm.network_requests() == 0);
        CHECK(second == first);
        CHECK(*t.calls == 1);
    }
    SUBCASE("transient failures are retried") {
        CountingTransport t{{503, 429, 200}, body};
        RemoteSource src(endpoint(dir), t.make(), fast);
        CHECK(src.fetch("Ukraine", "en", kRange).size() == 3);
        CHECK(src.network_requests() == 3);
    }
    SUBCASE("persistent failure carries the status") {
        CountingTransport t{{500}, body};
        RemoteSource src(endpoint(dir), t.make(), fast);
        try {
            src.fetch("Ukraine", "de", kRange);
            FAIL("expected a fetch error");
        } catch (const FetchError& e) {
            CHECK(e.status() == 500);
        }
        CHECK(src.network_requests() == 3);
        CHECK(!fs::exists(src.cache_path("Ukraine", "de", kRange)));
    }
    SUBCASE("client errors are not retried") {
        CountingTransport t{{404}, body};
        RemoteSource src(endpoint(dir), t.make(), fast);
        CHECK_THROWS_AS(src.fetch("Ukraine", "fr", kRange), FetchError);
        CHECK(src.network_requests() == 1);
    }
    SUBCASE("cache keys separate ranges and languages") {
        RemoteSource src(endpoint(dir), CountingTransport{{200}, body}.make(), fast);
        CHECK(src.cache_path("Ukraine", "en", kRange) != src.cache_path("Ukraine", "de", kRange));
        CHECK(src.cache_path("Ukraine", "en", kRange) !=
              src.cache_path("Ukraine", "en", {kRange.start, parse_date("2014-03-02")}));
    }
}

TEST_CASE("path template encoding") {
    RemoteSource src(endpoint("cache"), [](const std::string&, const std::string&) { return HttpResponse{}; });
    CHECK(src.request_path("Україна", "uk", kRange) ==
          "/api/ngrams/%D0%A3%D0%BA%D1%80%D0%B0%D1%97%D0%BD%D0%B0?language=uk");
    CHECK(percent_encode("a b/c") == "a%20b%2Fc");
}

TEST_CASE("rate limiter spaces requests") {
    RateLimiter limiter(50);
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < 6; ++i) limiter.acquire();
    CHECK(std::chrono::steady_clock::now() - start >= std::chrono::milliseconds(95));
}

TEST_CASE("live http server") {
    const auto dir = temp_dir("live");
    const auto body = read_text_file(kFixtures / "response_3days.json");
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Get(R"(/api/ngrams/([^/]+))", [&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        if (req.matches[1] != "Ukraine" || req.get_param_value("language").empty()) {
            res.status = 404;
            return;
        }
        res.set_content(body, "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    auto cfg = endpoint(dir);
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
    RemoteSource src(cfg, {}, {3, std::chrono::milliseconds(1)});
    const std::vector<SeriesKey> keys{{"en", "Ukraine"}, {"de", "Ukraine"}, {"fr", "Ukraine"}};
    const auto batches = fetch_many(src, keys, kRange, 2);
    REQUIRE(batches.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        REQUIRE(batches[i].size() == 3);
        CHECK(batches[i][0].language == keys[i].language);
    }
    CHECK(hits == 3);
    CHECK(fetch_remote("Ukraine", "en", kRange, cfg) == batches[0]);
    CHECK(hits == 3);
    CHECK_THROWS_AS(src.fetch("Ukraina", "pl", kRange), FetchError);

    server.stop();
    th.join();
}

TEST_CASE("unreachable host is an io error") {
    const auto dir = temp_dir("down");
    auto cfg = endpoint(dir);
    cfg.timeout = std::chrono::seconds(1);
    RemoteSource src(cfg, {}, {2, std::chrono::milliseconds(1)});
    try {
        src.fetch("Ukraine", "en", kRange);
        FAIL("expected a fetch error");
    } catch (const FetchError& e) {
        CHECK(e.status() == 0);
    }
}
