#ifndef ATTN_FETCH_HPP
#define ATTN_FETCH_HPP

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "attn/ingest.hpp"

namespace attn {

// Names of the per-day fields in an endpoint's JSON response. An empty name
// means the endpoint does not provide that field.
struct FieldMap {
    std::string date = "date";
    std::string count = "count";
    std::string total = "total";
    std::string freq = "freq";
};

struct EndpointConfig {
    std::string base_url;        // scheme://host[:port]
    std::string path_template;   // must contain {keyword} and {language}; {start}/{end} optional
    FieldMap field_map;
    double rate_limit = 1.0;     // requests per second
    std::filesystem::path cache_dir = ".attn-cache";
    // JSON pointer to the record array inside the response, after
    // {keyword}/{language} substitution. Empty: the response is the array.
    std::string records_pointer;
    std::chrono::seconds timeout{30};
};

void validate_endpoint(const EndpointConfig& cfg);
// Reads the endpoint schema; ATTN_CACHE_DIR, when set, replaces cache_dir.
EndpointConfig endpoint_from_json(const nlohmann::json& j);
nlohmann::json endpoint_to_json(const EndpointConfig& cfg);

struct DateRange {
    Date start;
    Date end;
};

struct HttpResponse {
    int status = 0; // 0: no response (connection failure)
    std::string body;
};

// Performs one GET of base_url + path.
using HttpTransport = std::function<HttpResponse(const std::string& base_url, const std::string& path)>;
HttpTransport make_http_transport(std::chrono::seconds timeout);

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds base_delay{1000}; // doubled after every failed attempt
};

// Spaces request start times at least 1/rate seconds apart across threads.
class RateLimiter {
public:
    explicit RateLimiter(double per_second);
    void acquire();

private:
    std::mutex mu_;
    std::chrono::steady_clock::duration interval_;
    std::chrono::steady_clock::time_point next_{};
};

// Client for a Storywrangler-style n-gram endpoint with a response cache keyed by
// (keyword, language, range). Safe to share between threads.
class RemoteSource {
public:
    explicit RemoteSource(EndpointConfig cfg, HttpTransport transport = {}, RetryPolicy retry = {});

    std::vector<DailyRecord> fetch(const std::string& keyword, const std::string& language, const DateRange& range);

    // Network requests issued so far, including retries.
    std::size_t network_requests() const { return requests_.load(); }
    const EndpointConfig& config() const { return cfg_; }

    std::string request_path(const std::string& keyword, const std::string& language, const DateRange& range) const;
    std::filesystem::path cache_path(const std::string& keyword, const std::string& language,
                                     const DateRange& range) const;

private:
    std::string download(const std::string& path);

    EndpointConfig cfg_;
    HttpTransport transport_;
    RetryPolicy retry_;
    RateLimiter limiter_;
    std::atomic<std::size_t> requests_{0};
};

// Maps a response body through the field map. Throws SchemaError.
std::vector<DailyRecord> map_response(std::string_view body, const EndpointConfig& cfg, const std::string& keyword,
                                      const std::string& language, const DateRange& range);

std::vector<DailyRecord> fetch_remote(const std::string& keyword, const std::string& language,
                                      const DateRange& range, const EndpointConfig& cfg);

// Fetches every key with at most `parallelism` concurrent workers. Output order follows `keys`.
std::vector<std::vector<DailyRecord>> fetch_many(RemoteSource& source, const std::vector<SeriesKey>& keys,
                                                 const DateRange& range, unsigned parallelism = 4);

std::string percent_encode(std::string_view s);

} // namespace attn

#endif
