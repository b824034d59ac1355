#include "attn/fetch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <thread>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <fmt/format.h>

#include "attn/error.hpp"
#include "attn/fsio.hpp"

namespace attn {

using nlohmann::json;

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
    for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
}

std::string pointer_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '~') out += "~0";
        else if (c == '/') out += "~1";
        else out += c;
    }
    return out;
}

// Advisory exclusive lock on <cache entry>.lock, held for the scope.
class FileLock {
public:
    explicit FileLock(const std::filesystem::path& path) {
        fd_ = ::open(path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
        if (fd_ < 0) throw IoError("cannot open lock file '" + path.string() + "'");
        if (::flock(fd_, LOCK_EX) != 0) {
            ::close(fd_);
            throw IoError("cannot lock '" + path.string() + "'");
        }
    }
    ~FileLock() {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    int fd_ = -1;
};

std::optional<std::uint64_t> count_field(const json& rec, const std::string& name, std::size_t idx) {
    if (name.empty()) return std::nullopt;
    auto it = rec.find(name);
    if (it == rec.end()) throw SchemaError(fmt::format("response record {} has no field '{}'", idx, name));
    if (it->is_null()) return std::nullopt;
    if (it->is_number_unsigned()) return it->get<std::uint64_t>();
    if (it->is_number()) {
        const double v = it->get<double>();
        if (v >= 0 && std::floor(v) == v && v < 1.8e19) return static_cast<std::uint64_t>(v);
    }
    throw SchemaError(fmt::format("response record {} field '{}' is not a nonnegative integer", idx, name));
}

} // namespace

std::string percent_encode(std::string_view s) {
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') out += static_cast<char>(c);
        else out += fmt::format("%{:02X}", c);
    }
    return out;
}

void validate_endpoint(const EndpointConfig& cfg) {
    if (cfg.base_url.empty()) throw ContractError("endpoint base_url is empty");
    if (cfg.path_template.find("{keyword}") == std::string::npos ||
        cfg.path_template.find("{language}") == std::string::npos)
        throw ContractError("endpoint path_template must contain {keyword} and {language}");
    if (!(cfg.rate_limit > 0) || !std::isfinite(cfg.rate_limit)) throw ContractError("endpoint rate_limit must be > 0");
    if (cfg.field_map.date.empty()) throw ContractError("field_map.date must be set");
    if (cfg.field_map.freq.empty() && (cfg.field_map.count.empty() || cfg.field_map.total.empty()))
        throw ContractError("field_map needs freq, or both count and total");
}

EndpointConfig endpoint_from_json(const json& j) {
    EndpointConfig cfg;
    try {
        cfg.base_url = j.at("base_url").get<std::string>();
        cfg.path_template = j.at("path_template").get<std::string>();
        if (j.contains("field_map")) {
            const auto& fm = j["field_map"];
            auto opt = [&](const char* key, std::string& dst) {
                if (!fm.contains(key)) return;
                dst = fm[key].is_null() ? std::string{} : fm[key].get<std::string>();
            };
            opt("date", cfg.field_map.date);
            opt("count", cfg.field_map.count);
            opt("total", cfg.field_map.total);
            opt("freq", cfg.field_map.freq);
        }
        if (j.contains("rate_limit")) cfg.rate_limit = j["rate_limit"].get<double>();
        if (j.contains("cache_dir")) cfg.cache_dir = j["cache_dir"].get<std::string>();
        if (j.contains("records_pointer")) cfg.records_pointer = j["records_pointer"].get<std::string>();
        if (j.contains("timeout_seconds")) cfg.timeout = std::chrono::seconds(j["timeout_seconds"].get<int>());
    } catch (const json::exception& e) {
        throw ContractError(std::string("invalid endpoint config: ") + e.what());
    }
    if (const char* env = std::getenv("ATTN_CACHE_DIR"); env && *env) cfg.cache_dir = env;
    validate_endpoint(cfg);
    return cfg;
}

json endpoint_to_json(const EndpointConfig& cfg) {
    return json{{"base_url", cfg.base_url},
                {"path_template", cfg.path_template},
                {"field_map",
                 {{"date", cfg.field_map.date},
                  {"count", cfg.field_map.count},
                  {"total", cfg.field_map.total},
                  {"freq", cfg.field_map.freq}}},
                {"rate_limit", cfg.rate_limit},
                {"cache_dir", cfg.cache_dir.string()},
                {"records_pointer", cfg.records_pointer},
                {"timeout_seconds", cfg.timeout.count()}};
}

RateLimiter::RateLimiter(double per_second)
    : interval_(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(1.0 / per_second))) {}

void RateLimiter::acquire() {
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard lock(mu_);
        slot = std::max(std::chrono::steady_clock::now(), next_);
        next_ = slot + interval_;
    }
    std::this_thread::sleep_until(slot);
}

RemoteSource::RemoteSource(EndpointConfig cfg, HttpTransport transport, RetryPolicy retry)
    : cfg_(std::move(cfg)), transport_(std::move(transport)), retry_(retry), limiter_((validate_endpoint(cfg_), cfg_.rate_limit)) {
    if (!transport_) transport_ = make_http_transport(cfg_.timeout);
    if (retry_.attempts < 1) throw ContractError("retry attempts must be >= 1");
}

std::string RemoteSource::request_path(const std::string& keyword, const std::string& language,
                                       const DateRange& range) const {
    std::string path = cfg_.path_template;
    replace_all(path, "{keyword}", percent_encode(keyword));
    replace_all(path, "{language}", percent_encode(language));
    replace_all(path, "{start}", format_date(range.start));
    replace_all(path, "{end}", format_date(range.end));
    return path;
}

std::filesystem::path RemoteSource::cache_path(const std::string& keyword, const std::string& language,
                                               const DateRange& range) const {
    const std::string key = fmt::format("{}\x1f{}\x1f{}\x1f{}\x1f{}{}", keyword, language, format_date(range.start),
                                        format_date(range.end), cfg_.base_url, cfg_.path_template);
    return cfg_.cache_dir / (language + "-" + sha256_hex(key).substr(0, 32) + ".json");
}

std::string RemoteSource::download(const std::string& path) {
    auto delay = retry_.base_delay;
    HttpResponse last;
    for (int attempt = 1; attempt <= retry_.attempts; ++attempt) {
        limiter_.acquire();
        ++requests_;
        last = transport_(cfg_.base_url, path);
        if (last.status >= 200 && last.status < 300) return last.body;
        const bool retryable = last.status == 0 || last.status == 429 || last.status >= 500;
        if (!retryable || attempt == retry_.attempts) break;
        std::this_thread::sleep_for(delay);
        delay *= 2;
    }
    throw FetchError("GET " + cfg_.base_url + path + " failed", last.status);
}

std::vector<DailyRecord> RemoteSource::fetch(const std::string& keyword, const std::string& language,
                                             const DateRange& range) {
    if (std::chrono::sys_days{range.end} < std::chrono::sys_days{range.start})
        throw ContractError("fetch range start is after end");
    const auto cache_file = cache_path(keyword, language, range);
    std::error_code ec;
    std::filesystem::create_directories(cfg_.cache_dir, ec);
    if (ec) throw IoError("cannot create cache directory '" + cfg_.cache_dir.string() + "': " + ec.message());

    std::string body;
    {
        auto lock_file = cache_file;
        lock_file += ".lock";
        FileLock lock(lock_file);
        if (std::filesystem::exists(cache_file)) {
            body = read_text_file(cache_file);
        } else {
            body = download(request_path(keyword, language, range));
            // Validate before caching so a bad response is not persisted.
            auto records = map_response(body, cfg_, keyword, language, range);
            write_text_file(cache_file, body);
            return records;
        }
    }
    return map_response(body, cfg_, keyword, language, range);
}

std::vector<DailyRecord> map_response(std::string_view body, const EndpointConfig& cfg, const std::string& keyword,
                                      const std::string& language, const DateRange& range) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("response is not JSON: ") + e.what());
    }
    const json* arr = &doc;
    if (!cfg.records_pointer.empty()) {
        std::string ptr = cfg.records_pointer;
        replace_all(ptr, "{keyword}", pointer_escape(keyword));
        replace_all(ptr, "{language}", pointer_escape(language));
        try {
            arr = &doc.at(json::json_pointer(ptr));
        } catch (const json::exception&) {
            throw SchemaError("response has no element at records_pointer '" + ptr + "'");
        }
    }
    if (!arr->is_array()) throw SchemaError("response records are not an array");

    const auto& fm = cfg.field_map;
    std::vector<DailyRecord> out;
    for (std::size_t i = 0; i < arr->size(); ++i) {
        const auto& rec = (*arr)[i];
        if (!rec.is_object()) throw SchemaError(fmt::format("response record {} is not an object", i));
        auto date_it = rec.find(fm.date);
        if (date_it == rec.end()) throw SchemaError(fmt::format("response record {} has no field '{}'", i, fm.date));
        if (!date_it->is_string() || date_it->get_ref<const std::string&>().size() < 10)
            throw SchemaError(fmt::format("response record {} field '{}' is not a date", i, fm.date));
        DailyRecord r;
        try {
            r.date = parse_date(date_it->get_ref<const std::string&>().substr(0, 10));
        } catch (const ContractError& e) {
            throw SchemaError(fmt::format("response record {} field '{}': {}", i, fm.date, e.what()));
        }
        r.language = language;
        r.keyword = keyword;
        r.count = count_field(rec, fm.count, i);
        r.total = count_field(rec, fm.total, i);
        if (!fm.freq.empty()) {
            auto it = rec.find(fm.freq);
            if (it == rec.end()) throw SchemaError(fmt::format("response record {} has no field '{}'", i, fm.freq));
            if (!it->is_null()) {
                if (!it->is_number()) throw SchemaError(fmt::format("response record {} field '{}' is not a number", i, fm.freq));
                r.freq = it->get<double>();
            }
        }
        const auto day = std::chrono::sys_days{r.date};
        if (day < std::chrono::sys_days{range.start} || day > std::chrono::sys_days{range.end}) continue;
        if (auto msg = validate_record(r); !msg.empty())
            throw SchemaError(fmt::format("response record {} ({}): {}", i, format_date(r.date), msg));
        out.push_back(std::move(r));
    }
    std::stable_sort(out.begin(), out.end(), [](const DailyRecord& a, const DailyRecord& b) {
        return std::chrono::sys_days{a.date} < std::chrono::sys_days{b.date};
    });
    return out;
}

std::vector<DailyRecord> fetch_remote(const std::string& keyword, const std::string& language,
                                      const DateRange& range, const EndpointConfig& cfg) {
    RemoteSource source(cfg);
    return source.fetch(keyword, language, range);
}

std::vector<std::vector<DailyRecord>> fetch_many(RemoteSource& source, const std::vector<SeriesKey>& keys,
                                                 const DateRange& range, unsigned parallelism) {
    std::vector<std::vector<DailyRecord>> results(keys.size());
    std::vector<std::exception_ptr> errors(keys.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < keys.size(); i = next++) {
            try {
                results[i] = source.fetch(keys[i].keyword, keys[i].language, range);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(parallelism, static_cast<unsigned>(keys.size())));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

} // namespace attn
