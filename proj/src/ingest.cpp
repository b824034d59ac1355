#include "attn/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "attn/csv.hpp"
#include "attn/error.hpp"
#include "attn/fsio.hpp"

namespace attn {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kFields[] = {"date", "language", "keyword", "count", "total", "freq"};
constexpr int kCorpusVersion = 1;

bool is_language_code(std::string_view s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-'; });
}

std::optional<std::uint64_t> parse_count(std::string_view s, std::size_t line, const char* field) {
    if (s.empty()) return std::nullopt;
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw ParseError(line, field, "expected a nonnegative integer, got '" + std::string(s) + "'");
    return v;
}

std::optional<double> parse_freq(std::string_view s, std::size_t line) {
    if (s.empty()) return std::nullopt;
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v))
        throw ParseError(line, "freq", "expected a finite number, got '" + std::string(s) + "'");
    return v;
}

Date parse_record_date(std::string_view s, std::size_t line) {
    try {
        return parse_date(s);
    } catch (const ContractError& e) {
        throw ParseError(line, "date", e.what());
    }
}

void check_record(const DailyRecord& r, std::size_t line) {
    if (auto msg = validate_record(r); !msg.empty()) {
        std::string field = "freq";
        if (msg.find("language") != std::string::npos) field = "language";
        else if (msg.find("keyword") != std::string::npos) field = "keyword";
        else if (msg.find("count") != std::string::npos) field = "count";
        throw ParseError(line, field, msg);
    }
}

std::vector<DailyRecord> parse_csv_records(std::string_view text) {
    auto rows = csv::parse(text);
    std::vector<DailyRecord> out;
    if (rows.empty()) return out;

    const auto& header = rows.front();
    std::vector<int> column(std::size(kFields), -1);
    for (std::size_t c = 0; c < header.fields.size(); ++c) {
        auto it = std::find(std::begin(kFields), std::end(kFields), header.fields[c]);
        if (it == std::end(kFields))
            throw ParseError(header.line, header.fields[c], "unknown column in header");
        column[static_cast<std::size_t>(it - std::begin(kFields))] = static_cast<int>(c);
    }
    for (std::size_t f = 0; f < 3; ++f)
        if (column[f] < 0) throw ParseError(header.line, std::string(kFields[f]), "required column missing from header");

    out.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != header.fields.size())
            throw ParseError(row.line, "<row>",
                             fmt::format("expected {} fields, got {}", header.fields.size(), row.fields.size()));
        auto get = [&](std::size_t f) -> std::string_view {
            return column[f] < 0 ? std::string_view{} : std::string_view(row.fields[static_cast<std::size_t>(column[f])]);
        };
        DailyRecord rec;
        rec.date = parse_record_date(get(0), row.line);
        rec.language = std::string(get(1));
        rec.keyword = std::string(get(2));
        rec.count = parse_count(get(3), row.line, "count");
        rec.total = parse_count(get(4), row.line, "total");
        rec.freq = parse_freq(get(5), row.line);
        check_record(rec, row.line);
        out.push_back(std::move(rec));
    }
    return out;
}

std::optional<std::uint64_t> json_count(const json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer() || (it->is_number_integer() && !it->is_number_unsigned() && it->get<std::int64_t>() < 0))
        throw ParseError(line, key, "expected a nonnegative integer");
    return it->get<std::uint64_t>();
}

std::vector<DailyRecord> parse_jsonl_records(std::string_view text) {
    std::vector<DailyRecord> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        ++line_no;
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) {
            if (end == text.size()) break;
            continue;
        }
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(line_no, "<line>", std::string("invalid JSON: ") + e.what());
        }
        if (!obj.is_object()) throw ParseError(line_no, "<line>", "expected a JSON object");
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (std::find(std::begin(kFields), std::end(kFields), it.key()) == std::end(kFields))
                throw ParseError(line_no, it.key(), "unknown key");
        auto str = [&](const char* key) {
            auto it = obj.find(key);
            if (it == obj.end() || !it->is_string()) throw ParseError(line_no, key, "expected a string");
            return it->get<std::string>();
        };
        DailyRecord rec;
        rec.date = parse_record_date(str("date"), line_no);
        rec.language = str("language");
        rec.keyword = str("keyword");
        rec.count = json_count(obj, "count", line_no);
        rec.total = json_count(obj, "total", line_no);
        if (auto it = obj.find("freq"); it != obj.end() && !it->is_null()) {
            if (!it->is_number()) throw ParseError(line_no, "freq", "expected a number");
            rec.freq = it->get<double>();
        }
        check_record(rec, line_no);
        out.push_back(std::move(rec));
        if (end == text.size()) break;
    }
    return out;
}

struct WeekAccumulator {
    std::map<std::chrono::sys_days, std::vector<const DailyRecord*>> days;
};

// Daily estimate used by the mean-of-frequencies path.
std::optional<double> daily_frequency(const std::vector<const DailyRecord*>& recs) {
    const bool counted = std::all_of(recs.begin(), recs.end(), [](auto* r) { return r->has_counts(); });
    if (counted) {
        std::uint64_t c = 0, t = 0;
        for (auto* r : recs) {
            c += *r->count;
            t += *r->total;
        }
        if (t == 0) return std::nullopt;
        return static_cast<double>(c) / static_cast<double>(t);
    }
    double sum = 0;
    int n = 0;
    for (auto* r : recs) {
        if (auto f = r->frequency()) {
            sum += *f;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

std::optional<double> weekly_value(const WeekAccumulator& acc) {
    bool counted = true;
    for (const auto& [day, recs] : acc.days)
        for (auto* r : recs) counted = counted && r->has_counts();

    if (counted) {
        std::uint64_t c = 0, t = 0;
        for (const auto& [day, recs] : acc.days)
            for (auto* r : recs) {
                c += *r->count;
                t += *r->total;
            }
        if (t == 0) return std::nullopt;
        return static_cast<double>(c) / static_cast<double>(t);
    }
    double sum = 0;
    int n = 0;
    for (const auto& [day, recs] : acc.days) {
        if (auto f = daily_frequency(recs)) {
            sum += *f;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

void check_series(const WeeklySeries& s) {
    const auto key = s.key().label();
    if (s.values.size() != s.weeks.size() || s.missing.size() != s.weeks.size())
        throw ContractError("series " + key + ": weeks, values and missing differ in length");
    for (std::size_t i = 1; i < s.weeks.size(); ++i)
        if (!(s.weeks[i - 1] < s.weeks[i]))
            throw ContractError("series " + key + ": weeks not strictly increasing at " + s.weeks[i].label());
    for (std::size_t i = 0; i < s.values.size(); ++i)
        if (!s.missing[i] && !(std::isfinite(s.values[i]) && s.values[i] >= 0))
            throw ContractError("series " + key + ": invalid value at " + s.weeks[i].label());
}

} // namespace

std::optional<double> DailyRecord::frequency() const {
    if (freq) return freq;
    if (has_counts() && *total > 0) return static_cast<double>(*count) / static_cast<double>(*total);
    return std::nullopt;
}

std::string validate_record(const DailyRecord& r) {
    if (!is_language_code(r.language)) return "language must be a nonempty lowercase code";
    if (r.keyword.empty()) return "keyword must be nonempty";
    if (r.count.has_value() != r.total.has_value() && !r.freq) return "count and total must be given together";
    if (!r.has_counts() && !r.freq) return "record needs count and total, or freq";
    if (r.has_counts() && *r.count > *r.total) return "count exceeds total";
    if (r.freq) {
        if (!std::isfinite(*r.freq) || *r.freq < 0 || *r.freq > 1) return "freq must lie in [0, 1]";
        if (r.has_counts() && *r.total > 0) {
            const double derived = static_cast<double>(*r.count) / static_cast<double>(*r.total);
            if (std::abs(*r.freq - derived) > 1e-9) return "freq disagrees with count/total";
        }
    }
    return {};
}

std::optional<std::size_t> Corpus::week_index(const IsoWeek& w) const {
    auto it = std::lower_bound(week_axis.begin(), week_axis.end(), w);
    if (it == week_axis.end() || *it != w) return std::nullopt;
    return static_cast<std::size_t>(it - week_axis.begin());
}

std::vector<DailyRecord> parse_records(std::string_view text, RecordFormat format) {
    return format == RecordFormat::csv ? parse_csv_records(text) : parse_jsonl_records(text);
}

RecordFormat format_for_path(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".csv") return RecordFormat::csv;
    if (ext == ".jsonl" || ext == ".ndjson") return RecordFormat::jsonl;
    throw ContractError("cannot infer record format from '" + path.string() + "' (use .csv or .jsonl)");
}

std::vector<DailyRecord> read_records_file(const std::filesystem::path& path) {
    return parse_records(read_text_file(path), format_for_path(path));
}

std::string records_to_jsonl(const std::vector<DailyRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        ordered_json j;
        j["date"] = format_date(r.date);
        j["language"] = r.language;
        j["keyword"] = r.keyword;
        j["count"] = r.count ? ordered_json(*r.count) : ordered_json(nullptr);
        j["total"] = r.total ? ordered_json(*r.total) : ordered_json(nullptr);
        j["freq"] = r.freq ? ordered_json(*r.freq) : ordered_json(nullptr);
        out += j.dump();
        out += '\n';
    }
    return out;
}

WeeklySeries aggregate_weekly(const std::vector<DailyRecord>& records, WeekConvention) {
    if (records.empty()) throw ContractError("aggregate_weekly: no records");
    const SeriesKey key{records.front().language, records.front().keyword};

    std::map<IsoWeek, WeekAccumulator> by_week;
    for (const auto& r : records) {
        if (r.language != key.language || r.keyword != key.keyword)
            throw ContractError("aggregate_weekly: mixed keys " + key.label() + " and " + r.language + ":" + r.keyword);
        by_week[IsoWeek::containing(r.date)].days[std::chrono::sys_days{r.date}].push_back(&r);
    }

    WeeklySeries s{key.language, key.keyword, {}, {}, {}};
    const IsoWeek first = by_week.begin()->first;
    const IsoWeek last = by_week.rbegin()->first;
    const long span = last.weeks_since(first) + 1;
    s.weeks.reserve(static_cast<std::size_t>(span));
    for (IsoWeek w = first;; w = w.next()) {
        std::optional<double> v;
        if (auto it = by_week.find(w); it != by_week.end()) v = weekly_value(it->second);
        s.weeks.push_back(w);
        s.values.push_back(v.value_or(0.0));
        s.missing.push_back(!v.has_value());
        if (w == last) break;
    }
    return s;
}

std::vector<WeeklySeries> aggregate_all(const std::vector<DailyRecord>& records) {
    std::map<SeriesKey, std::vector<DailyRecord>> groups;
    for (const auto& r : records) groups[{r.language, r.keyword}].push_back(r);
    std::vector<WeeklySeries> out;
    out.reserve(groups.size());
    for (const auto& [key, recs] : groups) out.push_back(aggregate_weekly(recs));
    return out;
}

Corpus align_corpus(const std::vector<WeeklySeries>& series) {
    if (series.empty()) throw ContractError("align_corpus: no series");
    std::set<SeriesKey> seen;
    std::set<IsoWeek> axis;
    for (const auto& s : series) {
        check_series(s);
        if (!seen.insert(s.key()).second) throw ContractError("align_corpus: duplicate key " + s.key().label());
        axis.insert(s.weeks.begin(), s.weeks.end());
    }

    Corpus c;
    c.week_axis.assign(axis.begin(), axis.end());
    c.series.reserve(series.size());
    for (const auto& s : series) {
        WeeklySeries out{s.language, s.keyword, c.week_axis, std::vector<double>(c.week_axis.size(), 0.0),
                         std::vector<bool>(c.week_axis.size(), true)};
        for (std::size_t i = 0; i < s.weeks.size(); ++i) {
            const auto idx = *c.week_index(s.weeks[i]);
            out.values[idx] = s.missing[i] ? 0.0 : s.values[i];
            out.missing[idx] = s.missing[i];
        }
        c.series.push_back(std::move(out));
    }
    return c;
}

void validate_corpus(const Corpus& corpus) {
    for (std::size_t i = 1; i < corpus.week_axis.size(); ++i)
        if (!(corpus.week_axis[i - 1] < corpus.week_axis[i]))
            throw ContractError("corpus week axis not strictly increasing at " + corpus.week_axis[i].label());
    std::set<SeriesKey> seen;
    for (const auto& s : corpus.series) {
        check_series(s);
        if (s.weeks != corpus.week_axis) throw ContractError("series " + s.key().label() + " is not on the corpus axis");
        if (!seen.insert(s.key()).second) throw ContractError("duplicate series key " + s.key().label());
    }
}

std::string corpus_to_json(const Corpus& corpus) {
    ordered_json j;
    j["version"] = kCorpusVersion;
    auto& axis = j["week_axis"] = ordered_json::array();
    for (const auto& w : corpus.week_axis) axis.push_back(w.label());
    auto& series = j["series"] = ordered_json::array();
    for (const auto& s : corpus.series) {
        ordered_json row;
        row["language"] = s.language;
        row["keyword"] = s.keyword;
        auto& values = row["values"] = ordered_json::array();
        auto& missing = row["missing"] = ordered_json::array();
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            values.push_back(s.missing[i] ? ordered_json(nullptr) : ordered_json(s.values[i]));
            missing.push_back(static_cast<bool>(s.missing[i]));
        }
        series.push_back(std::move(row));
    }
    return j.dump() + "\n";
}

Corpus corpus_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("corpus file is not valid JSON (truncated?): ") + e.what());
    }
    if (!j.is_object() || !j.contains("version")) throw FormatError("corpus file has no version field");
    if (j["version"] != kCorpusVersion)
        throw FormatError("unsupported corpus version " + j["version"].dump() + " (expected 1)");

    Corpus c;
    try {
        for (const auto& w : j.at("week_axis")) c.week_axis.push_back(IsoWeek::parse(w.get<std::string>()));
        for (const auto& row : j.at("series")) {
            WeeklySeries s;
            s.language = row.at("language").get<std::string>();
            s.keyword = row.at("keyword").get<std::string>();
            s.weeks = c.week_axis;
            const auto& values = row.at("values");
            const auto& missing = row.at("missing");
            if (values.size() != c.week_axis.size() || missing.size() != c.week_axis.size())
                throw FormatError("series " + s.key().label() + " length does not match week_axis");
            for (std::size_t i = 0; i < values.size(); ++i) {
                const bool m = missing[i].get<bool>();
                if (m != values[i].is_null())
                    throw FormatError("series " + s.key().label() + ": value/missing disagree at index " +
                                      std::to_string(i));
                s.missing.push_back(m);
                s.values.push_back(m ? 0.0 : values[i].get<double>());
            }
            c.series.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed corpus file: ") + e.what());
    } catch (const ContractError& e) {
        throw FormatError(std::string("malformed corpus file: ") + e.what());
    }
    try {
        validate_corpus(c);
    } catch (const ContractError& e) {
        throw FormatError(std::string("invalid corpus file: ") + e.what());
    }
    return c;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    validate_corpus(corpus);
    write_text_file(path, corpus_to_json(corpus));
}

Corpus load_corpus(const std::filesystem::path& path) {
    return corpus_from_json(read_text_file(path));
}

} // namespace attn
