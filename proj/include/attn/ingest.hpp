#ifndef ATTN_INGEST_HPP
#define ATTN_INGEST_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "attn/week.hpp"

namespace attn {

// (language, keyword). Keywords are case-sensitive 1-grams.
struct SeriesKey {
    std::string language;
    std::string keyword;

    std::string label() const { return language + ":" + keyword; }
    auto operator<=>(const SeriesKey&) const = default;
};

// One day of n-gram usage for one (language, keyword).
struct DailyRecord {
    Date date;
    std::string language;
    std::string keyword;
    std::optional<std::uint64_t> count;
    std::optional<std::uint64_t> total;
    std::optional<double> freq;

    bool has_counts() const { return count.has_value() && total.has_value(); }
    // freq when given, otherwise count/total. nullopt when total is zero.
    std::optional<double> frequency() const;

    bool operator==(const DailyRecord&) const = default;
};

// Checks the record invariants; returns an error message, empty when valid.
std::string validate_record(const DailyRecord& r);

struct WeeklySeries {
    std::string language;
    std::string keyword;
    std::vector<IsoWeek> weeks;
    std::vector<double> values;
    std::vector<bool> missing;

    SeriesKey key() const { return {language, keyword}; }
    std::size_t size() const { return weeks.size(); }
    bool operator==(const WeeklySeries&) const = default;
};

struct Corpus {
    std::vector<IsoWeek> week_axis;
    std::vector<WeeklySeries> series;

    std::size_t rows() const { return series.size(); }
    std::size_t weeks() const { return week_axis.size(); }
    // Index of week on the axis, or nullopt.
    std::optional<std::size_t> week_index(const IsoWeek& w) const;
    bool operator==(const Corpus&) const = default;
};

enum class RecordFormat { csv, jsonl };

// Header `date,language,keyword,count,total,freq` (csv) or the same keys per
// JSON line (jsonl). Empty input yields an empty list. Throws ParseError.
std::vector<DailyRecord> parse_records(std::string_view text, RecordFormat format);
std::vector<DailyRecord> read_records_file(const std::filesystem::path& path);
RecordFormat format_for_path(const std::filesystem::path& path);
// One JSON object per line in the jsonl input schema.
std::string records_to_jsonl(const std::vector<DailyRecord>& records);

enum class WeekConvention { iso_monday };

// Aggregates one (language, keyword)'s daily records onto a contiguous ISO
// week axis. A week uses sum(count)/sum(total) when every record in it has
// counts, otherwise the mean of daily frequencies. Weeks with no records and
// weeks with zero total are missing.
WeeklySeries aggregate_weekly(const std::vector<DailyRecord>& records,
                              WeekConvention convention = WeekConvention::iso_monday);

// Groups records by key and aggregates each group; output sorted by key.
std::vector<WeeklySeries> aggregate_all(const std::vector<DailyRecord>& records);

// Re-indexes every series onto the sorted union of their week axes.
Corpus align_corpus(const std::vector<WeeklySeries>& series);

// Throws ContractError describing the first violated corpus invariant.
void validate_corpus(const Corpus& corpus);

std::string corpus_to_json(const Corpus& corpus);
Corpus corpus_from_json(std::string_view text);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

} // namespace attn

#endif
