#ifndef ATTN_EXPRESSION_HPP
#define ATTN_EXPRESSION_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "attn/ingest.hpp"

namespace attn {

using Cell = std::optional<double>;

// Dense row-major grid of nullable reals.
class CellMatrix {
public:
    CellMatrix() = default;
    CellMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    Cell& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Cell& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::vector<Cell> row(std::size_t r) const;

    bool operator==(const CellMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Cell> data_;
};

enum class ExpressionMode { within, share };
std::string to_string(ExpressionMode mode);
ExpressionMode parse_expression_mode(std::string_view text);

struct ExcludedRow {
    SeriesKey key;
    std::string reason;
    bool operator==(const ExcludedRow&) const = default;
};

// Languages x weeks. magnitude is log10 f; deviation is the log10 ratio of
// observed to expected attention, in decades.
struct ExpressionMatrix {
    std::vector<SeriesKey> row_keys;
    std::vector<IsoWeek> week_axis;
    CellMatrix magnitude;
    CellMatrix deviation;
    ExpressionMode mode = ExpressionMode::within;
    int smooth_window = 1;
    // Rows dropped because they had no positive observation.
    std::vector<ExcludedRow> excluded;

    bool operator==(const ExpressionMatrix&) const = default;
};

// Per-row expected frequency (mean of non-missing f, zeros included) and the
// derived expected share of the cross-language pool.
struct Expectation {
    std::vector<SeriesKey> row_keys;
    std::vector<double> expected;
    std::vector<double> share;
};

// Expectation over the rows that have at least one positive observation.
Expectation compute_expectation(const Corpus& corpus);

ExpressionMatrix within_language_deviation(const Corpus& corpus);

// Deviation of each row's weekly share of the pooled frequency from its
// expected share. `baseline` overrides the expectation computed from `corpus`;
// its row keys must match the corpus rows that survive exclusion.
ExpressionMatrix market_share_deviation(const Corpus& corpus, const Expectation* baseline = nullptr);

// Backward-looking moving mean of deviation over `window` weeks.
ExpressionMatrix smooth(const ExpressionMatrix& matrix, int window);

// log10 f per cell, deviation left null. Rows without positive values are excluded.
ExpressionMatrix log_frequency_matrix(const Corpus& corpus);

// Per-row z-score of log10 f (population sigma). Null where f is missing or zero.
CellMatrix zscore_log(const Corpus& corpus);

struct KeywordTotal {
    std::string keyword;
    double total = 0;
    bool operator==(const KeywordTotal&) const = default;
};

// language -> keywords by descending summed frequency, ties by keyword.
std::map<std::string, std::vector<KeywordTotal>> keyword_totals(const Corpus& corpus);

// Export. which: magnitude or deviation.
enum class MatrixPart { magnitude, deviation };
std::string expression_to_csv(const ExpressionMatrix& m, MatrixPart which);
std::string expression_to_json(const ExpressionMatrix& m);
ExpressionMatrix expression_from_json(std::string_view text);

// Row vectors for clustering: the chosen part with null cells replaced by `fill`.
std::vector<std::vector<double>> dense_rows(const ExpressionMatrix& m, MatrixPart which, double fill);

// Sum with Neumaier compensation, in the given order.
double compensated_sum(const std::vector<double>& values);

} // namespace attn

#endif
