#include "attn/expression.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "attn/csv.hpp"
#include "attn/error.hpp"

namespace attn {

using ordered_json = nlohmann::ordered_json;

namespace {

bool has_positive(const WeeklySeries& s) {
    for (std::size_t t = 0; t < s.values.size(); ++t)
        if (!s.missing[t] && s.values[t] > 0) return true;
    return false;
}

std::string exclusion_reason(const WeeklySeries& s) {
    const bool any = std::find(s.missing.begin(), s.missing.end(), false) != s.missing.end();
    return any ? "all observed values are zero" : "all values missing";
}

// Rows with at least one positive observation; the rest are reported.
std::vector<std::size_t> usable_rows(const Corpus& corpus, std::vector<ExcludedRow>* excluded) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < corpus.series.size(); ++r) {
        if (has_positive(corpus.series[r])) rows.push_back(r);
        else if (excluded) excluded->push_back({corpus.series[r].key(), exclusion_reason(corpus.series[r])});
    }
    return rows;
}

double mean_observed(const WeeklySeries& s) {
    std::vector<double> vals;
    for (std::size_t t = 0; t < s.values.size(); ++t)
        if (!s.missing[t]) vals.push_back(s.values[t]);
    return compensated_sum(vals) / static_cast<double>(vals.size());
}

ExpressionMatrix with_magnitude(const Corpus& corpus, const std::vector<std::size_t>& rows, ExpressionMode mode) {
    ExpressionMatrix m;
    m.week_axis = corpus.week_axis;
    m.mode = mode;
    m.magnitude = CellMatrix(rows.size(), corpus.weeks());
    m.deviation = CellMatrix(rows.size(), corpus.weeks());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& s = corpus.series[rows[i]];
        m.row_keys.push_back(s.key());
        for (std::size_t t = 0; t < s.values.size(); ++t)
            if (!s.missing[t] && s.values[t] > 0) m.magnitude(i, t) = std::log10(s.values[t]);
    }
    return m;
}

std::string format_cell(const Cell& c) {
    return c ? fmt::format("{}", *c) : std::string{};
}

ordered_json cells_to_json(const std::vector<Cell>& row) {
    auto arr = ordered_json::array();
    for (const auto& c : row) arr.push_back(c ? ordered_json(*c) : ordered_json(nullptr));
    return arr;
}

} // namespace

std::vector<Cell> CellMatrix::row(std::size_t r) const {
    return {data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
            data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_)};
}

std::string to_string(ExpressionMode mode) {
    return mode == ExpressionMode::within ? "within" : "share";
}

ExpressionMode parse_expression_mode(std::string_view text) {
    if (text == "within") return ExpressionMode::within;
    if (text == "share") return ExpressionMode::share;
    throw ContractError("unknown expression mode '" + std::string(text) + "' (within|share)");
}

double compensated_sum(const std::vector<double>& values) {
    double sum = 0, comp = 0;
    for (double v : values) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) comp += (sum - t) + v;
        else comp += (v - t) + sum;
        sum = t;
    }
    return sum + comp;
}

Expectation compute_expectation(const Corpus& corpus) {
    Expectation e;
    for (auto r : usable_rows(corpus, nullptr)) {
        e.row_keys.push_back(corpus.series[r].key());
        e.expected.push_back(mean_observed(corpus.series[r]));
    }
    const double pool = compensated_sum(e.expected);
    for (double x : e.expected) e.share.push_back(x / pool);
    return e;
}

ExpressionMatrix within_language_deviation(const Corpus& corpus) {
    std::vector<ExcludedRow> excluded;
    const auto rows = usable_rows(corpus, &excluded);
    auto m = with_magnitude(corpus, rows, ExpressionMode::within);
    m.excluded = std::move(excluded);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& s = corpus.series[rows[i]];
        const double expected = mean_observed(s);
        for (std::size_t t = 0; t < s.values.size(); ++t)
            if (!s.missing[t] && s.values[t] > 0) m.deviation(i, t) = std::log10(s.values[t] / expected);
    }
    return m;
}

ExpressionMatrix market_share_deviation(const Corpus& corpus, const Expectation* baseline) {
    std::vector<ExcludedRow> excluded;
    const auto rows = usable_rows(corpus, &excluded);
    if (rows.size() < 2) throw ContractError("market share deviation needs at least two rows with positive values");

    auto m = with_magnitude(corpus, rows, ExpressionMode::share);
    m.excluded = std::move(excluded);

    Expectation own;
    if (!baseline) {
        own = compute_expectation(corpus);
        baseline = &own;
    }
    if (baseline->row_keys != m.row_keys) throw ContractError("baseline expectation rows do not match the corpus");

    std::vector<double> pool_terms;
    for (std::size_t t = 0; t < corpus.weeks(); ++t) {
        pool_terms.clear();
        for (auto r : rows)
            if (!corpus.series[r].missing[t]) pool_terms.push_back(corpus.series[r].values[t]);
        const double pool = compensated_sum(pool_terms);
        if (!(pool > 0)) continue;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& s = corpus.series[rows[i]];
            if (s.missing[t] || !(s.values[t] > 0)) continue;
            m.deviation(i, t) = std::log10((s.values[t] / pool) / baseline->share[i]);
        }
    }
    return m;
}

ExpressionMatrix smooth(const ExpressionMatrix& matrix, int window) {
    if (window < 1) throw ContractError("smoothing window must be >= 1");
    ExpressionMatrix out = matrix;
    out.smooth_window = window;
    const auto w = static_cast<std::size_t>(window);
    for (std::size_t r = 0; r < matrix.deviation.rows(); ++r) {
        for (std::size_t t = 0; t < matrix.deviation.cols(); ++t) {
            double sum = 0;
            int n = 0;
            const std::size_t lo = t + 1 >= w ? t + 1 - w : 0;
            for (std::size_t u = lo; u <= t; ++u) {
                if (const auto& c = matrix.deviation(r, u)) {
                    sum += *c;
                    ++n;
                }
            }
            out.deviation(r, t) = n ? Cell(sum / n) : std::nullopt;
        }
    }
    return out;
}

ExpressionMatrix log_frequency_matrix(const Corpus& corpus) {
    std::vector<ExcludedRow> excluded;
    const auto rows = usable_rows(corpus, &excluded);
    auto m = with_magnitude(corpus, rows, ExpressionMode::within);
    m.excluded = std::move(excluded);
    return m;
}

CellMatrix zscore_log(const Corpus& corpus) {
    CellMatrix z(corpus.rows(), corpus.weeks());
    for (std::size_t r = 0; r < corpus.rows(); ++r) {
        const auto& s = corpus.series[r];
        std::vector<double> logs;
        for (std::size_t t = 0; t < s.values.size(); ++t)
            if (!s.missing[t] && s.values[t] > 0) logs.push_back(std::log10(s.values[t]));
        if (logs.size() < 2)
            throw ContractError("zscore_log: row " + s.key().label() + " has fewer than two positive values");
        const double n = static_cast<double>(logs.size());
        const double mu = compensated_sum(logs) / n;
        std::vector<double> sq;
        for (double x : logs) sq.push_back((x - mu) * (x - mu));
        const double sigma = std::sqrt(compensated_sum(sq) / n);
        for (std::size_t t = 0; t < s.values.size(); ++t) {
            if (s.missing[t] || !(s.values[t] > 0)) continue;
            z(r, t) = sigma > 0 ? (std::log10(s.values[t]) - mu) / sigma : 0.0;
        }
    }
    return z;
}

std::map<std::string, std::vector<KeywordTotal>> keyword_totals(const Corpus& corpus) {
    std::map<std::string, std::vector<KeywordTotal>> out;
    for (const auto& s : corpus.series) {
        std::vector<double> vals;
        for (std::size_t t = 0; t < s.values.size(); ++t)
            if (!s.missing[t]) vals.push_back(s.values[t]);
        out[s.language].push_back({s.keyword, compensated_sum(vals)});
    }
    for (auto& [lang, list] : out)
        std::sort(list.begin(), list.end(), [](const KeywordTotal& a, const KeywordTotal& b) {
            if (a.total != b.total) return a.total > b.total;
            return a.keyword < b.keyword;
        });
    return out;
}

std::string expression_to_csv(const ExpressionMatrix& m, MatrixPart which) {
    const CellMatrix& cells = which == MatrixPart::magnitude ? m.magnitude : m.deviation;
    std::vector<std::string> fields{"key"};
    for (const auto& w : m.week_axis) fields.push_back(w.label());
    std::string out = csv::join(fields) + "\n";
    for (std::size_t r = 0; r < m.row_keys.size(); ++r) {
        fields.assign(1, m.row_keys[r].label());
        for (std::size_t t = 0; t < cells.cols(); ++t) fields.push_back(format_cell(cells(r, t)));
        out += csv::join(fields) + "\n";
    }
    return out;
}

std::string expression_to_json(const ExpressionMatrix& m) {
    ordered_json j;
    j["version"] = 1;
    j["mode"] = to_string(m.mode);
    j["smooth_window"] = m.smooth_window;
    auto& axis = j["week_axis"] = ordered_json::array();
    for (const auto& w : m.week_axis) axis.push_back(w.label());
    auto& series = j["series"] = ordered_json::array();
    for (std::size_t r = 0; r < m.row_keys.size(); ++r) {
        ordered_json row;
        row["language"] = m.row_keys[r].language;
        row["keyword"] = m.row_keys[r].keyword;
        row["magnitude"] = cells_to_json(m.magnitude.row(r));
        row["deviation"] = cells_to_json(m.deviation.row(r));
        series.push_back(std::move(row));
    }
    auto& excluded = j["excluded"] = ordered_json::array();
    for (const auto& e : m.excluded)
        excluded.push_back({{"language", e.key.language}, {"keyword", e.key.keyword}, {"reason", e.reason}});
    return j.dump() + "\n";
}

ExpressionMatrix expression_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("expression file is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || j.value("version", 0) != 1) throw FormatError("unsupported expression file version");
    ExpressionMatrix m;
    try {
        m.mode = parse_expression_mode(j.at("mode").get<std::string>());
        m.smooth_window = j.at("smooth_window").get<int>();
        for (const auto& w : j.at("week_axis")) m.week_axis.push_back(IsoWeek::parse(w.get<std::string>()));
        const auto& series = j.at("series");
        m.magnitude = CellMatrix(series.size(), m.week_axis.size());
        m.deviation = CellMatrix(series.size(), m.week_axis.size());
        for (std::size_t r = 0; r < series.size(); ++r) {
            const auto& row = series[r];
            m.row_keys.push_back({row.at("language").get<std::string>(), row.at("keyword").get<std::string>()});
            const auto& mag = row.at("magnitude");
            const auto& dev = row.at("deviation");
            if (mag.size() != m.week_axis.size() || dev.size() != m.week_axis.size())
                throw FormatError("expression row length does not match week_axis");
            for (std::size_t t = 0; t < m.week_axis.size(); ++t) {
                if (!mag[t].is_null()) m.magnitude(r, t) = mag[t].get<double>();
                if (!dev[t].is_null()) m.deviation(r, t) = dev[t].get<double>();
            }
        }
        if (j.contains("excluded"))
            for (const auto& e : j["excluded"])
                m.excluded.push_back({{e.at("language").get<std::string>(), e.at("keyword").get<std::string>()},
                                      e.at("reason").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed expression file: ") + e.what());
    } catch (const ContractError& e) {
        throw FormatError(std::string("malformed expression file: ") + e.what());
    }
    return m;
}

std::vector<std::vector<double>> dense_rows(const ExpressionMatrix& m, MatrixPart which, double fill) {
    const CellMatrix& cells = which == MatrixPart::magnitude ? m.magnitude : m.deviation;
    std::vector<std::vector<double>> out(cells.rows(), std::vector<double>(cells.cols(), fill));
    for (std::size_t r = 0; r < cells.rows(); ++r)
        for (std::size_t t = 0; t < cells.cols(); ++t)
            if (cells(r, t)) out[r][t] = *cells(r, t);
    return out;
}

} // namespace attn
