#ifndef ATTN_TESTS_BUILDERS_HPP
#define ATTN_TESTS_BUILDERS_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "attn/ingest.hpp"

namespace attn::testing {

using Row = std::vector<std::optional<double>>;

// Rows on a weekly axis from 2014-W01; nullopt marks a missing week.
inline Corpus make_corpus(const std::vector<Row>& rows, std::vector<std::string> languages = {},
                          IsoWeek start = IsoWeek(2014, 1)) {
    Corpus c;
    const std::size_t weeks = rows.empty() ? 0 : rows.front().size();
    for (std::size_t t = 0; t < weeks; ++t) c.week_axis.push_back(start.advanced(static_cast<long>(t)));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        WeeklySeries s;
        s.language = r < languages.size() ? languages[r] : "l" + std::to_string(r);
        s.keyword = "Ukraine";
        s.weeks = c.week_axis;
        for (const auto& v : rows[r]) {
            s.values.push_back(v.value_or(0.0));
            s.missing.push_back(!v);
        }
        c.series.push_back(std::move(s));
    }
    return c;
}

// Log-uniform f in [lo, hi]; each cell missing with probability p_missing.
// Every row keeps at least one positive observation.
inline Corpus random_corpus(std::mt19937_64& gen, std::size_t languages, std::size_t weeks, double lo = 1e-7,
                            double hi = 1e-3, double p_missing = 0.1) {
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<Row> rows(languages, Row(weeks));
    for (auto& row : rows) {
        for (auto& cell : row)
            if (u(gen) >= p_missing) cell = std::pow(10.0, std::log10(lo) + u(gen) * (std::log10(hi) - std::log10(lo)));
        if (std::none_of(row.begin(), row.end(), [](const auto& c) { return c.has_value(); })) row[0] = lo;
    }
    return make_corpus(rows);
}

} // namespace attn::testing

#endif
