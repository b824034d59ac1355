#ifndef ATTN_TESTS_SYNTHETIC_HPP
#define ATTN_TESTS_SYNTHETIC_HPP

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "attn/ingest.hpp"

namespace attn::testing {

struct Spike {
    std::size_t week = 0;
    std::vector<std::size_t> languages;
    double factor = 100;
};

struct SyntheticOptions {
    std::vector<std::string> languages{"de", "en", "fr", "pl", "ru", "uk"};
    IsoWeek start{2014, 1};
    std::size_t weeks = 120;
    // Relative amplitude of a yearly wave; 0 keeps every row constant.
    double wave = 0;
    std::vector<Spike> spikes;
    std::vector<std::pair<std::size_t, std::size_t>> missing; // (language, week)
};

// Language l sits at 2e-6 * (l + 1) between spikes; spikes multiply one week.
inline Corpus synthetic_corpus(const SyntheticOptions& o) {
    Corpus c;
    for (std::size_t t = 0; t < o.weeks; ++t) c.week_axis.push_back(o.start.advanced(static_cast<long>(t)));
    for (std::size_t l = 0; l < o.languages.size(); ++l) {
        WeeklySeries s;
        s.language = o.languages[l];
        s.keyword = "Ukraine";
        s.weeks = c.week_axis;
        const double base = 2e-6 * static_cast<double>(l + 1);
        for (std::size_t t = 0; t < o.weeks; ++t) {
            const double phase = 2 * std::numbers::pi * (static_cast<double>(t) / 52.0 + static_cast<double>(l) / 6.0);
            s.values.push_back(base * (1 + o.wave * std::sin(phase)));
            s.missing.push_back(false);
        }
        c.series.push_back(std::move(s));
    }
    for (const auto& sp : o.spikes)
        for (auto l : sp.languages) c.series[l].values[sp.week] *= sp.factor;
    for (const auto& [l, t] : o.missing) {
        c.series[l].values[t] = 0;
        c.series[l].missing[t] = true;
    }
    return c;
}

// Six constant languages over 120 weeks; languages 0-2 share a spike at week
// 60 and language 3 alone spikes at week 30.
inline SyntheticOptions two_event_options() {
    SyntheticOptions o;
    o.spikes = {{60, {0, 1, 2}, 100}, {30, {3}, 100}};
    return o;
}

} // namespace attn::testing

#endif
