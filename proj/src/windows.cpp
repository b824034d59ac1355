#include <cmath>
#include <map>

#include <fmt/format.h>

#include "attn/clustering.hpp"
#include "attn/error.hpp"

namespace attn {

std::vector<std::size_t> event_window_columns(const Corpus& corpus, const Date& anchor, int pre_weeks, int post_weeks) {
    if (pre_weeks < 0 || post_weeks < 0 || pre_weeks + post_weeks < 1)
        throw ContractError("event window needs pre >= 0, post >= 0 and at least one week");
    const IsoWeek anchor_week = IsoWeek::containing(anchor);
    const auto idx = corpus.week_index(anchor_week);
    if (!idx)
        throw ContractError("anchor " + format_date(anchor) + " (" + anchor_week.label() + ") is outside the corpus span");
    const auto pre = static_cast<std::size_t>(pre_weeks);
    const auto len = static_cast<std::size_t>(pre_weeks + post_weeks);
    if (*idx < pre || *idx - pre + len > corpus.weeks())
        throw ContractError(fmt::format("window -{}..+{} weeks around {} leaves the corpus axis", pre_weeks, post_weeks,
                                        anchor_week.label()));
    std::vector<std::size_t> cols(len);
    for (std::size_t i = 0; i < len; ++i) {
        cols[i] = *idx - pre + i;
        if (corpus.week_axis[cols[i]] != anchor_week.advanced(static_cast<long>(i) - pre_weeks))
            throw ContractError("corpus axis is not contiguous inside the window around " + anchor_week.label());
    }
    return cols;
}

WindowExtraction extract_event_windows(const Corpus& corpus, const Date& anchor, int pre_weeks, int post_weeks,
                                       WindowNormalization norm) {
    const auto cols = event_window_columns(corpus, anchor, pre_weeks, post_weeks);
    const std::size_t len = cols.size();
    std::vector<IsoWeek> weeks;
    for (auto c : cols) weeks.push_back(corpus.week_axis[c]);

    std::map<std::string, int> per_language;
    for (const auto& s : corpus.series) ++per_language[s.language];

    WindowExtraction out;
    for (const auto& s : corpus.series) {
        std::vector<double> f(len);
        bool ok = true;
        for (std::size_t i = 0; i < len && ok; ++i) {
            const std::size_t t = cols[i];
            ok = !s.missing[t] && s.values[t] > 0;
            f[i] = s.values[t];
        }
        if (!ok) {
            out.excluded.push_back({s.key(), "missing or zero value inside the window"});
            continue;
        }
        EventWindow w;
        w.label = per_language[s.language] > 1 ? s.key().label() : s.language;
        w.key = s.key();
        w.anchor = anchor;
        w.pre_weeks = pre_weeks;
        w.post_weeks = post_weeks;
        w.weeks = weeks;
        w.values.resize(len);
        if (norm == WindowNormalization::mean_then_log) {
            const double mean = compensated_sum(f) / static_cast<double>(len);
            for (std::size_t i = 0; i < len; ++i) w.values[i] = std::log10(f[i] / mean);
        } else {
            std::vector<double> logs(len);
            for (std::size_t i = 0; i < len; ++i) logs[i] = std::log10(f[i]);
            const double mean = compensated_sum(logs) / static_cast<double>(len);
            for (std::size_t i = 0; i < len; ++i) w.values[i] = logs[i] - mean;
        }
        out.windows.push_back(std::move(w));
    }
    return out;
}

} // namespace attn
