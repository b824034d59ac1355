#include "attn/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "attn/error.hpp"
#include "svg.hpp"

namespace attn {

namespace {

constexpr double kGutter = 160;
constexpr double kHeatTop = 28;
constexpr double kHeatBottom = 8;

const Rgb kBlue = Rgb::parse("#2166ac");
const Rgb kGray = Rgb::parse("#bbbbbb");
const Rgb kRed = Rgb::parse("#b2182b");
const char* kMissingFill = "#eeeeee";
// Similarity cells use 32 gray steps so that runs of equal tone merge.
constexpr long kGrayLevels = 31;

std::vector<ColorStop> sequential_stops(double lo, double hi) {
    return {{lo, Rgb::parse("#f7fbff")}, {(lo + hi) / 2, Rgb::parse("#6baed6")}, {hi, Rgb::parse("#08306b")}};
}

void check_permutation(const std::vector<std::size_t>& order, std::size_t n) {
    if (order.size() != n) throw ContractError(fmt::format("row_order has {} entries for {} rows", order.size(), n));
    std::vector<bool> seen(n, false);
    for (auto i : order) {
        if (i >= n || seen[i]) throw ContractError("row_order is not a permutation of the matrix rows");
        seen[i] = true;
    }
}

std::vector<std::size_t> identity(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), 0);
    return v;
}

// Unique `lang-<code>` identifiers; a repeated language gets -2, -3, ...
std::vector<std::string> language_ids(const std::vector<std::string>& languages) {
    std::map<std::string, int> seen;
    std::vector<std::string> out;
    for (const auto& l : languages) {
        std::string code;
        for (char c : l) code += (std::isalnum(static_cast<unsigned char>(c)) || c == '-') ? c : '_';
        const int n = ++seen[code];
        out.push_back(n == 1 ? "lang-" + code : fmt::format("lang-{}-{}", code, n));
    }
    return out;
}

void hatch_defs(svg::Document& doc) {
    doc.raw("<defs><pattern id=\"hatch\" width=\"4\" height=\"4\" patternUnits=\"userSpaceOnUse\" "
            "patternTransform=\"rotate(45)\"><line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"4\" stroke=\"#cccccc\" "
            "stroke-width=\"1\"/></pattern></defs>\n");
}

void year_grid(svg::Document& doc, const std::vector<IsoWeek>& weeks, double x0, double cell_w, double y0,
               double y1) {
    for (std::size_t t = 0; t < weeks.size(); ++t) {
        if (t > 0 && weeks[t].year() == weeks[t - 1].year()) continue;
        const double x = x0 + static_cast<double>(t) * cell_w;
        doc.line(x, y0, x, y1, "#999999", 0.5, "class=\"year-grid\"");
        doc.text(x + 1, y0 - 4, std::to_string(weeks[t].year()), 9, "class=\"year-label\"");
    }
}

std::string polyline(const std::vector<std::pair<double, double>>& pts, std::string_view stroke, double width,
                     std::string_view attrs) {
    std::string p;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) p += ' ';
        p += svg::num(pts[i].first) + "," + svg::num(pts[i].second);
    }
    return fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"{}{}/>\n", p, stroke,
                       svg::num(width), attrs.empty() ? "" : " ", attrs);
}

struct MagnitudeRange {
    double floor, ceiling;
};

MagnitudeRange magnitude_range(const ExpressionMatrix& m, const RenderSpec& spec) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t r = 0; r < m.magnitude.rows(); ++r)
        for (std::size_t t = 0; t < m.magnitude.cols(); ++t)
            if (const auto& c = m.magnitude(r, t)) {
                lo = std::min(lo, *c);
                hi = std::max(hi, *c);
            }
    if (!std::isfinite(lo)) lo = -6, hi = 0;
    MagnitudeRange out{spec.magnitude_floor.value_or(lo), spec.magnitude_ceiling.value_or(hi)};
    if (!(out.floor < out.ceiling)) {
        if (spec.magnitude_floor && spec.magnitude_ceiling)
            throw ContractError("magnitude_floor must be below magnitude_ceiling");
        // Flat data: give the bars a one-decade range ending at the value.
        if (spec.magnitude_ceiling) out.floor = out.ceiling - 1;
        else out.ceiling = out.floor + 1;
    }
    return out;
}

} // namespace

Rgb Rgb::parse(std::string_view hex) {
    auto nibble = [&](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw ContractError("invalid hex color '" + std::string(hex) + "'");
    };
    if (hex.size() != 7 || hex[0] != '#') throw ContractError("invalid hex color '" + std::string(hex) + "'");
    auto byte = [&](std::size_t i) { return static_cast<std::uint8_t>(nibble(hex[i]) * 16 + nibble(hex[i + 1])); };
    return {byte(1), byte(3), byte(5)};
}

std::string Rgb::hex() const {
    return fmt::format("#{:02x}{:02x}{:02x}", r, g, b);
}

Rgb interpolate_color(const std::vector<ColorStop>& stops, double value) {
    if (stops.empty()) throw ContractError("no color stops");
    if (!(value > stops.front().value)) return stops.front().color;
    if (!(value < stops.back().value)) return stops.back().color;
    std::size_t i = 1;
    while (stops[i].value < value) ++i;
    const auto& a = stops[i - 1];
    const auto& b = stops[i];
    if (value == b.value) return b.color;
    const double u = (value - a.value) / (b.value - a.value);
    auto mix = [u](std::uint8_t x, std::uint8_t y) {
        return static_cast<std::uint8_t>(std::lround(x + u * (static_cast<double>(y) - x)));
    };
    return {mix(a.color.r, b.color.r), mix(a.color.g, b.color.g), mix(a.color.b, b.color.b)};
}

std::vector<ColorStop> default_color_stops(double clamp) {
    return {{-clamp, kBlue}, {0.0, kGray}, {clamp, kRed}};
}

std::vector<ColorStop> effective_color_stops(const RenderSpec& spec) {
    return spec.color_stops.empty() ? default_color_stops(spec.deviation_clamp) : spec.color_stops;
}

void validate_render_spec(const RenderSpec& spec) {
    if (!(spec.cell_width > 0) || !(spec.cell_height > 0)) throw ContractError("cell size must be positive");
    if (!(spec.deviation_clamp > 0)) throw ContractError("deviation_clamp must be positive");
    if (spec.magnitude_floor && spec.magnitude_ceiling && !(*spec.magnitude_floor < *spec.magnitude_ceiling))
        throw ContractError("magnitude_floor must be below magnitude_ceiling");
    const auto stops = effective_color_stops(spec);
    if (stops.size() < 2) throw ContractError("need at least two color stops");
    for (std::size_t i = 1; i < stops.size(); ++i)
        if (!(stops[i - 1].value < stops[i].value)) throw ContractError("color stop values must increase strictly");
    if (stops.front().value > -spec.deviation_clamp || stops.back().value < spec.deviation_clamp)
        throw ContractError("color stops must cover [-clamp, +clamp]");
}

std::string render_expression_heatmap(const ExpressionMatrix& m, const RenderSpec& spec, HeatmapColor color) {
    validate_render_spec(spec);
    const std::size_t rows = m.row_keys.size(), weeks = m.week_axis.size();
    if (rows == 0 || weeks == 0) throw ContractError("cannot render an empty matrix");
    const auto order = spec.row_order.value_or(identity(rows));
    check_permutation(order, rows);

    const auto range = magnitude_range(m, spec);
    const auto stops = color == HeatmapColor::deviation ? effective_color_stops(spec)
                                                        : sequential_stops(range.floor, range.ceiling);
    const double cw = spec.cell_width, ch = spec.cell_height;
    svg::Document doc(kGutter + static_cast<double>(weeks) * cw, kHeatTop + static_cast<double>(rows) * ch + kHeatBottom,
                      spec.font_family);
    if (spec.missing_style == MissingStyle::hatch) hatch_defs(doc);
    if (!spec.title.empty()) doc.text(4, 12, spec.title, 11, "class=\"title\"");

    std::vector<std::string> languages;
    for (const auto& k : m.row_keys) languages.push_back(k.language);
    const auto ids = language_ids(languages);

    for (std::size_t p = 0; p < rows; ++p) {
        const std::size_t r = order[p];
        const double y0 = kHeatTop + static_cast<double>(p) * ch;
        doc.text(kGutter - 6, y0 + ch * 0.75, m.row_keys[r].language + " (" + m.row_keys[r].keyword + ")",
                 std::min(10.0, ch * 0.8), fmt::format("id=\"{}\" text-anchor=\"end\"", ids[r]));
        for (std::size_t t = 0; t < weeks; ++t) {
            const double x = kGutter + static_cast<double>(t) * cw;
            const Cell& mag = m.magnitude(r, t);
            const Cell& val = color == HeatmapColor::deviation ? m.deviation(r, t) : mag;
            if (!mag || !val) {
                if (spec.missing_style == MissingStyle::hatch) doc.rect(x, y0, cw, ch, "url(#hatch)", "class=\"missing\"");
                continue;
            }
            const double frac = std::clamp((*mag - range.floor) / (range.ceiling - range.floor), 0.0, 1.0);
            const double h = ch * frac;
            const double v = color == HeatmapColor::deviation
                                 ? std::clamp(*val, -spec.deviation_clamp, spec.deviation_clamp)
                                 : *val;
            doc.rect(x, y0 + ch - h, cw, h, interpolate_color(stops, v).hex(),
                     fmt::format("id=\"cell-{}-{}\"", r, m.week_axis[t].label()));
        }
    }
    year_grid(doc, m.week_axis, kGutter, cw, kHeatTop, kHeatTop + static_cast<double>(rows) * ch);
    return doc.finish();
}

std::string render_value_heatmap(const std::vector<std::string>& row_labels, const std::vector<IsoWeek>& weeks,
                                 const CellMatrix& values, const std::vector<ColorStop>& stops, const RenderSpec& spec) {
    if (values.rows() != row_labels.size() || values.cols() != weeks.size())
        throw ContractError("value heatmap labels do not match the matrix shape");
    if (values.rows() == 0 || values.cols() == 0) throw ContractError("cannot render an empty matrix");
    const auto order = spec.row_order.value_or(identity(values.rows()));
    check_permutation(order, values.rows());
    const double cw = spec.cell_width, ch = spec.cell_height;
    svg::Document doc(kGutter + static_cast<double>(weeks.size()) * cw,
                      kHeatTop + static_cast<double>(values.rows()) * ch + kHeatBottom, spec.font_family);
    if (spec.missing_style == MissingStyle::hatch) hatch_defs(doc);
    if (!spec.title.empty()) doc.text(4, 12, spec.title, 11, "class=\"title\"");
    for (std::size_t p = 0; p < order.size(); ++p) {
        const std::size_t r = order[p];
        const double y0 = kHeatTop + static_cast<double>(p) * ch;
        doc.text(kGutter - 6, y0 + ch * 0.75, row_labels[r], std::min(10.0, ch * 0.8), "text-anchor=\"end\"");
        for (std::size_t t = 0; t < weeks.size(); ++t) {
            const double x = kGutter + static_cast<double>(t) * cw;
            if (const auto& v = values(r, t))
                doc.rect(x, y0, cw, ch, interpolate_color(stops, *v).hex(),
                         fmt::format("id=\"cell-{}-{}\"", r, weeks[t].label()));
            else if (spec.missing_style == MissingStyle::hatch)
                doc.rect(x, y0, cw, ch, "url(#hatch)", "class=\"missing\"");
        }
    }
    year_grid(doc, weeks, kGutter, cw, kHeatTop, kHeatTop + static_cast<double>(values.rows()) * ch);
    return doc.finish();
}

std::string render_dendrogram(const Linkage& linkage, const std::vector<std::string>& labels, const std::string& title) {
    if (labels.size() != linkage.leaf_count)
        throw ContractError(fmt::format("dendrogram has {} labels for {} leaves", labels.size(), linkage.leaf_count));
    const auto order = leaf_order(linkage);
    const std::size_t n = linkage.leaf_count;
    constexpr double leaf_h = 18, label_w = 150, plot_w = 420, top = 30, axis_h = 34;

    double max_h = 0;
    for (const auto& m : linkage.merges) max_h = std::max(max_h, m.height);
    if (!(max_h > 0)) max_h = 1;

    svg::Document doc(label_w + plot_w + 30, top + static_cast<double>(n) * leaf_h + axis_h, "Helvetica, Arial, sans-serif");
    if (!title.empty()) doc.text(4, 14, title, 11, "class=\"title\"");

    std::vector<double> x(2 * n - 1, label_w), y(2 * n - 1, 0);
    for (std::size_t p = 0; p < n; ++p) {
        y[order[p]] = top + (static_cast<double>(p) + 0.5) * leaf_h;
        doc.text(label_w - 6, y[order[p]] + 4, labels[order[p]], 10, "class=\"leaf\" text-anchor=\"end\"");
    }
    for (std::size_t i = 0; i < linkage.merges.size(); ++i) {
        const auto& m = linkage.merges[i];
        const std::size_t node = n + i;
        x[node] = label_w + m.height / max_h * plot_w;
        y[node] = (y[m.a] + y[m.b]) / 2;
        doc.raw(fmt::format("<path id=\"merge-{}\" class=\"bracket\" data-height=\"{:.6g}\" d=\"M{},{} H{} V{} H{}\" "
                            "fill=\"none\" stroke=\"#333333\" stroke-width=\"1.00\"/>\n",
                            i, m.height, svg::num(x[m.a]), svg::num(y[m.a]), svg::num(x[node]), svg::num(y[m.b]),
                            svg::num(x[m.b])));
    }
    const double axis_y = top + static_cast<double>(n) * leaf_h + 6;
    doc.line(label_w, axis_y, label_w + plot_w, axis_y, "#333333", 1, "class=\"axis\"");
    for (int t = 0; t <= 4; ++t) {
        const double xx = label_w + plot_w * t / 4.0;
        doc.line(xx, axis_y, xx, axis_y + 4, "#333333");
        doc.text(xx, axis_y + 16, fmt::format("{:.3g}", max_h * t / 4.0), 9, "text-anchor=\"middle\"");
    }
    return doc.finish();
}

std::string render_cluster_lines(const std::vector<EventWindow>& windows, const ClusterReport& report,
                                 const std::string& title) {
    const std::size_t k = report.k;
    if (k == 0) throw ContractError("cluster report has no clusters");
    constexpr double sub_w = 260, sub_h = 170, pad = 44, top = 30;
    const std::size_t cols = std::min<std::size_t>(k, 3);
    const std::size_t grid_rows = (k + cols - 1) / cols;

    std::vector<const EventWindow*> sorted;
    for (const auto& w : windows)
        if (report.assignments.count(w.label)) sorted.push_back(&w);
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->label < b->label; });

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::size_t len = 0;
    for (auto* w : sorted) {
        len = std::max(len, w->values.size());
        for (double v : w->values) lo = std::min(lo, v), hi = std::max(hi, v);
    }
    for (const auto& c : report.centroids) {
        len = std::max(len, c.size());
        for (double v : c) lo = std::min(lo, v), hi = std::max(hi, v);
    }
    if (!std::isfinite(lo)) lo = -1, hi = 1;
    if (!(hi > lo)) lo -= 0.5, hi += 0.5;
    const int pre = sorted.empty() ? 0 : sorted.front()->pre_weeks;

    svg::Document doc(static_cast<double>(cols) * (sub_w + pad) + pad,
                      top + static_cast<double>(grid_rows) * (sub_h + pad) + pad / 2, "Helvetica, Arial, sans-serif");
    if (!title.empty()) doc.text(4, 14, title, 11, "class=\"title\"");

    for (std::size_t c = 0; c < k; ++c) {
        const double x0 = pad + static_cast<double>(c % cols) * (sub_w + pad);
        const double y0 = top + pad / 2 + static_cast<double>(c / cols) * (sub_h + pad);
        auto px = [&](std::size_t i) {
            return len <= 1 ? x0 + sub_w / 2 : x0 + static_cast<double>(i) / static_cast<double>(len - 1) * sub_w;
        };
        auto py = [&](double v) { return y0 + (hi - v) / (hi - lo) * sub_h; };

        std::size_t members = 0;
        for (auto* w : sorted) members += report.assignments.at(w->label) == c;
        doc.open_group(fmt::format("id=\"subplot-{}\"", c));
        doc.rect(x0, y0, sub_w, sub_h, "none", "stroke=\"#999999\" class=\"frame\"");
        doc.text(x0, y0 - 6, fmt::format("Cluster {} (n = {})", c + 1, members), 10);
        doc.text(x0 - 4, y0 + 8, fmt::format("{:.2f}", hi), 8, "text-anchor=\"end\"");
        doc.text(x0 - 4, y0 + sub_h, fmt::format("{:.2f}", lo), 8, "text-anchor=\"end\"");
        if (lo < 0 && hi > 0) doc.line(x0, py(0), x0 + sub_w, py(0), "#dddddd", 0.5, "class=\"zero\"");
        doc.line(px(static_cast<std::size_t>(pre)), y0, px(static_cast<std::size_t>(pre)), y0 + sub_h, "#666666", 1,
                 "class=\"anchor\" stroke-dasharray=\"3,2\"");
        for (auto* w : sorted) {
            if (report.assignments.at(w->label) != c) continue;
            std::vector<std::pair<double, double>> pts;
            for (std::size_t i = 0; i < w->values.size(); ++i) pts.emplace_back(px(i), py(w->values[i]));
            doc.raw(polyline(pts, "#4d4d4d", 1,
                             fmt::format("class=\"member\" data-label=\"{}\" stroke-opacity=\"0.6\"", svg::escape(w->label))));
        }
        if (c < report.centroids.size()) {
            std::vector<std::pair<double, double>> pts;
            for (std::size_t i = 0; i < report.centroids[c].size(); ++i) pts.emplace_back(px(i), py(report.centroids[c][i]));
            doc.raw(polyline(pts, "#b2182b", 2, "class=\"centroid\""));
        }
        doc.close_group();
    }
    return doc.finish();
}

std::string render_pair_comparison(const Corpus& corpus, const Date& anchor_a, const Date& anchor_b, int pre, int post,
                                   const std::string& title) {
    const auto cols_a = event_window_columns(corpus, anchor_a, pre, post);
    const auto cols_b = event_window_columns(corpus, anchor_b, pre, post);
    const std::size_t len = cols_a.size();
    if (corpus.rows() == 0) throw ContractError("corpus has no series");

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& s : corpus.series)
        for (const auto* cols : {&cols_a, &cols_b})
            for (auto t : *cols)
                if (!s.missing[t] && s.values[t] > 0) {
                    lo = std::min(lo, std::log10(s.values[t]));
                    hi = std::max(hi, std::log10(s.values[t]));
                }
    if (!std::isfinite(lo)) lo = -7, hi = -6;
    lo = std::floor(lo);
    hi = std::ceil(hi);
    if (!(hi > lo)) hi = lo + 1;

    constexpr double sub_w = 220, plot_h = 120, strip_h = 10, pad = 80, top = 30;
    const double sub_h = plot_h + 2 * strip_h + 26;
    const std::size_t ncols = std::min<std::size_t>(corpus.rows(), 4);
    const std::size_t nrows = (corpus.rows() + ncols - 1) / ncols;
    svg::Document doc(static_cast<double>(ncols) * (sub_w + pad) + pad,
                      top + static_cast<double>(nrows) * (sub_h + pad), "Helvetica, Arial, sans-serif");
    if (!title.empty()) doc.text(4, 14, title, 11, "class=\"title\"");

    std::vector<std::string> languages;
    for (const auto& s : corpus.series) languages.push_back(s.language);
    const auto ids = language_ids(languages);
    const auto strip_stops = sequential_stops(lo, hi);
    const int year_a = static_cast<int>(anchor_a.year());
    const int year_b = static_cast<int>(anchor_b.year());

    for (std::size_t r = 0; r < corpus.rows(); ++r) {
        const auto& s = corpus.series[r];
        const double x0 = pad + static_cast<double>(r % ncols) * (sub_w + pad);
        const double y0 = top + pad / 2 + static_cast<double>(r / ncols) * (sub_h + pad);
        auto px = [&](std::size_t i) {
            return len <= 1 ? x0 + sub_w / 2 : x0 + static_cast<double>(i) / static_cast<double>(len - 1) * sub_w;
        };
        auto py = [&](double f) { return y0 + (hi - std::log10(f)) / (hi - lo) * plot_h; };

        doc.open_group(fmt::format("id=\"{}\" class=\"pair\"", ids[r]));
        doc.rect(x0, y0, sub_w, plot_h, "none", "stroke=\"#999999\" class=\"frame\"");
        doc.text(x0, y0 - 6, s.language + " (" + s.keyword + ")", 10);
        for (double d = lo; d <= hi + 1e-9; d += 1) {
            doc.line(x0, y0 + (hi - d) / (hi - lo) * plot_h, x0 + sub_w, y0 + (hi - d) / (hi - lo) * plot_h,
                     "#eeeeee", 0.5, "class=\"decade\"");
            doc.text(x0 - 3, y0 + (hi - d) / (hi - lo) * plot_h + 3, fmt::format("1e{}", static_cast<int>(d)), 7,
                     "text-anchor=\"end\"");
        }
        const double ax = px(static_cast<std::size_t>(pre));
        doc.line(ax, y0, ax, y0 + plot_h, "#666666", 1, "class=\"anchor\" stroke-dasharray=\"3,2\"");

        auto series_line = [&](const std::vector<std::size_t>& cols, std::string_view stroke, std::string_view cls) {
            std::vector<std::pair<double, double>> pts;
            for (std::size_t i = 0; i < cols.size(); ++i)
                if (!s.missing[cols[i]] && s.values[cols[i]] > 0) pts.emplace_back(px(i), py(s.values[cols[i]]));
            doc.raw(polyline(pts, stroke, 1.5, fmt::format("class=\"{}\"", cls)));
        };
        series_line(cols_a, kBlue.hex(), "year-a");
        series_line(cols_b, kRed.hex(), "year-b");

        auto strip = [&](const std::vector<std::size_t>& cols, double sy, int year, std::string_view cls) {
            const double cell = sub_w / static_cast<double>(len);
            std::vector<double> present;
            for (std::size_t i = 0; i < cols.size(); ++i) {
                const auto t = cols[i];
                const bool ok = !s.missing[t] && s.values[t] > 0;
                if (!s.missing[t]) present.push_back(s.values[t]);
                doc.rect(x0 + static_cast<double>(i) * cell, sy, cell, strip_h,
                         ok ? interpolate_color(strip_stops, std::log10(s.values[t])).hex() : kMissingFill,
                         fmt::format("class=\"{}\"", cls));
            }
            doc.text(x0 + sub_w + 3, sy + strip_h - 1, fmt::format("{} {:.3g}", year, compensated_sum(present)), 7,
                     "class=\"strip-total\"");
        };
        strip(cols_a, y0 + plot_h + 6, year_a, "strip-a");
        strip(cols_b, y0 + plot_h + 8 + strip_h, year_b, "strip-b");
        doc.close_group();
    }
    return doc.finish();
}

std::string render_similarity_matrix(const DistanceMatrix& dist, double cell_size, const std::string& title) {
    validate_distance_matrix(dist);
    if (!(cell_size > 0)) throw ContractError("cell size must be positive");
    const std::size_t n = dist.size();
    std::vector<std::size_t> order = identity(n);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return dist.keys[a] < dist.keys[b]; });
    double dmax = 0;
    for (double v : dist.values) dmax = std::max(dmax, v);

    constexpr double margin = 44;
    const double side = static_cast<double>(n) * cell_size;
    svg::Document doc(margin + side + 10, margin + side + 10, "Helvetica, Arial, sans-serif");
    if (!title.empty()) doc.text(4, 12, title, 11, "class=\"title\"");

    // Unit cells in a scaled group; horizontal runs of one gray level share a rect.
    doc.open_group(fmt::format("class=\"cells\" transform=\"translate({},{}) scale({})\" shape-rendering=\"crispEdges\"",
                               svg::num(margin), svg::num(margin), svg::num(cell_size)));
    auto level = [&](std::size_t p, std::size_t q) {
        const double d = dist(order[p], order[q]);
        const long step = dmax > 0 ? std::lround(kGrayLevels * d / dmax) : 0;
        return static_cast<std::uint8_t>(step * 255 / kGrayLevels);
    };
    for (std::size_t p = 0; p < n; ++p) {
        std::size_t q = 0;
        while (q < n) {
            const auto g = level(p, q);
            std::size_t end = q + 1;
            while (end < n && level(p, end) == g) ++end;
            doc.raw(fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"1\" fill=\"{}\"/>\n", q, p, end - q,
                                Rgb{g, g, g}.hex()));
            q = end;
        }
    }
    doc.close_group();

    std::optional<int> prev;
    for (std::size_t p = 0; p < n; ++p) {
        int year;
        try {
            year = IsoWeek::parse(dist.keys[order[p]]).year();
        } catch (const ContractError&) {
            continue;
        }
        if (prev && *prev == year) continue;
        prev = year;
        const double at = margin + static_cast<double>(p) * cell_size;
        doc.line(at, margin - 4, at, margin, "#333333", 1, "class=\"year-tick\"");
        doc.line(margin - 4, at, margin, at, "#333333", 1, "class=\"year-tick\"");
        doc.text(at, margin - 8, std::to_string(year), 8, "class=\"year-label\"");
    }
    return doc.finish();
}

Rgb time_color(double t) {
    static const std::vector<ColorStop> stops{
        {0.0, Rgb::parse("#0b1d51")}, {0.5, Rgb::parse("#21908c")}, {1.0, Rgb::parse("#fde725")}};
    return interpolate_color(stops, std::clamp(t, 0.0, 1.0));
}

std::string render_embedding_scatter(const Embedding& coords, const std::vector<std::string>& time_labels,
                                     const std::string& title) {
    const std::size_t n = coords.coords.size();
    if (time_labels.size() != n) throw ContractError("scatter needs one time label per point");
    std::vector<std::size_t> order = identity(n);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return time_labels[a] < time_labels[b]; });

    auto coord = [&](std::size_t i, std::size_t d) { return d < coords.coords[i].size() ? coords.coords[i][d] : 0.0; };
    double xlo = 0, xhi = 0, ylo = 0, yhi = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0) xlo = xhi = coord(i, 0), ylo = yhi = coord(i, 1);
        xlo = std::min(xlo, coord(i, 0)), xhi = std::max(xhi, coord(i, 0));
        ylo = std::min(ylo, coord(i, 1)), yhi = std::max(yhi, coord(i, 1));
    }
    const double span = std::max({xhi - xlo, yhi - ylo, 1e-12});
    constexpr double plot = 560, pad = 40, top = 30;
    auto px = [&](double v) { return pad + (v - xlo) / span * plot; };
    auto py = [&](double v) { return top + plot - (v - ylo) / span * plot; };

    svg::Document doc(plot + 2 * pad + 80, plot + top + pad, "Helvetica, Arial, sans-serif");
    if (!title.empty()) doc.text(4, 14, title, 11, "class=\"title\"");
    auto t_of = [&](std::size_t p) { return n > 1 ? static_cast<double>(p) / static_cast<double>(n - 1) : 0.0; };
    for (std::size_t p = 0; p + 1 < n; ++p) {
        const auto a = order[p], b = order[p + 1];
        doc.line(px(coord(a, 0)), py(coord(a, 1)), px(coord(b, 0)), py(coord(b, 1)), time_color(t_of(p)).hex(), 0.6,
                 "class=\"timeflow\"");
    }
    for (std::size_t p = 0; p < n; ++p) {
        const auto i = order[p];
        doc.raw(fmt::format("<circle class=\"point\" data-key=\"{}\" cx=\"{}\" cy=\"{}\" r=\"2.50\" fill=\"{}\"/>\n",
                            svg::escape(time_labels[i]), svg::num(px(coord(i, 0))), svg::num(py(coord(i, 1))),
                            time_color(t_of(p)).hex()));
    }
    // Color legend.
    const double lx = plot + 2 * pad + 20;
    for (int s = 0; s < 50; ++s)
        doc.rect(lx, top + plot - (s + 1) * plot / 50.0, 14, plot / 50.0, time_color(s / 49.0).hex(), "class=\"legend\"");
    if (n > 0) {
        doc.text(lx, top + plot + 12, time_labels[order.front()], 8);
        doc.text(lx, top - 4, time_labels[order.back()], 8);
    }
    return doc.finish();
}

std::string render_evaluation(const Evaluation& evaluation, const std::string& title) {
    constexpr double panel_w = 280, panel_h = 180, pad = 50, top = 30;
    svg::Document doc(2 * (panel_w + pad) + pad, top + panel_h + pad + 10, "Helvetica, Arial, sans-serif");
    if (!title.empty()) doc.text(4, 14, title, 11, "class=\"title\"");
    if (evaluation.rows.empty()) return doc.finish();

    const double kmin = static_cast<double>(evaluation.rows.front().k);
    const double kmax = static_cast<double>(evaluation.rows.back().k);
    auto panel = [&](double x0, std::string_view name, auto value_of) {
        std::vector<std::pair<double, double>> vals;
        for (const auto& row : evaluation.rows)
            if (auto v = value_of(row); v && std::isfinite(*v)) vals.emplace_back(static_cast<double>(row.k), *v);
        double lo = 0, hi = 1;
        if (!vals.empty()) {
            lo = hi = vals.front().second;
            for (const auto& [k, v] : vals) lo = std::min(lo, v), hi = std::max(hi, v);
        }
        if (!(hi > lo)) hi = lo + 1;
        auto px = [&](double k) { return kmax > kmin ? x0 + (k - kmin) / (kmax - kmin) * panel_w : x0 + panel_w / 2; };
        auto py = [&](double v) { return top + (hi - v) / (hi - lo) * panel_h; };
        doc.open_group(fmt::format("class=\"panel\" data-metric=\"{}\"", name));
        doc.rect(x0, top, panel_w, panel_h, "none", "stroke=\"#999999\"");
        doc.text(x0, top - 6, name, 10);
        std::vector<std::pair<double, double>> pts;
        for (const auto& [k, v] : vals) pts.emplace_back(px(k), py(v));
        doc.raw(polyline(pts, "#2166ac", 1.5, "class=\"metric\""));
        for (const auto& [k, v] : vals)
            doc.raw(fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"2.50\" fill=\"#2166ac\"/>\n", svg::num(px(k)), svg::num(py(v))));
        for (const auto& row : evaluation.rows)
            doc.text(px(static_cast<double>(row.k)), top + panel_h + 12, std::to_string(row.k), 8, "text-anchor=\"middle\"");
        doc.text(x0 - 4, top + 8, fmt::format("{:.3g}", hi), 8, "text-anchor=\"end\"");
        doc.text(x0 - 4, top + panel_h, fmt::format("{:.3g}", lo), 8, "text-anchor=\"end\"");
        doc.close_group();
    };
    panel(pad, "WCSS", [](const EvaluationRow& r) { return std::optional<double>(r.total_wcss); });
    panel(2 * pad + panel_w, "Davies-Bouldin", [](const EvaluationRow& r) { return r.davies_bouldin; });
    return doc.finish();
}

std::string render_keyword_totals(const std::map<std::string, std::vector<KeywordTotal>>& totals,
                                  const std::string& title) {
    constexpr double bar_h = 12, label_w = 200, plot_w = 360, top = 30, gap = 10;
    std::size_t lines = 0;
    double max_total = 0;
    for (const auto& [lang, list] : totals) {
        lines += list.size();
        for (const auto& kt : list) max_total = std::max(max_total, kt.total);
    }
    if (!(max_total > 0)) max_total = 1;
    svg::Document doc(label_w + plot_w + 90,
                      top + static_cast<double>(lines) * bar_h + static_cast<double>(totals.size()) * gap + 10,
                      "Helvetica, Arial, sans-serif");
    if (!title.empty()) doc.text(4, 14, title, 11, "class=\"title\"");
    double y = top;
    for (const auto& [lang, list] : totals) {
        doc.open_group(fmt::format("class=\"language\" data-language=\"{}\"", svg::escape(lang)));
        for (std::size_t i = 0; i < list.size(); ++i) {
            const auto& kt = list[i];
            doc.text(label_w - 6, y + bar_h - 3, lang + " " + kt.keyword, 9, "text-anchor=\"end\"");
            doc.rect(label_w, y + 1, kt.total / max_total * plot_w, bar_h - 2, i == 0 ? "#b2182b" : "#bbbbbb",
                     "class=\"bar\"");
            doc.text(label_w + kt.total / max_total * plot_w + 3, y + bar_h - 3, fmt::format("{:.3g}", kt.total), 8);
            y += bar_h;
        }
        doc.close_group();
        y += gap;
    }
    return doc.finish();
}

} // namespace attn
