#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "attn/error.hpp"
#include "attn/render.hpp"
#include "support/builders.hpp"
#include "support/xml.hpp"

using namespace attn;
using attn::testing::make_corpus;
using attn::testing::parse_xml;
using attn::testing::XmlNode;

namespace {

std::vector<std::pair<double, double>> points_of(const XmlNode& polyline) {
    std::vector<std::pair<double, double>> out;
    std::istringstream in(polyline.attr("points"));
    std::string pair;
    while (in >> pair) {
        const auto comma = pair.find(',');
        out.emplace_back(std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1)));
    }
    return out;
}

ExpressionMatrix small_matrix() {
    const auto c = make_corpus({{1e-5, 2e-5, 4e-5}, {3e-6, 3e-6, 6e-6}}, {"en", "de"});
    return within_language_deviation(c);
}

std::vector<LabeledSeries> labeled(const std::vector<std::vector<double>>& xs) {
    std::vector<LabeledSeries> out;
    for (std::size_t i = 0; i < xs.size(); ++i) out.push_back({"l" + std::to_string(i), xs[i]});
    return out;
}

std::vector<EventWindow> windows_of(const std::vector<LabeledSeries>& pts) {
    std::vector<EventWindow> out;
    for (const auto& p : pts) {
        EventWindow w;
        w.label = p.label;
        w.key = {p.label, "Ukraine"};
        w.pre_weeks = 1;
        w.post_weeks = static_cast<int>(p.values.size()) - 1;
        w.values = p.values;
        out.push_back(w);
    }
    return out;
}

// Expands the run-length rects of a similarity matrix into one gray per cell.
std::vector<std::vector<std::string>> similarity_grid(const XmlNode& root, std::size_t n) {
    std::vector<std::vector<std::string>> grid(n, std::vector<std::string>(n));
    const auto groups = root.by_class("cells");
    REQUIRE(groups.size() == 1);
    for (const auto& rect : groups[0]->children) {
        const auto x = std::stoul(rect->attr("x")), y = std::stoul(rect->attr("y")), w = std::stoul(rect->attr("width"));
        for (std::size_t q = x; q < x + w; ++q) grid.at(y).at(q) = rect->attr("fill");
    }
    return grid;
}

} // namespace

TEST_CASE("color interpolation") {
    const auto stops = default_color_stops(2.0);
    CHECK(interpolate_color(stops, 0.0).hex() == "#bbbbbb");
    CHECK(interpolate_color(stops, 2.0).hex() == "#b2182b");
    CHECK(interpolate_color(stops, 7.0).hex() == "#b2182b");
    CHECK(interpolate_color(stops, -9.0).hex() == "#2166ac");
    CHECK(Rgb::parse("#0a0B0c") == Rgb{10, 11, 12});
    CHECK_THROWS_AS(Rgb::parse("0a0b0c"), ContractError);
    // red minus blue rises from the blue end to the red end, up to one unit
    // of per-channel rounding
    int prev = -256;
    for (int i = -200; i <= 200; ++i) {
        const auto c = interpolate_color(stops, i / 100.0);
        CHECK(c.r - c.b >= prev - 1);
        prev = c.r - c.b;
    }
}

// The default gray (#bbbbbb) has a larger red channel than the default red
// (#b2182b), so the red channel alone cannot rise over [0, +clamp].
TEST_CASE("red channel alone is monotone under the default stops" * doctest::should_fail()) {
    const auto stops = default_color_stops(2.0);
    int prev = -1;
    bool monotone = true;
    for (int i = -200; i <= 200; ++i) {
        const int red = interpolate_color(stops, i / 100.0).r;
        monotone = monotone && red >= prev;
        prev = red;
    }
    CHECK(monotone);
}

TEST_CASE("RenderSpec validation") {
    RenderSpec spec;
    spec.deviation_clamp = 0;
    CHECK_THROWS_AS(validate_render_spec(spec), ContractError);
    spec = {};
    spec.magnitude_floor = -3;
    spec.magnitude_ceiling = -4;
    CHECK_THROWS_AS(validate_render_spec(spec), ContractError);
    spec = {};
    spec.color_stops = {{-1, Rgb{}}, {1, Rgb{}}};
    CHECK_THROWS_AS(validate_render_spec(spec), ContractError);
    spec.color_stops = {{-2, Rgb{}}, {-2, Rgb{}}, {2, Rgb{}}};
    CHECK_THROWS_AS(validate_render_spec(spec), ContractError);
}

TEST_CASE("expression heatmap") {
    const auto m = small_matrix();
    RenderSpec spec;
    const auto svg = render_expression_heatmap(m, spec);
    const auto root = parse_xml(svg);
    CHECK(root->by_id_prefix("cell-").size() == 6);
    CHECK(std::stod(root->attr("width")) == 160 + 3 * spec.cell_width);
    CHECK(root->by_id("cell-1-2014-W02") != nullptr);
    CHECK(root->by_id("lang-en") != nullptr);
    CHECK(!root->by_class("year-grid").empty());
    CHECK(render_expression_heatmap(m, spec) == svg);

    SUBCASE("fills follow the clamped deviation") {
        auto d = m;
        d.deviation(0, 0) = 0.0;
        d.deviation(0, 1) = 5.0;
        d.deviation(0, 2) = -5.0;
        const auto r = parse_xml(render_expression_heatmap(d, spec));
        CHECK(r->by_id("cell-0-2014-W01")->attr("fill") == "#bbbbbb");
        CHECK(r->by_id("cell-0-2014-W02")->attr("fill") == "#b2182b");
        CHECK(r->by_id("cell-0-2014-W03")->attr("fill") == "#2166ac");
    }
    SUBCASE("bar height") {
        const auto r = parse_xml(render_expression_heatmap(m, spec));
        // global min is de at 3e-6, global max en at 4e-5
        CHECK(std::stod(r->by_id("cell-1-2014-W01")->attr("height")) == 0.0);
        CHECK(std::stod(r->by_id("cell-0-2014-W03")->attr("height")) == spec.cell_height);
        RenderSpec fixed;
        fixed.magnitude_floor = -6;
        fixed.magnitude_ceiling = -4;
        const auto f = parse_xml(render_expression_heatmap(m, fixed));
        const double want = fixed.cell_height * (std::log10(2e-5) + 6) / 2;
        CHECK(std::abs(std::stod(f->by_id("cell-0-2014-W02")->attr("height")) - want) <= 0.005);
    }
    SUBCASE("null cells") {
        const auto c = make_corpus({{1e-5, std::nullopt, 0.0, 2e-5}, {1e-5, 1e-5, 1e-5, 1e-5}});
        const auto mm = within_language_deviation(c);
        CHECK(parse_xml(render_expression_heatmap(mm, spec))->by_id_prefix("cell-").size() == 6);
        RenderSpec hatch;
        hatch.missing_style = MissingStyle::hatch;
        const auto r = parse_xml(render_expression_heatmap(mm, hatch));
        CHECK(r->by_class("missing").size() == 2);
        CHECK(r->by_id_prefix("cell-").size() == 6);
    }
    SUBCASE("row order") {
        RenderSpec ordered;
        ordered.row_order = std::vector<std::size_t>{1, 0};
        const auto r = parse_xml(render_expression_heatmap(m, ordered));
        const auto labels = r->by_id_prefix("lang-");
        REQUIRE(labels.size() == 2);
        CHECK(labels[0]->attr("id") == "lang-de");
        CHECK(labels[0]->text == "de (Ukraine)");
        ordered.row_order = std::vector<std::size_t>{0, 0};
        CHECK_THROWS_AS(render_expression_heatmap(m, ordered), ContractError);
        ordered.row_order = std::vector<std::size_t>{0};
        CHECK_THROWS_AS(render_expression_heatmap(m, ordered), ContractError);
    }
    SUBCASE("magnitude coloring") {
        const auto r = parse_xml(render_expression_heatmap(m, spec, HeatmapColor::magnitude));
        CHECK(r->by_id_prefix("cell-").size() == 6);
        CHECK(r->by_id("cell-0-2014-W03")->attr("fill") == "#08306b");
    }
}

TEST_CASE("value heatmap") {
    CellMatrix v(1, 3);
    v(0, 0) = -3.0;
    v(0, 2) = 3.0;
    const std::vector<IsoWeek> weeks{IsoWeek(2014, 1), IsoWeek(2014, 2), IsoWeek(2014, 3)};
    const auto r = parse_xml(render_value_heatmap({"en"}, weeks, v, default_color_stops(3), {}));
    CHECK(r->by_id_prefix("cell-").size() == 2);
    CHECK(r->by_id("cell-0-2014-W03")->attr("fill") == "#b2182b");
    CHECK_THROWS_AS(render_value_heatmap({"en", "de"}, weeks, v, default_color_stops(3), {}), ContractError);
}

TEST_CASE("dendrogram") {
    SUBCASE("two leaves") {
        const auto r = parse_xml(render_dendrogram(ward_linkage({{0}, {2}}), {"a", "b"}));
        const auto brackets = r->by_class("bracket");
        REQUIRE(brackets.size() == 1);
        CHECK(brackets[0]->attr("data-height") == "2");
    }
    SUBCASE("two pairs") {
        const auto l = ward_linkage({{0}, {1}, {10}, {11}});
        const auto r = parse_xml(render_dendrogram(l, {"a", "b", "c", "d"}));
        const auto brackets = r->by_class("bracket");
        REQUIRE(brackets.size() == 3);
        CHECK(brackets[0]->attr("data-height") == "1");
        CHECK(brackets[1]->attr("data-height") == "1");
        CHECK(std::stod(brackets[2]->attr("data-height")) > 1);
        // branch extent proportional to height: low brackets end at 1/max of the plot width
        const auto d0 = brackets[0]->attr("d");
        const double x_low = std::stod(d0.substr(d0.find('H') + 1));
        const auto d2 = brackets[2]->attr("d");
        const double x_high = std::stod(d2.substr(d2.find('H') + 1));
        CHECK(std::abs((x_low - 150) / (x_high - 150) - 1 / l.merges[2].height) <= 0.01);
    }
    SUBCASE("leaf label order") {
        const auto l = ward_linkage({{0}, {10}, {1}, {11}, {30}});
        const std::vector<std::string> labels{"a", "b", "c", "d", "e"};
        const auto leaves = parse_xml(render_dendrogram(l, labels))->by_class("leaf");
        const auto order = leaf_order(l);
        REQUIRE(leaves.size() == order.size());
        for (std::size_t p = 0; p < order.size(); ++p) CHECK(leaves[p]->text == labels[order[p]]);
        CHECK(order != std::vector<std::size_t>{0, 1, 2, 3, 4});
    }
    CHECK_THROWS_AS(render_dendrogram(ward_linkage({{0}, {1}}), {"a"}), ContractError);
}

TEST_CASE("cluster lines") {
    const auto pts = labeled({{0, 0, 1, 0}, {0, 0, 1, 0}, {5, 5, 4, 5}, {0, 1, 1, 0}, {5, 4, 4, 5}});
    const auto windows = windows_of(pts);
    SUBCASE("k = 1") {
        const auto rep = kmeans_dtw(pts, {.k = 1, .seed = 1});
        const auto r = parse_xml(render_cluster_lines(windows, rep));
        CHECK(r->by_id_prefix("subplot-").size() == 1);
        CHECK(r->by_class("member").size() == 5);
    }
    SUBCASE("members per subplot") {
        const auto rep = kmeans_dtw(pts, {.k = 2, .seed = 4});
        const auto r = parse_xml(render_cluster_lines(windows, rep));
        std::vector<std::size_t> counts(2, 0);
        for (const auto& [label, c] : rep.assignments) ++counts[c];
        for (std::size_t c = 0; c < 2; ++c) {
            const auto* sub = r->by_id("subplot-" + std::to_string(c));
            REQUIRE(sub != nullptr);
            CHECK(sub->by_class("member").size() == counts[c]);
            CHECK(sub->by_class("anchor").size() == 1);
            CHECK(sub->by_class("centroid").size() == 1);
        }
        // identical series draw identical paths
        const auto members = r->by_class("member");
        std::string p0, p1;
        for (auto* m : members) {
            if (m->attr("data-label") == "l0") p0 = m->attr("points");
            if (m->attr("data-label") == "l1") p1 = m->attr("points");
        }
        CHECK(!p0.empty());
        CHECK(p0 == p1);
    }
}

TEST_CASE("pair comparison") {
    std::vector<testing::Row> rows(3, testing::Row(120));
    for (std::size_t t = 0; t < 120; ++t) {
        rows[0][t] = 1e-6 * std::pow(10.0, static_cast<double>(t % 4));
        rows[1][t] = 3e-6 * std::pow(10.0, static_cast<double>((t / 2) % 3));
        rows[2][t] = 2e-5;
    }
    const auto c = make_corpus(rows, {"en", "de", "fr"});
    const auto a = parse_date("2014-06-01"), b = parse_date("2015-06-01");
    const auto r = parse_xml(render_pair_comparison(c, a, b, 4, 4));
    const auto pairs = r->by_class("pair");
    REQUIRE(pairs.size() == 3);
    CHECK(r->by_id("lang-de") != nullptr);

    // a tenfold ratio is the same pixel offset everywhere on the axis
    std::vector<double> decade_offsets;
    for (std::size_t row = 0; row < pairs.size(); ++row) {
        const auto* g = pairs[row];
        const auto lines = g->by_class("year-a");
        REQUIRE(lines.size() == 1);
        const auto pts = points_of(*lines[0]);
        REQUIRE(pts.size() == 8);
        CHECK(g->by_class("strip-a").size() == 8);
        CHECK(g->by_class("strip-b").size() == 8);
        CHECK(g->by_class("anchor").size() == 1);
        const auto cols = event_window_columns(c, a, 4, 4);
        const auto& s = c.series[row];
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = 0; j < pts.size(); ++j) {
                const double ratio = s.values[cols[j]] / s.values[cols[i]];
                if (std::abs(ratio - 10) < 1e-9) decade_offsets.push_back(pts[i].second - pts[j].second);
            }
    }
    REQUIRE(decade_offsets.size() >= 4);
    for (double d : decade_offsets) CHECK(std::abs(d - decade_offsets.front()) <= 0.5);

    const auto same = parse_xml(render_pair_comparison(c, a, a, 4, 4));
    for (auto* g : same->by_class("pair"))
        CHECK(g->by_class("year-a")[0]->attr("points") == g->by_class("year-b")[0]->attr("points"));
    CHECK_THROWS_AS(render_pair_comparison(c, parse_date("2030-01-01"), b, 4, 4), ContractError);
}

TEST_CASE("similarity matrix") {
    std::mt19937_64 gen(67);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<WindowVector> vs;
    for (int i = 0; i < 40; ++i) {
        WindowVector v;
        v.start_week = IsoWeek(2013, 40).advanced(i * 3);
        v.components = {u(gen), u(gen), u(gen), u(gen)};
        vs.push_back(v);
    }
    std::shuffle(vs.begin(), vs.end(), gen);
    const auto d = cosine_distance_matrix(vs);
    const auto svg = render_similarity_matrix(d);
    const auto r = parse_xml(svg);
    const auto grid = similarity_grid(*r, d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < d.size(); ++j) {
            CHECK(!grid[i][j].empty());
            CHECK(grid[i][j] == grid[j][i]);
            CHECK(grid[i][i] <= grid[i][j]);
        }
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(grid[i][i] == "#000000");
    // 2013-W40 plus 117 weeks ends in 2015
    CHECK(r->by_class("year-tick").size() == 3 * 2);
    const auto labels = r->by_class("year-label");
    REQUIRE(labels.size() == 3);
    CHECK(labels[0]->text == "2013");
    CHECK(labels[2]->text == "2015");
    CHECK(render_similarity_matrix(d) == svg);
}

TEST_CASE("embedding scatter") {
    CHECK(time_color(0).hex() == "#0b1d51");
    CHECK(time_color(1).hex() == "#fde725");
    CHECK(time_color(2) == time_color(1));
    double prev = -1;
    for (int i = 0; i <= 100; ++i) {
        const auto c = time_color(i / 100.0);
        const double luma = 0.2126 * c.r + 0.7152 * c.g + 0.0722 * c.b;
        CHECK(luma >= prev);
        prev = luma;
    }

    Embedding e;
    std::vector<std::string> labels;
    for (int i = 0; i < 12; ++i) {
        labels.push_back(IsoWeek(2014, 1).advanced((i * 7) % 12).label());
        e.keys.push_back(labels.back());
        e.coords.push_back({std::cos(i * 0.5), std::sin(i * 0.5)});
    }
    const auto svg = render_embedding_scatter(e, labels);
    const auto r = parse_xml(svg);
    CHECK(r->by_class("timeflow").size() == 11);
    const auto points = r->by_class("point");
    REQUIRE(points.size() == 12);
    for (std::size_t p = 1; p < points.size(); ++p) CHECK(points[p - 1]->attr("data-key") < points[p]->attr("data-key"));
    CHECK(points.front()->attr("fill") == "#0b1d51");
    CHECK(points.back()->attr("fill") == "#fde725");
    CHECK(render_embedding_scatter(e, labels) == svg);
    CHECK_THROWS_AS(render_embedding_scatter(e, {"x"}), ContractError);
}

TEST_CASE("supporting figures are well formed") {
    Evaluation ev;
    ev.rows = {{1, 10.0, std::nullopt, 1}, {2, 4.0, 0.5, 2}, {3, 5.0, std::numeric_limits<double>::infinity(), 3}};
    ev.wcss_increases = {3};
    CHECK_NOTHROW(parse_xml(render_evaluation(ev, "k & <scores>")));

    std::map<std::string, std::vector<KeywordTotal>> totals{{"en", {{"Ukraine", 0.3}, {"Ukrainian", 0.1}}},
                                                           {"de", {{"Ukraine \"&\" <x>", 0.2}}}};
    const auto r = parse_xml(render_keyword_totals(totals));
    CHECK(!r->find_all([](const XmlNode& n) { return n.text == "de Ukraine \"&\" <x>"; }).empty());

    auto m = small_matrix();
    m.row_keys[0].keyword = "<&>";
    RenderSpec spec;
    spec.title = "a & b";
    CHECK_NOTHROW(parse_xml(render_expression_heatmap(m, spec)));
    CHECK_THROWS(parse_xml("<svg><g></svg>"));
}
