#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "attn/clustering.hpp"
#include "attn/error.hpp"
#include "support/builders.hpp"

using namespace attn;
using attn::testing::make_corpus;

namespace {

using Series = std::vector<double>;

// Minimum cost over every monotone alignment path, by explicit enumeration.
double dtw_exhaustive(const Series& x, const Series& y, std::size_t i = 0, std::size_t j = 0) {
    const double here = std::abs(x[i] - y[j]);
    if (i + 1 == x.size() && j + 1 == y.size()) return here;
    double best = std::numeric_limits<double>::infinity();
    if (i + 1 < x.size() && j + 1 < y.size()) best = std::min(best, dtw_exhaustive(x, y, i + 1, j + 1));
    if (i + 1 < x.size()) best = std::min(best, dtw_exhaustive(x, y, i + 1, j));
    if (j + 1 < y.size()) best = std::min(best, dtw_exhaustive(x, y, i, j + 1));
    return here + best;
}

// Greedy Ward from cluster centroids: d = sqrt(2 |A||B| / (|A|+|B|)) * |cA - cB|.
Linkage ward_bruteforce(const std::vector<Series>& points) {
    struct Cluster {
        std::size_t id;
        std::vector<std::size_t> members;
    };
    std::vector<Cluster> active;
    for (std::size_t i = 0; i < points.size(); ++i) active.push_back({i, {i}});
    const auto centroid = [&](const Cluster& c) {
        Series m(points[0].size(), 0.0);
        for (auto i : c.members)
            for (std::size_t d = 0; d < m.size(); ++d) m[d] += points[i][d];
        for (auto& v : m) v /= static_cast<double>(c.members.size());
        return m;
    };
    Linkage out;
    out.leaf_count = points.size();
    std::size_t next = points.size();
    while (active.size() > 1) {
        double best = std::numeric_limits<double>::infinity();
        std::pair<std::size_t, std::size_t> pick{0, 0}, ids{0, 0};
        for (std::size_t p = 0; p < active.size(); ++p)
            for (std::size_t q = p + 1; q < active.size(); ++q) {
                const auto ca = centroid(active[p]), cb = centroid(active[q]);
                double sq = 0;
                for (std::size_t d = 0; d < ca.size(); ++d) sq += (ca[d] - cb[d]) * (ca[d] - cb[d]);
                const double na = static_cast<double>(active[p].members.size());
                const double nb = static_cast<double>(active[q].members.size());
                const double dist = std::sqrt(2 * na * nb / (na + nb) * sq);
                const std::pair<std::size_t, std::size_t> key{std::min(active[p].id, active[q].id),
                                                              std::max(active[p].id, active[q].id)};
                if (dist < best || (dist == best && key < ids)) {
                    best = dist;
                    pick = {p, q};
                    ids = key;
                }
            }
        Cluster merged{next++, active[pick.first].members};
        merged.members.insert(merged.members.end(), active[pick.second].members.begin(),
                              active[pick.second].members.end());
        out.merges.push_back({ids.first, ids.second, best, merged.members.size()});
        active.erase(active.begin() + static_cast<long>(pick.second));
        active.erase(active.begin() + static_cast<long>(pick.first));
        active.push_back(merged);
    }
    return out;
}

// Leaf sets of every merge, in merge order.
std::vector<std::set<std::size_t>> merge_sets(const Linkage& l, const std::vector<std::size_t>& relabel) {
    std::vector<std::set<std::size_t>> node(l.leaf_count + l.merges.size());
    for (std::size_t i = 0; i < l.leaf_count; ++i) node[i] = {relabel[i]};
    std::vector<std::set<std::size_t>> out;
    for (std::size_t m = 0; m < l.merges.size(); ++m) {
        auto s = node[l.merges[m].a];
        s.insert(node[l.merges[m].b].begin(), node[l.merges[m].b].end());
        node[l.leaf_count + m] = s;
        out.push_back(s);
    }
    return out;
}

std::vector<LabeledSeries> labeled(const std::vector<Series>& xs) {
    std::vector<LabeledSeries> out;
    for (std::size_t i = 0; i < xs.size(); ++i) out.push_back({"p" + std::to_string(100 + i), xs[i]});
    return out;
}

std::vector<LabeledSeries> random_points(std::mt19937_64& gen, std::size_t n, std::size_t len) {
    std::normal_distribution<double> g(0, 1);
    std::vector<Series> xs(n, Series(len));
    for (std::size_t i = 0; i < n; ++i)
        for (auto& v : xs[i]) v = g(gen) + (i % 3) * 2.0;
    return labeled(xs);
}

} // namespace

TEST_CASE("dtw examples") {
    const Series a{0, 0, 1}, b{0, 1, 1};
    CHECK(dtw_distance(a, b) == 0.0);
    CHECK(dtw_distance(Series{0}, Series{5}) == 5.0);
    CHECK(dtw_distance(a, a) == 0.0);
    CHECK_THROWS_AS(dtw_distance(Series{}, a), ContractError);
    const auto path = dtw_path(a, b);
    CHECK(path.front() == std::pair<std::size_t, std::size_t>{0, 0});
    CHECK(path.back() == std::pair<std::size_t, std::size_t>{2, 2});
}

TEST_CASE("dtw matches exhaustive enumeration") {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 500; ++trial) {
        Series x(1 + gen() % 5), y(1 + gen() % 5);
        for (auto& v : x) v = static_cast<double>(gen() % 5);
        for (auto& v : y) v = static_cast<double>(gen() % 5);
        const double d = dtw_distance(x, y);
        CHECK(d == dtw_exhaustive(x, y));
        CHECK(d == dtw_distance(y, x));
        CHECK(d >= std::abs(x.front() - y.front()));
        CHECK(d >= std::abs(x.back() - y.back()));
        double along = 0;
        for (auto [i, j] : dtw_path(x, y)) along += std::abs(x[i] - y[j]);
        CHECK(along == d);
    }
}

TEST_CASE("ward examples") {
    const auto l = ward_linkage({{0}, {1}, {10}, {11}});
    REQUIRE(l.merges.size() == 3);
    CHECK(l.merges[0] == Merge{0, 1, 1.0, 2});
    CHECK(l.merges[1] == Merge{2, 3, 1.0, 2});
    CHECK(l.merges[2].a == 4);
    CHECK(l.merges[2].b == 5);
    CHECK(l.merges[2].height == doctest::Approx(std::sqrt(2.0 * 2 * 2 / 4) * 10));
    CHECK(leaf_order(l) == std::vector<std::size_t>{0, 1, 2, 3});
    CHECK(leaf_order(ward_linkage({{3}, {4}})) == std::vector<std::size_t>{0, 1});
    CHECK(ward_linkage({{2, 2}, {2, 2}, {9, 1}}).merges[0].height == 0.0);
    CHECK_THROWS_AS(ward_linkage({{1, 2}, {1}}), ContractError);
    CHECK_THROWS_AS(ward_linkage({{1}}), ContractError);
}

TEST_CASE("ward matches brute force") {
    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + gen() % 5;
        std::vector<Series> pts(n, Series(3));
        for (auto& p : pts)
            for (auto& v : p) v = u(gen);
        const auto got = ward_linkage(pts);
        const auto want = ward_bruteforce(pts);
        validate_linkage(got);
        REQUIRE(got.merges.size() == want.merges.size());
        for (std::size_t m = 0; m < got.merges.size(); ++m) {
            CHECK(got.merges[m].a == want.merges[m].a);
            CHECK(got.merges[m].b == want.merges[m].b);
            CHECK(got.merges[m].size == want.merges[m].size);
            CHECK(std::abs(got.merges[m].height - want.merges[m].height) <= 1e-9);
            if (m > 0) CHECK(got.merges[m].height >= got.merges[m - 1].height - 1e-12);
        }

        auto order = leaf_order(got);
        auto sorted = order;
        std::sort(sorted.begin(), sorted.end());
        std::vector<std::size_t> iota(n);
        std::iota(iota.begin(), iota.end(), 0);
        CHECK(sorted == iota);

        // permuting rows relabels the same tree
        auto perm = iota;
        std::shuffle(perm.begin(), perm.end(), gen);
        std::vector<Series> shuffled(n);
        for (std::size_t i = 0; i < n; ++i) shuffled[i] = pts[perm[i]];
        const auto pl = ward_linkage(shuffled);
        CHECK(merge_sets(pl, perm) == merge_sets(got, iota));
        for (std::size_t m = 0; m < pl.merges.size(); ++m)
            CHECK(std::abs(pl.merges[m].height - got.merges[m].height) <= 1e-9);
    }
}

TEST_CASE("linkage validation and json") {
    const auto l = ward_linkage({{0}, {1}, {10}, {11}});
    const auto back = linkage_from_json(linkage_to_json(l, {"a", "b", "c", "d"}));
    CHECK(back.leaves == std::vector<std::string>{"a", "b", "c", "d"});
    REQUIRE(back.linkage.merges.size() == 3);
    for (std::size_t m = 0; m < 3; ++m) {
        CHECK(back.linkage.merges[m].a == l.merges[m].a);
        CHECK(back.linkage.merges[m].b == l.merges[m].b);
        CHECK(back.linkage.merges[m].size == l.merges[m].size);
        // heights are written with 12 significant digits
        CHECK(std::abs(back.linkage.merges[m].height - l.merges[m].height) <= 1e-11 * l.merges[m].height);
    }
    auto bad = l;
    bad.merges[1].a = 0;
    CHECK_THROWS_AS(validate_linkage(bad), ContractError);
}

TEST_CASE("event windows") {
    const IsoWeek start(2014, 5);
    auto c = make_corpus({{2e-5, 3e-5, 1e-5, 1e-5, 1e-5, 4e-5}, {3e-6, 3e-6, 3e-6, 3e-6, 3e-6, 3e-6},
                          {1e-5, 1e-5, std::nullopt, 1e-5, 1e-5, 1e-5}, {1e-5, 1e-5, 1e-5, 0.0, 1e-5, 1e-5}},
                         {"en", "de", "fr", "pl"}, start);
    const auto anchor = parse_date("2014-02-18"); // 2014-W08, column 3
    const auto ex = extract_event_windows(c, anchor, 1, 3);
    REQUIRE(ex.windows.size() == 2);
    const std::vector<double> expected{-0.2430, -0.2430, -0.2430, 0.3590};
    REQUIRE(ex.windows[0].values.size() == 4);
    CHECK(ex.windows[0].weeks.front().label() == "2014-W07");
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::abs(ex.windows[0].values[i] - expected[i]) <= 1e-4);
        CHECK(std::abs(ex.windows[1].values[i]) <= 1e-15);
    }
    REQUIRE(ex.excluded.size() == 2);
    CHECK(ex.excluded[0].key.language == "fr");
    CHECK(ex.excluded[1].key.language == "pl");
    CHECK(event_window_columns(c, anchor, 1, 3) == std::vector<std::size_t>{2, 3, 4, 5});

    CHECK_THROWS_AS(extract_event_windows(c, parse_date("2016-01-01"), 1, 3), ContractError);
    CHECK_THROWS_AS(extract_event_windows(c, anchor, 4, 4), ContractError);

    const auto centered = extract_event_windows(c, anchor, 1, 3, WindowNormalization::log_then_center);
    double s = 0;
    for (double v : centered.windows[0].values) s += v;
    CHECK(std::abs(s) <= 1e-12);

    std::mt19937_64 gen(31);
    for (int trial = 0; trial < 50; ++trial) {
        const auto rc = attn::testing::random_corpus(gen, 6, 12, 1e-7, 1e-3, 0.0);
        const auto a = parse_date("2014-02-05");
        const auto w = extract_event_windows(rc, a, 4, 4);
        auto scaled = rc;
        for (auto& v : scaled.series[0].values) v *= 123.0;
        const auto ws = extract_event_windows(scaled, a, 4, 4);
        for (std::size_t r = 0; r < w.windows.size(); ++r) {
            double m = 0;
            for (double v : w.windows[r].values) m += std::pow(10.0, v);
            CHECK(std::abs(m / 8 - 1) <= 1e-9);
            for (std::size_t i = 0; i < 8; ++i)
                CHECK(std::abs(ws.windows[r].values[i] - w.windows[r].values[i]) <= 1e-12);
        }
    }
}

TEST_CASE("kmeans examples") {
    const auto groups = labeled({{0, 0, 0}, {5, 5, 5}, {0, 0, 0}, {5, 5, 5}, {0, 0, 0}, {5, 5, 5}});
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const auto r = kmeans_dtw(groups, {.k = 2, .seed = seed});
        CHECK(r.total_wcss == 0.0);
        CHECK(r.assignments.at("p100") == r.assignments.at("p102"));
        CHECK(r.assignments.at("p100") == r.assignments.at("p104"));
        CHECK(r.assignments.at("p101") == r.assignments.at("p103"));
        CHECK(r.assignments.at("p100") != r.assignments.at("p101"));
    }
    std::mt19937_64 gen(37);
    const auto pts = random_points(gen, 7, 6);
    const auto all = kmeans_dtw(pts, {.k = 7, .seed = 1});
    CHECK(all.total_wcss == 0.0);
    CHECK_THROWS_AS(kmeans_dtw(pts, {.k = 8, .seed = 1}), ContractError);
    CHECK_THROWS_AS(kmeans_dtw(pts, {.k = 0, .seed = 1}), ContractError);
}

TEST_CASE("kmeans properties") {
    std::mt19937_64 gen(41);
    for (int trial = 0; trial < 30; ++trial) {
        const auto pts = random_points(gen, 8 + trial % 10, 4 + trial % 5);
        for (auto centroid : {CentroidMethod::dba, CentroidMethod::medoid}) {
            KMeansOptions opt{.k = 2 + static_cast<std::size_t>(trial) % 5, .seed = static_cast<std::uint64_t>(trial),
                              .centroid = centroid};
            const auto r = kmeans_dtw(pts, opt);
            for (std::size_t i = 1; i < r.wcss_trace.size(); ++i) CHECK(r.wcss_trace[i] <= r.wcss_trace[i - 1]);
            CHECK(r.assignments.size() == pts.size());
            std::vector<int> counts(r.k, 0);
            for (const auto& [label, c] : r.assignments) ++counts.at(c);
            for (int n : counts) CHECK(n > 0);
            double sum = 0;
            for (double w : r.per_cluster_wcss) sum += w;
            CHECK(std::abs(sum - r.total_wcss) <= 1e-9);

            for (int rep = 0; rep < 5; ++rep) CHECK(kmeans_dtw(pts, opt) == r);
            auto threaded = opt;
            threaded.threads = 4;
            CHECK(kmeans_dtw(pts, threaded) == r);
            auto reversed = pts;
            std::reverse(reversed.begin(), reversed.end());
            CHECK(kmeans_dtw(reversed, opt) == r);
        }
    }
}

TEST_CASE("davies bouldin") {
    const auto pts = labeled({{0}, {1}, {10}, {11}});
    ClusterReport r;
    r.k = 2;
    r.assignments = {{"p100", 0}, {"p101", 0}, {"p102", 1}, {"p103", 1}};
    r.centroids = {{0.5}, {10.5}};
    CHECK(davies_bouldin(pts, r) == 0.1);

    const auto doubled = labeled({{0}, {1}, {10}, {11}, {0}, {1}, {10}, {11}});
    ClusterReport d = r;
    d.assignments = {{"p100", 0}, {"p101", 0}, {"p102", 1}, {"p103", 1},
                     {"p104", 0}, {"p105", 0}, {"p106", 1}, {"p107", 1}};
    CHECK(std::abs(davies_bouldin(doubled, d) - 0.1) <= 1e-12);

    const auto single = kmeans_dtw(pts, {.k = 4, .seed = 3});
    CHECK(davies_bouldin(pts, single) == 0.0);

    ClusterReport one = r;
    one.k = 1;
    one.centroids = {{5.5}};
    one.assignments = {{"p100", 0}, {"p101", 0}, {"p102", 0}, {"p103", 0}};
    CHECK_THROWS_AS(davies_bouldin(pts, one), ContractError);

    ClusterReport same = r;
    same.centroids = {{5.5}, {5.5}};
    CHECK(std::isinf(davies_bouldin(pts, same)));
}

TEST_CASE("evaluate_k") {
    std::mt19937_64 gen(43);
    const auto pts = random_points(gen, 9, 6);
    std::vector<EventWindow> windows;
    for (const auto& p : pts) {
        EventWindow w;
        w.label = p.label;
        w.key = {p.label, "Ukraine"};
        w.values = p.values;
        windows.push_back(w);
    }
    const auto e = evaluate_k(windows, 1, 9, 42, 5);
    REQUIRE(e.rows.size() == 9);
    CHECK(!e.rows[0].davies_bouldin);
    CHECK(e.rows[1].davies_bouldin.has_value());
    CHECK(e.rows.back().total_wcss == 0.0);
    for (std::size_t i = 1; i < e.rows.size(); ++i) {
        const bool rose = e.rows[i].total_wcss > e.rows[i - 1].total_wcss;
        CHECK(rose == (std::find(e.wcss_increases.begin(), e.wcss_increases.end(), e.rows[i].k) !=
                       e.wcss_increases.end()));
    }
    if (!e.wcss_increases.empty()) MESSAGE("wcss rose with k at " << e.wcss_increases.size() << " values");
    const auto again = evaluate_k(windows, 1, 9, 42, 5);
    CHECK(evaluation_to_csv(again) == evaluation_to_csv(e));
    CHECK_THROWS_AS(evaluate_k(windows, 1, 10, 42, 5), ContractError);
}

TEST_CASE("cluster report json") {
    std::mt19937_64 gen(47);
    const auto pts = random_points(gen, 6, 5);
    auto r = kmeans_dtw(pts, {.k = 3, .seed = 9});
    r.davies_bouldin = davies_bouldin(pts, r);
    CHECK(cluster_report_from_json(cluster_report_to_json(r)) == r);
}

TEST_CASE("parallel_for covers every index once") {
    for (unsigned threads : {1u, 2u, 7u}) {
        std::vector<int> hit(101, 0);
        parallel_for(hit.size(), threads, [&](std::size_t i) { ++hit[i]; });
        CHECK(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; }));
    }
}
