// Acceptance run: one PASS/FAIL/SKIP line per primary criterion, with runtimes.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "attn/clustering.hpp"
#include "attn/error.hpp"
#include "attn/expression.hpp"
#include "attn/geometry.hpp"
#include "attn/ingest.hpp"
#include "attn/render.hpp"
#include "support/builders.hpp"
#include "support/synthetic.hpp"
#include "support/xml.hpp"

namespace fs = std::filesystem;
using namespace attn;

namespace {

enum class Verdict { pass, fail, skip };

struct Outcome {
    Verdict verdict = Verdict::pass;
    std::string detail;
};

// Collects failed checks; the first few are kept as detail.
class Checks {
public:
    void expect(bool ok, const std::string& what) {
        if (ok) return;
        ++failures_;
        if (failures_ <= 3) notes_.push_back(what);
    }
    Outcome outcome(std::string summary) const {
        if (failures_ == 0) return {Verdict::pass, std::move(summary)};
        std::string d = fmt::format("{} failed check(s)", failures_);
        for (const auto& n : notes_) d += "; " + n;
        return {Verdict::fail, d};
    }

private:
    int failures_ = 0;
    std::vector<std::string> notes_;
};

int g_failed = 0;

void criterion(const std::string& name, double limit_seconds, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {Verdict::fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.verdict == Verdict::pass && secs >= limit_seconds) {
        o.verdict = Verdict::fail;
        o.detail += fmt::format("; runtime limit exceeded");
    }
    const char* tag = o.verdict == Verdict::pass ? "PASS" : o.verdict == Verdict::fail ? "FAIL" : "SKIP";
    if (o.verdict == Verdict::fail) ++g_failed;
    std::cout << fmt::format("{} {} ({:.3f} s, limit {} s): {}", tag, name, secs, limit_seconds, o.detail) << std::endl;
}

// ---- oracles ---------------------------------------------------------------

double dtw_exhaustive(const std::vector<double>& x, const std::vector<double>& y, std::size_t i = 0, std::size_t j = 0) {
    const double here = std::abs(x[i] - y[j]);
    if (i + 1 == x.size() && j + 1 == y.size()) return here;
    double best = std::numeric_limits<double>::infinity();
    if (i + 1 < x.size() && j + 1 < y.size()) best = std::min(best, dtw_exhaustive(x, y, i + 1, j + 1));
    if (i + 1 < x.size()) best = std::min(best, dtw_exhaustive(x, y, i + 1, j));
    if (j + 1 < y.size()) best = std::min(best, dtw_exhaustive(x, y, i, j + 1));
    return here + best;
}

Linkage ward_bruteforce(const std::vector<std::vector<double>>& points) {
    struct Cluster {
        std::size_t id;
        std::vector<std::size_t> members;
    };
    std::vector<Cluster> active;
    for (std::size_t i = 0; i < points.size(); ++i) active.push_back({i, {i}});
    auto centroid = [&](const Cluster& c) {
        std::vector<double> m(points[0].size(), 0.0);
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
                if (dist < best || (dist == best && key < ids)) best = dist, pick = {p, q}, ids = key;
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

double max_abs_diff(const CellMatrix& a, const CellMatrix& b, bool& shape_ok) {
    double worst = 0;
    shape_ok = a.rows() == b.rows() && a.cols() == b.cols();
    if (!shape_ok) return std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t t = 0; t < a.cols(); ++t) {
            if (a(r, t).has_value() != b(r, t).has_value()) {
                shape_ok = false;
                continue;
            }
            if (a(r, t)) worst = std::max(worst, std::abs(*a(r, t) - *b(r, t)));
        }
    return worst;
}

std::vector<LabeledSeries> as_points(const std::vector<EventWindow>& windows) {
    std::vector<LabeledSeries> out;
    for (const auto& w : windows) out.push_back({w.label, w.values});
    return out;
}

// ---- criteria --------------------------------------------------------------

Outcome deviation_correctness() {
    Checks c;
    const auto within = within_language_deviation(testing::make_corpus({{1e-5, 1e-5, 1e-4, 1e-5}}));
    const std::vector<double> want{-0.5119, -0.5119, 0.4881, -0.5119};
    for (std::size_t t = 0; t < 4; ++t)
        c.expect(within.deviation(0, t) && std::abs(*within.deviation(0, t) - want[t]) <= 1e-4,
                 fmt::format("within week {}", t));
    const auto constant = within_language_deviation(testing::make_corpus({{1e-5, 1e-5, 1e-5}}));
    for (std::size_t t = 0; t < 3; ++t)
        c.expect(constant.deviation(0, t) && std::abs(*constant.deviation(0, t)) <= 1e-4, "constant row");

    const auto share = market_share_deviation(testing::make_corpus({{0.5e-4, 1.5e-4}, {0.5e-4, 0.5e-4}}));
    const std::vector<std::vector<double>> want_share{{-0.1249, 0.0512}, {0.1761, -0.1249}};
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t t = 0; t < 2; ++t)
            c.expect(share.deviation(r, t) && std::abs(*share.deviation(r, t) - want_share[r][t]) <= 1e-4,
                     fmt::format("share row {} week {}", r, t));
    return c.outcome(fmt::format("within [{:.4f}, {:.4f}, {:+.4f}, {:.4f}], share L1 [{:.4f}, {:+.4f}] L2 [{:+.4f}, {:.4f}]",
                                 *within.deviation(0, 0), *within.deviation(0, 1), *within.deviation(0, 2),
                                 *within.deviation(0, 3), *share.deviation(0, 0), *share.deviation(0, 1),
                                 *share.deviation(1, 0), *share.deviation(1, 1)));
}

Outcome invariance_suite() {
    std::mt19937_64 gen(20240224);
    std::uniform_real_distribution<double> u(0, 1);
    double row_worst = 0, column_worst = 0, smooth_worst = 0;
    bool nulls_ok = true;
    for (int trial = 0; trial < 100; ++trial) {
        const auto corpus = testing::random_corpus(gen, 10, 50);

        // within: scale each row by its own positive factor
        auto scaled = corpus;
        for (auto& s : scaled.series) {
            const double c = std::pow(10.0, 6 * u(gen) - 3);
            for (auto& v : s.values) v *= c;
        }
        bool ok = true;
        row_worst = std::max(row_worst, max_abs_diff(within_language_deviation(corpus).deviation,
                                                     within_language_deviation(scaled).deviation, ok));
        nulls_ok = nulls_ok && ok;

        // share: multiply every row at one week by the same factor; that column of D
        const auto share = market_share_deviation(corpus);
        for (std::size_t t = 0; t < corpus.weeks(); ++t) {
            auto col = corpus;
            const double c = std::pow(10.0, 4 * u(gen) - 2);
            for (auto& s : col.series) s.values[t] *= c;
            const auto moved = market_share_deviation(col);
            for (std::size_t r = 0; r < corpus.rows(); ++r) {
                if (share.deviation(r, t).has_value() != moved.deviation(r, t).has_value()) {
                    nulls_ok = false;
                    continue;
                }
                if (share.deviation(r, t))
                    column_worst = std::max(column_worst, std::abs(*share.deviation(r, t) - *moved.deviation(r, t)));
            }
        }

        // smoothing commutes with adding a constant to every deviation
        for (const auto* m : {&share}) {
            const auto within = within_language_deviation(corpus);
            for (const auto* base : {m, &within}) {
                const int window = 1 + static_cast<int>(gen() % 8);
                const double c = 4 * u(gen) - 2;
                auto shifted = *base;
                for (std::size_t r = 0; r < shifted.deviation.rows(); ++r)
                    for (std::size_t t = 0; t < shifted.deviation.cols(); ++t)
                        if (shifted.deviation(r, t)) *shifted.deviation(r, t) += c;
                auto lhs = smooth(*base, window);
                for (std::size_t r = 0; r < lhs.deviation.rows(); ++r)
                    for (std::size_t t = 0; t < lhs.deviation.cols(); ++t)
                        if (lhs.deviation(r, t)) *lhs.deviation(r, t) += c;
                smooth_worst = std::max(smooth_worst, max_abs_diff(lhs.deviation, smooth(shifted, window).deviation, ok));
                nulls_ok = nulls_ok && ok;
            }
        }
    }
    const double tol = 1e-12;
    const bool pass = nulls_ok && row_worst <= tol && column_worst <= tol && smooth_worst <= tol;
    return {pass ? Verdict::pass : Verdict::fail,
            fmt::format("max |dD| row-scaling (within) {:.3g}, column-scaling (share) {:.3g}, smoothing shift {:.3g}, "
                        "tolerance {:g}{}",
                        row_worst, column_worst, smooth_worst, tol, nulls_ok ? "" : ", null pattern changed")};
}

Outcome dtw_oracle() {
    Checks c;
    std::mt19937_64 gen(515);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> x(1 + gen() % 5), y(1 + gen() % 5);
        for (auto& v : x) v = static_cast<double>(gen() % 5);
        for (auto& v : y) v = static_cast<double>(gen() % 5);
        const double got = dtw_distance(x, y), want = dtw_exhaustive(x, y);
        c.expect(got == want, fmt::format("pair {}: {} vs oracle {}", trial, got, want));
    }
    return c.outcome("500 pairs identical to exhaustive enumeration");
}

Outcome ward_oracle() {
    Checks c;
    std::mt19937_64 gen(616);
    std::uniform_real_distribution<double> u(-5, 5);
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + gen() % 5;
        std::vector<std::vector<double>> pts(n, std::vector<double>(3));
        for (auto& p : pts)
            for (auto& v : p) v = u(gen);
        const auto got = ward_linkage(pts), want = ward_bruteforce(pts);
        c.expect(got.merges.size() == want.merges.size(), "merge count");
        for (std::size_t m = 0; m < std::min(got.merges.size(), want.merges.size()); ++m) {
            const auto &g = got.merges[m], &w = want.merges[m];
            c.expect(g.a == w.a && g.b == w.b && g.size == w.size, fmt::format("set {} merge {} nodes", trial, m));
            worst = std::max(worst, std::abs(g.height - w.height));
        }
    }
    c.expect(worst <= 1e-9, fmt::format("height error {:.3g}", worst));
    return c.outcome(fmt::format("200 point sets, merges identical, max height error {:.3g}", worst));
}

Outcome kmeans_properties(const fs::path& fixtures) {
    Checks c;
    std::vector<std::pair<std::string, std::vector<LabeledSeries>>> sets;
    const auto synthetic = load_corpus(fixtures / "synthetic.corpus.json");
    sets.emplace_back("synthetic 2014", as_points(extract_event_windows(synthetic, parse_date("2014-02-18"), 1, 3).windows));
    sets.emplace_back("synthetic 2022", as_points(extract_event_windows(synthetic, parse_date("2022-02-24"), 4, 4).windows));
    const auto two = load_corpus(fixtures / "two_event.corpus.json");
    sets.emplace_back("two-event", as_points(extract_event_windows(two, two.week_axis[60].monday(), 4, 4).windows));
    std::mt19937_64 gen(717);
    std::normal_distribution<double> g(0, 1);
    for (int s = 0; s < 4; ++s) {
        std::vector<LabeledSeries> pts;
        for (int i = 0; i < 12; ++i) {
            std::vector<double> v(8);
            for (auto& x : v) x = g(gen) + (i % 3) * 1.5;
            pts.push_back({fmt::format("r{:02}", i), v});
        }
        sets.emplace_back(fmt::format("random {}", s), pts);
    }

    int runs = 0;
    for (const auto& [name, pts] : sets) {
        for (std::size_t k = 1; k <= pts.size(); ++k)
            for (std::uint64_t seed : {1ULL, 42ULL}) {
                KMeansOptions opt{.k = k, .seed = seed};
                const auto r = kmeans_dtw(pts, opt);
                ++runs;
                for (std::size_t i = 1; i < r.wcss_trace.size(); ++i)
                    c.expect(r.wcss_trace[i] <= r.wcss_trace[i - 1], fmt::format("{} k={} WCSS rose", name, k));
                if (k == pts.size()) c.expect(r.total_wcss == 0.0, fmt::format("{} k=n WCSS {}", name, r.total_wcss));
                if (k == 2 || k == 5) {
                    for (int rep = 0; rep < 5; ++rep) c.expect(kmeans_dtw(pts, opt) == r, fmt::format("{} repeat", name));
                    auto threaded = opt;
                    threaded.threads = 4;
                    c.expect(kmeans_dtw(pts, threaded) == r, fmt::format("{} threads", name));
                }
            }
    }
    return c.outcome(fmt::format("{} runs on {} fixtures: monotone WCSS, k=n WCSS 0, repeat and 1 vs 4 threads identical",
                                 runs, sets.size()));
}

Outcome davies_bouldin_hand() {
    Checks c;
    const std::vector<LabeledSeries> pts{{"a", {0}}, {"b", {1}}, {"c", {10}}, {"d", {11}}};
    ClusterReport r;
    r.k = 2;
    r.assignments = {{"a", 0}, {"b", 0}, {"c", 1}, {"d", 1}};
    r.centroids = {{0.5}, {10.5}};
    const double db = davies_bouldin(pts, r);
    c.expect(db == 0.1, fmt::format("DB {}", db));
    const auto single = kmeans_dtw(pts, {.k = 4, .seed = 0});
    const double db0 = davies_bouldin(pts, single);
    c.expect(db0 == 0.0, fmt::format("singleton DB {}", db0));
    return c.outcome(fmt::format("DB {} and singleton DB {}", db, db0));
}

Outcome embedding_fidelity() {
    Checks c;
    auto reconstruct = [](const DistanceMatrix& d, const Embedding& e) {
        double worst = 0;
        for (std::size_t i = 0; i < d.size(); ++i)
            for (std::size_t j = 0; j < d.size(); ++j) {
                const double dx = e.coords[i][0] - e.coords[j][0], dy = e.coords[i][1] - e.coords[j][1];
                worst = std::max(worst, std::abs(std::sqrt(dx * dx + dy * dy) - d(i, j)));
            }
        return worst;
    };
    DistanceMatrix tri{{"a", "b", "c"}, {0, 3, 4, 3, 0, 5, 4, 5, 0}};
    const double tri_err = reconstruct(tri, classical_mds(tri));
    c.expect(tri_err <= 1e-6, fmt::format("triangle error {:.3g}", tri_err));

    std::mt19937_64 gen(818);
    std::uniform_real_distribution<double> u(-10, 10);
    double rel_worst = 0;
    for (int s = 0; s < 20; ++s) {
        const std::size_t n = 5 + gen() % 30;
        std::vector<std::pair<double, double>> p(n);
        for (auto& q : p) q = {u(gen), u(gen)};
        DistanceMatrix d;
        d.values.assign(n * n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            d.keys.push_back(fmt::format("p{}", i));
            for (std::size_t j = 0; j < n; ++j) d.values[i * n + j] = std::hypot(p[i].first - p[j].first, p[i].second - p[j].second);
        }
        const double dmax = *std::max_element(d.values.begin(), d.values.end());
        const double rel = reconstruct(d, classical_mds(d)) / dmax;
        rel_worst = std::max(rel_worst, rel);
        c.expect(rel <= 1e-6, fmt::format("set {} relative error {:.3g}", s, rel));
    }
    return c.outcome(fmt::format("triangle error {:.3g}, planar sets max relative error {:.3g}", tri_err, rel_worst));
}

Outcome synthetic_reproduction() {
    Checks c;
    // Co-spiking languages are interleaved with flat ones so that adjacency is not given by input order.
    const std::size_t shared_week = 60, single_week = 30;
    const std::vector<std::size_t> co_spiking{0, 2, 4};
    testing::SyntheticOptions opts;
    opts.spikes = {{shared_week, co_spiking, 100}, {single_week, {3}, 100}};
    const auto corpus = testing::synthetic_corpus(opts);
    auto co = [&](std::size_t l) { return std::find(co_spiking.begin(), co_spiking.end(), l) != co_spiking.end(); };

    // (a) smoothed within-deviation peaks at the injected weeks
    const auto smoothed = smooth(within_language_deviation(corpus), 3);
    auto peak_at = [&](std::size_t row, std::size_t week) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < smoothed.deviation.cols(); ++t)
            if (smoothed.deviation(row, t)) best = std::max(best, *smoothed.deviation(row, t));
        return smoothed.deviation(row, week) && std::abs(*smoothed.deviation(row, week) - best) <= 1e-12;
    };
    for (auto l : co_spiking) c.expect(peak_at(l, shared_week), fmt::format("(a) language {} peak", l));
    c.expect(peak_at(3, single_week), "(a) single-language peak");

    // (b) Ward leaf order keeps the co-spiking languages adjacent
    const auto linkage = ward_linkage(dense_rows(smoothed, MatrixPart::deviation, 0.0));
    const auto order = leaf_order(linkage);
    std::vector<std::size_t> pos;
    for (std::size_t p = 0; p < order.size(); ++p)
        if (co(order[p])) pos.push_back(p);
    c.expect(pos.size() == 3 && pos.back() - pos.front() == 2, "(b) co-spiking languages not adjacent");

    // (c) k = 2 separates spiking from flat windows, flat cluster WCSS 0
    const auto anchor = corpus.week_axis[shared_week].monday();
    const auto windows = extract_event_windows(corpus, anchor, 4, 4).windows;
    const auto report = kmeans_dtw(windows, {.k = 2, .seed = 42});
    const auto spike_cluster = report.assignments.at("de");
    for (const auto& w : windows) {
        const bool spiking = co(static_cast<std::size_t>(
            std::find(opts.languages.begin(), opts.languages.end(), w.label) - opts.languages.begin()));
        c.expect((report.assignments.at(w.label) == spike_cluster) == spiking, "(c) " + w.label + " misassigned");
    }
    const auto flat_cluster = 1 - spike_cluster;
    c.expect(report.per_cluster_wcss[flat_cluster] == 0.0,
             fmt::format("(c) flat WCSS {}", report.per_cluster_wcss[flat_cluster]));

    // (d) well-formed SVG set with correct cell counts
    std::size_t defined = 0;
    for (std::size_t r = 0; r < smoothed.deviation.rows(); ++r)
        for (std::size_t t = 0; t < smoothed.deviation.cols(); ++t) defined += smoothed.magnitude(r, t) && smoothed.deviation(r, t);
    RenderSpec spec;
    spec.row_order = order;
    const auto heat = testing::parse_xml(render_expression_heatmap(smoothed, spec));
    c.expect(heat->by_id_prefix("cell-").size() == defined, "(d) heatmap cell count");
    c.expect(std::stod(heat->attr("width")) == 160 + spec.cell_width * static_cast<double>(corpus.weeks()), "(d) heatmap width");
    const auto share = smooth(market_share_deviation(corpus), 6);
    c.expect(testing::parse_xml(render_expression_heatmap(share, {}))->by_id_prefix("cell-").size() == 6 * 120,
             "(d) share heatmap cell count");
    std::vector<std::string> labels;
    for (const auto& s : corpus.series) labels.push_back(s.language);
    c.expect(testing::parse_xml(render_dendrogram(linkage, labels))->by_class("bracket").size() == 5, "(d) dendrogram");
    const auto lines = testing::parse_xml(render_cluster_lines(windows, report));
    c.expect(lines->by_id_prefix("subplot-").size() == 2 && lines->by_class("member").size() == windows.size(),
             "(d) cluster lines");
    c.expect(testing::parse_xml(render_pair_comparison(corpus, corpus.week_axis[single_week].monday(), anchor, 4, 4))
                     ->by_class("pair")
                     .size() == 6,
             "(d) pair comparison");
    const auto vectors = window_vectors(corpus, 6, 1);
    const auto dist = cosine_distance_matrix(vectors.vectors);
    const auto sim = testing::parse_xml(render_similarity_matrix(dist));
    std::size_t covered = 0;
    for (const auto& rect : sim->by_class("cells").front()->children) covered += std::stoul(rect->attr("width"));
    c.expect(covered == dist.size() * dist.size(), "(d) similarity cells");
    std::vector<std::string> keys = dist.keys;
    const auto scatter = testing::parse_xml(render_embedding_scatter(classical_mds(dist), keys));
    c.expect(scatter->by_class("point").size() == keys.size() && scatter->by_class("timeflow").size() == keys.size() - 1,
             "(d) scatter");
    return c.outcome(fmt::format("peaks at weeks {} and {}, leaf order [{}], k=2 split with flat WCSS 0, {} heatmap cells",
                                 shared_week, single_week, fmt::join(order, ", "), defined));
}

Outcome reference_dataset() {
    const char* env = std::getenv("ATTN_REFERENCE_DATA");
    if (!env || !fs::exists(env)) return {Verdict::skip, "set ATTN_REFERENCE_DATA to the published corpus JSON or record directory"};
    Corpus corpus;
    if (fs::is_directory(env)) {
        std::vector<DailyRecord> records;
        for (const auto& e : fs::recursive_directory_iterator(env)) {
            const auto ext = e.path().extension();
            if (!e.is_regular_file() || (ext != ".csv" && ext != ".jsonl")) continue;
            auto part = read_records_file(e.path());
            records.insert(records.end(), part.begin(), part.end());
        }
        corpus = align_corpus(aggregate_all(records));
    } else {
        corpus = load_corpus(env);
    }
    Checks c;
    double peak = 0;
    for (const auto& s : corpus.series)
        for (std::size_t t = 0; t < s.values.size(); ++t)
            if (!s.missing[t]) peak = std::max(peak, s.values[t]);
    c.expect(std::abs(peak * 100 - 2.06) <= 0.1, fmt::format("peak weekly frequency {:.3f}%", peak * 100));

    const auto smoothed = smooth(within_language_deviation(corpus), 3);
    std::size_t in_window = 0;
    for (std::size_t r = 0; r < smoothed.row_keys.size(); ++r) {
        std::optional<std::size_t> arg;
        for (std::size_t t = 0; t < smoothed.deviation.cols(); ++t)
            if (smoothed.deviation(r, t) && (!arg || *smoothed.deviation(r, t) > *smoothed.deviation(r, *arg))) arg = t;
        if (!arg) continue;
        const auto ymd = std::chrono::year_month_day{smoothed.week_axis[*arg].monday()};
        const int year = static_cast<int>(ymd.year());
        const unsigned month = static_cast<unsigned>(ymd.month());
        in_window += (year == 2014 || year == 2022) && (month == 2 || month == 3);
    }
    c.expect(smoothed.row_keys.size() == 28, fmt::format("{} language rows", smoothed.row_keys.size()));
    c.expect(in_window >= 26, fmt::format("{} of {} peaks in Feb-Mar 2014/2022", in_window, smoothed.row_keys.size()));
    return c.outcome(fmt::format("peak {:.3f}%, {} of {} peaks in Feb-Mar 2014/2022", peak * 100, in_window,
                                 smoothed.row_keys.size()));
}

} // namespace

int main(int argc, char** argv) {
    const fs::path fixtures = argc > 1 ? fs::path(argv[1]) : fs::path(ATTN_FIXTURE_DIR);
    criterion("deviation-correctness", 1, deviation_correctness);
    criterion("invariance-suite", 10, invariance_suite);
    criterion("dtw-oracle", 10, dtw_oracle);
    criterion("ward-oracle", 10, ward_oracle);
    criterion("kmeans-properties", 30, [&] { return kmeans_properties(fixtures); });
    criterion("davies-bouldin-hand-case", 1, davies_bouldin_hand);
    criterion("embedding-fidelity", 5, embedding_fidelity);
    criterion("synthetic-reproduction", 30, synthetic_reproduction);
    criterion("reference-dataset", 300, reference_dataset);
    std::cout << (g_failed == 0 ? "all criteria met" : fmt::format("{} criterion/criteria failed", g_failed)) << std::endl;
    return g_failed == 0 ? 0 : 1;
}
