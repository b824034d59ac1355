#include "attn/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <set>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "attn/clustering.hpp"
#include "attn/config.hpp"
#include "attn/csv.hpp"
#include "attn/error.hpp"
#include "attn/expression.hpp"
#include "attn/fetch.hpp"
#include "attn/fsio.hpp"
#include "attn/geometry.hpp"
#include "attn/ingest.hpp"
#include "attn/render.hpp"

namespace attn::cli {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Flags {
    std::string config, corpus, out, kind;
    std::vector<std::string> inputs;
    std::string mode = "within";
    std::string metric = "cosine";
    std::string method = "mds";
    std::string features = "deviation";
    std::string color = "deviation";
    std::string anchor, anchor_b, start, end;
    std::string centroid, normalization, vector_normalization;
    int smooth = 1, pre = 0, post = 0, window = 0, stride = 0, restarts = 1, dims = 2, parallel = 4;
    std::size_t k = 0, kmin = 0, kmax = 0;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct Context {
    Flags flags;
    CLI::App* sub = nullptr;
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;

    bool given(const std::string& name) const {
        const auto* o = sub->get_option_no_throw(name);
        return o && o->count() > 0;
    }
    void warn(const std::string& msg) const { *err << "warning: " << msg << "\n"; }
};

const std::string& need(const std::string& value, const char* flag) {
    if (value.empty()) throw UsageError(std::string(flag) + " is required");
    return value;
}

const std::string& single_input(const Context& ctx) {
    if (ctx.flags.inputs.size() != 1) throw UsageError("exactly one --input is required");
    return ctx.flags.inputs.front();
}

void emit(const Context& ctx, std::string_view text) {
    if (ctx.flags.out.empty()) *ctx.out << text;
    else write_text_file(ctx.flags.out, text);
}

ExpressionMode mode_of(const Context& ctx) {
    return parse_expression_mode(ctx.flags.mode);
}

RunConfig effective_config(const Context& ctx) {
    const Flags& f = ctx.flags;
    RunConfig cfg = f.config.empty() ? default_config() : load_config(f.config);
    if (ctx.given("--smooth")) {
        if (ctx.given("--mode") && mode_of(ctx) == ExpressionMode::share) cfg.smoothing.share = f.smooth;
        else if (ctx.given("--mode")) cfg.smoothing.within = f.smooth;
        else cfg.smoothing.within = cfg.smoothing.share = f.smooth;
    }
    auto& c = cfg.clustering;
    if (ctx.given("--k")) c.k_2014 = c.k_2022 = f.k;
    if (ctx.given("--seed")) c.seed = f.seed;
    if (ctx.given("--restarts")) c.restarts = f.restarts;
    if (ctx.given("--pre") || ctx.given("--post")) {
        if (ctx.given("--pre")) c.pre_weeks = f.pre;
        if (ctx.given("--post")) c.post_weeks = f.post;
        c.anchor_windows.clear();
    }
    if (ctx.given("--kmin")) c.k_min = f.kmin;
    if (ctx.given("--kmax")) c.k_max = f.kmax;
    if (ctx.given("--threads")) c.threads = f.threads;
    if (ctx.given("--window")) cfg.window.vector_weeks = f.window;
    if (ctx.given("--stride")) cfg.window.stride = f.stride;
    if (ctx.given("--centroid") || ctx.given("--normalization") || ctx.given("--vector-normalization")) {
        ojson patch{{"version", kConfigVersion}};
        if (ctx.given("--centroid")) patch["clustering"]["centroid"] = f.centroid;
        if (ctx.given("--normalization")) patch["clustering"]["normalization"] = f.normalization;
        if (ctx.given("--vector-normalization")) patch["window"]["normalization"] = f.vector_normalization;
        cfg = config_from_json(nlohmann::json::parse(patch.dump()), cfg);
    }
    validate_config(cfg);
    return cfg;
}

int smoothing_for(const RunConfig& cfg, ExpressionMode mode) {
    return mode == ExpressionMode::within ? cfg.smoothing.within : cfg.smoothing.share;
}

Date resolve_anchor(const RunConfig& cfg, const std::string& text) {
    try {
        if (text.size() == 10 && text[4] == '-' && text[7] == '-') return parse_date(text);
        return cfg.anchor(text);
    } catch (const ContractError& e) {
        throw UsageError(e.what());
    }
}

Corpus corpus_of(const Context& ctx) {
    return load_corpus(need(ctx.flags.corpus, "--corpus"));
}

ExpressionMatrix expression_for(const Corpus& corpus, ExpressionMode mode, int window) {
    auto m = mode == ExpressionMode::within ? within_language_deviation(corpus) : market_share_deviation(corpus);
    return window > 1 ? smooth(m, window) : m;
}

// Language codes when they are unique, language:keyword otherwise.
std::vector<std::string> row_labels(const std::vector<SeriesKey>& keys) {
    std::map<std::string, int> seen;
    for (const auto& k : keys) ++seen[k.language];
    std::vector<std::string> out;
    for (const auto& k : keys) out.push_back(seen[k.language] > 1 ? k.label() : k.language);
    return out;
}

Linkage deviation_linkage(const ExpressionMatrix& m) {
    return ward_linkage(dense_rows(m, MatrixPart::deviation, 0.0));
}

// Missing log-frequencies are imputed at the global minimum: "no data" sits
// with the quietest observed weeks rather than at an arbitrary 0 decades.
Linkage magnitude_linkage(const ExpressionMatrix& m) {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m.magnitude.rows(); ++r)
        for (std::size_t t = 0; t < m.magnitude.cols(); ++t)
            if (const auto& c = m.magnitude(r, t)) lo = std::min(lo, *c);
    if (!std::isfinite(lo)) lo = 0;
    return ward_linkage(dense_rows(m, MatrixPart::magnitude, lo));
}

std::string heatmap_svg(const ExpressionMatrix& m, const RenderConfig& rc, HeatmapColor color,
                        const std::string& title) {
    RenderSpec spec = rc.spec;
    if (spec.title.empty()) spec.title = title;
    if (!spec.row_order && rc.linkage_order && m.row_keys.size() > 1)
        spec.row_order = leaf_order(color == HeatmapColor::deviation ? deviation_linkage(m) : magnitude_linkage(m));
    return render_expression_heatmap(m, spec, color);
}

std::string zscore_svg(const Corpus& corpus, const RenderConfig& rc, const std::string& title) {
    std::vector<SeriesKey> keys;
    for (const auto& s : corpus.series) keys.push_back(s.key());
    RenderSpec spec = rc.spec;
    spec.row_order.reset();
    if (spec.title.empty()) spec.title = title;
    return render_value_heatmap(row_labels(keys), corpus.week_axis, zscore_log(corpus), default_color_stops(3.0), spec);
}

std::vector<EventWindow> windows_for(const Context& ctx, const Corpus& corpus, const Date& anchor,
                                     const RunConfig& cfg) {
    const auto span = cfg.span_for(anchor);
    auto ex = extract_event_windows(corpus, anchor, span.pre_weeks, span.post_weeks, cfg.clustering.normalization);
    for (const auto& e : ex.excluded) ctx.warn("excluded " + e.key.label() + ": " + e.reason);
    return std::move(ex.windows);
}

// Best of cc.restarts runs with seeds seed, seed+1, ... by total WCSS.
ClusterReport cluster_windows(const std::vector<EventWindow>& windows, std::size_t k, const ClusteringConfig& cc) {
    KMeansOptions options;
    options.k = k;
    options.threads = cc.threads;
    options.centroid = cc.centroid;
    std::optional<ClusterReport> best;
    for (int r = 0; r < cc.restarts; ++r) {
        options.seed = cc.seed + static_cast<std::uint64_t>(r);
        auto report = kmeans_dtw(windows, options);
        if (!best || report.total_wcss < best->total_wcss) best = std::move(report);
    }
    if (k >= 2) best->davies_bouldin = davies_bouldin(windows, *best);
    return *best;
}

Evaluation evaluate_windows(const std::vector<EventWindow>& windows, const ClusteringConfig& cc) {
    if (windows.size() < cc.k_min)
        throw ContractError(fmt::format("{} event windows cannot form {} clusters", windows.size(), cc.k_min));
    KMeansOptions base;
    base.threads = cc.threads;
    base.centroid = cc.centroid;
    return evaluate_k(windows, cc.k_min, std::min(cc.k_max, windows.size()), cc.seed, cc.restarts, base);
}

Evaluation evaluation_from_csv(std::string_view text) {
    Evaluation ev;
    const auto rows = csv::parse(text);
    if (rows.empty() || rows.front().fields != std::vector<std::string>{"k", "total_wcss", "davies_bouldin", "best_seed"})
        throw FormatError("evaluation CSV must start with k,total_wcss,davies_bouldin,best_seed");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& f = rows[i].fields;
        if (f.size() != 4) throw attn::ParseError(rows[i].line, "row", "expected 4 fields");
        try {
            EvaluationRow row;
            row.k = std::stoul(f[0]);
            row.total_wcss = std::stod(f[1]);
            if (f[2] == "inf") row.davies_bouldin = std::numeric_limits<double>::infinity();
            else if (!f[2].empty()) row.davies_bouldin = std::stod(f[2]);
            row.best_seed = std::stoull(f[3]);
            ev.rows.push_back(row);
        } catch (const std::logic_error&) {
            throw attn::ParseError(rows[i].line, "row", "not a number");
        }
    }
    return ev;
}

std::vector<WindowVector> nonzero_vectors(const WindowVectors& v, const std::function<void(const std::string&)>& warn) {
    std::vector<WindowVector> out;
    for (const auto& w : v.vectors) {
        if (w.is_zero()) warn("dropped all-zero window " + w.start_week.label());
        else out.push_back(w);
    }
    return out;
}

std::string describe_smoothing(int window) {
    return window > 1 ? fmt::format(", {}-week smoothing", window) : std::string{};
}

// ---- subcommands ------------------------------------------------------------

void cmd_fetch(const Context& ctx) {
    const auto cfg = effective_config(ctx);
    if (!cfg.endpoint) throw ContractError("config has no endpoint");
    if (cfg.keywords.empty()) throw ContractError("config has no keywords");
    DateRange range;
    if (cfg.date_range) range = *cfg.date_range;
    else if (ctx.flags.start.empty() || ctx.flags.end.empty()) throw UsageError("--start and --end are required");
    if (!ctx.flags.start.empty()) range.start = parse_date(ctx.flags.start);
    if (!ctx.flags.end.empty()) range.end = parse_date(ctx.flags.end);
    if (range.end < range.start) throw ContractError("--end is before --start");

    RemoteSource source(*cfg.endpoint);
    const auto batches = fetch_many(source, cfg.keywords, range, static_cast<unsigned>(std::max(1, ctx.flags.parallel)));
    std::vector<DailyRecord> all;
    for (const auto& b : batches) all.insert(all.end(), b.begin(), b.end());
    emit(ctx, records_to_jsonl(all));
    *ctx.err << fmt::format("fetched {} records for {} keywords ({} network requests)\n", all.size(),
                            cfg.keywords.size(), source.network_requests());
}

void cmd_ingest(const Context& ctx) {
    if (ctx.flags.inputs.empty()) throw UsageError("--input is required");
    std::vector<DailyRecord> records;
    for (const auto& path : ctx.flags.inputs) {
        auto part = read_records_file(path);
        records.insert(records.end(), part.begin(), part.end());
    }
    if (records.empty()) throw ContractError("no records in input");
    const auto corpus = align_corpus(aggregate_all(records));
    validate_corpus(corpus);
    emit(ctx, corpus_to_json(corpus));
    *ctx.err << fmt::format("{} series over {} weeks ({} to {})\n", corpus.rows(), corpus.weeks(),
                            corpus.week_axis.front().label(), corpus.week_axis.back().label());
}

void cmd_expression(const Context& ctx) {
    const auto cfg = effective_config(ctx);
    const auto mode = mode_of(ctx);
    const auto m = expression_for(corpus_of(ctx), mode, smoothing_for(cfg, mode));
    for (const auto& e : m.excluded) ctx.warn("excluded " + e.key.label() + ": " + e.reason);
    if (ctx.flags.out.empty()) {
        *ctx.out << expression_to_csv(m, MatrixPart::deviation);
        return;
    }
    const std::string prefix = ctx.flags.out;
    write_text_file(prefix + ".magnitude.csv", expression_to_csv(m, MatrixPart::magnitude));
    write_text_file(prefix + ".deviation.csv", expression_to_csv(m, MatrixPart::deviation));
    write_text_file(prefix + ".json", expression_to_json(m));
}

void cmd_cluster_langs(const Context& ctx) {
    const auto cfg = effective_config(ctx);
    const auto corpus = corpus_of(ctx);
    Linkage linkage;
    std::vector<SeriesKey> keys;
    if (ctx.flags.features == "deviation") {
        const auto mode = mode_of(ctx);
        const auto m = expression_for(corpus, mode, smoothing_for(cfg, mode));
        linkage = deviation_linkage(m);
        keys = m.row_keys;
    } else if (ctx.flags.features == "magnitude") {
        const auto m = log_frequency_matrix(corpus);
        linkage = magnitude_linkage(m);
        keys = m.row_keys;
    } else {
        throw UsageError("--features must be deviation or magnitude");
    }
    emit(ctx, linkage_to_json(linkage, row_labels(keys)));
}

void cmd_cluster_windows(const Context& ctx) {
    const auto cfg = effective_config(ctx);
    const auto anchor = resolve_anchor(cfg, need(ctx.flags.anchor, "--anchor"));
    const auto windows = windows_for(ctx, corpus_of(ctx), anchor, cfg);
    const std::size_t k = ctx.given("--k") ? ctx.flags.k : cfg.clustering.k_2022;
    emit(ctx, cluster_report_to_json(cluster_windows(windows, k, cfg.clustering)));
}

void cmd_evaluate(const Context& ctx) {
    const auto cfg = effective_config(ctx);
    const auto anchor = resolve_anchor(cfg, need(ctx.flags.anchor, "--anchor"));
    const auto windows = windows_for(ctx, corpus_of(ctx), anchor, cfg);
    const auto ev = evaluate_windows(windows, cfg.clustering);
    for (auto k : ev.wcss_increases) ctx.warn(fmt::format("best WCSS at k={} exceeds k={}", k, k - 1));
    emit(ctx, evaluation_to_csv(ev));
}

void cmd_vectors(const Context& ctx) {
    const auto cfg = effective_config(ctx);
    const auto v = window_vectors(corpus_of(ctx), cfg.window.vector_weeks, cfg.window.stride, cfg.window.normalization);
    std::size_t low = 0;
    for (const auto& w : v.vectors) low += w.low_coverage;
    if (low) ctx.warn(fmt::format("{} of {} windows have coverage below 0.5", low, v.vectors.size()));
    emit(ctx, vectors_to_csv(v));
}

void cmd_simmatrix(const Context& ctx) {
    if (ctx.flags.metric != "cosine") throw UsageError("--metric must be cosine");
    WindowVectors v;
    if (!ctx.flags.inputs.empty()) {
        v = vectors_from_csv(read_text_file(single_input(ctx)));
    } else {
        const auto cfg = effective_config(ctx);
        v = window_vectors(corpus_of(ctx), cfg.window.vector_weeks, cfg.window.stride, cfg.window.normalization);
    }
    emit(ctx, distance_matrix_to_csv(cosine_distance_matrix(v.vectors)));
}

void cmd_embed(const Context& ctx) {
    if (ctx.flags.method != "mds") throw UsageError("--method must be mds");
    MdsOptions options;
    options.dims = ctx.flags.dims;
    const auto e = classical_mds(distance_matrix_from_csv(read_text_file(single_input(ctx))), options);
    for (const auto& w : e.warnings) ctx.warn(w);
    emit(ctx, embedding_to_csv(e));
}

void cmd_render(const Context& ctx) {
    const auto cfg = effective_config(ctx);
    const std::string& kind = need(ctx.flags.kind, "--kind");
    std::string svg;
    if (kind == "heatmap") {
        const auto color = ctx.flags.color == "magnitude" ? HeatmapColor::magnitude : HeatmapColor::deviation;
        ExpressionMatrix m;
        if (!ctx.flags.inputs.empty()) {
            m = expression_from_json(read_text_file(single_input(ctx)));
        } else {
            const auto mode = mode_of(ctx);
            m = expression_for(corpus_of(ctx), mode, smoothing_for(cfg, mode));
        }
        svg = heatmap_svg(m, cfg.render, color, "");
    } else if (kind == "frequency") {
        svg = heatmap_svg(log_frequency_matrix(corpus_of(ctx)), cfg.render, HeatmapColor::magnitude, "");
    } else if (kind == "zscore") {
        svg = zscore_svg(corpus_of(ctx), cfg.render, "");
    } else if (kind == "totals") {
        svg = render_keyword_totals(keyword_totals(corpus_of(ctx)));
    } else if (kind == "dendrogram") {
        const auto l = linkage_from_json(read_text_file(single_input(ctx)));
        svg = render_dendrogram(l.linkage, l.leaves);
    } else if (kind == "clusters") {
        const auto report = cluster_report_from_json(read_text_file(single_input(ctx)));
        const auto anchor = resolve_anchor(cfg, need(ctx.flags.anchor, "--anchor"));
        svg = render_cluster_lines(windows_for(ctx, corpus_of(ctx), anchor, cfg), report);
    } else if (kind == "pair") {
        const auto a = resolve_anchor(cfg, need(ctx.flags.anchor, "--anchor"));
        const auto b = resolve_anchor(cfg, need(ctx.flags.anchor_b, "--anchor-b"));
        const auto span = cfg.span_for(a);
        svg = render_pair_comparison(corpus_of(ctx), a, b, span.pre_weeks, span.post_weeks);
    } else if (kind == "simmatrix") {
        svg = render_similarity_matrix(distance_matrix_from_csv(read_text_file(single_input(ctx))));
    } else if (kind == "scatter") {
        const auto e = embedding_from_csv(read_text_file(single_input(ctx)));
        svg = render_embedding_scatter(e, e.keys);
    } else if (kind == "evaluation") {
        svg = render_evaluation(evaluation_from_csv(read_text_file(single_input(ctx))));
    } else {
        throw UsageError("unknown --kind '" + kind + "'");
    }
    emit(ctx, svg);
}

// ---- reproduce --------------------------------------------------------------

class Reproduction {
public:
    Reproduction(fs::path dir, const Context& ctx) : dir_(std::move(dir)), ctx_(ctx) {}

    void write(const std::string& rel, const std::string& content, std::vector<std::string> inputs) {
        write_text_file(dir_ / rel, content);
        artifacts_[rel] = ojson{{"path", rel}, {"sha256", sha256_hex(content)}, {"inputs", std::move(inputs)}};
    }

    // Runs one stage; a stage the data cannot support is recorded and skipped.
    template <typename F>
    void stage(const std::string& name, F&& fn) {
        try {
            fn();
        } catch (const ContractError& e) {
            skip(name, e.what());
        } catch (const NumericError& e) {
            skip(name, e.what());
        }
    }

    void warn(const std::string& msg) {
        warnings_.push_back(msg);
        ctx_.warn(msg);
    }

    ojson artifacts() const {
        ojson a = ojson::array();
        for (const auto& [path, entry] : artifacts_) a.push_back(entry);
        return a;
    }
    const ojson& skipped() const { return skipped_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    void skip(const std::string& name, const std::string& reason) {
        skipped_.push_back({{"stage", name}, {"reason", reason}});
        ctx_.warn("skipped " + name + ": " + reason);
    }

    fs::path dir_;
    const Context& ctx_;
    std::map<std::string, ojson> artifacts_;
    ojson skipped_ = ojson::array();
    std::vector<std::string> warnings_;
};

void cmd_reproduce(const Context& ctx) {
    const auto cfg = effective_config(ctx);
    const std::string& corpus_path = need(ctx.flags.corpus, "--corpus");
    const fs::path dir = need(ctx.flags.out, "--out");
    const std::string corpus_bytes = read_text_file(corpus_path);
    const Corpus corpus = corpus_from_json(corpus_bytes);
    validate_corpus(corpus);
    std::error_code ec;
    fs::create_directories(dir / "data", ec);
    if (ec) throw IoError("cannot create " + (dir / "data").string() + ": " + ec.message());

    Reproduction run(dir, ctx);
    const std::vector<std::string> from_corpus{"corpus"};

    for (const auto mode : {ExpressionMode::within, ExpressionMode::share}) {
        const std::string name = to_string(mode);
        run.stage(name + " expression", [&] {
            const int window = smoothing_for(cfg, mode);
            const auto m = expression_for(corpus, mode, window);
            for (const auto& e : m.excluded) run.warn(name + ": excluded " + e.key.label() + ": " + e.reason);
            const std::string base = "data/" + name;
            run.write(base + ".json", expression_to_json(m), from_corpus);
            run.write(base + ".magnitude.csv", expression_to_csv(m, MatrixPart::magnitude), from_corpus);
            run.write(base + ".deviation.csv", expression_to_csv(m, MatrixPart::deviation), from_corpus);
            const std::string title = (mode == ExpressionMode::within ? "Within-language deviation"
                                                                       : "Market-share deviation") +
                                      describe_smoothing(window);
            run.write(name + "_heatmap.svg", heatmap_svg(m, cfg.render, HeatmapColor::deviation, title), {base + ".json"});
            const auto linkage = deviation_linkage(m);
            run.write("data/linkage_" + name + ".json", linkage_to_json(linkage, row_labels(m.row_keys)), {base + ".json"});
            run.write("dendrogram_" + name + ".svg", render_dendrogram(linkage, row_labels(m.row_keys), title),
                      {"data/linkage_" + name + ".json"});
        });
    }

    run.stage("frequency", [&] {
        const auto m = log_frequency_matrix(corpus);
        run.write("data/frequency.magnitude.csv", expression_to_csv(m, MatrixPart::magnitude), from_corpus);
        run.write("frequency_heatmap.svg",
                  heatmap_svg(m, cfg.render, HeatmapColor::magnitude, "Weekly relative frequency (log10)"), from_corpus);
        const auto linkage = magnitude_linkage(m);
        run.write("data/linkage_frequency.json", linkage_to_json(linkage, row_labels(m.row_keys)), from_corpus);
        run.write("dendrogram_frequency.svg",
                  render_dendrogram(linkage, row_labels(m.row_keys), "Weekly relative frequency (log10)"),
                  {"data/linkage_frequency.json"});
    });

    run.stage("zscore", [&] {
        run.write("zscore_heatmap.svg", zscore_svg(corpus, cfg.render, "Per-language z-score of log10 frequency"),
                  from_corpus);
    });

    run.stage("keyword totals", [&] {
        run.write("keyword_totals.svg", render_keyword_totals(keyword_totals(corpus), "Summed frequency per keyword"),
                  from_corpus);
    });

    struct Event {
        std::string name;
        std::string anchor;
        std::size_t k;
    };
    for (const Event& ev : {Event{"2014", "invasion_2014", cfg.clustering.k_2014},
                            Event{"2022", "invasion_2022", cfg.clustering.k_2022}}) {
        run.stage("clusters " + ev.name, [&] {
            const Date anchor = cfg.anchor(ev.anchor);
            const auto windows = windows_for(ctx, corpus, anchor, cfg);
            const auto report = cluster_windows(windows, ev.k, cfg.clustering);
            const std::string data = "data/clusters_" + ev.name + ".json";
            run.write(data, cluster_report_to_json(report), from_corpus);
            run.write("clusters_" + ev.name + ".svg",
                      render_cluster_lines(windows, report,
                                           fmt::format("Event windows around {} (k = {})", format_date(anchor), ev.k)),
                      {data});
        });
        run.stage("evaluation " + ev.name, [&] {
            const auto windows = windows_for(ctx, corpus, cfg.anchor(ev.anchor), cfg);
            const auto evaluation = evaluate_windows(windows, cfg.clustering);
            for (auto k : evaluation.wcss_increases)
                run.warn(fmt::format("evaluation {}: best WCSS at k={} exceeds k={}", ev.name, k, k - 1));
            const std::string data = "data/evaluation_" + ev.name + ".csv";
            run.write(data, evaluation_to_csv(evaluation), from_corpus);
            run.write("evaluation_" + ev.name + ".svg",
                      render_evaluation(evaluation, "Cluster count evaluation, " + ev.name), {data});
        });
    }

    run.stage("pair comparison", [&] {
        run.write("pair_comparison.svg",
                  render_pair_comparison(corpus, cfg.anchor("comparison_2014"), cfg.anchor("invasion_2022"),
                                         cfg.span_for(cfg.anchor("comparison_2014")).pre_weeks,
                                         cfg.span_for(cfg.anchor("comparison_2014")).post_weeks,
                                         "Attention around the 2014 and 2022 anchors"),
                  from_corpus);
    });

    run.stage("window geometry", [&] {
        const auto v = window_vectors(corpus, cfg.window.vector_weeks, cfg.window.stride, cfg.window.normalization);
        run.write("data/vectors.csv", vectors_to_csv(v), from_corpus);
        const auto dist = cosine_distance_matrix(nonzero_vectors(v, [&](const std::string& m) { run.warn(m); }));
        run.write("data/distances.csv", distance_matrix_to_csv(dist), {"data/vectors.csv"});
        const std::string title = fmt::format("Cosine distance of {}-week windows", cfg.window.vector_weeks);
        run.write("similarity_matrix.svg", render_similarity_matrix(dist, 2.0, title), {"data/distances.csv"});
        const auto e = classical_mds(dist);
        for (const auto& w : e.warnings) run.warn("embedding: " + w);
        run.write("data/embedding.csv", embedding_to_csv(e), {"data/distances.csv"});
        run.write("embedding.svg", render_embedding_scatter(e, e.keys, "Classical MDS of window vectors"),
                  {"data/embedding.csv"});
    });

    ojson manifest;
    manifest["version"] = 1;
    manifest["config"] = config_to_json(cfg);
    ojson inputs;
    inputs["corpus"] = {{"path", corpus_path}, {"sha256", sha256_hex(corpus_bytes)}};
    if (!ctx.flags.config.empty())
        inputs["config"] = {{"path", ctx.flags.config}, {"sha256", sha256_hex(read_text_file(ctx.flags.config))}};
    manifest["inputs"] = inputs;
    manifest["artifacts"] = run.artifacts();
    manifest["skipped"] = run.skipped();
    manifest["warnings"] = run.warnings();
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
    *ctx.out << fmt::format("{} artifacts written to {}\n", manifest["artifacts"].size(), dir.string());
}

// ---- wiring -----------------------------------------------------------------

struct Command {
    CLI::App* app;
    void (*fn)(const Context&);
};

void add_config(CLI::App* s, Flags& f) {
    s->add_option("--config", f.config, "Run config JSON");
}
void add_corpus(CLI::App* s, Flags& f) {
    s->add_option("--corpus", f.corpus, "Corpus JSON from `ingest`");
}
void add_out(CLI::App* s, Flags& f, const char* what) {
    s->add_option("--out", f.out, what);
}
void add_mode(CLI::App* s, Flags& f) {
    s->add_option("--mode", f.mode, "within | share")->check(CLI::IsMember({"within", "share"}));
    s->add_option("--smooth", f.smooth, "Smoothing window in weeks")->check(CLI::PositiveNumber);
}
void add_window_flags(CLI::App* s, Flags& f) {
    s->add_option("--anchor", f.anchor, "Anchor date YYYY-MM-DD or config anchor name");
    s->add_option("--pre", f.pre, "Weeks before the anchor week")->check(CLI::NonNegativeNumber);
    s->add_option("--post", f.post, "Weeks from the anchor week on")->check(CLI::NonNegativeNumber);
    s->add_option("--normalization", f.normalization, "mean_then_log | log_then_center");
}
void add_kmeans_flags(CLI::App* s, Flags& f) {
    s->add_option("--seed", f.seed, "Random seed");
    s->add_option("--restarts", f.restarts, "Runs per k, best WCSS kept")->check(CLI::PositiveNumber);
    s->add_option("--threads", f.threads, "Worker threads")->check(CLI::PositiveNumber);
    s->add_option("--centroid", f.centroid, "dba | medoid");
}
void add_vector_flags(CLI::App* s, Flags& f) {
    s->add_option("--window", f.window, "Window length in weeks")->check(CLI::PositiveNumber);
    s->add_option("--stride", f.stride, "Window stride in weeks")->check(CLI::PositiveNumber);
    s->add_option("--vector-normalization", f.vector_normalization, "raw | week_share");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Attention cartography from weekly 1-gram frequency series", "attn"};
    app.require_subcommand(1);
    Flags f;
    std::vector<Command> commands;
    auto sub = [&](const char* name, const char* desc, void (*fn)(const Context&)) {
        auto* s = app.add_subcommand(name, desc);
        commands.push_back({s, fn});
        return s;
    };

    auto* fetch = sub("fetch", "Download daily records for the configured keywords (JSONL)", cmd_fetch);
    add_config(fetch, f);
    fetch->add_option("--start", f.start, "First day YYYY-MM-DD");
    fetch->add_option("--end", f.end, "Last day YYYY-MM-DD");
    fetch->add_option("--parallel", f.parallel, "Concurrent downloads")->check(CLI::PositiveNumber);
    add_out(fetch, f, "Output JSONL (default stdout)");

    auto* ingest = sub("ingest", "Aggregate daily records into a weekly corpus", cmd_ingest);
    ingest->add_option("--input", f.inputs, "Record files (.csv or .jsonl)");
    add_out(ingest, f, "Corpus JSON (default stdout)");

    auto* expression = sub("expression", "Magnitude and deviation matrices", cmd_expression);
    add_config(expression, f);
    add_corpus(expression, f);
    add_mode(expression, f);
    add_out(expression, f, "Output prefix for .magnitude.csv, .deviation.csv and .json (default: deviation CSV on stdout)");

    auto* langs = sub("cluster-langs", "Ward linkage of language rows (JSON)", cmd_cluster_langs);
    add_config(langs, f);
    add_corpus(langs, f);
    add_mode(langs, f);
    langs->add_option("--features", f.features, "deviation | magnitude");
    add_out(langs, f, "Linkage JSON (default stdout)");

    auto* windows = sub("cluster-windows", "DTW k-means of event windows (JSON report)", cmd_cluster_windows);
    add_config(windows, f);
    add_corpus(windows, f);
    add_window_flags(windows, f);
    add_kmeans_flags(windows, f);
    windows->add_option("--k", f.k, "Cluster count")->check(CLI::PositiveNumber);
    add_out(windows, f, "Report JSON (default stdout)");

    auto* evaluate = sub("evaluate", "WCSS and Davies-Bouldin over a range of k (CSV)", cmd_evaluate);
    add_config(evaluate, f);
    add_corpus(evaluate, f);
    add_window_flags(evaluate, f);
    add_kmeans_flags(evaluate, f);
    evaluate->add_option("--kmin", f.kmin, "Smallest k")->check(CLI::PositiveNumber);
    evaluate->add_option("--kmax", f.kmax, "Largest k")->check(CLI::PositiveNumber);
    add_out(evaluate, f, "Evaluation CSV (default stdout)");

    auto* vectors = sub("vectors", "Sliding window attention vectors (CSV)", cmd_vectors);
    add_config(vectors, f);
    add_corpus(vectors, f);
    add_vector_flags(vectors, f);
    add_out(vectors, f, "Vectors CSV (default stdout)");

    auto* simmatrix = sub("simmatrix", "Pairwise window distances (CSV)", cmd_simmatrix);
    add_config(simmatrix, f);
    add_corpus(simmatrix, f);
    add_vector_flags(simmatrix, f);
    simmatrix->add_option("--input", f.inputs, "Vectors CSV");
    simmatrix->add_option("--metric", f.metric, "cosine");
    add_out(simmatrix, f, "Distance CSV (default stdout)");

    auto* embed = sub("embed", "Embed a distance matrix in the plane (CSV)", cmd_embed);
    embed->add_option("--input", f.inputs, "Distance CSV");
    embed->add_option("--method", f.method, "mds");
    embed->add_option("--dims", f.dims, "Output dimensions")->check(CLI::PositiveNumber);
    add_out(embed, f, "Coordinates CSV (default stdout)");

    auto* render = sub("render", "Render one SVG figure", cmd_render);
    add_config(render, f);
    add_corpus(render, f);
    add_mode(render, f);
    add_window_flags(render, f);
    render->add_option("--kind", f.kind,
                       "heatmap | frequency | zscore | totals | dendrogram | clusters | pair | simmatrix | scatter | evaluation");
    render->add_option("--input", f.inputs, "Input artifact for the chosen kind");
    render->add_option("--anchor-b", f.anchor_b, "Second anchor for --kind pair");
    render->add_option("--color", f.color, "deviation | magnitude (heatmap fill)");
    add_out(render, f, "SVG file (default stdout)");

    auto* reproduce = sub("reproduce", "Run the full pipeline into a directory with a manifest", cmd_reproduce);
    add_config(reproduce, f);
    add_corpus(reproduce, f);
    add_mode(reproduce, f);
    add_kmeans_flags(reproduce, f);
    add_vector_flags(reproduce, f);
    reproduce->add_option("--pre", f.pre, "Weeks before the anchor week")->check(CLI::NonNegativeNumber);
    reproduce->add_option("--post", f.post, "Weeks from the anchor week on")->check(CLI::NonNegativeNumber);
    reproduce->add_option("--normalization", f.normalization, "mean_then_log | log_then_center");
    reproduce->add_option("--k", f.k, "Cluster count for both events")->check(CLI::PositiveNumber);
    reproduce->add_option("--kmin", f.kmin, "Smallest k for evaluation")->check(CLI::PositiveNumber);
    reproduce->add_option("--kmax", f.kmax, "Largest k for evaluation")->check(CLI::PositiveNumber);
    add_out(reproduce, f, "Output directory");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : usage;
    }

    for (const auto& c : commands) {
        if (!c.app->parsed()) continue;
        Context ctx{f, c.app, &out, &err};
        try {
            c.fn(ctx);
            return ok;
        } catch (const UsageError& e) {
            err << "error: " << e.what() << "\n" << c.app->help();
            return usage;
        } catch (const IoError& e) {
            err << "error: " << e.what() << "\n";
            return io_error;
        } catch (const Error& e) {
            err << "error: " << e.what() << "\n";
            return data_error;
        } catch (const nlohmann::json::exception& e) {
            err << "error: " << e.what() << "\n";
            return data_error;
        }
    }
    return usage;
}

} // namespace attn::cli
