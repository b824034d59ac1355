#ifndef ATTN_CLUSTERING_HPP
#define ATTN_CLUSTERING_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "attn/expression.hpp"
#include "attn/ingest.hpp"

namespace attn {

// ---- Ward hierarchical clustering -----------------------------------------

// Leaves are nodes 0..n-1; the i-th merge creates node n+i.
struct Merge {
    std::size_t a = 0; // smaller node id
    std::size_t b = 0;
    double height = 0;
    std::size_t size = 0;
    bool operator==(const Merge&) const = default;
};

struct Linkage {
    std::vector<Merge> merges;
    std::size_t leaf_count = 0;
    bool operator==(const Linkage&) const = default;
};

// Agglomerative Ward clustering. Singleton distances are Euclidean; cluster
// distances follow the Lance-Williams Ward update on squared distances and
// heights are their square roots. Exact ties merge the lexicographically
// smallest (a, b) pair.
Linkage ward_linkage(const std::vector<std::vector<double>>& features);

// Throws ContractError when the merge list is not a valid binary tree.
void validate_linkage(const Linkage& linkage);

// Depth-first leaf order; at every node the child holding the lowest leaf index goes first.
std::vector<std::size_t> leaf_order(const Linkage& linkage);

std::string linkage_to_json(const Linkage& linkage, const std::vector<std::string>& leaves);
struct LabeledLinkage {
    Linkage linkage;
    std::vector<std::string> leaves;
};
LabeledLinkage linkage_from_json(std::string_view text);

// ---- Dynamic time warping -------------------------------------------------

// Unconstrained symmetric DTW with local cost |x_i - y_j|; endpoints anchored,
// steps (1,1), (1,0), (0,1) unweighted. Returns the cumulative cost.
double dtw_distance(std::span<const double> x, std::span<const double> y);

// Optimal warping path as (i, j) pairs from (0, 0) to (n-1, m-1).
std::vector<std::pair<std::size_t, std::size_t>> dtw_path(std::span<const double> x, std::span<const double> y);

// ---- Event windows --------------------------------------------------------

enum class WindowNormalization {
    mean_then_log,   // log10(f / mean f): mean of 10^v is 1
    log_then_center, // log10 f - mean(log10 f)
};

struct EventWindow {
    std::string label; // language, or language:keyword when the language repeats
    SeriesKey key;
    Date anchor;
    int pre_weeks = 0;
    int post_weeks = 0;
    std::vector<IsoWeek> weeks;
    std::vector<double> values;
};

struct WindowExtraction {
    std::vector<EventWindow> windows;
    std::vector<ExcludedRow> excluded;
};

// Weeks [anchor - pre, anchor + post) around the ISO week containing `anchor`.
// Rows with a missing or zero cell inside the window are excluded.
WindowExtraction extract_event_windows(const Corpus& corpus, const Date& anchor, int pre_weeks, int post_weeks,
                                       WindowNormalization norm = WindowNormalization::mean_then_log);

// Corpus columns of the weeks [anchor - pre, anchor + post). Throws
// ContractError when the anchor or any window week is off the axis.
std::vector<std::size_t> event_window_columns(const Corpus& corpus, const Date& anchor, int pre_weeks, int post_weeks);

// ---- DTW k-means ----------------------------------------------------------

enum class CentroidMethod { dba, medoid };

struct KMeansOptions {
    std::size_t k = 2;
    std::uint64_t seed = 0;
    int max_iter = 100;
    unsigned threads = 1;
    CentroidMethod centroid = CentroidMethod::dba;
    int dba_passes = 10;
};

struct ClusterReport {
    std::size_t k = 0;
    std::uint64_t seed = 0;
    int iterations = 0;
    std::map<std::string, std::size_t> assignments;
    std::vector<std::vector<double>> centroids;
    std::vector<double> per_cluster_wcss;
    double total_wcss = 0;
    std::optional<double> davies_bouldin;
    // Total WCSS after the initial assignment and after every centroid and
    // assignment step. Non-increasing.
    std::vector<double> wcss_trace;

    bool operator==(const ClusterReport&) const = default;
};

// Points are processed in label order, so the result does not depend on the
// order of `windows`. Labels must be unique and series equally long.
ClusterReport kmeans_dtw(const std::vector<EventWindow>& windows, const KMeansOptions& options);

struct LabeledSeries {
    std::string label;
    std::vector<double> values;
};
ClusterReport kmeans_dtw(std::vector<LabeledSeries> points, const KMeansOptions& options);

// Mean over clusters of max_j (S_i + S_j) / M_ij with S the mean DTW distance of
// members to their centroid and M the DTW distance between centroids.
// Coincident centroids with nonzero scatter give +infinity.
double davies_bouldin(const std::vector<EventWindow>& windows, const ClusterReport& report);
double davies_bouldin(const std::vector<LabeledSeries>& points, const ClusterReport& report);

struct EvaluationRow {
    std::size_t k = 0;
    double total_wcss = 0;
    std::optional<double> davies_bouldin;
    std::uint64_t best_seed = 0;
};

struct Evaluation {
    std::vector<EvaluationRow> rows;
    // k values whose best WCSS exceeds that of k-1.
    std::vector<std::size_t> wcss_increases;
};

// Best of `restarts` runs (seeds seed, seed+1, ...) per k, by total WCSS.
Evaluation evaluate_k(const std::vector<EventWindow>& windows, std::size_t k_min, std::size_t k_max,
                      std::uint64_t seed, int restarts, const KMeansOptions& base = {});

std::string cluster_report_to_json(const ClusterReport& report);
ClusterReport cluster_report_from_json(std::string_view text);
std::string evaluation_to_csv(const Evaluation& evaluation);

// Runs fn(i) for i in [0, n) on up to `threads` threads.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

} // namespace attn

#endif
