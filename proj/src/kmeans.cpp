#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "attn/clustering.hpp"
#include "attn/csv.hpp"
#include "attn/error.hpp"
#include "attn/rng.hpp"

namespace attn {

namespace {

using Series = std::vector<double>;

double sq(double x) { return x * x; }

std::vector<LabeledSeries> to_points(const std::vector<EventWindow>& windows) {
    std::vector<LabeledSeries> pts;
    pts.reserve(windows.size());
    for (const auto& w : windows) pts.push_back({w.label, w.values});
    return pts;
}

// Member minimising the summed squared DTW distance to the other members.
std::size_t medoid(const std::vector<const Series*>& members) {
    std::size_t best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < members.size(); ++i) {
        double cost = 0;
        for (std::size_t j = 0; j < members.size(); ++j)
            if (i != j) cost += sq(dtw_distance(*members[i], *members[j]));
        if (cost < best_cost) {
            best_cost = cost;
            best = i;
        }
    }
    return best;
}

// DTW barycenter averaging: each pass re-aligns every member to the current
// average and replaces each coordinate by the mean of the values aligned to it.
Series dba(const std::vector<const Series*>& members, Series center, int passes) {
    std::vector<double> sums(center.size());
    std::vector<std::size_t> counts(center.size());
    for (int p = 0; p < passes; ++p) {
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (const Series* m : members)
            for (auto [i, j] : dtw_path(center, *m)) {
                sums[i] += (*m)[j];
                ++counts[i];
            }
        for (std::size_t i = 0; i < center.size(); ++i) center[i] = sums[i] / static_cast<double>(counts[i]);
    }
    return center;
}

double cluster_cost(const std::vector<const Series*>& members, const Series& center) {
    double cost = 0;
    for (const Series* m : members) cost += sq(dtw_distance(*m, center));
    return cost;
}

class KMeansRun {
public:
    KMeansRun(const std::vector<LabeledSeries>& pts, const KMeansOptions& opt)
        : pts_(pts), opt_(opt), n_(pts.size()), k_(opt.k), dist_(n_ * k_), assign_(n_, 0) {}

    ClusterReport run() {
        seed_centers();
        assign();
        trace_.push_back(total_cost());

        int it = 0;
        while (it < opt_.max_iter) {
            ++it;
            update_centroids();
            compute_distances();
            trace_.push_back(total_cost());
            const auto before = assign_;
            assign();
            trace_.push_back(total_cost());
            if (assign_ == before) break;
        }

        ClusterReport rep;
        rep.k = k_;
        rep.seed = opt_.seed;
        rep.iterations = it;
        rep.centroids = centroids_;
        rep.per_cluster_wcss.assign(k_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            rep.assignments[pts_[i].label] = assign_[i];
            rep.per_cluster_wcss[assign_[i]] += sq(dist(i, assign_[i]));
        }
        for (double w : rep.per_cluster_wcss) rep.total_wcss += w;
        rep.wcss_trace = trace_;
        return rep;
    }

private:
    double& dist(std::size_t i, std::size_t c) { return dist_[i * k_ + c]; }

    void seed_centers() {
        SplitMix64 rng(opt_.seed);
        std::vector<std::size_t> chosen{static_cast<std::size_t>(rng.below(n_))};
        std::vector<double> d2(n_);
        auto refresh = [&](std::size_t center, bool first) {
            parallel_for(n_, opt_.threads, [&](std::size_t i) {
                const double d = sq(dtw_distance(pts_[i].values, pts_[center].values));
                d2[i] = first ? d : std::min(d2[i], d);
            });
        };
        refresh(chosen[0], true);
        while (chosen.size() < k_) {
            double total = 0;
            for (double v : d2) total += v;
            std::size_t pick = n_;
            if (total > 0) {
                const double target = rng.uniform() * total;
                double cum = 0;
                for (std::size_t i = 0; i < n_; ++i) {
                    if (d2[i] <= 0) continue;
                    cum += d2[i];
                    pick = i;
                    if (cum > target) break;
                }
            } else {
                // Every point coincides with a center: take the lowest unchosen index.
                for (std::size_t i = 0; i < n_ && pick == n_; ++i)
                    if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) pick = i;
            }
            chosen.push_back(pick);
            refresh(pick, false);
        }
        for (auto c : chosen) centroids_.push_back(pts_[c].values);
        compute_distances();
    }

    void compute_distances() {
        parallel_for(n_, opt_.threads, [&](std::size_t i) {
            for (std::size_t c = 0; c < k_; ++c) dist(i, c) = dtw_distance(pts_[i].values, centroids_[c]);
        });
    }

    void assign() {
        for (std::size_t i = 0; i < n_; ++i) {
            std::size_t best = 0;
            for (std::size_t c = 1; c < k_; ++c)
                if (dist(i, c) < dist(i, best)) best = c;
            assign_[i] = best;
        }
        repair_empty();
    }

    // An empty cluster takes the point farthest from its own centroid, drawn
    // from clusters that keep at least one member.
    void repair_empty() {
        for (;;) {
            std::vector<std::size_t> sizes(k_, 0);
            for (auto a : assign_) ++sizes[a];
            const auto empty = std::find(sizes.begin(), sizes.end(), 0u);
            if (empty == sizes.end()) return;
            const auto c = static_cast<std::size_t>(empty - sizes.begin());
            std::size_t far = n_;
            double far_d = -1;
            for (std::size_t i = 0; i < n_; ++i)
                if (sizes[assign_[i]] >= 2 && dist(i, assign_[i]) > far_d) {
                    far_d = dist(i, assign_[i]);
                    far = i;
                }
            assign_[far] = c;
            centroids_[c] = pts_[far].values;
            for (std::size_t i = 0; i < n_; ++i) dist(i, c) = dtw_distance(pts_[i].values, centroids_[c]);
        }
    }

    // Candidate centroids replace the current ones only when they lower the
    // cluster's WCSS, which keeps the objective non-increasing.
    void update_centroids() {
        for (std::size_t c = 0; c < k_; ++c) {
            std::vector<const Series*> members;
            for (std::size_t i = 0; i < n_; ++i)
                if (assign_[i] == c) members.push_back(&pts_[i].values);
            const Series& start = *members[medoid(members)];
            Series candidate = opt_.centroid == CentroidMethod::dba ? dba(members, start, opt_.dba_passes) : start;
            if (cluster_cost(members, candidate) < cluster_cost(members, centroids_[c]))
                centroids_[c] = std::move(candidate);
        }
    }

    double total_cost() {
        double total = 0;
        for (std::size_t i = 0; i < n_; ++i) total += sq(dist(i, assign_[i]));
        return total;
    }

    const std::vector<LabeledSeries>& pts_;
    const KMeansOptions& opt_;
    std::size_t n_, k_;
    std::vector<double> dist_;
    std::vector<std::size_t> assign_;
    std::vector<Series> centroids_;
    std::vector<double> trace_;
};

nlohmann::ordered_json db_to_json(const std::optional<double>& db) {
    if (!db) return nullptr;
    if (std::isinf(*db)) return "inf";
    return *db;
}

} // namespace

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w * chunk; i < std::min(n, (w + 1) * chunk); ++i) fn(i);
        });
}

ClusterReport kmeans_dtw(std::vector<LabeledSeries> points, const KMeansOptions& options) {
    if (options.k < 1 || options.k > points.size())
        throw ContractError(fmt::format("k = {} must lie in [1, {}]", options.k, points.size()));
    if (options.max_iter < 1) throw ContractError("max_iter must be >= 1");
    if (options.dba_passes < 1) throw ContractError("dba_passes must be >= 1");
    std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.label < b.label; });
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].values.empty()) throw ContractError("series '" + points[i].label + "' is empty");
        if (points[i].values.size() != points.front().values.size())
            throw ContractError("series '" + points[i].label + "' differs in length");
        if (i && points[i].label == points[i - 1].label) throw ContractError("duplicate label '" + points[i].label + "'");
    }
    return KMeansRun(points, options).run();
}

ClusterReport kmeans_dtw(const std::vector<EventWindow>& windows, const KMeansOptions& options) {
    return kmeans_dtw(to_points(windows), options);
}

double davies_bouldin(const std::vector<LabeledSeries>& points, const ClusterReport& report) {
    const std::size_t k = report.centroids.size();
    if (k < 2) throw ContractError("Davies-Bouldin needs k >= 2");
    std::vector<double> scatter(k, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (const auto& p : points) {
        auto it = report.assignments.find(p.label);
        if (it == report.assignments.end() || it->second >= k)
            throw ContractError("point '" + p.label + "' has no valid assignment in the report");
        scatter[it->second] += dtw_distance(p.values, report.centroids[it->second]);
        ++counts[it->second];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) throw ContractError(fmt::format("cluster {} has no members", c));
        scatter[c] /= static_cast<double>(counts[c]);
    }
    double sum = 0;
    for (std::size_t i = 0; i < k; ++i) {
        double worst = 0;
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            const double sep = dtw_distance(report.centroids[i], report.centroids[j]);
            const double spread = scatter[i] + scatter[j];
            double r;
            if (sep > 0) r = spread / sep;
            else r = spread > 0 ? std::numeric_limits<double>::infinity() : 0.0;
            worst = std::max(worst, r);
        }
        sum += worst;
    }
    return sum / static_cast<double>(k);
}

double davies_bouldin(const std::vector<EventWindow>& windows, const ClusterReport& report) {
    return davies_bouldin(to_points(windows), report);
}

Evaluation evaluate_k(const std::vector<EventWindow>& windows, std::size_t k_min, std::size_t k_max,
                      std::uint64_t seed, int restarts, const KMeansOptions& base) {
    if (k_min < 1 || k_min > k_max) throw ContractError("evaluate_k needs 1 <= k_min <= k_max");
    if (k_max > windows.size())
        throw ContractError(fmt::format("k_max = {} exceeds the {} windows", k_max, windows.size()));
    if (restarts < 1) throw ContractError("restarts must be >= 1");
    const auto points = to_points(windows);
    Evaluation ev;
    for (std::size_t k = k_min; k <= k_max; ++k) {
        std::optional<ClusterReport> best;
        for (int r = 0; r < restarts; ++r) {
            KMeansOptions opt = base;
            opt.k = k;
            opt.seed = seed + static_cast<std::uint64_t>(r);
            auto rep = kmeans_dtw(points, opt);
            if (!best || rep.total_wcss < best->total_wcss) best = std::move(rep);
        }
        EvaluationRow row{k, best->total_wcss, std::nullopt, best->seed};
        if (k >= 2) row.davies_bouldin = davies_bouldin(points, *best);
        if (!ev.rows.empty() && row.total_wcss > ev.rows.back().total_wcss) ev.wcss_increases.push_back(k);
        ev.rows.push_back(row);
    }
    return ev;
}

std::string cluster_report_to_json(const ClusterReport& r) {
    nlohmann::ordered_json j;
    j["k"] = r.k;
    j["seed"] = r.seed;
    j["iterations"] = r.iterations;
    auto& a = j["assignments"] = nlohmann::ordered_json::object();
    for (const auto& [label, id] : r.assignments) a[label] = id;
    j["centroids"] = r.centroids;
    j["per_cluster_wcss"] = r.per_cluster_wcss;
    j["total_wcss"] = r.total_wcss;
    j["davies_bouldin"] = db_to_json(r.davies_bouldin);
    j["wcss_trace"] = r.wcss_trace;
    return j.dump() + "\n";
}

ClusterReport cluster_report_from_json(std::string_view text) {
    ClusterReport r;
    try {
        const auto j = nlohmann::json::parse(text);
        r.k = j.at("k").get<std::size_t>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.iterations = j.at("iterations").get<int>();
        for (const auto& [label, id] : j.at("assignments").items()) r.assignments[label] = id.get<std::size_t>();
        r.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
        r.per_cluster_wcss = j.at("per_cluster_wcss").get<std::vector<double>>();
        r.total_wcss = j.at("total_wcss").get<double>();
        const auto& db = j.at("davies_bouldin");
        if (db.is_string() && db.get<std::string>() == "inf") r.davies_bouldin = std::numeric_limits<double>::infinity();
        else if (!db.is_null()) r.davies_bouldin = db.get<double>();
        if (j.contains("wcss_trace")) r.wcss_trace = j["wcss_trace"].get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed cluster report: ") + e.what());
    }
    if (r.centroids.size() != r.k || r.per_cluster_wcss.size() != r.k)
        throw FormatError("cluster report centroid/WCSS count does not match k");
    for (const auto& [label, id] : r.assignments)
        if (id >= r.k) throw FormatError("cluster report assigns '" + label + "' to an unknown cluster");
    return r;
}

std::string evaluation_to_csv(const Evaluation& ev) {
    std::string out = "k,total_wcss,davies_bouldin,best_seed\n";
    for (const auto& row : ev.rows) {
        std::string db;
        if (row.davies_bouldin) db = std::isinf(*row.davies_bouldin) ? "inf" : fmt::format("{}", *row.davies_bouldin);
        out += fmt::format("{},{},{},{}\n", row.k, row.total_wcss, db, row.best_seed);
    }
    return out;
}

} // namespace attn
