#include "attn/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "attn/csv.hpp"
#include "attn/error.hpp"
#include "attn/expression.hpp"
#include "attn/rng.hpp"

namespace attn {

namespace {

double parse_number(const std::string& s, std::size_t line) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || p != s.data() + s.size())
        throw ParseError(line, s, "expected a number");
    return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void normalize(std::vector<double>& v) {
    const double n = std::sqrt(dot(v, v));
    if (n > 0)
        for (double& x : v) x /= n;
}

void project_out(std::vector<double>& v, const std::vector<std::vector<double>>& basis) {
    for (const auto& b : basis) {
        const double c = dot(v, b);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * b[i];
    }
}

std::vector<double> multiply(const std::vector<double>& m, const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < n; ++j) s += m[i * n + j] * v[j];
        out[i] = s;
    }
    return out;
}

std::string label_or_index(const std::vector<std::string>& keys, std::size_t i) {
    return i < keys.size() ? keys[i] : std::to_string(i);
}

} // namespace

bool WindowVector::is_zero() const {
    return std::none_of(components.begin(), components.end(), [](double c) { return c > 0; });
}

WindowVectors window_vectors(const Corpus& corpus, int window_weeks, int stride_weeks, VectorNormalization norm) {
    if (window_weeks < 1) throw ContractError("window_weeks must be >= 1");
    if (stride_weeks < 1) throw ContractError("stride_weeks must be >= 1");
    const auto window = static_cast<std::size_t>(window_weeks);
    if (corpus.weeks() < window) throw ContractError("corpus axis is shorter than the window");

    WindowVectors out;
    for (const auto& s : corpus.series) out.dimensions.push_back(s.language);
    // Disambiguate repeated languages.
    for (std::size_t i = 0; i < corpus.rows(); ++i)
        if (std::count(out.dimensions.begin(), out.dimensions.end(), corpus.series[i].language) > 1)
            out.dimensions[i] = corpus.series[i].key().label();

    // Optional per-week share of the pooled frequency.
    std::vector<double> pool(corpus.weeks(), 1.0);
    if (norm == VectorNormalization::week_share) {
        for (std::size_t t = 0; t < corpus.weeks(); ++t) {
            std::vector<double> terms;
            for (const auto& s : corpus.series)
                if (!s.missing[t]) terms.push_back(s.values[t]);
            pool[t] = compensated_sum(terms);
        }
    }

    for (std::size_t start = 0; start + window <= corpus.weeks(); start += static_cast<std::size_t>(stride_weeks)) {
        WindowVector v;
        v.start_week = corpus.week_axis[start];
        v.length = window_weeks;
        std::size_t observed = 0;
        for (const auto& s : corpus.series) {
            std::vector<double> vals;
            for (std::size_t t = start; t < start + window; ++t) {
                if (s.missing[t]) continue;
                if (norm == VectorNormalization::week_share) {
                    if (!(pool[t] > 0)) continue;
                    vals.push_back(s.values[t] / pool[t]);
                } else {
                    vals.push_back(s.values[t]);
                }
                ++observed;
            }
            v.components.push_back(vals.empty() ? 0.0 : compensated_sum(vals) / static_cast<double>(vals.size()));
        }
        const double cells = static_cast<double>(window * corpus.rows());
        v.coverage = cells > 0 ? static_cast<double>(observed) / cells : 0.0;
        v.low_coverage = v.coverage < 0.5;
        out.vectors.push_back(std::move(v));
    }
    return out;
}

double cosine_distance(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size()) throw ContractError("cosine distance between vectors of different dimension");
    const double nu = std::sqrt(dot(u, u));
    const double nv = std::sqrt(dot(v, v));
    if (!(nu > 0) || !(nv > 0)) throw ContractError("cosine distance of a zero vector");
    return std::clamp(1.0 - dot(u, v) / (nu * nv), 0.0, 2.0);
}

DistanceMatrix cosine_distance_matrix(const std::vector<WindowVector>& vectors) {
    DistanceMatrix d;
    for (const auto& v : vectors) {
        if (v.is_zero() || std::sqrt(dot(v.components, v.components)) == 0)
            throw ContractError("window " + v.start_week.label() + " has a zero attention vector");
        d.keys.push_back(v.start_week.label());
    }
    const std::size_t n = vectors.size();
    d.values.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            d(i, j) = d(j, i) = cosine_distance(vectors[i].components, vectors[j].components);
    return d;
}

void validate_distance_matrix(const DistanceMatrix& d) {
    const std::size_t n = d.size();
    if (d.values.size() != n * n) throw ContractError("distance matrix is not square");
    for (std::size_t i = 0; i < n; ++i) {
        if (d(i, i) != 0) throw ContractError("distance matrix diagonal is not zero at " + d.keys[i]);
        for (std::size_t j = 0; j < n; ++j) {
            if (!(d(i, j) >= 0) || !std::isfinite(d(i, j)))
                throw ContractError("distance matrix has an invalid entry at " + d.keys[i] + "," + d.keys[j]);
            if (std::abs(d(i, j) - d(j, i)) > 1e-12)
                throw ContractError("distance matrix is not symmetric at " + d.keys[i] + "," + d.keys[j]);
        }
    }
}

Embedding classical_mds(const DistanceMatrix& dist, const MdsOptions& options) {
    validate_distance_matrix(dist);
    if (options.dims < 1) throw ContractError("embedding dims must be >= 1");
    const std::size_t n = dist.size();
    const auto dims = static_cast<std::size_t>(options.dims);

    Embedding out;
    out.keys = dist.keys;
    out.coords.assign(n, std::vector<double>(dims, 0.0));
    if (n == 0) return out;

    // B = -1/2 J D^2 J
    std::vector<double> b(n * n);
    std::vector<double> row_mean(n, 0.0);
    double grand = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) row_mean[i] += dist(i, j) * dist(i, j);
        grand += row_mean[i];
        row_mean[i] /= static_cast<double>(n);
    }
    grand /= static_cast<double>(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            b[i * n + j] = -0.5 * (dist(i, j) * dist(i, j) - row_mean[i] - row_mean[j] + grand);

    // Constant vectors lie in the null space of B; keep iterates orthogonal to them.
    std::vector<std::vector<double>> found{std::vector<double>(n, 1.0 / std::sqrt(static_cast<double>(n)))};
    SplitMix64 rng(0x6d6473ULL);

    // Gershgorin bound on the spectral radius; residual tolerances are relative to it.
    double bound = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < n; ++j) s += std::abs(b[i * n + j]);
        bound = std::max(bound, s);
    }
    const double scale = std::max(bound, 1e-300);

    // Shift by an estimate of -lambda_min so the largest algebraic eigenvalue
    // dominates. Since lambda_max >= 0 (trace B >= 0) a shift of half of
    // |lambda_min| already suffices, so a coarse estimate is enough; a smaller
    // shift than the Gershgorin bound keeps close eigenvalues apart.
    double shift = 0;
    if (n > 1 && bound > 0) {
        std::vector<double> v(n);
        for (double& x : v) x = 2.0 * rng.uniform() - 1.0;
        project_out(v, found);
        normalize(v);
        for (int it = 0; it < options.max_iterations; ++it) {
            auto w = multiply(b, v);
            for (std::size_t i = 0; i < n; ++i) w[i] = bound * v[i] - w[i];
            project_out(w, found);
            normalize(w);
            v = std::move(w);
            auto bv = multiply(b, v);
            project_out(bv, found);
            const double rho = dot(v, bv);
            double res = 0;
            for (std::size_t i = 0; i < n; ++i) res += (bv[i] - rho * v[i]) * (bv[i] - rho * v[i]);
            shift = std::max(0.0, std::sqrt(res) - rho);
            if (std::sqrt(res) <= 1e-3 * scale) break;
        }
        shift = std::min(bound, 1.05 * shift + 1e-9 * scale);
    }

    for (std::size_t axis = 0; axis < dims; ++axis) {
        // Deflation by projection: iterates stay orthogonal to every axis found
        // so far, and the residual is measured for the projected operator.
        double lambda = 0;
        std::vector<double> v(n);
        for (double& x : v) x = 2.0 * rng.uniform() - 1.0;
        project_out(v, found);
        normalize(v);

        const bool trivial = n <= found.size() || bound == 0;
        bool converged = trivial;
        int it = 0;
        while (!converged) {
            if (++it > options.max_iterations)
                throw NumericError(fmt::format("power iteration for axis {} did not converge", axis + 1),
                                   options.max_iterations);
            auto w = multiply(b, v);
            for (std::size_t i = 0; i < n; ++i) w[i] += shift * v[i];
            project_out(w, found);
            normalize(w);
            v = std::move(w);
            auto bv = multiply(b, v);
            project_out(bv, found);
            lambda = dot(v, bv);
            double res = 0;
            for (std::size_t i = 0; i < n; ++i) res += (bv[i] - lambda * v[i]) * (bv[i] - lambda * v[i]);
            converged = std::sqrt(res) <= options.tolerance * scale;
        }
        if (trivial) {
            lambda = 0;
            std::fill(v.begin(), v.end(), 0.0);
        }

        out.eigenvalues.push_back(lambda);
        const double tiny = 1e-12 * scale;
        if (lambda < -tiny)
            out.warnings.push_back(fmt::format("axis {} has negative eigenvalue {:.6g}; coordinates set to zero", axis + 1, lambda));
        else if (lambda <= tiny)
            out.warnings.push_back(fmt::format("axis {} has zero eigenvalue; coordinates set to zero", axis + 1));
        const double root = lambda > tiny ? std::sqrt(lambda) : 0.0;
        std::vector<double> coord(n);
        for (std::size_t i = 0; i < n; ++i) coord[i] = v[i] * root;
        double peak = 0;
        for (double c : coord) peak = std::max(peak, std::abs(c));
        for (double c : coord)
            if (std::abs(c) > 1e-12 * peak) {
                if (c < 0)
                    for (double& x : coord) x = -x;
                break;
            }
        for (std::size_t i = 0; i < n; ++i) out.coords[i][axis] = coord[i] == 0 ? 0.0 : coord[i];

        if (std::sqrt(dot(v, v)) > 0) found.push_back(v);
    }
    return out;
}

std::string vectors_to_csv(const WindowVectors& v) {
    std::vector<std::string> fields{"start_week", "coverage"};
    fields.insert(fields.end(), v.dimensions.begin(), v.dimensions.end());
    std::string out = csv::join(fields) + "\n";
    for (const auto& w : v.vectors) {
        fields = {w.start_week.label(), fmt::format("{}", w.coverage)};
        for (double c : w.components) fields.push_back(fmt::format("{}", c));
        out += csv::join(fields) + "\n";
    }
    return out;
}

WindowVectors vectors_from_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty()) throw FormatError("vectors file is empty");
    const auto& header = rows.front().fields;
    if (header.size() < 3 || header[0] != "start_week" || header[1] != "coverage")
        throw FormatError("vectors file header must start with start_week,coverage");
    WindowVectors out;
    out.dimensions.assign(header.begin() + 2, header.end());
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r].fields;
        if (f.size() != header.size()) throw ParseError(rows[r].line, "<row>", "wrong number of fields");
        WindowVector w;
        try {
            w.start_week = IsoWeek::parse(f[0]);
        } catch (const ContractError& e) {
            throw ParseError(rows[r].line, "start_week", e.what());
        }
        w.coverage = parse_number(f[1], rows[r].line);
        w.low_coverage = w.coverage < 0.5;
        for (std::size_t c = 2; c < f.size(); ++c) w.components.push_back(parse_number(f[c], rows[r].line));
        out.vectors.push_back(std::move(w));
    }
    // Window length is not serialized; infer it from the spacing of the starts.
    for (std::size_t i = 0; i < out.vectors.size(); ++i)
        out.vectors[i].length = i + 1 < out.vectors.size()
                                    ? static_cast<int>(out.vectors[i + 1].start_week.weeks_since(out.vectors[i].start_week))
                                    : (i ? out.vectors[i - 1].length : 0);
    return out;
}

std::string distance_matrix_to_csv(const DistanceMatrix& d) {
    std::vector<std::string> fields{"key"};
    fields.insert(fields.end(), d.keys.begin(), d.keys.end());
    std::string out = csv::join(fields) + "\n";
    for (std::size_t i = 0; i < d.size(); ++i) {
        fields.assign(1, d.keys[i]);
        for (std::size_t j = 0; j < d.size(); ++j) fields.push_back(fmt::format("{:.12g}", d(i, j)));
        out += csv::join(fields) + "\n";
    }
    return out;
}

DistanceMatrix distance_matrix_from_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty()) throw FormatError("distance matrix file is empty");
    DistanceMatrix d;
    d.keys.assign(rows.front().fields.begin() + 1, rows.front().fields.end());
    const std::size_t n = d.keys.size();
    if (rows.size() != n + 1) throw FormatError("distance matrix is not square");
    d.values.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& f = rows[i + 1].fields;
        if (f.size() != n + 1 || f[0] != d.keys[i])
            throw FormatError("distance matrix row " + std::to_string(i + 1) + " does not match the header");
        for (std::size_t j = 0; j < n; ++j) d(i, j) = parse_number(f[j + 1], rows[i + 1].line);
    }
    try {
        validate_distance_matrix(d);
    } catch (const ContractError& e) {
        throw FormatError(e.what());
    }
    return d;
}

std::string embedding_to_csv(const Embedding& e) {
    const std::size_t dims = e.coords.empty() ? 2 : e.coords.front().size();
    std::vector<std::string> fields{"key"};
    if (dims == 2) {
        fields.push_back("x");
        fields.push_back("y");
    } else {
        for (std::size_t d = 0; d < dims; ++d) fields.push_back(fmt::format("x{}", d + 1));
    }
    std::string out = csv::join(fields) + "\n";
    for (std::size_t i = 0; i < e.keys.size(); ++i) {
        fields.assign(1, label_or_index(e.keys, i));
        for (double c : e.coords[i]) fields.push_back(fmt::format("{}", c));
        out += csv::join(fields) + "\n";
    }
    return out;
}

Embedding embedding_from_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty() || rows.front().fields.size() < 2 || rows.front().fields[0] != "key")
        throw FormatError("coordinates file header must start with key");
    Embedding e;
    const std::size_t width = rows.front().fields.size();
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r].fields;
        if (f.size() != width) throw ParseError(rows[r].line, "<row>", "wrong number of fields");
        e.keys.push_back(f[0]);
        std::vector<double> c;
        for (std::size_t k = 1; k < width; ++k) c.push_back(parse_number(f[k], rows[r].line));
        e.coords.push_back(std::move(c));
    }
    return e;
}

} // namespace attn
