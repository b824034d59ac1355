#ifndef ATTN_GEOMETRY_HPP
#define ATTN_GEOMETRY_HPP

#include <string>
#include <vector>

#include "attn/ingest.hpp"

namespace attn {

enum class VectorNormalization {
    raw,        // mean relative frequency per language
    week_share, // each week divided by its cross-language pool before averaging
};

// One vector per window: component l is the mean of language l's non-missing
// values over the window (0 when the language has none).
struct WindowVector {
    IsoWeek start_week;
    int length = 0;
    std::vector<double> components;
    double coverage = 0;   // fraction of non-missing cells in the window
    bool low_coverage = false; // coverage < 0.5

    bool is_zero() const;
    bool operator==(const WindowVector&) const = default;
};

struct WindowVectors {
    std::vector<std::string> dimensions; // row labels, one per component
    std::vector<WindowVector> vectors;
};

WindowVectors window_vectors(const Corpus& corpus, int window_weeks = 6, int stride_weeks = 1,
                             VectorNormalization norm = VectorNormalization::raw);

struct DistanceMatrix {
    std::vector<std::string> keys;
    std::vector<double> values; // row-major, keys.size() squared

    std::size_t size() const { return keys.size(); }
    double operator()(std::size_t i, std::size_t j) const { return values[i * keys.size() + j]; }
    double& operator()(std::size_t i, std::size_t j) { return values[i * keys.size() + j]; }
};

// Throws ContractError unless square, symmetric within 1e-12, nonnegative, zero diagonal.
void validate_distance_matrix(const DistanceMatrix& d);

// 1 - cos(u, v), clamped to [0, 2]. Zero vectors are rejected by window label.
DistanceMatrix cosine_distance_matrix(const std::vector<WindowVector>& vectors);
double cosine_distance(const std::vector<double>& u, const std::vector<double>& v);

struct Embedding {
    std::vector<std::string> keys;
    std::vector<std::vector<double>> coords; // one row per key, `dims` columns
    std::vector<double> eigenvalues;
    std::vector<std::string> warnings;
};

struct MdsOptions {
    int dims = 2;
    double tolerance = 1e-10;
    int max_iterations = 10000;
};

// Classical (Torgerson) MDS: eigenpairs of -1/2 J D^2 J by power iteration
// with deflation. Axes with non-positive eigenvalues are zeroed and reported.
// Each axis is signed so that its first nonzero coordinate is positive.
Embedding classical_mds(const DistanceMatrix& dist, const MdsOptions& options = {});

std::string vectors_to_csv(const WindowVectors& v);
WindowVectors vectors_from_csv(std::string_view text);
// Values written with 12 significant digits.
std::string distance_matrix_to_csv(const DistanceMatrix& d);
DistanceMatrix distance_matrix_from_csv(std::string_view text);
std::string embedding_to_csv(const Embedding& e);
Embedding embedding_from_csv(std::string_view text);

} // namespace attn

#endif
