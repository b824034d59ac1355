#include <algorithm>
#include <cmath>
#include <limits>

#include "attn/clustering.hpp"
#include "attn/error.hpp"

namespace attn {

namespace {

std::vector<double> cost_matrix(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || y.empty()) throw ContractError("dtw: empty series");
    const std::size_t n = x.size(), m = y.size();
    std::vector<double> acc(n * m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double local = std::abs(x[i] - y[j]);
            double prev;
            if (i == 0 && j == 0) prev = 0;
            else if (i == 0) prev = acc[j - 1];
            else if (j == 0) prev = acc[(i - 1) * m];
            else prev = std::min({acc[(i - 1) * m + j - 1], acc[(i - 1) * m + j], acc[i * m + j - 1]});
            acc[i * m + j] = local + prev;
        }
    }
    return acc;
}

} // namespace

double dtw_distance(std::span<const double> x, std::span<const double> y) {
    return cost_matrix(x, y).back();
}

std::vector<std::pair<std::size_t, std::size_t>> dtw_path(std::span<const double> x, std::span<const double> y) {
    const auto acc = cost_matrix(x, y);
    const std::size_t m = y.size();
    std::vector<std::pair<std::size_t, std::size_t>> path;
    std::size_t i = x.size() - 1, j = m - 1;
    path.emplace_back(i, j);
    while (i > 0 || j > 0) {
        if (i == 0) --j;
        else if (j == 0) --i;
        else {
            // Prefer the diagonal, then (i-1, j), then (i, j-1).
            const double diag = acc[(i - 1) * m + j - 1];
            const double up = acc[(i - 1) * m + j];
            const double left = acc[i * m + j - 1];
            if (diag <= up && diag <= left) {
                --i;
                --j;
            } else if (up <= left) {
                --i;
            } else {
                --j;
            }
        }
        path.emplace_back(i, j);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

} // namespace attn
