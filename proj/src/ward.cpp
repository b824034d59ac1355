#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "attn/clustering.hpp"
#include "attn/error.hpp"

namespace attn {

namespace {

double round_significant(double v, int digits) {
    return std::stod(fmt::format("{:.{}g}", v, digits));
}

} // namespace

Linkage ward_linkage(const std::vector<std::vector<double>>& features) {
    const std::size_t n = features.size();
    if (n < 2) throw ContractError("ward_linkage needs at least two rows");
    const std::size_t dim = features.front().size();
    for (const auto& row : features)
        if (row.size() != dim) throw ContractError("ward_linkage: rows of unequal length");

    const std::size_t nodes = 2 * n - 1;
    std::vector<double> d2(nodes * nodes, 0.0);
    auto at = [&](std::size_t i, std::size_t j) -> double& { return d2[i * nodes + j]; };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0;
            for (std::size_t k = 0; k < dim; ++k) {
                const double diff = features[i][k] - features[j][k];
                s += diff * diff;
            }
            at(i, j) = at(j, i) = s;
        }

    std::vector<std::size_t> active(n);
    for (std::size_t i = 0; i < n; ++i) active[i] = i;
    std::vector<std::size_t> size(nodes, 1);

    Linkage out;
    out.leaf_count = n;
    out.merges.reserve(n - 1);
    for (std::size_t step = 0; step + 1 < n; ++step) {
        // active stays sorted, so the scan visits pairs in lexicographic order.
        double best = std::numeric_limits<double>::infinity();
        std::size_t ba = 0, bb = 0;
        for (std::size_t x = 0; x < active.size(); ++x)
            for (std::size_t y = x + 1; y < active.size(); ++y) {
                const double v = at(active[x], active[y]);
                if (v < best) {
                    best = v;
                    ba = active[x];
                    bb = active[y];
                }
            }

        const std::size_t node = n + step;
        const double na = static_cast<double>(size[ba]);
        const double nb = static_cast<double>(size[bb]);
        size[node] = size[ba] + size[bb];
        for (std::size_t other : active) {
            if (other == ba || other == bb) continue;
            const double nk = static_cast<double>(size[other]);
            const double v = ((na + nk) * at(ba, other) + (nb + nk) * at(bb, other) - nk * best) / (na + nb + nk);
            at(node, other) = at(other, node) = std::max(v, 0.0);
        }
        std::erase(active, ba);
        std::erase(active, bb);
        active.push_back(node);
        out.merges.push_back({ba, bb, std::sqrt(std::max(best, 0.0)), size[node]});
    }
    return out;
}

void validate_linkage(const Linkage& linkage) {
    const std::size_t n = linkage.leaf_count;
    if (n < 1) throw ContractError("linkage has no leaves");
    if (linkage.merges.size() + 1 != n)
        throw ContractError(fmt::format("linkage with {} leaves needs {} merges, has {}", n, n - 1, linkage.merges.size()));
    std::vector<bool> used(2 * n - 1, false);
    std::vector<std::size_t> size(2 * n - 1, 1);
    for (std::size_t i = 0; i < linkage.merges.size(); ++i) {
        const auto& m = linkage.merges[i];
        const std::size_t node = n + i;
        for (std::size_t child : {m.a, m.b}) {
            if (child >= node) throw ContractError(fmt::format("merge {} references node {} before it exists", i, child));
            if (used[child]) throw ContractError(fmt::format("node {} merged twice", child));
            used[child] = true;
        }
        if (m.a == m.b) throw ContractError(fmt::format("merge {} joins node {} with itself", i, m.a));
        size[node] = size[m.a] + size[m.b];
        if (m.size != size[node]) throw ContractError(fmt::format("merge {} has size {}, expected {}", i, m.size, size[node]));
        if (!(m.height >= 0) || !std::isfinite(m.height)) throw ContractError(fmt::format("merge {} has invalid height", i));
    }
}

std::vector<std::size_t> leaf_order(const Linkage& linkage) {
    validate_linkage(linkage);
    const std::size_t n = linkage.leaf_count;
    if (n == 1) return {0};
    std::vector<std::size_t> min_leaf(2 * n - 1);
    for (std::size_t i = 0; i < n; ++i) min_leaf[i] = i;
    for (std::size_t i = 0; i < linkage.merges.size(); ++i)
        min_leaf[n + i] = std::min(min_leaf[linkage.merges[i].a], min_leaf[linkage.merges[i].b]);

    std::vector<std::size_t> order;
    order.reserve(n);
    std::vector<std::size_t> stack{2 * n - 2};
    while (!stack.empty()) {
        const std::size_t node = stack.back();
        stack.pop_back();
        if (node < n) {
            order.push_back(node);
            continue;
        }
        const auto& m = linkage.merges[node - n];
        std::size_t first = m.a, second = m.b;
        if (min_leaf[second] < min_leaf[first]) std::swap(first, second);
        stack.push_back(second);
        stack.push_back(first);
    }
    return order;
}

std::string linkage_to_json(const Linkage& linkage, const std::vector<std::string>& leaves) {
    if (leaves.size() != linkage.leaf_count) throw ContractError("linkage leaf label count mismatch");
    nlohmann::ordered_json j;
    j["leaves"] = leaves;
    auto& merges = j["merges"] = nlohmann::ordered_json::array();
    for (const auto& m : linkage.merges)
        merges.push_back(nlohmann::ordered_json::array({m.a, m.b, round_significant(m.height, 12), m.size}));
    return j.dump() + "\n";
}

LabeledLinkage linkage_from_json(std::string_view text) {
    LabeledLinkage out;
    try {
        const auto j = nlohmann::json::parse(text);
        out.leaves = j.at("leaves").get<std::vector<std::string>>();
        out.linkage.leaf_count = out.leaves.size();
        for (const auto& m : j.at("merges"))
            out.linkage.merges.push_back(
                {m.at(0).get<std::size_t>(), m.at(1).get<std::size_t>(), m.at(2).get<double>(), m.at(3).get<std::size_t>()});
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed linkage file: ") + e.what());
    }
    try {
        validate_linkage(out.linkage);
    } catch (const ContractError& e) {
        throw FormatError(std::string("invalid linkage file: ") + e.what());
    }
    return out;
}

} // namespace attn
