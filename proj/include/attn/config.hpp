#ifndef ATTN_CONFIG_HPP
#define ATTN_CONFIG_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "attn/clustering.hpp"
#include "attn/fetch.hpp"
#include "attn/geometry.hpp"
#include "attn/render.hpp"

namespace attn {

inline constexpr int kConfigVersion = 1;

struct SmoothingConfig {
    int within = 3;
    int share = 6;
};

struct EventSpan {
    int pre_weeks = 4;
    int post_weeks = 4;
    bool operator==(const EventSpan&) const = default;
};

struct ClusteringConfig {
    std::size_t k_2014 = 5;
    std::size_t k_2022 = 6;
    std::uint64_t seed = 42;
    int restarts = 10;
    // Window around anchors without an entry in anchor_windows.
    int pre_weeks = 4;
    int post_weeks = 4;
    // Per-anchor windows, keyed by anchor name.
    std::map<std::string, EventSpan> anchor_windows;
    std::size_t k_min = 2;
    std::size_t k_max = 10;
    CentroidMethod centroid = CentroidMethod::dba;
    WindowNormalization normalization = WindowNormalization::mean_then_log;
    unsigned threads = 1;
};

struct WindowConfig {
    int vector_weeks = 6;
    int stride = 1;
    VectorNormalization normalization = VectorNormalization::raw;
};

struct RenderConfig {
    RenderSpec spec;
    // Order heatmap rows by the Ward leaf order of the plotted deviation.
    bool linkage_order = true;
};

struct RunConfig {
    int version = kConfigVersion;
    std::vector<SeriesKey> keywords;
    std::optional<EndpointConfig> endpoint;
    std::optional<DateRange> date_range;
    std::map<std::string, Date> anchors;
    SmoothingConfig smoothing;
    ClusteringConfig clustering;
    WindowConfig window;
    RenderConfig render;

    // Named anchor or ContractError.
    Date anchor(const std::string& name) const;
    // Window of the first named anchor on date `d` that has one, else the default.
    EventSpan span_for(const Date& d) const;
};

// Built-in defaults: anchors invasion_2014 (2014-02-18, weeks -1..+3),
// invasion_2022 (2022-02-24, weeks -4..+4) and comparison_2014 (2014-02-27);
// no keywords, no endpoint.
RunConfig default_config();

// Fields absent from `j` keep their values from `base`. Throws ContractError
// on a bad value and FormatError on an unsupported version.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = default_config());
RunConfig load_config(const std::filesystem::path& path);
nlohmann::ordered_json config_to_json(const RunConfig& cfg);
void validate_config(const RunConfig& cfg);

nlohmann::ordered_json render_spec_to_json(const RenderSpec& spec);

} // namespace attn

#endif
