#ifndef ATTN_RENDER_HPP
#define ATTN_RENDER_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "attn/clustering.hpp"
#include "attn/expression.hpp"
#include "attn/geometry.hpp"

namespace attn {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    static Rgb parse(std::string_view hex); // "#rrggbb"
    std::string hex() const;
    bool operator==(const Rgb&) const = default;
};

struct ColorStop {
    double value = 0;
    Rgb color;
};

// Linear RGB interpolation between stops; values outside the stop range take
// the end colors. Channels are rounded to the nearest integer.
Rgb interpolate_color(const std::vector<ColorStop>& stops, double value);

enum class MissingStyle { blank, hatch };

struct RenderSpec {
    double cell_width = 4;
    double cell_height = 14;
    // Diverging map over [-clamp, +clamp]. Empty: blue #2166ac, gray #bbbbbb, red #b2182b.
    std::vector<ColorStop> color_stops;
    double deviation_clamp = 2.0;
    // Bar height 0 at or below floor, full at ceiling. Unset: min/max of the matrix magnitudes.
    std::optional<double> magnitude_floor;
    std::optional<double> magnitude_ceiling;
    // Display order of matrix rows. Unset: matrix order.
    std::optional<std::vector<std::size_t>> row_order;
    std::string font_family = "Helvetica, Arial, sans-serif";
    MissingStyle missing_style = MissingStyle::blank;
    std::string title;
};

std::vector<ColorStop> default_color_stops(double clamp);
std::vector<ColorStop> effective_color_stops(const RenderSpec& spec);
void validate_render_spec(const RenderSpec& spec);

enum class HeatmapColor {
    deviation, // diverging map of the deviation
    magnitude, // sequential map of log10 f between floor and ceiling
};

// Bar-in-cell heatmap: each defined cell is a bottom-anchored bar whose height
// encodes magnitude and whose fill encodes deviation. Cells carry
// id="cell-<row>-<week>" with the matrix row index and ISO week label.
std::string render_expression_heatmap(const ExpressionMatrix& matrix, const RenderSpec& spec,
                                      HeatmapColor color = HeatmapColor::deviation);

// Full-cell heatmap of arbitrary values (z-scores, for instance).
std::string render_value_heatmap(const std::vector<std::string>& row_labels, const std::vector<IsoWeek>& weeks,
                                 const CellMatrix& values, const std::vector<ColorStop>& stops, const RenderSpec& spec);

std::string render_dendrogram(const Linkage& linkage, const std::vector<std::string>& labels,
                              const std::string& title = {});

std::string render_cluster_lines(const std::vector<EventWindow>& windows, const ClusterReport& report,
                                 const std::string& title = {});

std::string render_pair_comparison(const Corpus& corpus, const Date& anchor_a, const Date& anchor_b, int pre,
                                   int post, const std::string& title = {});

// Keys sorted as text (chronological for ISO week labels); 32 gray steps,
// black at distance 0 and white at the largest distance.
std::string render_similarity_matrix(const DistanceMatrix& dist, double cell_size = 2.0,
                                     const std::string& title = {});

// time_labels: one label per key in chronological order (ISO weeks sort as text).
std::string render_embedding_scatter(const Embedding& coords, const std::vector<std::string>& time_labels,
                                     const std::string& title = {});

// Dark blue -> teal -> bright yellow over [0, 1].
Rgb time_color(double t);

std::string render_evaluation(const Evaluation& evaluation, const std::string& title = {});
std::string render_keyword_totals(const std::map<std::string, std::vector<KeywordTotal>>& totals,
                                  const std::string& title = {});

} // namespace attn

#endif
