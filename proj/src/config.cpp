#include "attn/config.hpp"

#include <fmt/format.h>

#include "attn/error.hpp"
#include "attn/fsio.hpp"

namespace attn {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

template <typename T>
void read_field(const json& obj, const char* name, T& out, const char* where) {
    auto it = obj.find(name);
    if (it == obj.end() || it->is_null()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception& e) {
        throw ContractError(fmt::format("config {}.{}: {}", where, name, e.what()));
    }
}

Date read_date(const json& v, const std::string& where) {
    if (!v.is_string()) throw ContractError("config " + where + ": expected a YYYY-MM-DD string");
    return parse_date(v.get<std::string>());
}

std::string centroid_name(CentroidMethod m) {
    return m == CentroidMethod::dba ? "dba" : "medoid";
}

CentroidMethod parse_centroid(const std::string& s) {
    if (s == "dba") return CentroidMethod::dba;
    if (s == "medoid") return CentroidMethod::medoid;
    throw ContractError("unknown centroid method '" + s + "'");
}

std::string window_norm_name(WindowNormalization n) {
    return n == WindowNormalization::mean_then_log ? "mean_then_log" : "log_then_center";
}

WindowNormalization parse_window_norm(const std::string& s) {
    if (s == "mean_then_log") return WindowNormalization::mean_then_log;
    if (s == "log_then_center") return WindowNormalization::log_then_center;
    throw ContractError("unknown window normalization '" + s + "'");
}

std::string vector_norm_name(VectorNormalization n) {
    return n == VectorNormalization::raw ? "raw" : "week_share";
}

VectorNormalization parse_vector_norm(const std::string& s) {
    if (s == "raw") return VectorNormalization::raw;
    if (s == "week_share") return VectorNormalization::week_share;
    throw ContractError("unknown vector normalization '" + s + "'");
}

void read_render(const json& j, RenderConfig& out) {
    auto& spec = out.spec;
    read_field(j, "cell_width", spec.cell_width, "render");
    read_field(j, "cell_height", spec.cell_height, "render");
    read_field(j, "deviation_clamp", spec.deviation_clamp, "render");
    read_field(j, "font_family", spec.font_family, "render");
    read_field(j, "title", spec.title, "render");
    if (auto it = j.find("magnitude_floor"); it != j.end())
        spec.magnitude_floor = it->is_null() ? std::nullopt : std::optional<double>(it->get<double>());
    if (auto it = j.find("magnitude_ceiling"); it != j.end())
        spec.magnitude_ceiling = it->is_null() ? std::nullopt : std::optional<double>(it->get<double>());
    if (auto it = j.find("missing_style"); it != j.end()) {
        const auto s = it->get<std::string>();
        if (s == "blank") spec.missing_style = MissingStyle::blank;
        else if (s == "hatch") spec.missing_style = MissingStyle::hatch;
        else throw ContractError("config render.missing_style: unknown style '" + s + "'");
    }
    if (auto it = j.find("color_stops"); it != j.end()) {
        spec.color_stops.clear();
        for (const auto& s : *it) spec.color_stops.push_back({s.at("value").get<double>(), Rgb::parse(s.at("color").get<std::string>())});
    }
    if (auto it = j.find("row_order"); it != j.end()) {
        if (it->is_string()) {
            const auto s = it->get<std::string>();
            if (s == "linkage") out.linkage_order = true, spec.row_order.reset();
            else if (s == "matrix") out.linkage_order = false, spec.row_order.reset();
            else throw ContractError("config render.row_order: expected \"linkage\", \"matrix\" or a permutation");
        } else {
            out.linkage_order = false;
            spec.row_order = it->get<std::vector<std::size_t>>();
        }
    }
}

} // namespace

Date RunConfig::anchor(const std::string& name) const {
    auto it = anchors.find(name);
    if (it == anchors.end()) throw ContractError("config has no anchor named '" + name + "'");
    return it->second;
}

EventSpan RunConfig::span_for(const Date& d) const {
    for (const auto& [name, date] : anchors) {
        if (date != d) continue;
        if (auto it = clustering.anchor_windows.find(name); it != clustering.anchor_windows.end()) return it->second;
    }
    return {clustering.pre_weeks, clustering.post_weeks};
}

RunConfig default_config() {
    RunConfig cfg;
    cfg.clustering.anchor_windows = {{"invasion_2014", {1, 3}}, {"invasion_2022", {4, 4}}};
    cfg.anchors = {{"invasion_2014", parse_date("2014-02-18")},
                   {"invasion_2022", parse_date("2022-02-24")},
                   {"comparison_2014", parse_date("2014-02-27")}};
    return cfg;
}

RunConfig config_from_json(const nlohmann::json& j, RunConfig cfg) {
    if (!j.is_object()) throw FormatError("config must be a JSON object");
    if (auto it = j.find("version"); it != j.end()) {
        if (!it->is_number_integer() || it->get<int>() != kConfigVersion)
            throw FormatError(fmt::format("unsupported config version {}", it->dump()));
    } else {
        throw FormatError("config has no version field");
    }
    try {
        if (auto it = j.find("keywords"); it != j.end()) {
            cfg.keywords.clear();
            for (const auto& k : *it)
                cfg.keywords.push_back({k.at("language").get<std::string>(), k.at("keyword").get<std::string>()});
        }
        if (auto it = j.find("endpoint"); it != j.end())
            cfg.endpoint = it->is_null() ? std::nullopt : std::optional<EndpointConfig>(endpoint_from_json(*it));
        if (auto it = j.find("date_range"); it != j.end() && !it->is_null())
            cfg.date_range = DateRange{read_date(it->at("start"), "date_range.start"),
                                       read_date(it->at("end"), "date_range.end")};
        if (auto it = j.find("anchors"); it != j.end())
            for (const auto& [name, v] : it->items()) cfg.anchors[name] = read_date(v, "anchors." + name);
        if (auto it = j.find("smoothing"); it != j.end()) {
            read_field(*it, "within", cfg.smoothing.within, "smoothing");
            read_field(*it, "share", cfg.smoothing.share, "smoothing");
        }
        if (auto it = j.find("clustering"); it != j.end()) {
            auto& c = cfg.clustering;
            read_field(*it, "k_2014", c.k_2014, "clustering");
            read_field(*it, "k_2022", c.k_2022, "clustering");
            read_field(*it, "seed", c.seed, "clustering");
            read_field(*it, "restarts", c.restarts, "clustering");
            read_field(*it, "pre_weeks", c.pre_weeks, "clustering");
            read_field(*it, "post_weeks", c.post_weeks, "clustering");
            read_field(*it, "k_min", c.k_min, "clustering");
            read_field(*it, "k_max", c.k_max, "clustering");
            read_field(*it, "threads", c.threads, "clustering");
            if (auto m = it->find("anchor_windows"); m != it->end()) {
                c.anchor_windows.clear();
                for (const auto& [name, w] : m->items())
                    c.anchor_windows[name] = {w.at("pre_weeks").get<int>(), w.at("post_weeks").get<int>()};
            }
            if (auto m = it->find("centroid"); m != it->end()) c.centroid = parse_centroid(m->get<std::string>());
            if (auto m = it->find("normalization"); m != it->end())
                c.normalization = parse_window_norm(m->get<std::string>());
        }
        if (auto it = j.find("window"); it != j.end()) {
            read_field(*it, "vector_weeks", cfg.window.vector_weeks, "window");
            read_field(*it, "stride", cfg.window.stride, "window");
            if (auto m = it->find("normalization"); m != it->end())
                cfg.window.normalization = parse_vector_norm(m->get<std::string>());
        }
        if (auto it = j.find("render"); it != j.end()) read_render(*it, cfg.render);
    } catch (const json::exception& e) {
        throw ContractError(std::string("config: ") + e.what());
    }
    validate_config(cfg);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    const auto text = read_text_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

void validate_config(const RunConfig& cfg) {
    if (cfg.smoothing.within < 1 || cfg.smoothing.share < 1) throw ContractError("smoothing windows must be >= 1");
    const auto& c = cfg.clustering;
    if (c.k_2014 < 1 || c.k_2022 < 1) throw ContractError("cluster counts must be >= 1");
    if (c.restarts < 1) throw ContractError("restarts must be >= 1");
    auto check_span = [](int pre, int post) {
        if (pre < 0 || post < 0 || pre + post < 1) throw ContractError("event window must span at least one week");
    };
    check_span(c.pre_weeks, c.post_weeks);
    for (const auto& [name, w] : c.anchor_windows) {
        if (!cfg.anchors.count(name)) throw ContractError("anchor_windows names unknown anchor '" + name + "'");
        check_span(w.pre_weeks, w.post_weeks);
    }
    if (c.k_min < 1 || c.k_max < c.k_min) throw ContractError("need 1 <= k_min <= k_max");
    if (c.threads < 1) throw ContractError("threads must be >= 1");
    if (cfg.window.vector_weeks < 1 || cfg.window.stride < 1) throw ContractError("window weeks and stride must be >= 1");
    if (cfg.date_range && cfg.date_range->end < cfg.date_range->start) throw ContractError("date_range ends before it starts");
    if (cfg.endpoint) validate_endpoint(*cfg.endpoint);
    validate_render_spec(cfg.render.spec);
}

ojson render_spec_to_json(const RenderSpec& spec) {
    ojson r;
    r["cell_width"] = spec.cell_width;
    r["cell_height"] = spec.cell_height;
    ojson stops = ojson::array();
    for (const auto& s : effective_color_stops(spec)) stops.push_back({{"value", s.value}, {"color", s.color.hex()}});
    r["color_stops"] = stops;
    r["deviation_clamp"] = spec.deviation_clamp;
    r["magnitude_floor"] = spec.magnitude_floor ? ojson(*spec.magnitude_floor) : ojson(nullptr);
    r["magnitude_ceiling"] = spec.magnitude_ceiling ? ojson(*spec.magnitude_ceiling) : ojson(nullptr);
    r["font_family"] = spec.font_family;
    r["missing_style"] = spec.missing_style == MissingStyle::hatch ? "hatch" : "blank";
    return r;
}

ojson config_to_json(const RunConfig& cfg) {
    ojson j;
    j["version"] = cfg.version;
    ojson kws = ojson::array();
    for (const auto& k : cfg.keywords) kws.push_back({{"language", k.language}, {"keyword", k.keyword}});
    j["keywords"] = kws;
    j["endpoint"] = cfg.endpoint ? ojson(endpoint_to_json(*cfg.endpoint)) : ojson(nullptr);
    j["date_range"] = cfg.date_range ? ojson{{"start", format_date(cfg.date_range->start)},
                                             {"end", format_date(cfg.date_range->end)}}
                                     : ojson(nullptr);
    ojson anchors = ojson::object();
    for (const auto& [name, d] : cfg.anchors) anchors[name] = format_date(d);
    j["anchors"] = anchors;
    j["smoothing"] = {{"within", cfg.smoothing.within}, {"share", cfg.smoothing.share}};
    const auto& c = cfg.clustering;
    ojson windows = ojson::object();
    for (const auto& [name, w] : c.anchor_windows) windows[name] = {{"pre_weeks", w.pre_weeks}, {"post_weeks", w.post_weeks}};
    j["clustering"] = {{"k_2014", c.k_2014},       {"k_2022", c.k_2022},
                       {"seed", c.seed},           {"restarts", c.restarts},
                       {"pre_weeks", c.pre_weeks}, {"post_weeks", c.post_weeks},
                       {"anchor_windows", windows},
                       {"k_min", c.k_min},         {"k_max", c.k_max},
                       {"centroid", centroid_name(c.centroid)},
                       {"normalization", window_norm_name(c.normalization)},
                       {"threads", c.threads}};
    j["window"] = {{"vector_weeks", cfg.window.vector_weeks},
                   {"stride", cfg.window.stride},
                   {"normalization", vector_norm_name(cfg.window.normalization)}};
    auto render = render_spec_to_json(cfg.render.spec);
    if (cfg.render.spec.row_order) render["row_order"] = *cfg.render.spec.row_order;
    else render["row_order"] = cfg.render.linkage_order ? "linkage" : "matrix";
    j["render"] = render;
    return j;
}

} // namespace attn
