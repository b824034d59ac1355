#include "svg.hpp"

namespace attn::svg {

std::string escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += c;
        }
    }
    return out;
}

Document::Document(double width, double height, std::string font_family)
    : width_(width), height_(height), font_family_(std::move(font_family)) {}

void Document::rect(double x, double y, double w, double h, std::string_view fill, std::string_view attrs) {
    body_ += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"{}{}/>\n", num(x), num(y),
                         num(w), num(h), fill, attrs.empty() ? "" : " ", attrs);
}

void Document::line(double x1, double y1, double x2, double y2, std::string_view stroke, double width,
                    std::string_view attrs) {
    body_ += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"{}\"{}{}/>\n",
                         num(x1), num(y1), num(x2), num(y2), stroke, num(width), attrs.empty() ? "" : " ", attrs);
}

void Document::text(double x, double y, std::string_view content, double size, std::string_view attrs) {
    body_ += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"{}\"{}{}>{}</text>\n", num(x), num(y), num(size),
                         attrs.empty() ? "" : " ", attrs, escape(content));
}

void Document::open_group(std::string_view attrs) {
    body_ += fmt::format("<g {}>\n", attrs);
}

std::string Document::finish() const {
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
        "font-family=\"{}\">\n",
        num(width_), num(height_), num(width_), num(height_), escape(font_family_));
    out += "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    out += body_;
    out += "</svg>\n";
    return out;
}

} // namespace attn::svg
