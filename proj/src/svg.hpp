#ifndef ATTN_SRC_SVG_HPP
#define ATTN_SRC_SVG_HPP

#include <string>
#include <string_view>

#include <fmt/format.h>

namespace attn::svg {

std::string escape(std::string_view text);

// Fixed two-decimal coordinates keep documents byte-stable.
inline std::string num(double v) {
    std::string s = fmt::format("{:.2f}", v);
    if (s == "-0.00") s = "0.00";
    return s;
}

// Accumulates one SVG 1.1 document with inline styling.
class Document {
public:
    Document(double width, double height, std::string font_family);

    void raw(std::string_view text) { body_ += text; }
    void rect(double x, double y, double w, double h, std::string_view fill, std::string_view attrs = {});
    void line(double x1, double y1, double x2, double y2, std::string_view stroke, double width = 1,
              std::string_view attrs = {});
    void text(double x, double y, std::string_view content, double size, std::string_view attrs = {});
    void open_group(std::string_view attrs);
    void close_group() { body_ += "</g>\n"; }

    std::string finish() const;

private:
    double width_, height_;
    std::string font_family_;
    std::string body_;
};

} // namespace attn::svg

#endif
