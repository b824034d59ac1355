#include "attn/csv.hpp"

#include "attn/error.hpp"

namespace attn::csv {

std::vector<Row> parse(std::string_view text) {
    std::vector<Row> rows;
    // Skip a UTF-8 byte order mark.
    if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

    std::size_t line = 1;
    std::size_t i = 0;
    while (i < text.size()) {
        Row row{line, {}};
        std::string field;
        bool row_done = false;
        bool any_content = false;
        while (!row_done) {
            if (i < text.size() && text[i] == '"') {
                any_content = true;
                const std::size_t quote_line = line;
                ++i;
                for (;;) {
                    if (i >= text.size()) throw ParseError(quote_line, "<quoted>", "unterminated quoted field");
                    const char c = text[i++];
                    if (c == '"') {
                        if (i < text.size() && text[i] == '"') {
                            field += '"';
                            ++i;
                        } else {
                            break;
                        }
                    } else {
                        if (c == '\n') ++line;
                        field += c;
                    }
                }
            }
            while (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
                any_content = true;
                field += text[i++];
            }
            if (i >= text.size()) {
                row_done = true;
            } else if (text[i] == ',') {
                any_content = true;
                ++i;
            } else {
                if (text[i] == '\r') ++i;
                if (i < text.size() && text[i] == '\n') ++i;
                ++line;
                row_done = true;
            }
            row.fields.push_back(std::move(field));
            field.clear();
        }
        if (any_content) rows.push_back(std::move(row));
    }
    return rows;
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string join(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += escape(fields[i]);
    }
    return out;
}

} // namespace attn::csv
