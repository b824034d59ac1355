#ifndef ATTN_CSV_HPP
#define ATTN_CSV_HPP

#include <string>
#include <string_view>
#include <vector>

namespace attn::csv {

struct Row {
    std::size_t line; // 1-based line where the row starts
    std::vector<std::string> fields;
};

// RFC 4180: comma separated, double-quoted fields may hold commas, quotes ("")
// and line breaks; CRLF or LF row endings. Blank lines are skipped.
// Throws ParseError on an unterminated quote.
std::vector<Row> parse(std::string_view text);

// Quotes the field when it contains a comma, quote or line break.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

} // namespace attn::csv

#endif
