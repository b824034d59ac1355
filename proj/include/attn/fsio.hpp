#ifndef ATTN_FSIO_HPP
#define ATTN_FSIO_HPP

#include <filesystem>
#include <string>
#include <string_view>

namespace attn {

// Whole-file helpers; both throw IoError.
std::string read_text_file(const std::filesystem::path& path);
// Writes through a sibling temp file and renames, so readers never see a partial file.
void write_text_file(const std::filesystem::path& path, std::string_view contents);

// Hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

} // namespace attn

#endif
