#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace segforge {

// Shortest decimal that round-trips to the same double.
std::string format_double(double value);
std::string format_fixed(double value, int decimals);

std::vector<std::string> split_fields(std::string_view line, char sep);
std::string_view trim_view(std::string_view s);

// Strict parsers; throw MalformedRecord on trailing junk or overflow.
int parse_int(std::string_view text);
long long parse_int64(std::string_view text);
double parse_double(std::string_view text);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// Lower-case hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

}  // namespace segforge
