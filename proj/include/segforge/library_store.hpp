#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "segforge/mapping.hpp"

namespace segforge {

// Single-file SQLite store with the tables compounds, mazes, games, clusters,
// membership, mapping and metadata. The library is validated and written in
// canonical order, so equal libraries produce byte-identical files. The file
// is written beside `path` and renamed into place.
// Throws IntegrityViolation.
void persist(const ContentLibrary& library, const std::filesystem::path& path);

// Throws CorruptStore when the file is missing or unreadable and
// IntegrityViolation when its tables are inconsistent.
ContentLibrary load(const std::filesystem::path& path);

// Lossless JSON form of the same tables.
std::string library_to_json(const ContentLibrary& library);
ContentLibrary library_from_json(std::string_view json);

// Returns a warning message when the library was built under a different
// configuration hash; a mismatch is not an error.
std::optional<std::string> check_config_hash(const ContentLibrary& library,
                                             std::string_view expected_hash);

}  // namespace segforge
