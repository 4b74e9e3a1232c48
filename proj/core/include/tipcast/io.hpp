#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tipcast {

/// Shortest round-trip decimal text, at most 17 significant digits.
std::string format_double(double value);

/// Strict parse of a full field; nullopt on any trailing garbage or empty input.
/// Accepts "nan"/"inf" spellings, which callers then reject as needed.
std::optional<double> parse_double(std::string_view text);

/// Splits one CSV record on commas. Quoted fields are unquoted; embedded
/// newlines are not supported.
std::vector<std::string> split_csv_line(std::string_view line);

std::string join_doubles(const std::vector<double>& values);

std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it into place.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Git blob object id (SHA-1 over "blob <size>\0" + bytes), lowercase hex.
std::string git_blob_sha1(std::string_view bytes);
std::string git_blob_sha1_file(const std::filesystem::path& path);

}  // namespace tipcast
