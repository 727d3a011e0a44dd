#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace litscape {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// ISO-8601 UTC, second resolution.
std::string utc_timestamp_now();
std::string utc_timestamp(std::filesystem::file_time_type t);

}  // namespace litscape
