#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dtgnss {

/// CRC-32 (zlib polynomial) of a byte string. Used for content hashes in
/// database metadata and for the database file checksum line.
std::uint32_t crc32_of(std::string_view data);

/// Formats a CRC as the canonical 0x-prefixed 8-digit lower-case hex token.
std::string format_hash(std::uint32_t h);

std::string read_file(const std::filesystem::path& path);

/// Writes content to a temporary sibling and renames it into place, so a
/// partially written file is never observable under the final name.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

/// Splits on a single-char delimiter; keeps empty fields.
std::vector<std::string> split(std::string_view line, char delim);

/// Shortest round-trip decimal form of a double ("17", "0.5", "1e+20").
std::string format_double(double v);

/// Fixed-point form with the given number of decimals.
std::string format_fixed(double v, int decimals);

double parse_double(std::string_view token, std::string_view context);
long parse_long(std::string_view token, std::string_view context);

} // namespace dtgnss
