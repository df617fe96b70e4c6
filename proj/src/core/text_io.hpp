#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace spinweb::text {

// Shortest representation that parses back to the identical double.
std::string format_double(double value);

double parse_double(std::string_view token, std::size_t line);
std::uint64_t parse_u64(std::string_view token, std::size_t line);
std::int64_t parse_i64(std::string_view token, std::size_t line);

// Whitespace split, no empty tokens.
std::vector<std::string_view> split(std::string_view line);

std::string_view trim(std::string_view s);

// Reads one line; strips a trailing '\r'. Returns false at EOF.
bool next_line(std::istream& in, std::string& line, std::size_t& line_no);

std::ofstream open_output(const std::filesystem::path& path);
std::ifstream open_input(const std::filesystem::path& path);

// FNV-1a 64; stable across platforms, used for config and content hashes.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

std::string hex64(std::uint64_t v);

}  // namespace spinweb::text
