#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace affect::csv {

/// Splits one line on commas. No quoting: every file in this toolkit is numeric
/// apart from identifier columns, which may not contain commas.
std::vector<std::string_view> split(std::string_view line);

std::optional<double> parse_double(std::string_view field);
std::optional<std::int64_t> parse_int(std::string_view field);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Reads a text file into lines, dropping a trailing '\r' and blank trailing lines.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Truncates and writes, creating parent directories.
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace affect::csv
