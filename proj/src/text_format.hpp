#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace moodrank::detail {

// printf-style %.<digits>g rendering; valid JSON for finite values.
std::string format_real(double value, int significant_digits);

std::string json_string(std::string_view text);

// Splits on LF; a trailing CR is dropped. Returns (1-based line, text) pairs
// for non-empty lines.
std::vector<std::pair<std::size_t, std::string_view>> split_lines(std::string_view text);

nlohmann::json parse_json_line(std::string_view line, const std::string& source, std::size_t line_no);

}  // namespace moodrank::detail
