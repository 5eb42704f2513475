#include "text_format.hpp"

#include <cstdio>

#include "moodrank/error.hpp"

namespace moodrank::detail {

std::string format_real(double value, int significant_digits) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", significant_digits, value);
  return buf;
}

std::string json_string(std::string_view text) { return nlohmann::json(std::string(text)).dump(); }

std::vector<std::pair<std::size_t, std::string_view>> split_lines(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  std::size_t pos = 0, line = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view row = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line;
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    if (!row.empty()) lines.emplace_back(line, row);
  }
  return lines;
}

nlohmann::json parse_json_line(std::string_view line, const std::string& source, std::size_t line_no) {
  try {
    auto j = nlohmann::json::parse(line);
    if (!j.is_object()) throw ParseError(source, line_no, "expected a JSON object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source, line_no, std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace moodrank::detail
