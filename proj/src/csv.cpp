#include "csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "moodrank/error.hpp"

namespace moodrank::detail {
namespace {

std::string_view strip_bom(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  return text;
}

bool blank(const TextRecord& r) { return r.fields.size() == 1 && r.fields[0].empty(); }

}  // namespace

std::vector<TextRecord> parse_csv(std::string_view text, const std::string& source) {
  text = strip_bom(text);
  std::vector<TextRecord> records;
  TextRecord current;
  std::string field;
  std::size_t line = 1;
  current.line = 1;
  bool quoted_field = false;  // current field began with a quote
  bool in_quotes = false;
  std::size_t quote_line = 0;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    quoted_field = false;
  };
  auto end_record = [&] {
    end_field();
    if (!blank(current)) records.push_back(std::move(current));
    current = TextRecord{};
    current.line = line;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
          const char next = i + 1 < text.size() ? text[i + 1] : '\n';
          if (next != ',' && next != '\n' && next != '\r') {
            throw ParseError(source, line, "unexpected character after closing quote");
          }
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field.empty() && !quoted_field) {
          in_quotes = true;
          quoted_field = true;
          quote_line = line;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        field.push_back(c);
        break;
      case '\n':
        ++line;
        end_record();
        break;
      default:
        field.push_back(c);
    }
  }
  if (in_quotes) throw ParseError(source, quote_line, "unterminated quoted field");
  if (!field.empty() || !current.fields.empty() || quoted_field) end_record();
  return records;
}

std::vector<TextRecord> parse_tsv(std::string_view text) {
  text = strip_bom(text);
  std::vector<TextRecord> records;
  std::size_t line = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view row = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line;
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    if (row.empty()) continue;
    TextRecord r;
    r.line = line;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = row.find('\t', start);
      r.fields.emplace_back(row.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\n\r") == std::string_view::npos && !value.empty()) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("write failed for " + path.string());
}

std::vector<std::size_t> locate_columns(const TextRecord& header, const std::vector<std::string>& required,
                                        const std::string& source) {
  std::vector<std::size_t> positions;
  for (const auto& name : required) {
    std::size_t found = header.fields.size();
    for (std::size_t i = 0; i < header.fields.size(); ++i) {
      if (header.fields[i] == name) {
        found = i;
        break;
      }
    }
    if (found == header.fields.size()) throw ParseError(source, header.line, "header lacks column '" + name + "'");
    positions.push_back(found);
  }
  return positions;
}

double parse_real(std::string_view text, const std::string& source, std::size_t line, std::string_view what) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ParseError(source, line, std::string(what) + " is not a number: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace moodrank::detail
