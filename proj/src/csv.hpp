#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace moodrank::detail {

struct TextRecord {
  std::size_t line = 0;  // physical line where the record starts, 1-based
  std::vector<std::string> fields;
};

// RFC-4180 reader: comma-separated, double-quote quoting with "" escapes,
// quoted fields may span lines. LF or CRLF record ends. Blank lines skipped.
std::vector<TextRecord> parse_csv(std::string_view text, const std::string& source);

// Tab-separated, no quoting.
std::vector<TextRecord> parse_tsv(std::string_view text);

std::string csv_field(std::string_view value);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

// Maps required column names to positions in a header record; extra columns
// are allowed. Throws ParseError naming the first missing column.
std::vector<std::size_t> locate_columns(const TextRecord& header, const std::vector<std::string>& required,
                                        const std::string& source);

double parse_real(std::string_view text, const std::string& source, std::size_t line, std::string_view what);

}  // namespace moodrank::detail
