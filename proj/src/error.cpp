#include "moodrank/error.hpp"

namespace moodrank {
namespace {

std::string located(const std::string& source, std::size_t line, const std::string& message) {
  if (source.empty() && line == 0) return message;
  std::string out = source.empty() ? std::string("<input>") : source;
  if (line > 0) out += ":" + std::to_string(line);
  return out + ": " + message;
}

std::string describe_missing(const std::vector<std::string>& keys) {
  std::string out = "embedding not found for " + std::to_string(keys.size()) + " text(s)";
  const std::size_t shown = keys.size() < 5 ? keys.size() : 5;
  for (std::size_t i = 0; i < shown; ++i) out += (i == 0 ? ": " : ", ") + keys[i];
  if (shown < keys.size()) out += ", ...";
  return out;
}

}  // namespace

ParseError::ParseError(std::string source, std::size_t line, const std::string& message)
    : Error(located(source, line, message)), source_(std::move(source)), line_(line) {}

EmbeddingNotFound::EmbeddingNotFound(std::vector<std::string> keys)
    : Error(describe_missing(keys)), keys_(std::move(keys)) {}

}  // namespace moodrank
