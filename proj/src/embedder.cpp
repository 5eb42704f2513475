#include "moodrank/embedder.hpp"

#include <cmath>
#include <stdexcept>

#include <openssl/evp.h>

#include "csv.hpp"
#include "moodrank/error.hpp"
#include "text_format.hpp"

namespace moodrank {
namespace {

constexpr std::string_view kStoreFormat = "emb.v1";

bool is_digest(std::string_view key) {
  if (key.size() != 64) return false;
  for (char c : key) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

}  // namespace

std::string text_key(std::string_view body) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(body.data(), body.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

EmbeddingStore::EmbeddingStore(std::size_t dim, std::string model_tag) : dim_(dim), model_tag_(std::move(model_tag)) {
  if (dim_ == 0) throw std::invalid_argument("embedding dimension must be positive");
}

void EmbeddingStore::insert(std::string key, EmbeddingVector values) {
  if (!is_digest(key)) throw std::invalid_argument("embedding key is not a 64-char lowercase hex digest");
  if (values.size() != dim_) {
    throw std::invalid_argument("embedding has " + std::to_string(values.size()) + " values, store dim is " +
                                std::to_string(dim_));
  }
  for (float v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("embedding has a non-finite component");
  }
  if (!entries_.emplace(std::move(key), std::move(values)).second) {
    throw std::invalid_argument("duplicate embedding key");
  }
}

const EmbeddingVector* EmbeddingStore::find_key(std::string_view key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

const EmbeddingVector& get_embedding(const EmbeddingStore& store, std::string_view body) {
  std::string key = text_key(body);
  if (const auto* v = store.find_key(key)) return *v;
  throw EmbeddingNotFound({std::move(key)});
}

EmbeddingStore parse_embedding_store(std::string_view text, const std::string& source, std::size_t expected_dim) {
  const auto lines = detail::split_lines(text);
  if (lines.empty()) throw ParseError(source, 1, "missing emb.v1 header");

  const auto& [header_line, header_text] = lines.front();
  const auto header = detail::parse_json_line(header_text, source, header_line);
  if (header.contains("format") && header["format"].is_string() && header["format"] != kStoreFormat &&
      header["format"].get<std::string>().rfind("emb.v", 0) == 0) {
    throw VersionError(source + ":" + std::to_string(header_line) + ": unsupported store version " +
                       header["format"].get<std::string>());
  }
  if (!header.contains("format") || header["format"] != kStoreFormat) {
    throw ParseError(source, header_line, "header is not an emb.v1 header");
  }
  if (!header.contains("dim") || !header["dim"].is_number_unsigned()) {
    throw ParseError(source, header_line, "header lacks an integer dim");
  }
  const auto dim = header["dim"].get<std::size_t>();
  if (dim != expected_dim) {
    throw ParseError(source, header_line,
                     "store dim " + std::to_string(dim) + " does not match expected " + std::to_string(expected_dim));
  }
  std::string model = header.contains("model") && header["model"].is_string() ? header["model"].get<std::string>() : "";

  EmbeddingStore store(dim, std::move(model));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& [line_no, row_text] = lines[i];
    const auto row = detail::parse_json_line(row_text, source, line_no);
    if (!row.contains("key") || !row["key"].is_string()) throw ParseError(source, line_no, "row lacks a string key");
    if (!row.contains("vec") || !row["vec"].is_array()) throw ParseError(source, line_no, "row lacks a vec array");
    std::string key = row["key"].get<std::string>();
    if (!is_digest(key)) throw ParseError(source, line_no, "key is not a 64-char lowercase hex digest");
    const auto& vec = row["vec"];
    if (vec.size() != dim) {
      throw ParseError(source, line_no,
                       "vector has " + std::to_string(vec.size()) + " values, expected " + std::to_string(dim));
    }
    EmbeddingVector values;
    values.reserve(dim);
    for (const auto& x : vec) {
      if (!x.is_number()) throw ParseError(source, line_no, "vector component is not a number");
      const float f = static_cast<float>(x.get<double>());
      if (!std::isfinite(f)) throw ParseError(source, line_no, "vector component is not finite");
      values.push_back(f);
    }
    if (store.find_key(key) != nullptr) throw ParseError(source, line_no, "duplicate key " + key);
    store.insert(std::move(key), std::move(values));
  }
  return store;
}

EmbeddingStore load_embedding_store(const std::filesystem::path& path, std::size_t expected_dim) {
  return parse_embedding_store(detail::read_text_file(path), path.string(), expected_dim);
}

std::string serialize_embedding_store(const EmbeddingStore& store) {
  std::string out = "{\"format\":\"emb.v1\",\"dim\":" + std::to_string(store.dim()) +
                    ",\"model\":" + detail::json_string(store.model_tag()) + "}\n";
  for (const auto& [key, vec] : store.entries()) {
    out += "{\"key\":\"" + key + "\",\"vec\":[";
    for (std::size_t i = 0; i < vec.size(); ++i) {
      if (i != 0) out += ',';
      out += detail::format_real(vec[i], 9);
    }
    out += "]}\n";
  }
  return out;
}

void save_embedding_store(const EmbeddingStore& store, const std::filesystem::path& path) {
  detail::write_text_file(path, serialize_embedding_store(store));
}

}  // namespace moodrank
