#pragma once

// Precomputed sentence embeddings, keyed by the SHA-256 digest of the text.
//
// `emb.v1` is JSON Lines: a header {"format":"emb.v1","dim":384,"model":"..."}
// followed by one {"key":"<64 hex>","vec":[...]} object per line. Vectors are
// held as 32-bit floats and written with 9 significant digits, which
// round-trips every float exactly.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace moodrank {

inline constexpr std::size_t kEmbeddingDim = 384;

using EmbeddingVector = std::vector<float>;

// Lowercase hex SHA-256 of the UTF-8 bytes of `body`.
std::string text_key(std::string_view body);

class EmbeddingStore {
 public:
  using Entries = std::map<std::string, EmbeddingVector, std::less<>>;

  explicit EmbeddingStore(std::size_t dim = kEmbeddingDim, std::string model_tag = {});

  // Throws std::invalid_argument on a malformed key, wrong length, non-finite
  // component or duplicate key.
  void insert(std::string key, EmbeddingVector values);

  const EmbeddingVector* find_key(std::string_view key) const;
  bool contains_text(std::string_view body) const { return find_key(text_key(body)) != nullptr; }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::string& model_tag() const noexcept { return model_tag_; }
  const Entries& entries() const noexcept { return entries_; }

 private:
  std::size_t dim_;
  std::string model_tag_;
  Entries entries_;
};

// Throws EmbeddingNotFound (carrying the digest) when the text is absent.
const EmbeddingVector& get_embedding(const EmbeddingStore& store, std::string_view body);

EmbeddingStore parse_embedding_store(std::string_view text, const std::string& source = "<store>",
                                     std::size_t expected_dim = kEmbeddingDim);
EmbeddingStore load_embedding_store(const std::filesystem::path& path, std::size_t expected_dim = kEmbeddingDim);

// Rows are written in key order.
std::string serialize_embedding_store(const EmbeddingStore& store);
void save_embedding_store(const EmbeddingStore& store, const std::filesystem::path& path);

}  // namespace moodrank
