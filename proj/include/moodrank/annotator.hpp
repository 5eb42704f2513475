#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moodrank/corpus.hpp"
#include "moodrank/embedder.hpp"
#include "moodrank/features.hpp"
#include "moodrank/model.hpp"

namespace moodrank {

inline constexpr std::size_t kDefaultChunkWords = 50;

struct AnnotatedSong {
  std::string artist_norm;
  std::string artist_display;
  std::string title;
  VAPoint va;
  std::size_t chunk_count = 1;

  friend bool operator==(const AnnotatedSong&, const AnnotatedSong&) = default;
};

struct SongDatabase {
  std::vector<AnnotatedSong> songs;
  std::string model_tag;
  VAScaler scaler;

  friend bool operator==(const SongDatabase&, const SongDatabase&) = default;
};

struct SkippedSong {
  std::string artist;
  std::string title;
  std::string reason;
  std::vector<std::string> missing_keys;
};

struct AnnotationResult {
  SongDatabase db;
  std::vector<SkippedSong> skipped;
};

// Consecutive non-overlapping windows of `chunk_words` words, each rejoined
// with single spaces; the last window may be shorter. The embedding key of a
// chunk is text_key() of exactly this string.
std::vector<std::string> chunk_lyrics(std::string_view lyrics, std::size_t chunk_words = kDefaultChunkWords);

// Unweighted mean, summed in index order.
VAPoint mean_va(std::span<const VAPoint> points);

// The song's VA is the chunk mean rounded to 32-bit float precision, the
// precision the song DB stores. Throws EmbeddingNotFound listing every
// missing chunk key.
AnnotatedSong annotate_song(const SongRecord& song, const WideDeepHead& head, const VAScaler& scaler,
                            const EmbeddingStore& store, std::size_t chunk_words = kDefaultChunkWords);

// Songs with missing chunk embeddings are reported in `skipped`; throws
// ValidationError if the catalog is empty or every song was skipped.
AnnotationResult annotate_catalog(const Catalog& catalog, const WideDeepHead& head, const VAScaler& scaler,
                                  const EmbeddingStore& store, std::size_t chunk_words = kDefaultChunkWords);

// songdb.v1: JSON Lines, header {"format":"songdb.v1","model":...,"scaler":...}
// then one row per song; reals at 9 significant digits.
std::string serialize_song_db(const SongDatabase& db);
SongDatabase parse_song_db(std::string_view text, const std::string& source = "<songdb>");
void save_song_db(const SongDatabase& db, const std::filesystem::path& path);
SongDatabase load_song_db(const std::filesystem::path& path);

}  // namespace moodrank
