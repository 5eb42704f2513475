#pragma once

// Readers, writers and validation for the three input datasets: the labelled
// emotion sentences, the lyrics catalog and the per-artist play log.
//
//   emotion corpus  CSV  header id,text,V,A        (RFC-4180 quoting)
//   lyrics catalog  CSV  header artist,song,text
//   play log        TSV  header user_id<TAB>artist_name<TAB>plays
//
// Columns are located by header name, so extra columns are tolerated.
// Any row that fails validation aborts the read with a line-numbered error.

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace moodrank {

inline constexpr double kCorpusScaleMin = 1.0;
inline constexpr double kCorpusScaleMax = 5.0;

struct EmotionSentence {
  std::string id;
  std::string body;
  double valence = 0.0;
  double arousal = 0.0;

  friend bool operator==(const EmotionSentence&, const EmotionSentence&) = default;
};

struct SongRecord {
  std::string artist_raw;
  std::string artist_norm;
  std::string title;
  std::string lyrics;

  friend bool operator==(const SongRecord&, const SongRecord&) = default;
};

struct PlayRecord {
  std::string user_id;
  std::string artist_raw;
  std::string artist_norm;
  std::uint64_t play_count = 0;

  friend bool operator==(const PlayRecord&, const PlayRecord&) = default;
};

struct Catalog {
  std::vector<SongRecord> songs;
  std::vector<PlayRecord> plays;
  std::set<std::string> joined_artists;
};

// Lowercase, NFKC, Unicode punctuation (general category P*) removed,
// whitespace runs collapsed to one space, ends trimmed. Idempotent.
std::string normalize_artist_name(std::string_view raw);

// `source` names the input in error messages.
std::vector<EmotionSentence> parse_emotion_corpus_text(std::string_view text, const std::string& source = "<corpus>");
std::vector<SongRecord> parse_lyrics_catalog_text(std::string_view text, const std::string& source = "<lyrics>");
std::vector<PlayRecord> parse_play_log_text(std::string_view text, const std::string& source = "<playlog>");

std::vector<EmotionSentence> parse_emotion_corpus(const std::filesystem::path& path);
std::vector<SongRecord> parse_lyrics_catalog(const std::filesystem::path& path);
std::vector<PlayRecord> parse_play_log(const std::filesystem::path& path);

std::string serialize_emotion_corpus(std::span<const EmotionSentence> sentences);
std::string serialize_lyrics_catalog(std::span<const SongRecord> songs);
std::string serialize_play_log(std::span<const PlayRecord> plays);

Catalog join_catalog(std::vector<SongRecord> songs, std::vector<PlayRecord> plays);

}  // namespace moodrank
