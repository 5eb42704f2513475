#pragma once

// Memorization side of the recommender: per-user profiles from the play log
// and the two row-normalized preference tables over the 9 emotion bins.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moodrank/annotator.hpp"
#include "moodrank/corpus.hpp"
#include "moodrank/features.hpp"

namespace moodrank {

enum class Engagement { low, medium, high, super };

std::string_view engagement_name(Engagement e) noexcept;

struct UserProfile {
  std::string user_id;
  std::string top_artist_norm;
  std::uint64_t total_plays = 0;
  Engagement engagement = Engagement::low;

  friend bool operator==(const UserProfile&, const UserProfile&) = default;
};

using UserProfiles = std::map<std::string, UserProfile, std::less<>>;

// Argmax of summed play counts; ties go to the lexicographically smallest
// artist. Throws ValidationError if `user_plays` is empty.
std::string top_artist(std::span<const PlayRecord> user_plays);

// Quartiles by nearest rank, taking rank floor(p * N) + 1 (capped at N):
// below Q1 low, [Q1, Q2) medium, [Q2, Q3) high, from Q3 up super.
Engagement engagement_level(std::uint64_t total_plays, std::span<const std::uint64_t> all_user_totals);

// All play records count here, whether or not the artist has songs.
UserProfiles build_user_profiles(std::span<const PlayRecord> plays);

using EmotionRow = std::array<double, kEmotionBins>;

struct UserEmotionTable {
  std::map<std::string, EmotionRow, std::less<>> rows;

  friend bool operator==(const UserEmotionTable&, const UserEmotionTable&) = default;
};

struct EmotionArtistTable {
  std::array<std::map<std::string, double, std::less<>>, kEmotionBins> rows;

  friend bool operator==(const EmotionArtistTable&, const EmotionArtistTable&) = default;
};

struct MemoryTables {
  UserEmotionTable user_emotion;
  EmotionArtistTable emotion_artist;
  std::size_t matched_artists = 0;  // play-log artists with at least one annotated song

  friend bool operator==(const MemoryTables&, const MemoryTables&) = default;
};

// Unnormalized play mass. Each play record whose artist has annotated songs
// is split equally across those songs and credited to the song's bin.
// Accumulation runs in a canonical order, so the result does not depend on
// the order of records in the catalog.
MemoryTables accumulate_play_mass(const Catalog& catalog, const SongDatabase& song_db);
MemoryTables normalize_rows(MemoryTables raw);
MemoryTables build_memory_tables(const Catalog& catalog, const SongDatabase& song_db);

// 0 when the user, bin or artist is absent.
double lookup_mem_ue(const UserEmotionTable& table, std::string_view user_id, int bin);
double lookup_mem_ea(const EmotionArtistTable& table, int bin, std::string_view artist_norm);

// memtab.v1 JSON Lines: header {"format":"memtab.v1","kind":...} then rows
//   user_emotion:   {"user":"...","p":[9 reals]}
//   emotion_artist: {"bin":k,"artists":{"name":p,...}}
std::string serialize_user_emotion(const UserEmotionTable& table);
std::string serialize_emotion_artist(const EmotionArtistTable& table);
UserEmotionTable parse_user_emotion(std::string_view text, const std::string& source = "<memtab>");
EmotionArtistTable parse_emotion_artist(std::string_view text, const std::string& source = "<memtab>");

void save_memory_tables(const MemoryTables& tables, const std::filesystem::path& user_emotion_path,
                        const std::filesystem::path& emotion_artist_path);
MemoryTables load_memory_tables(const std::filesystem::path& user_emotion_path,
                                const std::filesystem::path& emotion_artist_path);

}  // namespace moodrank
