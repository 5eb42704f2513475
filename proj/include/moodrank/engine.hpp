#pragma once

// Ranking: score = -|q_VA - s_VA| + w_ue * mem_ue + w_ea * mem_ea over the
// user's top-artist songs, or over the whole catalog when that filter is
// empty or the user is unknown.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "moodrank/annotator.hpp"
#include "moodrank/embedder.hpp"
#include "moodrank/features.hpp"
#include "moodrank/memory.hpp"
#include "moodrank/model.hpp"

namespace moodrank {

struct Query {
  std::optional<std::string> user_id;
  std::string body;
  VAPoint va;
  EmotionBin bin;

  friend bool operator==(const Query&, const Query&) = default;
};

struct RecommendConfig {
  std::size_t k = 5;
  double weight_ue = 1.0;
  double weight_ea = 1.0;

  void validate() const;
};

struct ScoredSong {
  const AnnotatedSong* song = nullptr;
  double distance = 0.0;
  double mem_ue = 0.0;
  double mem_ea = 0.0;
  double score = 0.0;
};

enum class PoolSource { top_artist, full_unknown_user, full_no_match };

struct CandidatePool {
  std::vector<const AnnotatedSong*> songs;
  PoolSource source = PoolSource::full_unknown_user;
};

// Throws EmbeddingNotFound when the text has no embedding.
Query encode_query(std::optional<std::string> user_id, std::string body, const WideDeepHead& head,
                   const VAScaler& scaler, const EmbeddingStore& store);
// Query at a known VA point (bin derived from it).
Query make_query(std::optional<std::string> user_id, std::string body, VAPoint va);

// Throws ValidationError for an empty song database.
CandidatePool candidate_pool(const Query& query, const SongDatabase& song_db, const UserProfiles& profiles);

ScoredSong score_song(const Query& query, const AnnotatedSong& song, const MemoryTables& tables,
                      const RecommendConfig& config);

// Higher score first; ties by (artist_norm, title) ascending.
bool ranks_before(const ScoredSong& a, const ScoredSong& b);

std::vector<ScoredSong> rank_pool(const Query& query, const CandidatePool& pool, const MemoryTables& tables,
                                  const RecommendConfig& config);
std::vector<ScoredSong> recommend_top_k(const Query& query, const SongDatabase& song_db, const MemoryTables& tables,
                                        const UserProfiles& profiles, const RecommendConfig& config);

}  // namespace moodrank
