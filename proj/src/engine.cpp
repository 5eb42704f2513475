#include "moodrank/engine.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "moodrank/error.hpp"

namespace moodrank {

void RecommendConfig::validate() const {
  if (k == 0) throw ValidationError("recommend config: k must be at least 1");
  if (!std::isfinite(weight_ue) || !std::isfinite(weight_ea)) {
    throw ValidationError("recommend config: memory weights must be finite");
  }
}

Query encode_query(std::optional<std::string> user_id, std::string body, const WideDeepHead& head,
                   const VAScaler& scaler, const EmbeddingStore& store) {
  const VAPoint va = predict_va(head, scaler, store, body);
  return make_query(std::move(user_id), std::move(body), va);
}

Query make_query(std::optional<std::string> user_id, std::string body, VAPoint va) {
  return Query{std::move(user_id), std::move(body), va, va_bin(va)};
}

CandidatePool candidate_pool(const Query& query, const SongDatabase& song_db, const UserProfiles& profiles) {
  if (song_db.songs.empty()) throw ValidationError("song database is empty");
  CandidatePool pool;
  const UserProfile* profile = nullptr;
  if (query.user_id) {
    const auto it = profiles.find(*query.user_id);
    if (it != profiles.end()) profile = &it->second;
  }
  if (profile != nullptr) {
    for (const auto& s : song_db.songs) {
      if (s.artist_norm == profile->top_artist_norm) pool.songs.push_back(&s);
    }
    if (!pool.songs.empty()) {
      pool.source = PoolSource::top_artist;
      return pool;
    }
  }
  pool.source = profile != nullptr ? PoolSource::full_no_match : PoolSource::full_unknown_user;
  for (const auto& s : song_db.songs) pool.songs.push_back(&s);
  return pool;
}

ScoredSong score_song(const Query& query, const AnnotatedSong& song, const MemoryTables& tables,
                      const RecommendConfig& config) {
  ScoredSong scored;
  scored.song = &song;
  const double dv = query.va.valence - song.va.valence;
  const double da = query.va.arousal - song.va.arousal;
  scored.distance = std::sqrt(dv * dv + da * da);
  scored.mem_ue = query.user_id ? lookup_mem_ue(tables.user_emotion, *query.user_id, query.bin.id) : 0.0;
  scored.mem_ea = lookup_mem_ea(tables.emotion_artist, query.bin.id, song.artist_norm);
  scored.score = -scored.distance + config.weight_ue * scored.mem_ue + config.weight_ea * scored.mem_ea;
  return scored;
}

bool ranks_before(const ScoredSong& a, const ScoredSong& b) {
  if (a.score != b.score) return a.score > b.score;
  return std::tie(a.song->artist_norm, a.song->title) < std::tie(b.song->artist_norm, b.song->title);
}

std::vector<ScoredSong> rank_pool(const Query& query, const CandidatePool& pool, const MemoryTables& tables,
                                  const RecommendConfig& config) {
  config.validate();
  std::vector<ScoredSong> scored;
  scored.reserve(pool.songs.size());
  for (const AnnotatedSong* s : pool.songs) scored.push_back(score_song(query, *s, tables, config));
  const std::size_t keep = std::min(config.k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(), ranks_before);
  scored.resize(keep);
  return scored;
}

std::vector<ScoredSong> recommend_top_k(const Query& query, const SongDatabase& song_db, const MemoryTables& tables,
                                        const UserProfiles& profiles, const RecommendConfig& config) {
  return rank_pool(query, candidate_pool(query, song_db, profiles), tables, config);
}

}  // namespace moodrank
