#include "moodrank/memory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "moodrank/error.hpp"
#include "text_format.hpp"

namespace moodrank {

std::string_view engagement_name(Engagement e) noexcept {
  switch (e) {
    case Engagement::low:
      return "low";
    case Engagement::medium:
      return "medium";
    case Engagement::high:
      return "high";
    case Engagement::super:
      return "super";
  }
  return "unknown";
}

std::string top_artist(std::span<const PlayRecord> user_plays) {
  if (user_plays.empty()) throw ValidationError("top_artist: user has no play records");
  std::map<std::string_view, std::uint64_t> totals;
  for (const auto& p : user_plays) totals[p.artist_norm] += p.play_count;
  // std::map iterates in ascending key order, so a strict > keeps the
  // smallest name among ties.
  auto best = totals.begin();
  for (auto it = totals.begin(); it != totals.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return std::string(best->first);
}

Engagement engagement_level(std::uint64_t total_plays, std::span<const std::uint64_t> all_user_totals) {
  if (all_user_totals.empty()) throw ValidationError("engagement_level: empty population");
  std::vector<std::uint64_t> sorted(all_user_totals.begin(), all_user_totals.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  auto quartile = [&](std::size_t quarters) {
    const std::size_t rank = std::min(n, quarters * n / 4 + 1);
    return sorted[rank - 1];
  };
  if (total_plays >= quartile(3)) return Engagement::super;
  if (total_plays >= quartile(2)) return Engagement::high;
  if (total_plays >= quartile(1)) return Engagement::medium;
  return Engagement::low;
}

UserProfiles build_user_profiles(std::span<const PlayRecord> plays) {
  std::map<std::string, std::vector<PlayRecord>, std::less<>> by_user;
  for (const auto& p : plays) by_user[p.user_id].push_back(p);
  std::vector<std::uint64_t> totals;
  UserProfiles profiles;
  for (const auto& [user, records] : by_user) {
    UserProfile profile;
    profile.user_id = user;
    profile.top_artist_norm = top_artist(records);
    for (const auto& r : records) profile.total_plays += r.play_count;
    totals.push_back(profile.total_plays);
    profiles.emplace(user, std::move(profile));
  }
  for (auto& [user, profile] : profiles) profile.engagement = engagement_level(profile.total_plays, totals);
  return profiles;
}

MemoryTables accumulate_play_mass(const Catalog& catalog, const SongDatabase& song_db) {
  // Per artist: number of annotated songs in each bin, accumulated in title
  // order.
  std::map<std::string, std::vector<const AnnotatedSong*>, std::less<>> songs_by_artist;
  for (const auto& s : song_db.songs) songs_by_artist[s.artist_norm].push_back(&s);
  for (auto& [artist, songs] : songs_by_artist) {
    std::sort(songs.begin(), songs.end(),
              [](const AnnotatedSong* a, const AnnotatedSong* b) { return a->title < b->title; });
  }

  std::vector<const PlayRecord*> plays;
  for (const auto& p : catalog.plays) plays.push_back(&p);
  std::sort(plays.begin(), plays.end(), [](const PlayRecord* a, const PlayRecord* b) {
    return std::tie(a->user_id, a->artist_norm, a->play_count) < std::tie(b->user_id, b->artist_norm, b->play_count);
  });

  MemoryTables raw;
  std::set<std::string_view> matched;
  for (const PlayRecord* p : plays) {
    const auto it = songs_by_artist.find(p->artist_norm);
    if (it == songs_by_artist.end()) continue;
    matched.insert(it->first);
    const auto& songs = it->second;
    const double share = static_cast<double>(p->play_count) / static_cast<double>(songs.size());
    for (const AnnotatedSong* s : songs) {
      const int bin = va_bin(s->va).id;
      auto& user_row = raw.user_emotion.rows.try_emplace(p->user_id, EmotionRow{}).first->second;
      user_row[static_cast<std::size_t>(bin)] += share;
      raw.emotion_artist.rows[static_cast<std::size_t>(bin)][s->artist_norm] += share;
    }
  }
  raw.matched_artists = matched.size();
  return raw;
}

MemoryTables normalize_rows(MemoryTables raw) {
  MemoryTables out;
  out.matched_artists = raw.matched_artists;
  for (auto& [user, row] : raw.user_emotion.rows) {
    const double total = std::accumulate(row.begin(), row.end(), 0.0);
    if (!(total > 0.0)) continue;
    for (double& x : row) x /= total;
    out.user_emotion.rows.emplace(user, row);
  }
  for (std::size_t bin = 0; bin < raw.emotion_artist.rows.size(); ++bin) {
    double total = 0.0;
    for (const auto& [artist, w] : raw.emotion_artist.rows[bin]) total += w;
    if (!(total > 0.0)) continue;
    for (const auto& [artist, w] : raw.emotion_artist.rows[bin]) {
      if (w > 0.0) out.emotion_artist.rows[bin].emplace(artist, w / total);
    }
  }
  return out;
}

MemoryTables build_memory_tables(const Catalog& catalog, const SongDatabase& song_db) {
  return normalize_rows(accumulate_play_mass(catalog, song_db));
}

double lookup_mem_ue(const UserEmotionTable& table, std::string_view user_id, int bin) {
  if (bin < 0 || bin >= kEmotionBins) return 0.0;
  const auto it = table.rows.find(user_id);
  return it == table.rows.end() ? 0.0 : it->second[static_cast<std::size_t>(bin)];
}

double lookup_mem_ea(const EmotionArtistTable& table, int bin, std::string_view artist_norm) {
  if (bin < 0 || bin >= kEmotionBins) return 0.0;
  const auto& row = table.rows[static_cast<std::size_t>(bin)];
  const auto it = row.find(artist_norm);
  return it == row.end() ? 0.0 : it->second;
}

namespace {

constexpr std::string_view kMemtabFormat = "memtab.v1";

void check_header(std::string_view text, const std::string& source, std::string_view kind,
                  std::vector<std::pair<std::size_t, std::string_view>>& lines) {
  lines = detail::split_lines(text);
  if (lines.empty()) throw FormatError(source + ": empty memory table file");
  const auto header = detail::parse_json_line(lines.front().second, source, lines.front().first);
  const std::string tag = header.value("format", std::string{});
  if (tag != kMemtabFormat) {
    if (tag.rfind("memtab.v", 0) == 0) throw VersionError(source + ": memory table version '" + tag + "' unsupported");
    throw FormatError(source + ": not a memory table");
  }
  if (header.value("kind", std::string{}) != kind) {
    throw FormatError(source + ": expected a " + std::string(kind) + " table");
  }
}

double probability(const nlohmann::json& value, const std::string& source, std::size_t line) {
  if (!value.is_number()) throw ParseError(source, line, "table entry is not a number");
  const double p = value.get<double>();
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(source, line, "table entry outside [0, 1]");
  return p;
}

}  // namespace

std::string serialize_user_emotion(const UserEmotionTable& table) {
  std::string out = "{\"format\":\"memtab.v1\",\"kind\":\"user_emotion\"}\n";
  for (const auto& [user, row] : table.rows) {
    nlohmann::ordered_json j{{"user", user}, {"p", row}};
    out += j.dump() + "\n";
  }
  return out;
}

std::string serialize_emotion_artist(const EmotionArtistTable& table) {
  std::string out = "{\"format\":\"memtab.v1\",\"kind\":\"emotion_artist\"}\n";
  for (std::size_t bin = 0; bin < table.rows.size(); ++bin) {
    if (table.rows[bin].empty()) continue;
    nlohmann::ordered_json artists = nlohmann::ordered_json::object();
    for (const auto& [artist, p] : table.rows[bin]) artists[artist] = p;
    nlohmann::ordered_json j{{"bin", bin}, {"artists", std::move(artists)}};
    out += j.dump() + "\n";
  }
  return out;
}

UserEmotionTable parse_user_emotion(std::string_view text, const std::string& source) {
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  check_header(text, source, "user_emotion", lines);
  UserEmotionTable table;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto [line_no, row_text] = lines[i];
    const auto row = detail::parse_json_line(row_text, source, line_no);
    if (!row.contains("user") || !row["user"].is_string()) throw ParseError(source, line_no, "row lacks a user");
    if (!row.contains("p") || !row["p"].is_array() || row["p"].size() != kEmotionBins) {
      throw ParseError(source, line_no, "row needs 9 probabilities");
    }
    EmotionRow values{};
    for (std::size_t b = 0; b < values.size(); ++b) values[b] = probability(row["p"][b], source, line_no);
    if (!table.rows.emplace(row["user"].get<std::string>(), values).second) {
      throw ValidationError(source, line_no, "duplicate user row");
    }
  }
  return table;
}

EmotionArtistTable parse_emotion_artist(std::string_view text, const std::string& source) {
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  check_header(text, source, "emotion_artist", lines);
  EmotionArtistTable table;
  std::array<bool, kEmotionBins> seen{};
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto [line_no, row_text] = lines[i];
    const auto row = detail::parse_json_line(row_text, source, line_no);
    if (!row.contains("bin") || !row["bin"].is_number_integer()) throw ParseError(source, line_no, "row lacks a bin");
    const auto bin = row["bin"].get<long long>();
    if (bin < 0 || bin >= kEmotionBins) throw ValidationError(source, line_no, "bin outside [0, 8]");
    if (seen[static_cast<std::size_t>(bin)]) throw ValidationError(source, line_no, "duplicate bin row");
    seen[static_cast<std::size_t>(bin)] = true;
    if (!row.contains("artists") || !row["artists"].is_object()) {
      throw ParseError(source, line_no, "row lacks an artists object");
    }
    for (const auto& [artist, p] : row["artists"].items()) {
      table.rows[static_cast<std::size_t>(bin)].emplace(artist, probability(p, source, line_no));
    }
  }
  return table;
}

void save_memory_tables(const MemoryTables& tables, const std::filesystem::path& user_emotion_path,
                        const std::filesystem::path& emotion_artist_path) {
  detail::write_text_file(user_emotion_path, serialize_user_emotion(tables.user_emotion));
  detail::write_text_file(emotion_artist_path, serialize_emotion_artist(tables.emotion_artist));
}

MemoryTables load_memory_tables(const std::filesystem::path& user_emotion_path,
                                const std::filesystem::path& emotion_artist_path) {
  MemoryTables tables;
  tables.user_emotion = parse_user_emotion(detail::read_text_file(user_emotion_path), user_emotion_path.string());
  tables.emotion_artist =
      parse_emotion_artist(detail::read_text_file(emotion_artist_path), emotion_artist_path.string());
  return tables;
}

}  // namespace moodrank
