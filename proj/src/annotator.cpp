#include "moodrank/annotator.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "csv.hpp"
#include "moodrank/error.hpp"
#include "text_format.hpp"

namespace moodrank {

namespace {

// Song VA is kept at the precision the song DB stores (9 significant digits
// are exact for 32-bit floats), so a saved and reloaded DB compares equal.
// Kept out of line: GCC 11 at -O3 merges the two conversions into one
// vector operation and then drops the rounding altogether.
[[gnu::noinline]] double to_float_precision(double x) { return static_cast<double>(static_cast<float>(x)); }

VAPoint storage_precision(VAPoint p) { return {to_float_precision(p.valence), to_float_precision(p.arousal)}; }

}  // namespace

std::vector<std::string> chunk_lyrics(std::string_view lyrics, std::size_t chunk_words) {
  if (chunk_words == 0) throw std::invalid_argument("chunk_words must be positive");
  const auto words = split_words(lyrics);
  if (words.empty()) throw ValidationError("lyrics have no words");
  std::vector<std::string> chunks;
  for (std::size_t start = 0; start < words.size(); start += chunk_words) {
    const std::size_t end = std::min(words.size(), start + chunk_words);
    std::string chunk(words[start]);
    for (std::size_t i = start + 1; i < end; ++i) {
      chunk += ' ';
      chunk += words[i];
    }
    chunks.push_back(std::move(chunk));
  }
  return chunks;
}

VAPoint mean_va(std::span<const VAPoint> points) {
  if (points.empty()) throw std::invalid_argument("mean_va: no points");
  double v = 0.0, a = 0.0;
  for (const auto& p : points) {
    v += p.valence;
    a += p.arousal;
  }
  const double n = static_cast<double>(points.size());
  return {v / n, a / n};
}

AnnotatedSong annotate_song(const SongRecord& song, const WideDeepHead& head, const VAScaler& scaler,
                            const EmbeddingStore& store, std::size_t chunk_words) {
  const auto chunks = chunk_lyrics(song.lyrics, chunk_words);
  std::vector<const EmbeddingVector*> vectors;
  std::vector<std::string> missing;
  for (const auto& chunk : chunks) {
    std::string key = text_key(chunk);
    const auto* v = store.find_key(key);
    if (v == nullptr) missing.push_back(std::move(key));
    vectors.push_back(v);
  }
  if (!missing.empty()) throw EmbeddingNotFound(std::move(missing));

  std::vector<VAPoint> per_chunk;
  per_chunk.reserve(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    per_chunk.push_back(destandardize(predict_standardized(head, *vectors[i], wide_feature(chunks[i])), scaler));
  }
  const VAPoint va = mean_va(per_chunk);
  return AnnotatedSong{song.artist_norm, song.artist_raw, song.title, storage_precision(va), chunks.size()};
}

AnnotationResult annotate_catalog(const Catalog& catalog, const WideDeepHead& head, const VAScaler& scaler,
                                  const EmbeddingStore& store, std::size_t chunk_words) {
  if (catalog.songs.empty()) throw ValidationError("catalog has no songs to annotate");
  AnnotationResult result;
  result.db.model_tag = store.model_tag();
  result.db.scaler = scaler;
  for (const auto& song : catalog.songs) {
    try {
      result.db.songs.push_back(annotate_song(song, head, scaler, store, chunk_words));
    } catch (const EmbeddingNotFound& e) {
      result.skipped.push_back({song.artist_raw, song.title,
                                std::to_string(e.keys().size()) + " chunk embedding(s) missing", e.keys()});
    }
  }
  if (result.db.songs.empty()) {
    throw ValidationError("all " + std::to_string(catalog.songs.size()) + " songs lack chunk embeddings");
  }
  return result;
}

namespace {

constexpr std::string_view kSongDbFormat = "songdb.v1";

std::string scaler_json(const VAScaler& s) {
  using detail::format_real;
  return "{\"mean\":[" + format_real(s.mean[0], 17) + "," + format_real(s.mean[1], 17) + "],\"std\":[" +
         format_real(s.std[0], 17) + "," + format_real(s.std[1], 17) + "]}";
}

}  // namespace

std::string serialize_song_db(const SongDatabase& db) {
  using detail::format_real;
  using detail::json_string;
  std::string out = "{\"format\":\"songdb.v1\",\"model\":" + json_string(db.model_tag) +
                    ",\"scaler\":" + scaler_json(db.scaler) + "}\n";
  for (const auto& s : db.songs) {
    out += "{\"artist_norm\":" + json_string(s.artist_norm) + ",\"artist\":" + json_string(s.artist_display) +
           ",\"title\":" + json_string(s.title) + ",\"v\":" + format_real(s.va.valence, 9) +
           ",\"a\":" + format_real(s.va.arousal, 9) + ",\"chunks\":" + std::to_string(s.chunk_count) + "}\n";
  }
  return out;
}

SongDatabase parse_song_db(std::string_view text, const std::string& source) {
  const auto lines = detail::split_lines(text);
  if (lines.empty()) throw FormatError(source + ": empty song database");
  const auto& [header_line, header_text] = lines.front();
  const auto header = detail::parse_json_line(header_text, source, header_line);
  const std::string tag = header.value("format", std::string{});
  if (tag != kSongDbFormat) {
    if (tag.rfind("songdb.v", 0) == 0) throw VersionError(source + ": song database version '" + tag + "' unsupported");
    throw FormatError(source + ": not a song database");
  }

  SongDatabase db;
  std::set<std::pair<std::string, std::string>> keys;
  try {
    db.model_tag = header.value("model", std::string{});
    if (header.contains("scaler")) {
      db.scaler.mean = header["scaler"].at("mean").get<std::array<double, 2>>();
      db.scaler.std = header["scaler"].at("std").get<std::array<double, 2>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source, header_line, std::string("bad header: ") + e.what());
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& [line_no, row_text] = lines[i];
    const auto row = detail::parse_json_line(row_text, source, line_no);
    AnnotatedSong s;
    try {
      s.artist_norm = row.at("artist_norm").get<std::string>();
      s.artist_display = row.at("artist").get<std::string>();
      s.title = row.at("title").get<std::string>();
      s.va = storage_precision({row.at("v").get<double>(), row.at("a").get<double>()});
      s.chunk_count = row.at("chunks").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(source, line_no, std::string("bad song row: ") + e.what());
    }
    if (s.chunk_count == 0) throw ValidationError(source, line_no, "chunk count must be positive");
    if (!std::isfinite(s.va.valence) || !std::isfinite(s.va.arousal)) {
      throw ValidationError(source, line_no, "non-finite VA");
    }
    if (!keys.emplace(s.artist_norm, s.title).second) {
      throw ValidationError(source, line_no, "duplicate song (" + s.artist_norm + ", " + s.title + ")");
    }
    db.songs.push_back(std::move(s));
  }
  return db;
}

void save_song_db(const SongDatabase& db, const std::filesystem::path& path) {
  detail::write_text_file(path, serialize_song_db(db));
}

SongDatabase load_song_db(const std::filesystem::path& path) {
  return parse_song_db(detail::read_text_file(path), path.string());
}

}  // namespace moodrank
