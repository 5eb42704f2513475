#include "moodrank/corpus.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <utility>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "csv.hpp"
#include "moodrank/error.hpp"
#include "moodrank/features.hpp"

namespace moodrank {

using detail::TextRecord;

namespace {

icu::UnicodeString normalize_once(const icu::Normalizer2& nfkc, const icu::UnicodeString& input) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString text = nfkc.normalize(input, status);
  text.toLower(icu::Locale::getRoot());
  // Lowercasing can leave a string that is no longer NFKC.
  text = nfkc.normalize(text, status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU normalization failed");

  icu::UnicodeString out;
  bool pending_space = false;
  for (int32_t i = 0; i < text.length();) {
    const UChar32 cp = text.char32At(i);
    i += U16_LENGTH(cp);
    if (u_ispunct(cp)) continue;
    if (u_isUWhiteSpace(cp)) {
      pending_space = !out.isEmpty();
      continue;
    }
    if (pending_space) out.append(static_cast<UChar>(' '));
    pending_space = false;
    out.append(cp);
  }
  return out;
}

}  // namespace

std::string normalize_artist_name(std::string_view raw) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfkc = icu::Normalizer2::getNFKCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFKC normalizer unavailable");

  icu::UnicodeString text = icu::UnicodeString::fromUTF8(icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  // Dropping a punctuation mark can bring a combining mark next to a new base
  // letter, so repeat until nothing changes.
  for (int pass = 0; pass < 16; ++pass) {
    icu::UnicodeString next = normalize_once(*nfkc, text);
    if (next == text) break;
    text = std::move(next);
  }
  std::string result;
  text.toUTF8String(result);
  return result;
}

namespace {

struct Table {
  std::vector<TextRecord> rows;  // data rows, header removed
  std::vector<std::size_t> columns;
};

Table load_table(std::vector<TextRecord> records, const std::vector<std::string>& required, const std::string& source) {
  if (records.empty()) throw ParseError(source, 1, "missing header");
  Table t;
  t.columns = detail::locate_columns(records.front(), required, source);
  const std::size_t width = records.front().fields.size();
  records.erase(records.begin());
  for (const auto& r : records) {
    if (r.fields.size() != width) {
      throw ParseError(source, r.line,
                       "expected " + std::to_string(width) + " fields, found " + std::to_string(r.fields.size()));
    }
  }
  t.rows = std::move(records);
  return t;
}

double corpus_scale_value(std::string_view text, const std::string& source, std::size_t line, std::string_view what) {
  const double v = detail::parse_real(text, source, line, what);
  if (!std::isfinite(v) || v < kCorpusScaleMin || v > kCorpusScaleMax) {
    throw ValidationError(source, line, std::string(what) + " " + std::string(text) + " outside [1, 5]");
  }
  return v;
}

std::uint64_t parse_play_count(std::string_view text, const std::string& source, std::size_t line) {
  if (!text.empty() && text.front() == '-') {
    // Distinguish a negative count from garbage.
    long long probe = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), probe);
    if (ec == std::errc() && ptr == text.data() + text.size()) {
      throw ValidationError(source, line, "negative play count " + std::string(text));
    }
  }
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ParseError(source, line, "play count is not a non-negative integer: '" + std::string(text) + "'");
  }
  return value;
}

std::string real_text(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<EmotionSentence> parse_emotion_corpus_text(std::string_view text, const std::string& source) {
  const Table t = load_table(detail::parse_csv(text, source), {"id", "text", "V", "A"}, source);
  std::vector<EmotionSentence> out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    EmotionSentence s;
    s.id = r.fields[t.columns[0]];
    s.body = r.fields[t.columns[1]];
    if (word_count(s.body) == 0) throw ValidationError(source, r.line, "sentence text has no words");
    s.valence = corpus_scale_value(r.fields[t.columns[2]], source, r.line, "valence");
    s.arousal = corpus_scale_value(r.fields[t.columns[3]], source, r.line, "arousal");
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SongRecord> parse_lyrics_catalog_text(std::string_view text, const std::string& source) {
  const Table t = load_table(detail::parse_csv(text, source), {"artist", "song", "text"}, source);
  std::vector<SongRecord> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : t.rows) {
    SongRecord s;
    s.artist_raw = r.fields[t.columns[0]];
    s.artist_norm = normalize_artist_name(s.artist_raw);
    s.title = r.fields[t.columns[1]];
    s.lyrics = r.fields[t.columns[2]];
    if (s.artist_norm.empty()) throw ValidationError(source, r.line, "artist name is empty after normalization");
    if (word_count(s.lyrics) == 0) throw ValidationError(source, r.line, "lyrics have no words");
    if (!seen.emplace(s.artist_norm, s.title).second) continue;  // keep first occurrence
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<PlayRecord> parse_play_log_text(std::string_view text, const std::string& source) {
  const Table t = load_table(detail::parse_tsv(text), {"user_id", "artist_name", "plays"}, source);
  std::vector<PlayRecord> out;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (const auto& r : t.rows) {
    PlayRecord p;
    p.user_id = r.fields[t.columns[0]];
    p.artist_raw = r.fields[t.columns[1]];
    p.artist_norm = normalize_artist_name(p.artist_raw);
    p.play_count = parse_play_count(r.fields[t.columns[2]], source, r.line);
    if (p.user_id.empty()) throw ValidationError(source, r.line, "empty user id");
    if (p.artist_norm.empty()) throw ValidationError(source, r.line, "artist name is empty after normalization");
    const auto [it, inserted] = index.emplace(std::make_pair(p.user_id, p.artist_norm), out.size());
    if (inserted) {
      out.push_back(std::move(p));
    } else {
      out[it->second].play_count += p.play_count;
    }
  }
  return out;
}

std::vector<EmotionSentence> parse_emotion_corpus(const std::filesystem::path& path) {
  return parse_emotion_corpus_text(detail::read_text_file(path), path.string());
}

std::vector<SongRecord> parse_lyrics_catalog(const std::filesystem::path& path) {
  return parse_lyrics_catalog_text(detail::read_text_file(path), path.string());
}

std::vector<PlayRecord> parse_play_log(const std::filesystem::path& path) {
  return parse_play_log_text(detail::read_text_file(path), path.string());
}

std::string serialize_emotion_corpus(std::span<const EmotionSentence> sentences) {
  std::string out = "id,text,V,A\n";
  for (const auto& s : sentences) {
    out += detail::csv_field(s.id) + "," + detail::csv_field(s.body) + "," + real_text(s.valence) + "," +
           real_text(s.arousal) + "\n";
  }
  return out;
}

std::string serialize_lyrics_catalog(std::span<const SongRecord> songs) {
  std::string out = "artist,song,text\n";
  for (const auto& s : songs) {
    out += detail::csv_field(s.artist_raw) + "," + detail::csv_field(s.title) + "," + detail::csv_field(s.lyrics) + "\n";
  }
  return out;
}

std::string serialize_play_log(std::span<const PlayRecord> plays) {
  std::string out = "user_id\tartist_name\tplays\n";
  for (const auto& p : plays) out += p.user_id + "\t" + p.artist_raw + "\t" + std::to_string(p.play_count) + "\n";
  return out;
}

Catalog join_catalog(std::vector<SongRecord> songs, std::vector<PlayRecord> plays) {
  std::set<std::string> song_artists, play_artists;
  for (const auto& s : songs) song_artists.insert(s.artist_norm);
  for (const auto& p : plays) play_artists.insert(p.artist_norm);
  Catalog c;
  for (const auto& a : song_artists) {
    if (play_artists.count(a) != 0) c.joined_artists.insert(a);
  }
  c.songs = std::move(songs);
  c.plays = std::move(plays);
  return c;
}

}  // namespace moodrank
