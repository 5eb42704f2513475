#include "moodrank/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "moodrank/annotator.hpp"
#include "moodrank/features.hpp"
#include "random.hpp"

namespace moodrank::synthetic {
namespace {

using detail::Rng;

struct LexiconWord {
  const char* word;
  double valence;  // offset in [-1, 1]
  double arousal;
};

constexpr std::array<LexiconWord, 44> kLexicon{{
    {"happy", 0.9, 0.5},      {"joy", 0.9, 0.6},       {"sunny", 0.7, 0.3},     {"calm", 0.5, -0.8},
    {"peaceful", 0.6, -0.8},  {"pleasant", 0.6, -0.3}, {"grass", 0.3, -0.5},    {"mountains", 0.3, -0.4},
    {"weather", 0.1, -0.1},   {"love", 0.8, 0.2},      {"ecstatic", 1.0, 0.9},  {"best", 0.8, 0.5},
    {"life", 0.2, 0.1},       {"crying", -0.9, 0.4},   {"panting", -0.3, 0.9},  {"sad", -0.8, -0.4},
    {"numb", -0.7, -0.8},     {"lost", -0.6, -0.3},    {"meaning", 0.0, 0.0},   {"angry", -0.8, 0.9},
    {"rage", -0.9, 1.0},      {"tired", -0.4, -0.9},   {"lonely", -0.7, -0.5},  {"dance", 0.7, 0.8},
    {"party", 0.7, 0.9},      {"morning", 0.3, 0.1},   {"rain", -0.2, -0.3},    {"fire", -0.1, 0.8},
    {"night", -0.1, -0.2},    {"heart", 0.2, 0.2},     {"broken", -0.8, 0.1},   {"scream", -0.6, 1.0},
    {"gentle", 0.5, -0.7},    {"sleep", 0.2, -1.0},    {"run", 0.1, 0.8},       {"storm", -0.4, 0.7},
    {"smile", 0.9, 0.3},      {"tears", -0.8, 0.2},    {"quiet", 0.3, -0.9},    {"wild", 0.3, 0.9},
    {"everything", 0.0, 0.1}, {"day", 0.2, 0.1},       {"sitting", 0.1, -0.5},  {"looking", 0.0, 0.0},
}};

constexpr std::array<const char*, 18> kFiller{"the", "a",  "and", "i",    "feel", "in", "at", "with", "of",
                                              "my",  "so", "we",  "you",  "it",   "is", "all", "to", "on"};

std::string ascii_token(std::string_view word) {
  std::string out;
  for (char c : word) {
    if (std::isalpha(static_cast<unsigned char>(c))) out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

const LexiconWord* lookup(std::string_view token) {
  for (const auto& w : kLexicon) {
    if (token == w.word) return &w;
  }
  return nullptr;
}

std::uint64_t text_seed(std::string_view text) {
  const std::string key = text_key(text);
  return std::stoull(key.substr(0, 16), nullptr, 16);
}

// Lexicon word whose (valence, arousal) lies near `target`, with some spread.
const LexiconWord& pick_near(Rng& rng, double v, double a, double spread) {
  const double tv = v + spread * (2.0 * detail::unit_real(rng) - 1.0);
  const double ta = a + spread * (2.0 * detail::unit_real(rng) - 1.0);
  const LexiconWord* best = &kLexicon[0];
  double best_d = 1e9;
  for (const auto& w : kLexicon) {
    const double d = (w.valence - tv) * (w.valence - tv) + (w.arousal - ta) * (w.arousal - ta);
    if (d < best_d) {
      best_d = d;
      best = &w;
    }
  }
  return *best;
}

std::string make_text(Rng& rng, std::size_t words, double v, double a, double spread) {
  std::string text;
  for (std::size_t i = 0; i < words; ++i) {
    if (i != 0) text += ' ';
    if (detail::unit_real(rng) < 0.45) {
      text += kFiller[detail::uniform_below(rng, kFiller.size())];
    } else {
      text += pick_near(rng, v, a, spread).word;
    }
  }
  return text;
}

// Mean lexicon offsets of the words in `text`.
std::pair<double, double> lexicon_offsets(std::string_view text) {
  double v = 0.0, a = 0.0;
  std::size_t hits = 0;
  for (auto word : split_words(text)) {
    if (const auto* w = lookup(ascii_token(word))) {
      v += w->valence;
      a += w->arousal;
      ++hits;
    }
  }
  if (hits == 0) return {0.0, 0.0};
  return {v / static_cast<double>(hits), a / static_cast<double>(hits)};
}

double clamp_scale(double x) { return std::clamp(x, kCorpusScaleMin, kCorpusScaleMax); }

}  // namespace

LabelledCorpus linear_corpus(std::size_t n, double noise_sigma, std::uint64_t seed, double distractor_scale) {
  static constexpr std::array<double, 4> kValenceCoef{0.5, 0.5, -0.5, 0.5};
  static constexpr std::array<double, 4> kArousalCoef{-0.5, 0.5, 0.5, 0.5};
  const double half_width = std::sqrt(3.0);

  Rng rng(seed);
  LabelledCorpus out{{}, EmbeddingStore(kEmbeddingDim, "synthetic-linear")};
  out.sentences.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    EmbeddingVector e(kEmbeddingDim);
    for (std::size_t k = 0; k < e.size(); ++k) {
      const double scale = k < 4 ? 1.0 : distractor_scale;
      e[k] = static_cast<float>((2.0 * detail::unit_real(rng) - 1.0) * half_width * scale);
    }
    double zv = 0.0, za = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      zv += kValenceCoef[k] * e[k];
      za += kArousalCoef[k] * e[k];
    }
    zv += noise_sigma * detail::standard_normal(rng);
    za += noise_sigma * detail::standard_normal(rng);

    const std::size_t words = 1 + detail::uniform_below(rng, 30);
    std::string body = "sentence " + std::to_string(i);
    for (std::size_t w = 1; w < words; ++w) body += std::string(" ") + kFiller[detail::uniform_below(rng, kFiller.size())];

    out.store.insert(text_key(body), std::move(e));
    out.sentences.push_back({"s" + std::to_string(i), std::move(body), clamp_scale(3.0 + 0.5 * zv),
                             clamp_scale(3.0 + 0.5 * za)});
  }
  return out;
}

EmbeddingVector lexicon_embedding(std::string_view text) {
  const auto [v, a] = lexicon_offsets(text);
  Rng rng(text_seed(text));
  EmbeddingVector e(kEmbeddingDim);
  for (auto& x : e) x = static_cast<float>(0.2 * (2.0 * detail::unit_real(rng) - 1.0));
  e[0] = static_cast<float>(2.0 * v);
  e[1] = static_cast<float>(2.0 * a);
  return e;
}

DemoFiles write_demo_dataset(const std::filesystem::path& dir, std::uint64_t seed, std::size_t chunk_words) {
  std::filesystem::create_directories(dir);
  Rng rng(seed);
  EmbeddingStore store(kEmbeddingDim, "synthetic-lexicon");
  auto embed = [&store](const std::string& text) {
    std::string key = text_key(text);
    if (store.find_key(key) == nullptr) store.insert(std::move(key), lexicon_embedding(text));
  };

  // Labelled sentences: labels follow the lexicon offsets, plus annotator noise.
  std::vector<EmotionSentence> sentences;
  for (std::size_t i = 0; i < 1200; ++i) {
    const double cv = 2.0 * detail::unit_real(rng) - 1.0;
    const double ca = 2.0 * detail::unit_real(rng) - 1.0;
    std::string body = make_text(rng, 3 + detail::uniform_below(rng, 14), cv, ca, 0.5);
    const auto [v, a] = lexicon_offsets(body);
    sentences.push_back({"d" + std::to_string(i), body, clamp_scale(3.0 + 1.5 * v + 0.2 * detail::standard_normal(rng)),
                         clamp_scale(3.0 + 1.5 * a + 0.2 * detail::standard_normal(rng))});
    embed(body);
  }

  struct DemoArtist {
    const char* display;
    double v, a;
  };
  static constexpr std::array<DemoArtist, 10> kArtists{{
      {"Sunny Side Up", 0.8, 0.4},
      {"The Quiet Hours", 0.4, -0.8},
      {"Ashfall", -0.7, 0.8},
      {"Lantern & Moth", -0.5, -0.6},
      {"Meadowlark", 0.6, -0.5},
      {"DJ Wildfire", 0.5, 0.9},
      {"Grey Letters", -0.8, -0.1},
      {"Thunder Children", -0.3, 0.7},
      {"Café Lumière", 0.2, -0.2},
      {"Velvet Storm", 0.0, 0.5},
  }};

  std::vector<SongRecord> songs;
  for (const auto& artist : kArtists) {
    for (std::size_t s = 0; s < 6; ++s) {
      SongRecord rec;
      rec.artist_raw = artist.display;
      rec.artist_norm = normalize_artist_name(rec.artist_raw);
      rec.title = std::string(pick_near(rng, artist.v, artist.a, 0.6).word) + " " +
                  pick_near(rng, artist.v, artist.a, 0.6).word + " " + std::to_string(s + 1);
      rec.title[0] = static_cast<char>(std::toupper(rec.title[0]));
      rec.lyrics = make_text(rng, 40 + detail::uniform_below(rng, 160), artist.v, artist.a, 0.7);
      for (const auto& chunk : chunk_lyrics(rec.lyrics, chunk_words)) embed(chunk);
      songs.push_back(std::move(rec));
    }
  }

  // Play log: artist spellings vary (case, punctuation) the way scraped logs do.
  static constexpr std::array<const char*, 12> kPlayedNames{
      "sunny side up", "THE QUIET HOURS", "Ashfall", "Lantern and Moth", "Lantern & Moth", "Meadowlark!",
      "DJ Wildfire",   "grey letters",    "Thunder Children", "Cafe Lumiere", "Café Lumière", "Unsigned Garage Band"};
  std::vector<PlayRecord> plays;
  for (std::size_t u = 0; u < 24; ++u) {
    const std::string user = "user" + std::to_string(u + 1);
    const std::size_t n_artists = 2 + detail::uniform_below(rng, 5);
    for (std::size_t k = 0; k < n_artists; ++k) {
      PlayRecord p;
      p.user_id = user;
      p.artist_raw = kPlayedNames[detail::uniform_below(rng, kPlayedNames.size())];
      p.artist_norm = normalize_artist_name(p.artist_raw);
      p.play_count = 1 + detail::uniform_below(rng, 400);
      plays.push_back(std::move(p));
    }
  }

  DemoFiles files;
  files.queries = {
      "sitting in the grass and looking at mountains in pleasant weather",
      "Crying and panting a lot",
      "This is the best day of my life!",
      "I feel numb, like everything has lost meaning",
      "Having an ecstatic morning",
  };
  for (const auto& q : files.queries) embed(q);

  files.corpus = dir / "corpus.csv";
  files.lyrics = dir / "lyrics.csv";
  files.playlog = dir / "plays.tsv";
  files.embeddings = dir / "embeddings.jsonl";
  files.config = dir / "config.json";
  detail::write_text_file(files.corpus, serialize_emotion_corpus(sentences));
  detail::write_text_file(files.lyrics, serialize_lyrics_catalog(songs));
  detail::write_text_file(files.playlog, serialize_play_log(plays));
  save_embedding_store(store, files.embeddings);

  nlohmann::ordered_json config{
      {"paths",
       {{"corpus", "corpus.csv"},
        {"lyrics", "lyrics.csv"},
        {"playlog", "plays.tsv"},
        {"embeddings", "embeddings.jsonl"},
        {"checkpoint", "model.ckpt.json"},
        {"song_db", "songs.jsonl"},
        {"user_emotion", "user_emotion.jsonl"},
        {"emotion_artist", "emotion_artist.jsonl"}}},
      {"train", {{"epochs", 5}, {"seed", static_cast<std::uint64_t>(seed)}}},
      {"recommend", {{"k", 5}}},
      {"chunk_words", chunk_words},
  };
  detail::write_text_file(files.config, config.dump(2) + "\n");
  return files;
}

}  // namespace moodrank::synthetic
