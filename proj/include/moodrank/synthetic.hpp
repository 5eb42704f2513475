#pragma once

// Generated datasets for tests, the acceptance suite and the demo tool.
// Nothing here is used by the recommendation pipeline itself.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "moodrank/corpus.hpp"
#include "moodrank/embedder.hpp"

namespace moodrank::synthetic {

struct LabelledCorpus {
  std::vector<EmotionSentence> sentences;
  EmbeddingStore store;
};

// Components 0..3 are uniform with unit variance and carry the signal; the
// other 380 are uniform with standard deviation `distractor_scale`. Each
// target, before mapping onto the corpus scale as 3 + z / 2, is a fixed
// unit-norm linear combination of components 0..3 plus N(0, noise_sigma).
LabelledCorpus linear_corpus(std::size_t n, double noise_sigma, std::uint64_t seed, double distractor_scale = 0.25);

// Deterministic toy "encoder": components 0 and 1 carry the mean valence and
// arousal offsets of the words found in a small emotion lexicon, the rest is
// text-seeded noise. Lets a demo pipeline learn something meaningful.
EmbeddingVector lexicon_embedding(std::string_view text);

struct DemoFiles {
  std::filesystem::path config;
  std::filesystem::path corpus;
  std::filesystem::path lyrics;
  std::filesystem::path playlog;
  std::filesystem::path embeddings;
  std::vector<std::string> queries;
};

// Writes corpus.csv, lyrics.csv, plays.tsv, embeddings.jsonl and
// config.json into `dir`. The store covers every corpus sentence, every
// lyric chunk at `chunk_words`, and the demo queries.
DemoFiles write_demo_dataset(const std::filesystem::path& dir, std::uint64_t seed, std::size_t chunk_words = 50);

}  // namespace moodrank::synthetic
