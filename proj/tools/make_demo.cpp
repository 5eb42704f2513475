// Writes a small self-consistent dataset (corpus, lyrics, play log,
// embeddings, config) for trying the moodrank pipeline end to end.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "moodrank/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic moodrank demo dataset"};
  std::string out_dir = "demo";
  std::uint64_t seed = 7;
  std::size_t chunk_words = 50;
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Generator seed");
  app.add_option("--chunk-words", chunk_words, "Lyric chunk size the embeddings are exported for");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto files = moodrank::synthetic::write_demo_dataset(out_dir, seed, chunk_words);
    std::cout << "wrote " << files.config.string() << "\n";
    for (const auto& q : files.queries) std::cout << "query with an embedding: " << q << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
