#pragma once

// Command-line surface:
//   moodrank <train|annotate|build-memory|recommend|stats|eval> --config <path>
//            [--user <id>] [--text <q>] [--k <n>] [--repl] [--seed <n>]
//
// Exit codes: 0 success, 1 usage, 2 data or validation error, 3 internal.
// Tables go to stdout as TSV; notices and warnings go to stderr.

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "moodrank/engine.hpp"
#include "moodrank/features.hpp"
#include "moodrank/model.hpp"

namespace moodrank::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Paths {
  std::filesystem::path corpus;
  std::filesystem::path lyrics;
  std::filesystem::path playlog;
  std::filesystem::path embeddings;
  std::filesystem::path checkpoint;
  std::filesystem::path song_db;
  std::filesystem::path user_emotion;
  std::filesystem::path emotion_artist;
};

struct RunConfig {
  Paths paths;
  TrainConfig train;
  RecommendConfig recommend;
  std::size_t chunk_words = 50;
};

// Single JSON document:
//   {"paths": {...}, "train": {...}, "recommend": {...}, "chunk_words": 50}
// Relative paths resolve against the config file's directory. Unknown keys
// are rejected with UsageError.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

struct AxisHistogram {
  static constexpr double kLow = 1.0;
  static constexpr double kWidth = 0.25;
  static constexpr std::size_t kBins = 16;
  std::array<std::size_t, kBins> counts{};
  std::size_t below_extreme = 0;  // < 1.5
  std::size_t above_extreme = 0;  // > 4.5
};

struct VAStats {
  std::size_t rows = 0;
  AxisHistogram valence;
  AxisHistogram arousal;
};

// Histogram over [1, 5] in 0.25-wide half-open bins (top edge closed; values
// outside the scale fall into the end bins) plus extreme counts.
VAStats va_stats(std::span<const VAPoint> points);

struct RecommendRequest {
  std::optional<std::string> user;
  std::string text;
};

int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_annotate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_build_memory(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_recommend(const RunConfig& config, const RecommendRequest& request, bool repl, std::istream& in,
                  std::ostream& out, std::ostream& err);
int cmd_stats(const RunConfig& config, bool song_db, std::ostream& out, std::ostream& err);
// `seed_override` re-derives the validation split from a different seed
// (with a warning).
int cmd_eval(const RunConfig& config, std::optional<std::uint64_t> seed_override, std::ostream& out,
             std::ostream& err);

// Parses argv-style arguments (args[0] is the program name) and dispatches.
int run(std::span<const std::string> args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace moodrank::cli
