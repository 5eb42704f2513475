#include "moodrank/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <map>
#include <ostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "moodrank/annotator.hpp"
#include "moodrank/corpus.hpp"
#include "moodrank/embedder.hpp"
#include "moodrank/error.hpp"
#include "moodrank/memory.hpp"

namespace moodrank::cli {
namespace {

std::string fixed(double x, int decimals = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  return buf;
}

template <typename T>
void read_field(const nlohmann::json& obj, const char* key, T& target, const char* section) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw UsageError(std::string("config: ") + section + "." + key + " has the wrong type");
  }
}

void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> known, const std::string& section) {
  if (!obj.is_object()) throw UsageError("config: " + section + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw UsageError("config: unknown key '" + (section.empty() ? key : section + "." + key) + "'");
    }
  }
}

// Every input a command reads must exist before any work starts.
void require_inputs(std::initializer_list<std::pair<const char*, const std::filesystem::path*>> inputs) {
  for (const auto& [name, path] : inputs) {
    if (path->empty()) throw Error(std::string("config does not set paths.") + name);
    if (!std::filesystem::is_regular_file(*path)) {
      throw Error("input file not found: " + path->string() + " (paths." + name + ")");
    }
  }
}

void require_output(const char* name, const std::filesystem::path& path) {
  if (path.empty()) throw Error(std::string("config does not set paths.") + name);
}

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const EmbeddingNotFound& e) {
    err << "error: " << e.what() << "\n"
        << "hint: export embeddings for the missing text(s) and retry\n";
    return kExitData;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

void print_histogram_rows(std::ostream& out, const char* axis, const AxisHistogram& h) {
  for (std::size_t b = 0; b < AxisHistogram::kBins; ++b) {
    const double lo = AxisHistogram::kLow + AxisHistogram::kWidth * static_cast<double>(b);
    out << axis << '\t' << fixed(lo, 2) << '\t' << fixed(lo + AxisHistogram::kWidth, 2) << '\t' << h.counts[b]
        << '\n';
  }
}

void print_stats(std::ostream& out, const VAStats& s) {
  out << "axis\tlo\thi\tcount\n";
  print_histogram_rows(out, "valence", s.valence);
  print_histogram_rows(out, "arousal", s.arousal);
  out << "\naxis\tbelow_1.5\tabove_4.5\textremes\n";
  out << "valence\t" << s.valence.below_extreme << '\t' << s.valence.above_extreme << '\t'
      << s.valence.below_extreme + s.valence.above_extreme << '\n';
  out << "arousal\t" << s.arousal.below_extreme << '\t' << s.arousal.above_extreme << '\t'
      << s.arousal.below_extreme + s.arousal.above_extreme << '\n';
}

struct Recommender {
  Checkpoint checkpoint;
  EmbeddingStore store;
  SongDatabase songs;
  MemoryTables tables;
  UserProfiles profiles;
};

void answer(const Recommender& r, const RunConfig& config, const RecommendRequest& request, std::ostream& out,
            std::ostream& err) {
  const Query query = encode_query(request.user, request.text, r.checkpoint.head, r.checkpoint.scaler, r.store);
  const CandidatePool pool = candidate_pool(query, r.songs, r.profiles);
  switch (pool.source) {
    case PoolSource::top_artist:
      break;
    case PoolSource::full_unknown_user:
      if (request.user) err << "notice: no play history for user '" << *request.user << "'; ranking the full catalog\n";
      break;
    case PoolSource::full_no_match:
      err << "notice: top artist '" << r.profiles.find(*request.user)->second.top_artist_norm
          << "' has no annotated songs; ranking the full catalog\n";
      break;
  }
  const auto ranked = rank_pool(query, pool, r.tables, config.recommend);
  out << "# query\t" << query.body << '\n';
  out << "# query_va\t" << fixed(query.va.valence) << '\t' << fixed(query.va.arousal) << '\n';
  out << "# query_bin\t" << query.bin.id << '\n';
  out << "# pool\t" << (pool.source == PoolSource::top_artist ? "top_artist" : "full") << '\t' << pool.songs.size()
      << '\n';
  out << "artist\tsong\tv_pred\ta_pred\tscore\n";
  for (const auto& s : ranked) {
    out << s.song->artist_display << '\t' << s.song->title << '\t' << fixed(s.song->va.valence) << '\t'
        << fixed(s.song->va.arousal) << '\t' << fixed(s.score) << '\n';
  }
}

}  // namespace

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(doc, {"paths", "train", "recommend", "chunk_words"}, "");
  RunConfig config;
  if (doc.contains("paths")) {
    const auto& p = doc["paths"];
    reject_unknown(p,
                   {"corpus", "lyrics", "playlog", "embeddings", "checkpoint", "song_db", "user_emotion",
                    "emotion_artist"},
                   "paths");
    auto path_field = [&](const char* key, std::filesystem::path& target) {
      std::string raw;
      read_field(p, key, raw, "paths");
      if (raw.empty()) return;
      const std::filesystem::path given(raw);
      target = given.is_absolute() ? given : base_dir / given;
    };
    path_field("corpus", config.paths.corpus);
    path_field("lyrics", config.paths.lyrics);
    path_field("playlog", config.paths.playlog);
    path_field("embeddings", config.paths.embeddings);
    path_field("checkpoint", config.paths.checkpoint);
    path_field("song_db", config.paths.song_db);
    path_field("user_emotion", config.paths.user_emotion);
    path_field("emotion_artist", config.paths.emotion_artist);
  }
  if (doc.contains("train")) {
    const auto& t = doc["train"];
    reject_unknown(t,
                   {"epochs", "batch_size", "base_lr", "warmup_fraction", "smooth_l1_beta", "validation_fraction",
                    "seed"},
                   "train");
    read_field(t, "epochs", config.train.epochs, "train");
    read_field(t, "batch_size", config.train.batch_size, "train");
    read_field(t, "base_lr", config.train.base_lr, "train");
    read_field(t, "warmup_fraction", config.train.warmup_fraction, "train");
    read_field(t, "smooth_l1_beta", config.train.smooth_l1_beta, "train");
    read_field(t, "validation_fraction", config.train.validation_fraction, "train");
    read_field(t, "seed", config.train.seed, "train");
  }
  if (doc.contains("recommend")) {
    const auto& r = doc["recommend"];
    reject_unknown(r, {"k", "weight_ue", "weight_ea"}, "recommend");
    read_field(r, "k", config.recommend.k, "recommend");
    read_field(r, "weight_ue", config.recommend.weight_ue, "recommend");
    read_field(r, "weight_ea", config.recommend.weight_ea, "recommend");
  }
  read_field(doc, "chunk_words", config.chunk_words, "");
  if (config.chunk_words == 0) throw UsageError("config: chunk_words must be positive");
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw UsageError("config file not found: " + path.string());
  return parse_run_config(detail::read_text_file(path), path.parent_path());
}

VAStats va_stats(std::span<const VAPoint> points) {
  VAStats s;
  s.rows = points.size();
  auto add = [](AxisHistogram& h, double x) {
    const double raw = std::floor((x - AxisHistogram::kLow) / AxisHistogram::kWidth);
    const auto bin = static_cast<std::size_t>(std::clamp(raw, 0.0, static_cast<double>(AxisHistogram::kBins - 1)));
    ++h.counts[bin];
    if (x < 1.5) ++h.below_extreme;
    if (x > 4.5) ++h.above_extreme;
  };
  for (const auto& p : points) {
    add(s.valence, p.valence);
    add(s.arousal, p.arousal);
  }
  return s;
}

int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_inputs({{"corpus", &config.paths.corpus}, {"embeddings", &config.paths.embeddings}});
    require_output("checkpoint", config.paths.checkpoint);
    const auto sentences = parse_emotion_corpus(config.paths.corpus);
    const auto store = load_embedding_store(config.paths.embeddings);
    const TrainResult result = train(sentences, store, config.train);
    out << "epoch\ttrain_loss\tval_loss\tval_r2\n";
    for (std::size_t e = 0; e < result.report.epochs.size(); ++e) {
      const auto& s = result.report.epochs[e];
      out << e + 1 << '\t' << fixed(s.train_loss) << '\t' << fixed(s.val_loss) << '\t' << fixed(s.val_r2) << '\n';
    }
    save_checkpoint({result.head, result.scaler, config.train, store.model_tag()}, config.paths.checkpoint);
    err << "wrote checkpoint " << config.paths.checkpoint.string() << "\n";
    return kExitOk;
  });
}

int cmd_annotate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_inputs({{"checkpoint", &config.paths.checkpoint},
                    {"lyrics", &config.paths.lyrics},
                    {"embeddings", &config.paths.embeddings}});
    require_output("song_db", config.paths.song_db);
    const Checkpoint ckpt = load_checkpoint(config.paths.checkpoint);
    const auto store = load_embedding_store(config.paths.embeddings);
    if (ckpt.model_tag != store.model_tag()) {
      err << "warning: checkpoint was trained on '" << ckpt.model_tag << "' embeddings, store holds '"
          << store.model_tag() << "'\n";
    }
    const Catalog catalog = join_catalog(parse_lyrics_catalog(config.paths.lyrics), {});
    const AnnotationResult result = annotate_catalog(catalog, ckpt.head, ckpt.scaler, store, config.chunk_words);
    save_song_db(result.db, config.paths.song_db);
    out << "annotated\t" << result.db.songs.size() << "\nskipped\t" << result.skipped.size() << '\n';
    for (const auto& s : result.skipped) err << "skipped: " << s.artist << " - " << s.title << ": " << s.reason << "\n";
    return kExitOk;
  });
}

int cmd_build_memory(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_inputs({{"lyrics", &config.paths.lyrics},
                    {"playlog", &config.paths.playlog},
                    {"song_db", &config.paths.song_db}});
    require_output("user_emotion", config.paths.user_emotion);
    require_output("emotion_artist", config.paths.emotion_artist);
    const Catalog catalog =
        join_catalog(parse_lyrics_catalog(config.paths.lyrics), parse_play_log(config.paths.playlog));
    const SongDatabase songs = load_song_db(config.paths.song_db);
    const MemoryTables tables = build_memory_tables(catalog, songs);
    save_memory_tables(tables, config.paths.user_emotion, config.paths.emotion_artist);

    const UserProfiles profiles = build_user_profiles(catalog.plays);
    std::map<Engagement, std::size_t> levels;
    for (const auto& [user, profile] : profiles) ++levels[profile.engagement];
    out << "joined_artists\t" << catalog.joined_artists.size() << '\n'
        << "matched_artists\t" << tables.matched_artists << '\n'
        << "users\t" << profiles.size() << '\n'
        << "users_with_memory\t" << tables.user_emotion.rows.size() << '\n';
    for (Engagement e : {Engagement::low, Engagement::medium, Engagement::high, Engagement::super}) {
      out << "engagement_" << engagement_name(e) << '\t' << levels[e] << '\n';
    }
    if (tables.matched_artists == 0) {
      err << "warning: no play-log artist matches an annotated song; memory tables are empty\n";
    }
    return kExitOk;
  });
}

int cmd_recommend(const RunConfig& config, const RecommendRequest& request, bool repl, std::istream& in,
                  std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!repl && word_count(request.text) == 0) throw UsageError("recommend needs a non-empty --text (or --repl)");
    config.recommend.validate();
    require_inputs({{"checkpoint", &config.paths.checkpoint},
                    {"embeddings", &config.paths.embeddings},
                    {"song_db", &config.paths.song_db},
                    {"user_emotion", &config.paths.user_emotion},
                    {"emotion_artist", &config.paths.emotion_artist},
                    {"playlog", &config.paths.playlog}});
    Recommender r{load_checkpoint(config.paths.checkpoint), load_embedding_store(config.paths.embeddings),
                  load_song_db(config.paths.song_db),
                  load_memory_tables(config.paths.user_emotion, config.paths.emotion_artist),
                  build_user_profiles(parse_play_log(config.paths.playlog))};
    if (!repl) {
      answer(r, config, request, out, err);
      return kExitOk;
    }
    int status = kExitOk;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (word_count(line) == 0) continue;
      if (!first) out << '\n';
      first = false;
      const int rc = guarded(err, [&] {
        answer(r, config, {request.user, line}, out, err);
        return kExitOk;
      });
      if (rc != kExitOk) status = rc;
      out.flush();
    }
    return status;
  });
}

int cmd_stats(const RunConfig& config, bool song_db, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::vector<VAPoint> points;
    if (song_db) {
      require_inputs({{"song_db", &config.paths.song_db}});
      for (const auto& s : load_song_db(config.paths.song_db).songs) points.push_back(s.va);
    } else {
      require_inputs({{"corpus", &config.paths.corpus}});
      for (const auto& s : parse_emotion_corpus(config.paths.corpus)) points.push_back({s.valence, s.arousal});
    }
    if (points.empty()) throw ValidationError(song_db ? "song database has no rows" : "emotion corpus has no rows");
    out << "# rows\t" << points.size() << "\n";
    print_stats(out, va_stats(points));
    return kExitOk;
  });
}

int cmd_eval(const RunConfig& config, std::optional<std::uint64_t> seed_override, std::ostream& out,
             std::ostream& err) {
  return guarded(err, [&] {
    require_inputs({{"checkpoint", &config.paths.checkpoint},
                    {"corpus", &config.paths.corpus},
                    {"embeddings", &config.paths.embeddings}});
    const Checkpoint ckpt = load_checkpoint(config.paths.checkpoint);
    TrainConfig eval_config = ckpt.config;
    if (seed_override && *seed_override != ckpt.config.seed) {
      err << "warning: seed " << *seed_override << " differs from the training seed " << ckpt.config.seed
          << "; the validation split differs from the one used in training\n";
      eval_config.seed = *seed_override;
    }
    const auto sentences = parse_emotion_corpus(config.paths.corpus);
    const auto store = load_embedding_store(config.paths.embeddings);
    const EvalResult r = evaluate_validation(ckpt.head, ckpt.scaler, sentences, store, eval_config);
    out << "val_loss\t" << fixed(r.loss) << "\nval_r2\t" << fixed(r.r2) << '\n';
    return kExitOk;
  });
}

int run(std::span<const std::string> args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mood-driven music recommendation"};
  app.name(args.empty() ? "moodrank" : std::filesystem::path(args[0]).filename().string());
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> user;
  std::string text;
  std::optional<std::size_t> k;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  bool repl = false;
  bool song_db = false;

  auto with_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Run configuration (JSON)")->required();
    return sub;
  };
  auto* train_cmd = with_config(app.add_subcommand("train", "Train the regression head"));
  train_cmd->add_option("--seed", seed, "Override train.seed");
  train_cmd->add_option("--epochs", epochs, "Override train.epochs");
  auto* annotate_cmd = with_config(app.add_subcommand("annotate", "Annotate the lyrics catalog with VA points"));
  auto* memory_cmd = with_config(app.add_subcommand("build-memory", "Build the user/artist memory tables"));
  auto* recommend_cmd = with_config(app.add_subcommand("recommend", "Recommend songs for a mood description"));
  recommend_cmd->add_option("--user", user, "User id from the play log");
  recommend_cmd->add_option("--text", text, "Free-text mood description");
  recommend_cmd->add_option("--k", k, "Number of songs to return")->check(CLI::PositiveNumber);
  recommend_cmd->add_flag("--repl", repl, "Read one query per line from stdin");
  auto* stats_cmd = with_config(app.add_subcommand("stats", "VA histogram and extreme counts"));
  stats_cmd->add_flag("--songdb", song_db, "Report on the annotated song database instead of the corpus");
  auto* eval_cmd = with_config(app.add_subcommand("eval", "Re-evaluate a checkpoint on the validation split"));
  eval_cmd->add_option("--seed", seed, "Seed that selects the validation split");

  std::vector<std::string> argv_tail(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(argv_tail.begin(), argv_tail.end());
  try {
    app.parse(argv_tail);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  RunConfig config;
  const int rc = guarded(err, [&] {
    config = load_run_config(config_path);
    return kExitOk;
  });
  if (rc != kExitOk) return rc;
  if (seed && !eval_cmd->parsed()) config.train.seed = *seed;
  if (epochs) config.train.epochs = *epochs;
  if (k) config.recommend.k = *k;

  if (train_cmd->parsed()) return cmd_train(config, out, err);
  if (annotate_cmd->parsed()) return cmd_annotate(config, out, err);
  if (memory_cmd->parsed()) return cmd_build_memory(config, out, err);
  if (recommend_cmd->parsed()) return cmd_recommend(config, {user, text}, repl, in, out, err);
  if (stats_cmd->parsed()) return cmd_stats(config, song_db, out, err);
  if (eval_cmd->parsed()) return cmd_eval(config, seed, out, err);
  return kExitUsage;
}

}  // namespace moodrank::cli
