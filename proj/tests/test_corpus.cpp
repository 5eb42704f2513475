#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "moodrank/corpus.hpp"
#include "moodrank/error.hpp"

using namespace moodrank;

TEST_CASE("normalize_artist_name") {
  CHECK(normalize_artist_name("Hank Williams Jr.") == "hank williams jr");
  CHECK(normalize_artist_name("enya") == "enya");
  CHECK(normalize_artist_name("  The  WHO! ") == "the who");
  CHECK(normalize_artist_name("") == "");

  SUBCASE("matches the independent unicodedata oracle") {
    std::ifstream in(std::string(MOODRANK_TEST_DATA) + "/artist_names.jsonl");
    REQUIRE(in);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
      const auto j = nlohmann::json::parse(line);
      CHECK_MESSAGE(normalize_artist_name(j["raw"].get<std::string>()) == j["norm"].get<std::string>(),
                    j["raw"].get<std::string>());
      ++rows;
    }
    CHECK(rows == 20);
  }

  SUBCASE("idempotent on random mixed-script strings") {
    const std::vector<std::string> atoms{"A", "b", " ", "  ", "\t", "!", "'", "-", "é", "É", "ß", "ﬁ", "Ⅻ", "Ｂ",
                                         "İ", "Σ", "ς", " ", "“", "$", "1", "ǅ", "ﬀ", "Å", "́"};
    std::mt19937_64 rng(5);
    for (int i = 0; i < 2000; ++i) {
      std::string s;
      const auto n = rng() % 12;
      for (std::size_t k = 0; k < n; ++k) s += atoms[rng() % atoms.size()];
      const auto once = normalize_artist_name(s);
      REQUIRE_MESSAGE(normalize_artist_name(once) == once, s);
    }
  }
}

TEST_CASE("parse_emotion_corpus") {
  const auto rows = parse_emotion_corpus_text("id,text,V,A\ns1,\"I feel great\",4.2,3.8\n");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].id == "s1");
  CHECK(rows[0].body == "I feel great");
  CHECK(rows[0].valence == 4.2);
  CHECK(rows[0].arousal == 3.8);

  CHECK(parse_emotion_corpus_text("id,text,V,A\n").empty());
  CHECK(parse_emotion_corpus_text("id,text,V,A").empty());

  SUBCASE("range violation names the line") {
    try {
      parse_emotion_corpus_text("id,text,V,A\ns1,ok,3,3\ns2,bad,5.7,3\n", "corpus.csv");
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(e.line() == 3);
      CHECK(std::string(e.what()).find("corpus.csv:3") != std::string::npos);
    }
  }
  CHECK_THROWS_AS(parse_emotion_corpus_text("id,text,V,A\ns1,ok,0.99,3\n"), ValidationError);
  CHECK_THROWS_AS(parse_emotion_corpus_text("id,text,V,A\ns1,ok,nan,3\n"), ValidationError);
  CHECK_THROWS_AS(parse_emotion_corpus_text("id,text,V,A\ns1,\"  \",3,3\n"), ValidationError);
  CHECK_THROWS_AS(parse_emotion_corpus_text("id,text,V,A\ns1,ok,x,3\n"), ParseError);
  CHECK_THROWS_AS(parse_emotion_corpus_text("id,text,V,A\ns1,ok,3\n"), ParseError);
  CHECK_THROWS_AS(parse_emotion_corpus_text("id,body,V,A\ns1,ok,3,3\n"), ParseError);
  CHECK_THROWS_AS(parse_emotion_corpus_text("id,text,V,A\ns1,\"unterminated,3,3\n"), ParseError);
  CHECK_THROWS_AS(parse_emotion_corpus_text(""), ParseError);

  SUBCASE("quoted fields, CRLF, extra columns in any order") {
    const auto r = parse_emotion_corpus_text(
        "id,split,V,A,D,text\r\n"
        "a,train,3,2.5,3,\"line one\nline \"\"two\"\", with comma\"\r\n"
        "b,test,1,5,3,plain");
    REQUIRE(r.size() == 2);
    CHECK(r[0].body == "line one\nline \"two\", with comma");
    CHECK(r[1].body == "plain");
    CHECK(r[1].arousal == 5.0);
  }

  SUBCASE("line numbers count physical lines inside quoted fields") {
    try {
      parse_emotion_corpus_text("id,text,V,A\na,\"x\ny\",3,3\nb,z,9,3\n");
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(e.line() == 4);
    }
  }
}

TEST_CASE("parse_lyrics_catalog") {
  const auto songs = parse_lyrics_catalog_text("artist,song,text\nEnya,Afer Ventus,\"la la la\"\n");
  REQUIRE(songs.size() == 1);
  CHECK(songs[0].artist_norm == "enya");
  CHECK(songs[0].artist_raw == "Enya");
  CHECK(songs[0].title == "Afer Ventus");

  const auto dedup = parse_lyrics_catalog_text(
      "artist,song,text\nEnya,Orinoco Flow,first\nENYA!,Orinoco Flow,second\nEnya,Caribbean Blue,third\n");
  REQUIRE(dedup.size() == 2);
  CHECK(dedup[0].lyrics == "first");

  CHECK_THROWS_AS(parse_lyrics_catalog_text("artist,song,text\nEnya,Empty,\"\"\n"), ValidationError);
  CHECK_THROWS_AS(parse_lyrics_catalog_text("artist,song,text\n!!!,Title,words\n"), ValidationError);
}

TEST_CASE("parse_play_log") {
  const auto plays = parse_play_log_text("user_id\tartist_name\tplays\nu1\tEnya\t10\nu1\tenya\t5\nu2\tEnya\t0\n");
  REQUIRE(plays.size() == 2);
  CHECK(plays[0] == PlayRecord{"u1", "Enya", "enya", 15});
  CHECK(plays[1].play_count == 0);

  try {
    parse_play_log_text("user_id\tartist_name\tplays\nu1\tEnya\t-3\n", "plays.tsv");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_play_log_text("user_id\tartist_name\tplays\nu1\tEnya\t1.5\n"), ParseError);
  CHECK_THROWS_AS(parse_play_log_text("user_id\tartist_name\tplays\nu1\tEnya\n"), ParseError);
  CHECK_THROWS_AS(parse_play_log_text("user_id\tartist_name\tplays\n\tEnya\t3\n"), ValidationError);
}

TEST_CASE("serialize then parse is identity on validated records") {
  std::mt19937_64 rng(21);
  const std::vector<std::string> pieces{"love", "\"quoted\"", "a,b", "line\nbreak", "über", "  ", "x"};
  auto text = [&] {
    std::string s = "w";
    for (int i = 0; i < 5; ++i) s += " " + pieces[rng() % pieces.size()];
    return s;
  };
  std::vector<EmotionSentence> sentences;
  std::vector<SongRecord> songs;
  std::vector<PlayRecord> plays;
  for (int i = 0; i < 50; ++i) {
    const double v = 1.0 + 4.0 * static_cast<double>(rng() % 100000) / 99999.0;
    sentences.push_back({"id" + std::to_string(i), text(), v, 5.0 - (v - 1.0) * 0.73});
    SongRecord s;
    s.artist_raw = "Artist, No. " + std::to_string(i % 7);
    s.artist_norm = normalize_artist_name(s.artist_raw);
    s.title = "Song \"" + std::to_string(i) + "\"";
    s.lyrics = text();
    songs.push_back(s);
    PlayRecord p;
    p.user_id = "u" + std::to_string(i);
    p.artist_raw = "Artist " + std::to_string(i % 5);
    p.artist_norm = normalize_artist_name(p.artist_raw);
    p.play_count = rng() % 1000;
    plays.push_back(p);
  }
  CHECK(parse_emotion_corpus_text(serialize_emotion_corpus(sentences)) == sentences);
  CHECK(parse_lyrics_catalog_text(serialize_lyrics_catalog(songs)) == songs);
  CHECK(parse_play_log_text(serialize_play_log(plays)) == plays);
}

TEST_CASE("join_catalog intersects normalized artist sets") {
  auto song = [](const std::string& a) { return SongRecord{a, normalize_artist_name(a), "t", "w"}; };
  auto play = [](const std::string& a) { return PlayRecord{"u", a, normalize_artist_name(a), 1}; };

  const auto c = join_catalog({song("Enya"), song("Metallica")}, {play("enya"), play("Opeth")});
  CHECK(c.joined_artists == std::set<std::string>{"enya"});
  CHECK(c.songs.size() == 2);
  CHECK(c.plays.size() == 2);

  CHECK(join_catalog({song("A")}, {play("B")}).joined_artists.empty());
  CHECK(join_catalog({song("A"), song("B"), song("C")}, {play("c"), play("b"), play("a")}).joined_artists.size() == 3);

  // Swapping which side contributes which artist set gives the same intersection.
  const auto forward = join_catalog({song("X"), song("Y")}, {play("Y"), play("Z")});
  const auto swapped = join_catalog({song("Y"), song("Z")}, {play("X"), play("Y")});
  CHECK(forward.joined_artists == swapped.joined_artists);
}
