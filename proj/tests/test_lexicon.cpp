#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "emomap/error.hpp"
#include "emomap/lexicon.hpp"
#include "emomap/rng.hpp"

using namespace emomap;

namespace {

const ColumnMap kVadColumns{{"word", "word"}, {"valence", "valence"}, {"arousal", "arousal"},
                            {"dominance", "dominance"}};

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an emomap::Error");
  return ErrorKind::Io;
}

Lexicon make_lexicon(const EmotionFormat& f, std::vector<std::string> words, std::uint64_t seed,
                     std::string lang = "en") {
  Rng rng(seed);
  Lexicon lex(f, lang, "synthetic-" + f.name);
  for (auto& w : words) {
    std::vector<double> r;
    for (std::size_t j = 0; j < f.size(); ++j) r.push_back(rng.uniform(f.scale_low, f.scale_high));
    lex.add(w, r);
  }
  return lex;
}

}  // namespace

TEST_CASE("built-in formats") {
  CHECK(EmotionFormat::vad().variables == std::vector<std::string>{"valence", "arousal", "dominance"});
  CHECK(EmotionFormat::va().size() == 2);
  CHECK(EmotionFormat::be5().scale_high == 5.0);
  CHECK(EmotionFormat::builtin("BE5") == EmotionFormat::be5());
  CHECK(kind_of([] { EmotionFormat::builtin("PAD"); }) == ErrorKind::Configuration);
  CHECK(kind_of([] { EmotionFormat::make("X", {"a", "a"}, 0, 1); }) == ErrorKind::Configuration);
  CHECK(kind_of([] { EmotionFormat::make("X", {}, 0, 1); }) == ErrorKind::Configuration);
  CHECK(kind_of([] { EmotionFormat::make("X", {"a"}, 1, 1); }) == ErrorKind::Configuration);
}

TEST_CASE("parse_lexicon reads a three-row VAD file") {
  const std::string tsv =
      "word\tvalence\tarousal\tdominance\n"
      "sunshine\t8.1\t5.3\t5.4\n"
      "grief\t1.9\t4.8\t3.1\n"
      "table\t5.2\t2.9\t5.0\n";
  const auto lex = parse_lexicon(tsv, EmotionFormat::vad(), kVadColumns);
  REQUIRE(lex.size() == 3);
  CHECK(lex.entries()[0].word == "sunshine");
  CHECK(*lex.find("grief") == std::vector<double>{1.9, 4.8, 3.1});
}

TEST_CASE("parse_lexicon honours the column map and ignores extra columns") {
  const std::string tsv =
      "Word\tV.Mean.Sum\tnote\tA.Mean.Sum\tD.Mean.Sum\n"
      "aardvark\t6.26\tx\t2.41\t4.27\n";
  const ColumnMap map{{"word", "Word"}, {"valence", "V.Mean.Sum"}, {"arousal", "A.Mean.Sum"},
                      {"dominance", "D.Mean.Sum"}};
  const auto lex = parse_lexicon(tsv, EmotionFormat::vad(), map);
  CHECK(*lex.find("aardvark") == std::vector<double>{6.26, 2.41, 4.27});
}

TEST_CASE("missing column is a configuration error naming it") {
  const std::string tsv = "word\tvalence\tdominance\nx\t1\t1\n";
  try {
    parse_lexicon(tsv, EmotionFormat::vad(), kVadColumns);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Configuration);
    CHECK(std::string(e.what()).find("arousal") != std::string::npos);
  }
}

TEST_CASE("non-numeric cell is a parse error with row number") {
  const std::string tsv = "word\tvalence\tarousal\tdominance\na\t1\t1\t1\nb\t2\tlots\t3\n";
  try {
    parse_lexicon(tsv, EmotionFormat::vad(), kVadColumns);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }
}

TEST_CASE("out-of-range values fail unless clamping is requested") {
  const std::string tsv = "word\tvalence\tarousal\tdominance\nhot\t9.5\t1\t1\n";
  CHECK(kind_of([&] { parse_lexicon(tsv, EmotionFormat::vad(), kVadColumns); }) ==
        ErrorKind::Validation);
  Diagnostics diag;
  const auto lex = parse_lexicon(tsv, EmotionFormat::vad(), kVadColumns, {.clamp = true}, &diag);
  CHECK(lex.find("hot")->at(0) == 9.0);
  REQUIRE(diag.size() == 1);
  CHECK(diag[0].kind == "clamped");
  CHECK(diag[0].row == 2);
}

TEST_CASE("duplicate words are averaged with a warning") {
  const std::string tsv =
      "word\tvalence\tarousal\tdominance\n"
      "echo\t2\t2\t2\n"
      "other\t5\t5\t5\n"
      "echo\t4\t4\t4\n";
  Diagnostics diag;
  const auto lex = parse_lexicon(tsv, EmotionFormat::vad(), kVadColumns, {}, &diag);
  REQUIRE(lex.size() == 2);
  CHECK(*lex.find("echo") == std::vector<double>{3, 3, 3});
  REQUIRE(diag.size() == 1);
  CHECK(diag[0].kind == "duplicate");
  CHECK(diag[0].word == "echo");
  CHECK(diag[0].row == 4);
}

TEST_CASE("canonicalization: NFC, trimming, optional lowercase") {
  // "café" decomposed (e + U+0301) vs precomposed (U+00E9).
  const std::string decomposed = "cafe\xCC\x81";
  const std::string composed = "caf\xC3\xA9";
  CHECK(canonicalize_word("  " + decomposed + " ") == composed);
  CHECK(canonicalize_word("Sun") == "Sun");
  CHECK(canonicalize_word("Sun", true) == "sun");

  const std::string tsv = "word\tvalence\tarousal\tdominance\n" + composed + "\t2\t2\t2\n" +
                          decomposed + "\t4\t4\t4\nSun\t5\t5\t5\nsun\t6\t6\t6\n";
  const auto lex = parse_lexicon(tsv, EmotionFormat::vad(), kVadColumns);
  CHECK(lex.size() == 3);  // the two cafés merge; case is kept apart by default
  const auto lower = parse_lexicon(tsv, EmotionFormat::vad(), kVadColumns, {.lowercase = true});
  CHECK(lower.size() == 2);
}

TEST_CASE("CRLF line endings are accepted") {
  const std::string tsv = "word\tvalence\tarousal\tdominance\r\na\t1\t2\t3\r\n";
  const auto lex = parse_lexicon(tsv, EmotionFormat::vad(), kVadColumns);
  CHECK(*lex.find("a") == std::vector<double>{1, 2, 3});
}

TEST_CASE("rescale maps [1,5] onto [1,9]") {
  Lexicon lex(EmotionFormat::be5(), "en", "t");
  lex.add("a", {3, 1, 5, 2, 3});
  const auto out = rescale(lex, 1, 9);
  CHECK(out.format().scale_low == 1.0);
  CHECK(out.format().scale_high == 9.0);
  const auto& r = *out.find("a");
  CHECK(r[0] == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(r[1] == 1.0);
  CHECK(r[2] == 9.0);
  CHECK(r[3] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(kind_of([&] { rescale(lex, 2, 2); }) == ErrorKind::Configuration);
}

TEST_CASE("rescale round trip and rank preservation") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto lex = make_lexicon(EmotionFormat::be5(), {"a", "b", "c", "d", "e", "f"}, rng.next_u64());
    const double lo = rng.uniform(-10, 10);
    const double hi = lo + rng.uniform(0.1, 20);
    const auto there = rescale(lex, lo, hi);
    const auto back = rescale(there, 1, 5);
    for (std::size_t i = 0; i < lex.size(); ++i) {
      for (std::size_t j = 0; j < 5; ++j) {
        CHECK(std::abs(back.entries()[i].ratings[j] - lex.entries()[i].ratings[j]) < 1e-12);
        for (std::size_t k = 0; k < lex.size(); ++k) {
          if (lex.entries()[i].ratings[j] < lex.entries()[k].ratings[j]) {
            CHECK(there.entries()[i].ratings[j] <= there.entries()[k].ratings[j]);
          }
        }
      }
    }
  }
}

TEST_CASE("align keeps the intersection in source order") {
  const auto vad = make_lexicon(EmotionFormat::vad(), {"e", "d", "c", "b", "a"}, 1);
  const auto be5 = make_lexicon(EmotionFormat::be5(), {"a", "b", "c", "d", "e"}, 2);
  const auto al = align(vad, be5);
  CHECK(al.size() == 5);
  CHECK(al.words == std::vector<std::string>{"e", "d", "c", "b", "a"});
  CHECK(al.source(0, 0) == vad.entries()[0].ratings[0]);
  CHECK(al.target(0, 4) == be5.find("e")->at(4));
  CHECK(al.source_format.name == "VAD");
  CHECK(al.target_format.name == "BE5");
  al.validate();

  const auto partial = make_lexicon(EmotionFormat::be5(), {"c", "zz", "a"}, 3);
  CHECK(align(vad, partial).words == std::vector<std::string>{"c", "a"});

  const auto disjoint = make_lexicon(EmotionFormat::be5(), {"x", "y"}, 4);
  CHECK(kind_of([&] { align(vad, disjoint); }) == ErrorKind::EmptyAlignment);
  CHECK(kind_of([&] { align(vad, vad); }) == ErrorKind::Configuration);
  const auto spanish = make_lexicon(EmotionFormat::be5(), {"a"}, 5, "es");
  CHECK(kind_of([&] { align(vad, spanish); }) == ErrorKind::Configuration);
  CHECK(align(vad, spanish, true).size() == 1);
}

TEST_CASE("align membership is symmetric") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::string> wa, wb;
    for (int i = 0; i < 30; ++i) {
      if (rng.uniform() < 0.6) wa.push_back("w" + std::to_string(i));
      if (rng.uniform() < 0.6) wb.push_back("w" + std::to_string(i));
    }
    rng.shuffle(wb);
    const auto a = make_lexicon(EmotionFormat::vad(), wa, rng.next_u64());
    const auto b = make_lexicon(EmotionFormat::be5(), wb, rng.next_u64());
    std::set<std::string> ab, ba;
    try {
      const auto x = align(a, b);
      ab.insert(x.words.begin(), x.words.end());
    } catch (const Error&) {
    }
    try {
      const auto y = align(b, a);
      ba.insert(y.words.begin(), y.words.end());
    } catch (const Error&) {
    }
    CHECK(ab == ba);
  }
}

TEST_CASE("project drops dominance to VA and rejects unknown variables") {
  const auto vad = make_lexicon(EmotionFormat::vad(), {"a", "b", "c"}, 3);
  const std::vector<std::string> va_vars{"valence", "arousal"};
  const auto va = project(vad, va_vars);
  CHECK(va.format() == EmotionFormat::va());
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(va.entries()[i].ratings[0] == vad.entries()[i].ratings[0]);
    CHECK(va.entries()[i].ratings[1] == vad.entries()[i].ratings[1]);
  }
  const auto same = project(vad, EmotionFormat::vad().variables);
  CHECK(same.format() == vad.format());
  CHECK(same.entries()[2].ratings == vad.entries()[2].ratings);

  const auto be5 = make_lexicon(EmotionFormat::be5(), {"a"}, 4);
  const std::vector<std::string> bad{"joy", "surprise"};
  CHECK(kind_of([&] { project(be5, bad); }) == ErrorKind::Configuration);
  CHECK(kind_of([&] { project(be5, std::vector<std::string>{}); }) == ErrorKind::Configuration);
}

TEST_CASE("project commutes with align") {
  const auto vad = make_lexicon(EmotionFormat::vad(), {"a", "b", "c", "d"}, 5);
  const auto be5 = make_lexicon(EmotionFormat::be5(), {"d", "b", "a"}, 6);
  const std::vector<std::string> keep{"arousal", "valence"};
  const auto x = align(project(vad, keep), be5);
  const auto y = project(align(vad, be5), keep);
  CHECK(x.words == y.words);
  CHECK(x.source == y.source);
  CHECK(x.target == y.target);
  CHECK(x.source_format == y.source_format);

  const std::vector<std::string> be_keep{"fear", "joy"};
  const auto p = project(align(vad, be5), be_keep);
  CHECK(p.target.cols() == 2);
  CHECK(p.source.cols() == 3);
}

TEST_CASE("concat stacks parts and checks formats") {
  const auto be5 = make_lexicon(EmotionFormat::be5(), {"a", "b", "c", "d", "e", "f", "g"}, 7);
  const auto p1 = align(make_lexicon(EmotionFormat::vad(), {"a", "b", "c"}, 8), be5);
  const auto p2 = align(make_lexicon(EmotionFormat::vad(), {"d", "e", "f", "a"}, 9), be5);

  const std::vector<AlignedLexicon> one{p1};
  const auto single = concat(one);
  CHECK(single.words == p1.words);
  CHECK(single.source == p1.source);

  const std::vector<AlignedLexicon> two{p1, p2};
  const auto joined = concat(two);
  CHECK(joined.size() == 7);
  CHECK(joined.words[0] == "a");
  CHECK(joined.words[3] == "d");
  CHECK(joined.words[6] == "a");  // duplicates across parts are kept
  CHECK(joined.target.row(6) == p2.target.row(3));
  joined.validate();

  const std::vector<std::string> va_vars{"valence", "arousal"};
  const std::vector<AlignedLexicon> mixed{project(p1, va_vars), p2};
  CHECK(kind_of([&] { concat(mixed); }) == ErrorKind::Configuration);
  CHECK(kind_of([&] { concat(std::span<const AlignedLexicon>{}); }) == ErrorKind::Configuration);
}

TEST_CASE("concat marks mixed languages and sizes add up") {
  Rng rng(12);
  std::vector<AlignedLexicon> parts;
  std::size_t total = 0;
  for (int i = 0; i < 5; ++i) {
    const std::string lang = i % 2 ? "es" : "en";
    std::vector<std::string> words;
    const auto n = 1 + rng.below(9);
    for (std::size_t k = 0; k < n; ++k) words.push_back("w" + std::to_string(k));
    parts.push_back(align(make_lexicon(EmotionFormat::va(), words, rng.next_u64(), lang),
                          make_lexicon(EmotionFormat::be5(), words, rng.next_u64(), lang)));
    total += n;
  }
  const auto all = concat(parts);
  CHECK(all.size() == total);
  CHECK(all.language == "multi");
  CHECK(all.origins.size() == total);
  CHECK(all.origins.back().language == "en");
}

TEST_CASE("swap_roles exchanges source and target") {
  const auto al = align(make_lexicon(EmotionFormat::vad(), {"a", "b"}, 1),
                        make_lexicon(EmotionFormat::be5(), {"a", "b"}, 2));
  const auto sw = swap_roles(al);
  CHECK(sw.source_format.name == "BE5");
  CHECK(sw.source == al.target);
  CHECK(sw.target == al.source);
}
