#include <set>
#include <sstream>

#include "aidetect/corpus.hpp"
#include "aidetect/numerics.hpp"
#include "doctest.h"
#include "synthetic.hpp"
#include "test_util.hpp"

using namespace aidetect;

namespace {

Corpus parse_csv(const std::string& text) {
  std::istringstream in(text);
  return read_corpus(in, CorpusFormat::Csv);
}

Corpus balanced(std::size_t per_class) {
  Corpus c;
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    c.add({"d" + std::to_string(i), "text " + std::to_string(i), i % 2 ? ClassLabel::AI : ClassLabel::Human, {}});
  }
  return c;
}

std::set<std::string> ids_of(const Corpus& c) {
  std::set<std::string> s;
  for (const auto& d : c) s.insert(d.id);
  return s;
}

}  // namespace

TEST_CASE("labels parse from digits and names, case-insensitively") {
  CHECK(parse_label("0") == ClassLabel::Human);
  CHECK(parse_label("1") == ClassLabel::AI);
  CHECK(parse_label("human") == ClassLabel::Human);
  CHECK(parse_label("Ai") == ClassLabel::AI);
  CHECK_FALSE(parse_label("2").has_value());
  CHECK(to_int(ClassLabel::Human) == 0);
  CHECK(to_int(ClassLabel::AI) == 1);
}

TEST_CASE("csv row parses into a labelled document") {
  const Corpus c = parse_csv("id,text,label\nd1,\"hello world\",AI\n");
  REQUIRE(c.size() == 1);
  CHECK(c[0].id == "d1");
  CHECK(c[0].text == "hello world");
  CHECK(c[0].label == ClassLabel::AI);
  CHECK(c.count(ClassLabel::AI) == 1);
}

TEST_CASE("quoted fields may hold commas, quotes and newlines") {
  const Corpus c = parse_csv("id,text,label\nx,\"a, \"\"b\"\"\nc\",0\n");
  REQUIRE(c.size() == 1);
  CHECK(c[0].text == "a, \"b\"\nc");
}

TEST_CASE("out-of-domain label is rejected with its row") {
  try {
    parse_csv("id,text,label\nd1,ok,0\nd2,bad,2\n");
    FAIL("expected InvalidLabel");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidLabel);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("rows with empty text are dropped and counted") {
  const Corpus c = parse_csv("id,text,label\na,one,0\nb,,1\nc,three,1\n");
  CHECK(c.size() == 2);
  CHECK(c.dropped() == 1);
}

TEST_CASE("missing column and duplicate id") {
  CHECK_THROWS_KIND(parse_csv("id,body,label\na,x,0\n"), ErrorKind::MissingColumn);
  CHECK_THROWS_KIND(parse_csv("id,text,label\na,x,0\na,y,1\n"), ErrorKind::DuplicateId);
}

TEST_CASE("jsonl accepts string or integer labels") {
  std::istringstream in("{\"id\":\"a\",\"text\":\"x\",\"label\":1}\n{\"id\":\"b\",\"text\":\"y\",\"label\":\"Human\"}\n");
  const Corpus c = read_corpus(in, CorpusFormat::Jsonl);
  REQUIRE(c.size() == 2);
  CHECK(c[0].label == ClassLabel::AI);
  CHECK(c[1].label == ClassLabel::Human);
}

TEST_CASE("write then read round-trips in both formats") {
  Corpus c = testing::synthetic_corpus(20, 3);
  c.add({"q\"uote", "comma, and \"quotes\"\nnewline", ClassLabel::AI, SplitTag::Test});
  for (auto fmt : {CorpusFormat::Csv, CorpusFormat::Jsonl}) {
    std::ostringstream out;
    write_corpus(out, c, fmt);
    std::istringstream in(out.str());
    CHECK(read_corpus(in, fmt) == c);
  }
}

TEST_CASE("clean_text examples") {
  CHECK(clean_text("", CleaningProfile::lstm()) == "");
  CHECK(clean_text("AI & ML 2024", CleaningProfile::classic()) == "ai ml 2024");
  // Digits are deleted before punctuation is stripped, so "Wor1d" becomes "word".
  CHECK(clean_text("Hello,  Wor1d!", CleaningProfile::lstm()) == "hello word");
  CHECK(clean_text("It's 2024!", CleaningProfile::lstm()) == "it s");
  CHECK(clean_text("Ünïcode—TEXT", CleaningProfile::head()) == "ünïcode text");
}

TEST_CASE("clean_text is idempotent for every profile") {
  Rng rng(11);
  const std::string alphabet = "aZ9 ,.!?'\t\n-_é";
  for (int trial = 0; trial < 300; ++trial) {
    std::string s;
    const std::size_t len = rng.uniform_index(30);
    for (std::size_t i = 0; i < len; ++i) s += alphabet[rng.uniform_index(alphabet.size())];
    for (const auto& p : {CleaningProfile::classic(), CleaningProfile::lstm(), CleaningProfile::head()}) {
      const std::string once = clean_text(s, p);
      CHECK(clean_text(once, p) == once);
    }
  }
}

TEST_CASE("profiles look up by name") {
  CHECK(CleaningProfile::by_name("lstm") == CleaningProfile::lstm());
  CHECK_FALSE(CleaningProfile::by_name("nope").has_value());
}

TEST_CASE("split of 10 balanced docs at 0.8") {
  const Corpus c = balanced(5);
  const auto [train, test] = split_corpus(c, 0.8, 7);
  CHECK(train.size() == 8);
  CHECK(train.count(ClassLabel::AI) == 4);
  CHECK(test.size() == 2);
  CHECK(test.count(ClassLabel::Human) == 1);
}

TEST_CASE("split of 4 docs at 0.5 gives balanced halves") {
  const auto [train, test] = split_corpus(balanced(2), 0.5, 1);
  CHECK(train.count(ClassLabel::AI) == 1);
  CHECK(train.count(ClassLabel::Human) == 1);
  CHECK(test.count(ClassLabel::AI) == 1);
  CHECK(test.count(ClassLabel::Human) == 1);
}

TEST_CASE("split is deterministic, disjoint, covering and obeys the floor rule") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Corpus c;
    const std::size_t humans = 1 + rng.uniform_index(15);
    const std::size_t ais = 1 + rng.uniform_index(15);
    for (std::size_t i = 0; i < humans + ais; ++i) {
      c.add({"d" + std::to_string(i), "x", i < humans ? ClassLabel::Human : ClassLabel::AI, {}});
    }
    const double frac = 0.3 + 0.4 * rng.uniform();
    const std::uint64_t seed = rng.next_u64();
    std::pair<Corpus, Corpus> parts;
    try {
      parts = split_corpus(c, frac, seed);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DegenerateSplit);
      continue;
    }
    const auto& [train, test] = parts;
    const auto again = split_corpus(c, frac, seed);
    CHECK(again.first == train);
    CHECK(again.second == test);
    CHECK(train.count(ClassLabel::Human) == static_cast<std::size_t>(frac * static_cast<double>(humans) + 1e-9));
    CHECK(train.count(ClassLabel::AI) == static_cast<std::size_t>(frac * static_cast<double>(ais) + 1e-9));
    auto all = ids_of(train);
    for (const auto& id : ids_of(test)) CHECK(all.insert(id).second);
    CHECK(all == ids_of(c));
  }
}

TEST_CASE("degenerate splits are rejected") {
  Corpus one_class;
  one_class.add({"a", "x", ClassLabel::AI, {}});
  one_class.add({"b", "y", ClassLabel::AI, {}});
  CHECK_THROWS_KIND(split_corpus(one_class, 0.5, 1), ErrorKind::DegenerateSplit);
  CHECK_THROWS_KIND(split_corpus(balanced(1), 0.5, 1), ErrorKind::DegenerateSplit);
  CHECK_THROWS_KIND(split_corpus(balanced(5), 1.0, 1), ErrorKind::DegenerateSplit);
}
