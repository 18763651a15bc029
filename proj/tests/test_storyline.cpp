#include <cmath>
#include <sstream>

#include "doctest.h"
#include "limerick/storyline.hpp"
#include "test_util.hpp"

using namespace limerick;
using limerick::testing::data_path;
using limerick::testing::lexicon_from_string;

namespace {

EmbeddingSpace space_from_string(const std::string& text) {
  std::istringstream in(text);
  return load_embeddings(in);
}

struct Fixture {
  Lexicon lexicon;
  EmbeddingSpace space;
  NameLexicon names;
};

Fixture load_fixture() {
  Fixture f;
  f.lexicon = load_lexicon_file(data_path("lexicon.dict"));
  load_rhyme_overrides_file(data_path("rhyme_overrides.csv"), f.lexicon);
  f.space = load_embeddings_file(data_path("embeddings.txt"));
  f.names = load_names_file(data_path("names.txt"), f.lexicon);
  return f;
}

}  // namespace

TEST_CASE("embedding loader honors the header and rejects bad rows") {
  std::istringstream in(
      "3 2\n"
      "cat 1.0 0.0\n"
      "zero 0.0 0.0\n"
      "short 1.0\n"
      "dog 0.0 1.0\n");
  EmbeddingLoadReport report;
  auto space = load_embeddings(in, &report);
  CHECK(space.dimension() == 2);
  CHECK(report.loaded == 2);
  CHECK(report.rejected.size() == 2);
  CHECK(space.contains("cat"));
  CHECK_FALSE(space.contains("zero"));
}

TEST_CASE("similarity maps cosine onto the unit interval") {
  auto space = space_from_string(
      "same 1.0 0.0\n"
      "copy 2.0 0.0\n"
      "orth 0.0 1.0\n"
      "anti -3.0 0.0\n");
  CHECK(similarity(space, "same", "same") == doctest::Approx(1.0));
  CHECK(similarity(space, "same", "copy") == doctest::Approx(1.0));
  CHECK(similarity(space, "same", "orth") == doctest::Approx(0.5));
  CHECK(similarity(space, "same", "anti") == doctest::Approx(0.0));
  CHECK_THROWS_AS(similarity(space, "same", "missing"), AbsentEmbeddingError);
}

TEST_CASE("names without pronunciations are excluded with a report") {
  Lexicon lex = lexicon_from_string("WADE  W EY1 D\nJUNE  JH UW1 N\n");
  std::istringstream in("wade,M\njune,F\nghost\n");
  NameLoadReport report;
  auto names = load_names(in, lex, &report);
  CHECK(names.names() == std::vector<std::string>{"june", "wade"});
  CHECK(names.gender("wade") == 'M');
  CHECK(names.gender("june") == 'F');
  REQUIRE(report.excluded.size() == 1);
  CHECK(report.excluded[0] == "ghost");
}

TEST_CASE("y2 conditional is proportional to mapped cosine similarity") {
  // Hand-built three-word space; masses computed by brute force.
  auto space = space_from_string(
      "prompt 1.0 0.0\n"
      "near 1.0 1.0\n"
      "far -1.0 0.5\n");
  Lexicon lex = lexicon_from_string(
      "PROMPT  P R AA1 M P T\n"
      "NEAR  N IH1 R\n"
      "FAR  F AA1 R\n");
  NameLexicon names;
  Storyline partial;
  partial.prompt = "prompt";
  auto dist = storyline_conditional(StorylineSlot::Y2, partial, lex, space,
                                    names, {});
  double sim_prompt = 1.0;
  double sim_near = (1.0 / std::sqrt(2.0) + 1.0) / 2.0;
  double sim_far = (-1.0 / std::sqrt(1.25) + 1.0) / 2.0;
  double total = sim_prompt + sim_near + sim_far;
  CHECK(dist.prob("prompt") == doctest::Approx(sim_prompt / total));
  CHECK(dist.prob("near") == doctest::Approx(sim_near / total));
  CHECK(dist.prob("far") == doctest::Approx(sim_far / total));
  CHECK(dist.total_mass() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("y4 conditional zeroes words that do not rhyme with y3") {
  auto fixture = load_fixture();
  Storyline partial;
  partial.prompt = "money";
  partial.y(2) = "gold";
  partial.y(3) = "train";
  auto dist = storyline_conditional(StorylineSlot::Y4, partial,
                                    fixture.lexicon, fixture.space,
                                    fixture.names, {});
  CHECK(dist.total_mass() == doctest::Approx(1.0).epsilon(1e-9));
  for (const auto& [word, p] : dist.support) {
    CHECK(p > 0.0);
    CHECK(fixture.lexicon.rhymes(word, "train"));
  }
  // A non-rhyming word gets exactly zero probability.
  CHECK(dist.prob("book") == 0.0);
  CHECK(dist.prob("train") == 0.0);  // a word never rhymes with itself
}

TEST_CASE("y1 conditional is uniform over rhyming names") {
  auto fixture = load_fixture();
  Storyline partial;
  partial.prompt = "money";
  partial.y(5) = "raid";
  auto dist = storyline_conditional(StorylineSlot::Y1, partial,
                                    fixture.lexicon, fixture.space,
                                    fixture.names, {});
  // wade is the only fixture name in the -ade class.
  REQUIRE(dist.support.size() == 1);
  CHECK(dist.support[0].first == "wade");
  CHECK(dist.support[0].second == doctest::Approx(1.0));
}

TEST_CASE("empty support raises an error") {
  auto space = space_from_string("alpha 1.0 0.0\nbeta 0.5 0.5\n");
  Lexicon lex = lexicon_from_string(
      "ALPHA  AE1 L F AH0\n"
      "BETA  B EY1 T AH0\n");
  NameLexicon names;
  Storyline partial;
  partial.prompt = "alpha";
  partial.y(2) = "beta";
  partial.y(3) = "alpha";
  // Nothing rhymes with alpha in this toy lexicon.
  CHECK_THROWS_AS(storyline_conditional(StorylineSlot::Y4, partial, lex, space,
                                        names, {}),
                  EmptySupportError);
}

TEST_CASE("conditional distributions are invariant to vector scaling") {
  auto space_a = space_from_string(
      "prompt 1.0 0.5\n"
      "one 0.3 0.4\n"
      "two -0.2 0.9\n");
  auto space_b = space_from_string(
      "prompt 3.0 1.5\n"
      "one 0.9 1.2\n"
      "two -0.6 2.7\n");
  Lexicon lex = lexicon_from_string(
      "PROMPT  P R AA1 M P T\n"
      "ONE  W AH1 N\n"
      "TWO  T UW1\n");
  NameLexicon names;
  Storyline partial;
  partial.prompt = "prompt";
  auto da = storyline_conditional(StorylineSlot::Y3, partial, lex, space_a,
                                  names, {});
  auto db = storyline_conditional(StorylineSlot::Y3, partial, lex, space_b,
                                  names, {});
  REQUIRE(da.support.size() == db.support.size());
  for (std::size_t i = 0; i < da.support.size(); ++i) {
    CHECK(da.support[i].first == db.support[i].first);
    CHECK(da.support[i].second == doctest::Approx(db.support[i].second));
  }
}

TEST_CASE("sample_word_constrained is deterministic and bounded") {
  TokenDistribution dist;
  dist.support = {{"alpha", 0.25}, {"beta", 0.5}, {"gamma", 0.25}};
  SUBCASE("single admissible word arrives on the first draw") {
    TokenDistribution sure;
    sure.support = {{"only", 1.0}};
    auto result = sample_word_constrained(sure, {}, 4, 1);
    REQUIRE(result);
    CHECK(result->word == "only");
    CHECK(result->attempts == 1);
  }
  SUBCASE("fully rejected support exhausts max_attempts") {
    auto result = sample_word_constrained(
        dist, [](const std::string&) { return false; }, 16, 7);
    CHECK_FALSE(result);
  }
  SUBCASE("fixed seeds reproduce the draw") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto a = sample_word_constrained(dist, {}, 8, seed);
      auto b = sample_word_constrained(dist, {}, 8, seed);
      REQUIRE(a);
      REQUIRE(b);
      CHECK(a->word == b->word);
      CHECK(a->attempts == b->attempts);
    }
  }
  SUBCASE("argmax mode picks the heaviest admissible word") {
    auto result = argmax_word_constrained(
        dist, [](const std::string& w) { return w != "beta"; });
    REQUIRE(result);
    CHECK(result->word != "beta");
  }
}

TEST_CASE("sampled storylines satisfy the rhyme and name invariants") {
  auto fixture = load_fixture();
  const std::string prompts[] = {"money", "gold", "rain", "train", "moon",
                                 "book", "snake", "cake", "king", "queen"};
  int produced = 0;
  for (const std::string& prompt : prompts) {
    for (int i = 0; i < 10; ++i) {
      auto story = sample_storyline(prompt, fixture.lexicon, fixture.space,
                                    fixture.names,
                                    mix_seed(2024, produced * 31 + i));
      if (!story) continue;
      ++produced;
      CHECK(story->prompt == prompt);
      CHECK(fixture.lexicon.rhymes(story->y(3), story->y(4)));
      CHECK(fixture.lexicon.rhymes(story->y(1), story->y(2)));
      CHECK(fixture.lexicon.rhymes(story->y(2), story->y(5)));
      CHECK(fixture.lexicon.rhymes(story->y(1), story->y(5)));
      CHECK(fixture.names.contains(story->y(1)));
      // No duplicates within a storyline.
      std::set<std::string> unique(story->finals.begin(),
                                   story->finals.end());
      CHECK(unique.size() == 5);
    }
  }
  CHECK(produced > 50);
}
