#include <random>
#include <sstream>

#include "doctest.h"
#include "limerick/evaluation.hpp"
#include "test_util.hpp"

using namespace limerick;
using limerick::testing::world;

namespace {

Limerick poem_from_lines(const std::vector<std::string>& lines) {
  Limerick poem;
  for (std::size_t i = 0; i < 5; ++i) {
    std::istringstream in(lines[i]);
    std::string word;
    while (in >> word) poem.lines[i].push_back(word);
  }
  return poem;
}

Limerick fixture_poem() {
  // Record p01 of the bundled corpus.
  return poem_from_lines({
      "there was a brave soldier named wade",
      "who lost all of his gold in a raid",
      "when he came to the end",
      "with his very best friend",
      "and returned to the farm with the maid",
  });
}

}  // namespace

TEST_CASE("validate_limerick accepts a well-formed poem") {
  const auto& w = world();
  auto report = validate_limerick(fixture_poem(), w.lexicon, w.meter, w.bank,
                                  w.tagger);
  CHECK(report.rhyme_scheme);
  for (int line = 2; line <= 5; ++line) {
    std::size_t i = static_cast<std::size_t>(line - 1);
    CAPTURE(line);
    CHECK(report.syllables[i]);
    CHECK(report.meter[i]);
    CHECK(report.template_membership[i]);
  }
  CHECK(report.hard_pass);
}

TEST_CASE("validate_limerick flags a broken rhyme") {
  const auto& w = world();
  Limerick poem = fixture_poem();
  poem.lines[3].back() = "moon";  // line 4 no longer rhymes with line 3
  auto report = validate_limerick(poem, w.lexicon, w.meter, w.bank, w.tagger);
  CHECK_FALSE(report.rhyme_scheme);
  CHECK_FALSE(report.hard_pass);
}

TEST_CASE("validate_limerick flags a missing syllable") {
  const auto& w = world();
  Limerick poem = fixture_poem();
  // Dropping "to" leaves line 3 a syllable short.
  poem.lines[2] = {"when", "he", "came", "the", "end"};
  auto report = validate_limerick(poem, w.lexicon, w.meter, w.bank, w.tagger);
  CHECK_FALSE(report.syllables[2]);
  CHECK_FALSE(report.hard_pass);
}

TEST_CASE("validate_limerick flags unknown templates and words") {
  const auto& w = world();
  Limerick poem = fixture_poem();
  poem.lines[4] = {"maid", "maid", "maid", "maid", "maid", "maid", "maid",
                   "maid", "maid"};
  auto report = validate_limerick(poem, w.lexicon, w.meter, w.bank, w.tagger);
  CHECK_FALSE(report.template_membership[4]);
  CHECK_FALSE(report.hard_pass);

  poem = fixture_poem();
  poem.lines[1].back() = "xylophone";
  auto report2 = validate_limerick(poem, w.lexicon, w.meter, w.bank, w.tagger);
  CHECK_FALSE(report2.hard_pass);
  CHECK_FALSE(report2.notes.empty());
}

TEST_CASE("ngram_mean_popularity matches hand counts") {
  CHECK(ngram_mean_popularity({"a b c", "a b d"}, 2) == doctest::Approx(1.5));
  std::vector<std::string> identical(50, "the same line again");
  CHECK(ngram_mean_popularity(identical, 2) == doctest::Approx(50.0));
  std::vector<std::string> disjoint = {"a b", "c d", "e f"};
  CHECK(ngram_mean_popularity(disjoint, 2) == doctest::Approx(1.0));
}

TEST_CASE("ngram_mean_popularity skips short lines and can be undefined") {
  PopularityNotes notes;
  double value = ngram_mean_popularity({"one", "one two three"}, 3, &notes);
  CHECK(value == doctest::Approx(1.0));
  CHECK(notes.skipped_lines == 1);
  CHECK_THROWS_AS(ngram_mean_popularity({"just two"}, 3),
                  UndefinedMetricError);
  CHECK_THROWS_AS(ngram_mean_popularity({}, 2), UndefinedMetricError);
}

TEST_CASE("ngram_mean_popularity is permutation-invariant and scales") {
  std::vector<std::string> lines = {"a b c b", "b c a", "c a c a"};
  double base = ngram_mean_popularity(lines, 2);
  std::vector<std::string> shuffled = {lines[2], lines[0], lines[1]};
  CHECK(ngram_mean_popularity(shuffled, 2) == doctest::Approx(base));
  // Duplicating every line k times multiplies every count by k.
  std::vector<std::string> doubled = lines;
  doubled.insert(doubled.end(), lines.begin(), lines.end());
  CHECK(ngram_mean_popularity(doubled, 2) == doctest::Approx(2.0 * base));
}

TEST_CASE("distinct_template_count unions ids across poems") {
  CHECK(distinct_template_count({}) == 0);
  Limerick a;
  a.template_ids = {1, 2, 3, 4};
  Limerick b;
  b.template_ids = {4, 3, 2, 1};
  CHECK(distinct_template_count({a, b, a, b, a}) == 4);
  Limerick c;
  c.template_ids = {7, -1, 2, 9};
  CHECK(distinct_template_count({a, c}) == 6);  // -1 marks "no template"

  // Monotone under concatenation.
  std::vector<Limerick> small = {a};
  std::vector<Limerick> bigger = {a, c};
  CHECK(distinct_template_count(bigger) >= distinct_template_count(small));
}

TEST_CASE("compare_runs emits one row per n per run") {
  Limerick a = fixture_poem();
  a.template_ids = {1, 2, 3, 4};
  std::vector<Limerick> run(12, a);
  auto rows = compare_runs(run, run, {2, 3}, 10, 42, "left", "right");
  REQUIRE(rows.size() == 4);
  // Identical runs produce identical columns.
  CHECK(rows[0].mean_popularity == doctest::Approx(rows[1].mean_popularity));
  CHECK(rows[0].distinct_templates == rows[1].distinct_templates);
  CHECK(rows[0].n == 2);
  CHECK(rows[2].n == 3);
  CHECK(rows[0].run == "left");
  CHECK(rows[1].run == "right");
  CHECK(rows[0].sample_size == 10);

  std::ostringstream csv;
  write_comparison_csv(rows, csv);
  std::string text = csv.str();
  CHECK(text.rfind("n,run,mean_popularity,distinct_templates,sample_size\n",
                   0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
}

TEST_CASE("compare_runs samples the whole run when it is small") {
  Limerick a = fixture_poem();
  std::vector<Limerick> tiny(3, a);
  auto rows = compare_runs(tiny, tiny, {2}, 50, 1);
  CHECK(rows[0].sample_size == 3);
  CHECK_FALSE(rows[0].note.empty());
}

TEST_CASE("compare_runs surfaces undefined metrics per row") {
  Limerick a = fixture_poem();
  std::vector<Limerick> run(5, a);
  auto rows = compare_runs(run, run, {40}, 5, 1);
  CHECK_FALSE(rows[0].defined);
  std::ostringstream csv;
  write_comparison_csv(rows, csv);
  CHECK(csv.str().find("undefined") != std::string::npos);
}
