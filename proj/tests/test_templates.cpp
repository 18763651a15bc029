#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "limerick/templates.hpp"
#include "test_util.hpp"

using namespace limerick;
using limerick::testing::data_path;
using limerick::testing::tagger_from_strings;

namespace {

// Five lines per record; lines 2..5 define the templates.
TaggedRecord record(const std::string& id,
                    const std::vector<std::vector<std::string>>& tag_lines) {
  TaggedRecord rec;
  rec.id = id;
  for (const auto& tags : tag_lines) {
    std::vector<TaggedWord> words;
    for (std::size_t i = 0; i < tags.size(); ++i)
      words.push_back(TaggedWord{"w" + std::to_string(i), tags[i]});
    rec.lines.push_back(words);
  }
  return rec;
}

TaggedRecord uniform_record(const std::string& id,
                            const Template& line_template) {
  return record(id, {line_template, line_template, line_template,
                     line_template, line_template});
}

}  // namespace

TEST_CASE("tag_words maps literals and lexicon words") {
  Tagger tagger = tagger_from_strings("ate\tVBD\n", "who\na\n");
  CHECK(tagger.tag_words({"who", "ate", "a"}) ==
        std::vector<PosTag>{"WHO", "VBD", "A"});
  CHECK(tagger.tag_words({}).empty());
  CHECK_THROWS_AS(tagger.tag_words({"unknown"}), TaggingError);
  try {
    tagger.tag("bought");
    FAIL("expected TaggingError");
  } catch (const TaggingError& e) {
    CHECK(e.word == "bought");
  }
}

TEST_CASE("extract_templates deduplicates identical tag sequences") {
  auto bank = extract_templates(
      {uniform_record("r1", {"WHO", "VBD", "A", "NN"}),
       uniform_record("r2", {"WHO", "VBD", "A", "NN"})});
  CHECK(bank.line_count(2) == 1);
  // First-seen source id wins.
  CHECK(bank.templates(2)[0].source_id == "r1");
}

TEST_CASE("extract_templates rejects records without five lines") {
  TaggedRecord bad = record("short", {{"NN"}, {"NN"}, {"NN"}});
  try {
    extract_templates({bad});
    FAIL("expected LoadError");
  } catch (const LoadError& e) {
    CHECK(std::string(e.what()).find("short") != std::string::npos);
  }
  CHECK_THROWS_AS(extract_templates({}), LoadError);
}

TEST_CASE("extract_templates is idempotent") {
  auto corpus = load_corpus_file(data_path("corpus.jsonl"));
  auto bank_a = extract_templates(corpus);
  auto bank_b = extract_templates(corpus);
  CHECK(bank_a == bank_b);
}

TEST_CASE("fixture corpus yields templates for every line") {
  auto corpus = load_corpus_file(data_path("corpus.jsonl"));
  REQUIRE(corpus.size() == 45);
  ExtractionReport report;
  auto bank = extract_templates(corpus, &report);
  for (int line = 2; line <= 5; ++line) {
    CAPTURE(line);
    CHECK(report.templates_per_line[line] > 0);
    CHECK(bank.line_count(line) == report.templates_per_line[line]);
  }
}

TEST_CASE("viable_prefix answers prefix membership") {
  auto bank = extract_templates(
      {uniform_record("r1", {"WHO", "VBD", "A", "JJ", "NN"}),
       uniform_record("r2", {"WHO", "VBD", "A", "NN", "NN"})});
  // Empty prefix is viable whenever the line has templates.
  CHECK(bank.viable_prefix(2, {}));
  // A full stored template is a prefix of itself.
  CHECK(bank.viable_prefix(2, {"WHO", "VBD", "A", "JJ", "NN"}));
  // The branching example: both continuations are viable.
  CHECK(bank.viable_prefix(2, {"WHO", "VBD", "A", "JJ"}));
  CHECK(bank.viable_prefix(2, {"WHO", "VBD", "A", "NN"}));
  CHECK_FALSE(bank.viable_prefix(2, {"VBD"}));
}

TEST_CASE("viable_prefix is monotone under prefix shortening") {
  auto corpus = load_corpus_file(data_path("corpus.jsonl"));
  auto bank = extract_templates(corpus);
  std::mt19937_64 rng(7);
  for (int line = 2; line <= 5; ++line) {
    const auto& templates = bank.templates(line);
    for (int trial = 0; trial < 50; ++trial) {
      const auto& t = templates[rng() % templates.size()];
      std::size_t cut = rng() % (t.tags.size() + 1);
      Template prefix(t.tags.begin(), t.tags.begin() + static_cast<long>(cut));
      REQUIRE(bank.viable_prefix(line, prefix));
      while (!prefix.empty()) {
        prefix.pop_back();
        CHECK(bank.viable_prefix(line, prefix));
      }
    }
  }
}

TEST_CASE("next_tag_options reports completion and continuation") {
  auto bank = extract_templates(
      {uniform_record("r1", {"WHO", "VBD", "NN"}),
       uniform_record("r2", {"WHO", "VBD", "NN", "RB"})});
  auto options = bank.next_tag_options(2, {"WHO", "VBD"});
  REQUIRE(options.size() == 1);
  CHECK(options[0].tag == "NN");
  CHECK(options[0].completes);
  CHECK(options[0].continues);
  auto deeper = bank.next_tag_options(2, {"WHO", "VBD", "NN"});
  REQUIRE(deeper.size() == 1);
  CHECK(deeper[0].tag == "RB");
  CHECK(deeper[0].completes);
  CHECK_FALSE(deeper[0].continues);
}

TEST_CASE("bank persistence round-trips") {
  auto corpus = load_corpus_file(data_path("corpus.jsonl"));
  auto bank = extract_templates(corpus);
  std::stringstream buffer;
  save_bank(bank, buffer);
  auto reloaded = load_bank(buffer);
  CHECK(bank == reloaded);
}

TEST_CASE("compute_pos_weights implements the softmax of inverse shares") {
  SUBCASE("single tag category gets weight 1") {
    auto bank = extract_templates({uniform_record("r", {"NN", "NN"})});
    auto weights = compute_pos_weights(bank, 2);
    CHECK(weights.at("NN") == doctest::Approx(1.0));
  }
  SUBCASE("two equally common categories split evenly") {
    auto bank = extract_templates({uniform_record("r", {"NN", "JJ"})});
    auto weights = compute_pos_weights(bank, 2);
    CHECK(weights.at("NN") == doctest::Approx(0.5));
    CHECK(weights.at("JJ") == doctest::Approx(0.5));
  }
  SUBCASE("counts {A:3, B:1} give softmax(4/3, 4)") {
    // Two deduplicated templates: [A,A,B] and [A].
    auto bank = extract_templates(
        {uniform_record("r1", {"A", "A", "B"}), uniform_record("r2", {"A"})});
    auto weights = compute_pos_weights(bank, 2);
    CHECK(std::abs(weights.at("A") - 0.0650) < 1e-4);
    CHECK(std::abs(weights.at("B") - 0.9350) < 1e-4);
  }
}

TEST_CASE("rarer tags always weigh more") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    Template tags;
    int count_a = 1 + static_cast<int>(rng() % 5);
    int count_b = 1 + static_cast<int>(rng() % 5);
    int count_c = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < count_a; ++i) tags.push_back("A");
    for (int i = 0; i < count_b; ++i) tags.push_back("B");
    for (int i = 0; i < count_c; ++i) tags.push_back("C");
    auto bank = extract_templates({uniform_record("r", tags)});
    auto weights = compute_pos_weights(bank, 2);
    auto check_pair = [&](const char* x, int cx, const char* y, int cy) {
      if (cx < cy) CHECK(weights.at(x) > weights.at(y));
      if (cx == cy) CHECK(weights.at(x) == doctest::Approx(weights.at(y)));
    };
    check_pair("A", count_a, "B", count_b);
    check_pair("B", count_b, "C", count_c);
    check_pair("A", count_a, "C", count_c);
  }
}

TEST_CASE("diversity_score sums max weights over mismatches") {
  PosWeights weights;
  weights.line_idx = 2;
  weights.weights = {{"A", 0.065007}, {"B", 0.934993}};
  CHECK(diversity_score(weights, {"A", "B"}, {"A", "B"}) == 0.0);
  CHECK(diversity_score(weights, {"A"}, {"B"}) ==
        doctest::Approx(0.934993).epsilon(1e-9));
  PosWeights even;
  even.line_idx = 2;
  even.weights = {{"A", 0.5}, {"B", 0.5}};
  CHECK(diversity_score(even, {"A", "A"}, {"B", "B"}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(diversity_score(even, {"A"}, {"A", "B"}), ContractViolation);
}

TEST_CASE("diversity_score is a metric over equal-length templates") {
  PosWeights weights;
  weights.line_idx = 2;
  weights.weights = {{"A", 0.1}, {"B", 0.2}, {"C", 0.3}, {"D", 0.4}};
  std::vector<PosTag> alphabet = {"A", "B", "C", "D"};
  std::mt19937_64 rng(4242);
  auto random_template = [&](std::size_t length) {
    Template t;
    for (std::size_t i = 0; i < length; ++i)
      t.push_back(alphabet[rng() % alphabet.size()]);
    return t;
  };
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t length = 1 + rng() % 6;
    Template x = random_template(length);
    Template y = random_template(length);
    Template z = random_template(length);
    double xy = diversity_score(weights, x, y);
    double yx = diversity_score(weights, y, x);
    CHECK(xy == doctest::Approx(yx));
    CHECK(xy >= 0.0);
    if (x == y) CHECK(xy == 0.0);
    double xz = diversity_score(weights, x, z);
    double zy = diversity_score(weights, z, y);
    CHECK(xy <= xz + zy + 1e-12);
  }
}

TEST_CASE("restricted_to keeps one template and its id") {
  auto bank = extract_templates(
      {uniform_record("r1", {"WHO", "VBD", "NN"}),
       uniform_record("r2", {"WHO", "JJ", "NN"})});
  int keep = bank.templates(3)[0].id;
  auto single = bank.restricted_to(keep);
  CHECK(single.line_count(3) == 1);
  CHECK(single.templates(3)[0].id == keep);
  CHECK(single.viable_prefix(3, {"WHO"}));
  CHECK(single.line_count(2) == 0);
}
