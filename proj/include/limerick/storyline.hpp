#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "limerick/errors.hpp"
#include "limerick/langmodel.hpp"
#include "limerick/phonetics.hpp"

namespace limerick {

/// Fixed-dimension word vectors; immutable after load.
class EmbeddingSpace {
 public:
  int dimension() const { return dimension_; }
  bool contains(const std::string& word) const;
  const std::vector<float>& vector_of(const std::string& word) const;
  const std::map<std::string, std::vector<float>>& vectors() const {
    return vectors_;
  }

  void add(const std::string& word, std::vector<float> vec);

 private:
  int dimension_ = 0;
  std::map<std::string, std::vector<float>> vectors_;
};

struct EmbeddingLoadReport {
  std::size_t loaded = 0;
  std::vector<std::string> rejected;  // zero vectors, dimension mismatches
};

/// Text word-vector format: optional "count dim" header, then
/// "word v1 ... vd" rows. Zero vectors are rejected and reported.
EmbeddingSpace load_embeddings(std::istream& source,
                               EmbeddingLoadReport* report = nullptr);
EmbeddingSpace load_embeddings_file(const std::string& path,
                                    EmbeddingLoadReport* report = nullptr);

/// Cosine similarity mapped to [0,1] via (cos+1)/2, so it can serve as an
/// unnormalized probability mass.
double similarity(const EmbeddingSpace& space, const std::string& w1,
                  const std::string& w2);

/// Person names usable as y1. Names without a lexicon pronunciation are
/// excluded at load and reported.
class NameLexicon {
 public:
  bool contains(const std::string& word) const;
  const std::vector<std::string>& names() const { return names_; }
  std::optional<char> gender(const std::string& name) const;

  void add(const std::string& name, std::optional<char> gender);

 private:
  std::vector<std::string> names_;  // sorted, case-folded
  std::set<std::string> set_;
  std::map<std::string, char> genders_;
};

struct NameLoadReport {
  std::vector<std::string> excluded;  // names lacking pronunciations
};

/// Names file: one name per line, optional ",F|M" suffix.
NameLexicon load_names(std::istream& source, const Lexicon& lexicon,
                       NameLoadReport* report = nullptr);
NameLexicon load_names_file(const std::string& path, const Lexicon& lexicon,
                            NameLoadReport* report = nullptr);

/// The line-final word tuple for a prompt.
struct Storyline {
  std::string prompt;                      // y0
  std::array<std::string, 5> finals;       // y1..y5
  std::array<std::string, 5> provenance;   // which conditional produced each

  const std::string& y(int i) const { return finals[static_cast<std::size_t>(i - 1)]; }
  std::string& y(int i) { return finals[static_cast<std::size_t>(i - 1)]; }
};

enum class StorylineSlot { Y2, Y3, Y4, Y5, Y1 };

const char* slot_name(StorylineSlot slot);

/// Conditional distribution of one storyline word.
///   y2, y3:  mass = Sim(w, y0)
///   y4:      mass = rhymes(w, y3) * (Sim(w,y0) + Sim(w,y2) + Sim(w,y3))
///   y5:      mass = rhymes(w, y2) * (Sim(w,y0) + Sim(w,y2) + Sim(w,y3))
///   y1:      mass = rhymes(w, y5) * is_name(w), uniform over qualifiers
/// Support is the intersection of lexicon and embedding space (names for
/// y1), minus `exclude`. Empty support raises EmptySupportError.
TokenDistribution storyline_conditional(
    StorylineSlot slot, const Storyline& partial, const Lexicon& lexicon,
    const EmbeddingSpace& space, const NameLexicon& names,
    const std::set<std::string>& exclude = {});

using WordPredicate = std::function<bool(const std::string&)>;

struct SampleResult {
  std::string word;
  int attempts = 0;
};

/// Repeatedly sample from `dist` (seeded, deterministic) until `accept`
/// passes, up to max_attempts; nullopt on exhaustion. The caller prunes.
std::optional<SampleResult> sample_word_constrained(
    const TokenDistribution& dist, const WordPredicate& accept,
    int max_attempts, std::uint64_t rng_seed);

/// Deterministic stand-in for sampling: highest-mass accepted word.
std::optional<SampleResult> argmax_word_constrained(
    const TokenDistribution& dist, const WordPredicate& accept);

/// Sample a full storyline in the order y2, y3, y4, y5, y1, retrying the
/// whole tuple when a conditional dead-ends. Exact duplicates within a
/// storyline are forbidden, and y1 must rhyme with y2 as well as y5 so the
/// rhyme triple holds even for words with several pronunciations.
std::optional<Storyline> sample_storyline(const std::string& prompt,
                                          const Lexicon& lexicon,
                                          const EmbeddingSpace& space,
                                          const NameLexicon& names,
                                          std::uint64_t rng_seed,
                                          int max_tuple_attempts = 32,
                                          int max_word_attempts = 64);

/// splitmix64 over the accumulated state; used to derive stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace limerick
