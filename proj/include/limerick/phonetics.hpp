#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "limerick/errors.hpp"

namespace limerick {

/// Stress requirement/capability of one syllable.
enum class Stress { Unstressed, Stressed, Flexible };

using StressPattern = std::vector<Stress>;

/// One dictionary pronunciation: ARPAbet phonemes plus the stress digits
/// carried by its vowels. `syllables` always equals `stresses.size()`.
struct Pronunciation {
  std::vector<std::string> phonemes;  // digits stripped
  std::vector<int> stresses;          // 0/1/2 per vowel, in order
  int syllables = 0;
  StressPattern pattern;              // derived; monosyllables are flexible
  std::string rhyme_key;              // phoneme suffix from last stressed vowel
};

struct LexiconLoadReport {
  std::size_t entry_count = 0;  // pronunciations stored
  std::size_t word_count = 0;
  std::vector<std::string> malformed;  // offending input lines, verbatim
};

/// Case-insensitive pronunciation lexicon. Immutable once loaded.
class Lexicon {
 public:
  bool contains(const std::string& word) const;
  const std::vector<Pronunciation>& lookup(const std::string& word) const;

  /// One syllable count per distinct pronunciation.
  std::set<int> syllable_counts(const std::string& word) const;

  /// One stress pattern per pronunciation; digit 1 -> stressed,
  /// 0 -> unstressed, 2 -> flexible, any monosyllable -> [flexible].
  std::vector<StressPattern> stress_patterns(const std::string& word) const;

  /// True iff some pronunciation pair shares a phoneme suffix from the last
  /// stressed vowel onward and the case-folded words differ. Overrides win.
  bool rhymes(const std::string& w1, const std::string& w2) const;

  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, std::vector<Pronunciation>>& entries() const {
    return entries_;
  }

  void add_entry(const std::string& word, Pronunciation pron);
  void set_override(const std::string& w1, const std::string& w2, bool rhyme);

 private:
  std::map<std::string, std::vector<Pronunciation>> entries_;
  std::map<std::pair<std::string, std::string>, bool> rhyme_overrides_;
};

/// Parse a pronunciation dictionary ("WORD  PH1 PH2 ...", variants suffixed
/// "(n)", comments ";;;"). Malformed lines land in the report; zero valid
/// entries is a LoadError.
Lexicon load_lexicon(std::istream& source, LexiconLoadReport* report = nullptr);
Lexicon load_lexicon_file(const std::string& path,
                          LexiconLoadReport* report = nullptr);

/// Load "word1,word2,true|false" rhyme curation lines into an existing lexicon.
void load_rhyme_overrides(std::istream& source, Lexicon& lexicon);
void load_rhyme_overrides_file(const std::string& path, Lexicon& lexicon);

/// Syllable targets and must-stress positions for the five lines.
struct MeterSpec {
  std::array<int, 5> line_syllables{9, 9, 6, 6, 9};
  std::array<std::vector<int>, 5> stressed_positions{
      std::vector<int>{3, 6, 9}, {3, 6, 9}, {3, 6}, {3, 6}, {3, 6, 9}};

  int target(int line_idx) const;                   // line_idx in 1..5
  bool must_stress(int line_idx, int position) const;  // 1-based position
};

MeterSpec limerick_meter();

/// True iff `pattern` can occupy syllables offset+1 .. offset+len of the line
/// without overflowing it, with stressed syllables exactly where required.
bool fits_meter(const MeterSpec& meter, int line_idx, int offset,
                const StressPattern& pattern);

std::string case_fold(const std::string& word);

}  // namespace limerick
