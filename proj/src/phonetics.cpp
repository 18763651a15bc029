#include "limerick/phonetics.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <sstream>

namespace limerick {

namespace {

const std::set<std::string>& vowel_phonemes() {
  static const std::set<std::string> vowels = {
      "AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER",
      "EY", "IH", "IY", "OW", "OY", "UH", "UW"};
  return vowels;
}

const std::set<std::string>& consonant_phonemes() {
  static const std::set<std::string> consonants = {
      "B", "CH", "D", "DH", "F", "G", "HH", "JH", "K", "L",  "M", "N",
      "NG", "P", "R", "S", "SH", "T", "TH", "V", "W", "Y", "Z", "ZH"};
  return consonants;
}

// Suffix from the last vowel carrying stress digit 1 or 2 (falling back to
// the last vowel), digits stripped. Two words rhyme when they share one.
std::string make_rhyme_key(const std::vector<std::string>& phonemes,
                           const std::vector<int>& vowel_indexes,
                           const std::vector<int>& stresses) {
  int start = -1;
  for (std::size_t i = 0; i < vowel_indexes.size(); ++i) {
    if (stresses[i] == 1 || stresses[i] == 2) start = vowel_indexes[i];
  }
  if (start < 0 && !vowel_indexes.empty()) start = vowel_indexes.back();
  if (start < 0) start = 0;
  std::string key;
  for (std::size_t i = static_cast<std::size_t>(start); i < phonemes.size();
       ++i) {
    if (!key.empty()) key += ' ';
    key += phonemes[i];
  }
  return key;
}

StressPattern make_pattern(const std::vector<int>& stresses) {
  if (stresses.size() == 1) return {Stress::Flexible};
  StressPattern pattern;
  pattern.reserve(stresses.size());
  for (int digit : stresses) {
    switch (digit) {
      case 1: pattern.push_back(Stress::Stressed); break;
      case 2: pattern.push_back(Stress::Flexible); break;
      default: pattern.push_back(Stress::Unstressed); break;
    }
  }
  return pattern;
}

// Parse "D AO1 G" into a Pronunciation; nullopt on any bad symbol or a
// vowel-less entry.
std::optional<Pronunciation> parse_phonemes(std::istringstream& in) {
  Pronunciation pron;
  std::vector<int> vowel_indexes;
  std::string token;
  while (in >> token) {
    char last = token.back();
    if (last >= '0' && last <= '2') {
      std::string base = token.substr(0, token.size() - 1);
      if (!vowel_phonemes().count(base)) return std::nullopt;
      vowel_indexes.push_back(static_cast<int>(pron.phonemes.size()));
      pron.stresses.push_back(last - '0');
      pron.phonemes.push_back(base);
    } else {
      if (!consonant_phonemes().count(token)) return std::nullopt;
      pron.phonemes.push_back(token);
    }
  }
  if (pron.stresses.empty()) return std::nullopt;
  pron.syllables = static_cast<int>(pron.stresses.size());
  pron.pattern = make_pattern(pron.stresses);
  pron.rhyme_key = make_rhyme_key(pron.phonemes, vowel_indexes, pron.stresses);
  return pron;
}

std::pair<std::string, std::string> override_key(const std::string& w1,
                                                 const std::string& w2) {
  std::string a = case_fold(w1);
  std::string b = case_fold(w2);
  if (b < a) std::swap(a, b);
  return {a, b};
}

}  // namespace

std::string case_fold(const std::string& word) {
  std::string folded = word;
  std::transform(folded.begin(), folded.end(), folded.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return folded;
}

void Lexicon::add_entry(const std::string& word, Pronunciation pron) {
  entries_[case_fold(word)].push_back(std::move(pron));
}

void Lexicon::set_override(const std::string& w1, const std::string& w2,
                           bool rhyme) {
  rhyme_overrides_[override_key(w1, w2)] = rhyme;
}

bool Lexicon::contains(const std::string& word) const {
  return entries_.count(case_fold(word)) > 0;
}

const std::vector<Pronunciation>& Lexicon::lookup(
    const std::string& word) const {
  auto it = entries_.find(case_fold(word));
  if (it == entries_.end()) throw AbsentWordError(word);
  return it->second;
}

std::set<int> Lexicon::syllable_counts(const std::string& word) const {
  std::set<int> counts;
  for (const Pronunciation& pron : lookup(word)) counts.insert(pron.syllables);
  return counts;
}

std::vector<StressPattern> Lexicon::stress_patterns(
    const std::string& word) const {
  std::vector<StressPattern> patterns;
  for (const Pronunciation& pron : lookup(word)) patterns.push_back(pron.pattern);
  return patterns;
}

bool Lexicon::rhymes(const std::string& w1, const std::string& w2) const {
  std::string a = case_fold(w1);
  std::string b = case_fold(w2);
  auto override_it = rhyme_overrides_.find(override_key(a, b));
  if (override_it != rhyme_overrides_.end()) return override_it->second;
  if (a == b) return false;
  const auto& prons_a = lookup(a);
  const auto& prons_b = lookup(b);
  for (const Pronunciation& pa : prons_a)
    for (const Pronunciation& pb : prons_b)
      if (pa.rhyme_key == pb.rhyme_key) return true;
  return false;
}

Lexicon load_lexicon(std::istream& source, LexiconLoadReport* report) {
  if (!source.good()) throw LoadError("pronunciation dictionary unreadable");
  Lexicon lexicon;
  LexiconLoadReport local;
  std::string line;
  while (std::getline(source, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind(";;;", 0) == 0) continue;
    std::istringstream in(line);
    std::string word;
    in >> word;
    // Variant entries look like WORD(1); the suffix is dropped.
    auto paren = word.find('(');
    if (paren != std::string::npos) {
      bool ok = word.size() >= paren + 3 && word.back() == ')' &&
                std::all_of(word.begin() + paren + 1, word.end() - 1,
                            [](unsigned char c) { return std::isdigit(c); });
      if (!ok || paren == 0) {
        local.malformed.push_back(line);
        continue;
      }
      word = word.substr(0, paren);
    }
    auto pron = parse_phonemes(in);
    if (!pron) {
      local.malformed.push_back(line);
      continue;
    }
    lexicon.add_entry(word, std::move(*pron));
    ++local.entry_count;
  }
  local.word_count = lexicon.size();
  if (report) *report = local;
  if (local.entry_count == 0) throw LoadError("no entries in dictionary");
  return lexicon;
}

Lexicon load_lexicon_file(const std::string& path, LexiconLoadReport* report) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open dictionary: " + path);
  return load_lexicon(in, report);
}

void load_rhyme_overrides(std::istream& source, Lexicon& lexicon) {
  if (!source.good()) throw LoadError("rhyme override stream unreadable");
  std::string line;
  while (std::getline(source, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream in(line);
    std::string w1, w2, value;
    if (!std::getline(in, w1, ',') || !std::getline(in, w2, ',') ||
        !std::getline(in, value)) {
      throw LoadError("bad rhyme override line: " + line);
    }
    if (value != "true" && value != "false")
      throw LoadError("bad rhyme override value: " + line);
    lexicon.set_override(w1, w2, value == "true");
  }
}

void load_rhyme_overrides_file(const std::string& path, Lexicon& lexicon) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open rhyme overrides: " + path);
  load_rhyme_overrides(in, lexicon);
}

int MeterSpec::target(int line_idx) const {
  if (line_idx < 1 || line_idx > 5)
    throw ContractViolation("line index out of range");
  return line_syllables[line_idx - 1];
}

bool MeterSpec::must_stress(int line_idx, int position) const {
  if (line_idx < 1 || line_idx > 5)
    throw ContractViolation("line index out of range");
  const auto& positions = stressed_positions[line_idx - 1];
  return std::find(positions.begin(), positions.end(), position) !=
         positions.end();
}

MeterSpec limerick_meter() { return MeterSpec{}; }

bool fits_meter(const MeterSpec& meter, int line_idx, int offset,
                const StressPattern& pattern) {
  if (offset < 0) throw ContractViolation("negative syllable offset");
  if (pattern.empty()) throw ContractViolation("empty stress pattern");
  int target = meter.target(line_idx);
  if (offset + static_cast<int>(pattern.size()) > target) return false;
  for (std::size_t k = 0; k < pattern.size(); ++k) {
    if (pattern[k] == Stress::Flexible) continue;
    bool need_stress = meter.must_stress(line_idx, offset + static_cast<int>(k) + 1);
    if (need_stress && pattern[k] != Stress::Stressed) return false;
    if (!need_stress && pattern[k] != Stress::Unstressed) return false;
  }
  return true;
}

}  // namespace limerick
