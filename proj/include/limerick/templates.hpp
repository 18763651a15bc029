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

/// POS tags are plain symbols: Penn-Treebank-style categories plus literal
/// closed-class tokens lifted to their own tags (WHO, A, THE, ...).
using PosTag = std::string;
using Template = std::vector<PosTag>;

/// Word -> tag resolution backed by a tag lexicon file plus a literal list.
class Tagger {
 public:
  void add_word(const std::string& word, const PosTag& tag);
  void add_literal(const std::string& word);

  /// Literal words map to their uppercased selves; everything else goes
  /// through the tag lexicon. Unresolvable words raise TaggingError.
  PosTag tag(const std::string& word) const;
  std::optional<PosTag> try_tag(const std::string& word) const;
  std::vector<PosTag> tag_words(const std::vector<std::string>& words) const;

  bool known(const std::string& word) const;
  std::set<PosTag> inventory() const;

 private:
  std::map<std::string, PosTag> lexicon_tags_;
  std::set<std::string> literals_;
};

Tagger load_tagger(std::istream& tag_lexicon, std::istream& literals);
Tagger load_tagger_files(const std::string& tag_lexicon_path,
                         const std::string& literals_path);

/// One tagged word of a corpus record.
struct TaggedWord {
  std::string word;
  PosTag tag;
};

/// One pre-tagged limerick: exactly five lines of word/tag pairs.
struct TaggedRecord {
  std::string id;
  std::vector<std::vector<TaggedWord>> lines;
};

/// Parse the JSON-lines corpus format {id, lines: [[{word, tag}, ...] x5]}.
std::vector<TaggedRecord> load_corpus(std::istream& source);
std::vector<TaggedRecord> load_corpus_file(const std::string& path);

struct LineTemplate {
  int line_idx = 0;  // 2..5
  Template tags;
  std::string source_id;
  int id = -1;  // unique across the whole bank
};

struct ExtractionReport {
  std::map<int, std::size_t> templates_per_line;
};

/// Options a prefix can be extended with, per next tag.
struct NextTagOption {
  PosTag tag;
  bool completes = false;  // prefix + tag equals a stored template
  bool continues = false;  // prefix + tag is a proper prefix of one
};

/// Deduplicated per-line template sets with prefix lookup; immutable after
/// construction. The prefix index is a per-line trie over tag sequences.
class TemplateBank {
 public:
  /// True iff some stored template for line_idx begins with exactly `partial`
  /// (every template is a viable prefix of itself; the empty prefix is viable
  /// whenever the line has templates).
  bool viable_prefix(int line_idx, const Template& partial) const;

  /// Tags that can legally follow `partial`, with completion/continuation
  /// flags. Sorted by tag for deterministic iteration.
  std::vector<NextTagOption> next_tag_options(int line_idx,
                                              const Template& partial) const;

  /// Bank id of the template exactly equal to `tags`, if stored.
  std::optional<int> template_id(int line_idx, const Template& tags) const;

  const std::vector<LineTemplate>& templates(int line_idx) const;
  std::size_t line_count(int line_idx) const;
  const LineTemplate& by_id(int id) const;
  std::size_t total() const { return all_.size(); }

  /// A bank holding only the given template (keeps its id); used by the
  /// single-template ablation.
  TemplateBank restricted_to(int id) const;

  void add_template(int line_idx, const Template& tags,
                    const std::string& source_id);

  bool operator==(const TemplateBank& other) const;

 private:
  struct TrieNode {
    std::map<PosTag, int> children;
    bool terminal = false;
  };
  struct LineIndex {
    std::vector<TrieNode> nodes{TrieNode{}};
    std::vector<LineTemplate> templates;
    std::map<Template, int> ids;
  };

  const LineIndex& line(int line_idx) const;
  LineIndex& line_mutable(int line_idx);
  const TrieNode* walk(int line_idx, const Template& partial) const;

  std::array<LineIndex, 4> lines_;  // lines 2..5
  std::vector<LineTemplate> all_;   // by bank id
};

/// Build the bank from a tagged corpus (lines 2..5 of each record).
/// Records without exactly five lines raise LoadError naming the record.
TemplateBank extract_templates(const std::vector<TaggedRecord>& corpus,
                               ExtractionReport* report = nullptr);

/// JSON persistence for extracted banks.
void save_bank(const TemplateBank& bank, std::ostream& out);
TemplateBank load_bank(std::istream& in);
TemplateBank load_bank_file(const std::string& path);

/// Definition-style POS weights for one line position: softmax over inverse
/// occurrence shares, so rarer tags weigh more.
struct PosWeights {
  int line_idx = 0;
  std::map<PosTag, double> weights;

  double at(const PosTag& tag) const;
};

/// Occurrence shares count every position of every deduplicated template for
/// the line. Empty template set is a contract violation.
PosWeights compute_pos_weights(const TemplateBank& bank, int line_idx);

/// Weighted hamming distance between equal-length templates: sum over
/// mismatch positions of max(w(tag1), w(tag2)).
double diversity_score(const PosWeights& weights, const Template& t1,
                       const Template& t2);

}  // namespace limerick
