#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "limerick/langmodel.hpp"
#include "limerick/phonetics.hpp"
#include "limerick/search.hpp"
#include "limerick/storyline.hpp"
#include "limerick/templates.hpp"

namespace limerick {

/// Canonical first-line pattern: literal words plus <TAG> slots, ending in a
/// <NAME> slot (e.g. "there was a <JJ> <NN> named <NAME>").
struct FirstLinePattern {
  std::vector<std::string> tokens;

  static bool is_slot(const std::string& token);
  static std::string slot_tag(const std::string& token);
};

std::vector<FirstLinePattern> load_patterns(std::istream& source);
std::vector<FirstLinePattern> load_patterns_file(const std::string& path);

enum class Mode { Full, NoStory, SingleTemplate, CandidateRank };

Mode parse_mode(const std::string& text);
const char* mode_name(Mode mode);

/// Everything generation reads; all referenced objects outlive the request
/// and are never mutated.
struct GenerationResources {
  const Lexicon* lexicon = nullptr;
  const TemplateBank* bank = nullptr;
  const MeterSpec* meter = nullptr;
  const Tagger* tagger = nullptr;
  const LanguageModel* model = nullptr;
  const EmbeddingSpace* embeddings = nullptr;
  const NameLexicon* names = nullptr;
  const std::vector<FirstLinePattern>* patterns = nullptr;

  void validate() const;
};

struct GenerationRequest {
  std::string prompt;
  Mode mode = Mode::Full;
  SearchConfig search;
  bool include_line1_in_score = false;
  int max_sample_attempts = 64;
};

/// A poem under construction: completed lines so far plus the storyline
/// assignments that produced their final words.
struct PartialPoem {
  std::vector<std::vector<std::string>> lines;
  std::vector<std::vector<int>> pron_choices;
  Storyline storyline;
  std::vector<int> template_ids;  // per completed templated line (2..5)
  double sum_logprob = 0.0;       // over scored tokens (lines 2..5 by default)
  int token_count = 0;
  int attempts = 0;               // storyline sampling attempts, accumulated
  std::string placeholder_name;
  int name_offset = 0;            // syllables before the name slot in line 1

  double score() const;
  std::vector<std::string> flattened() const;
};

struct Limerick {
  std::array<std::vector<std::string>, 5> lines;
  Storyline storyline;
  double score = 0.0;
  std::vector<int> template_ids;
  int attempts = 0;
  std::string prompt;
  Mode mode = Mode::Full;
  std::uint64_t seed = 0;

  std::string line_text(int line_idx) const;
};

/// Instantiate one first-line pattern: literal words kept, slots filled from
/// the model subject to meter, and a placeholder name at the end. Line 1 is
/// checked leniently: stress positions hold but the line may run short.
PartialPoem make_first_line(const GenerationResources& resources,
                            const GenerationRequest& request);

/// Extend every poem by one line via filtered, template-constrained beam
/// search. Final words come from the storyline conditional except in
/// no-story mode, where the model proposes them under the rhyme constraint.
std::vector<PartialPoem> generate_line(const std::vector<PartialPoem>& poems,
                                       int line_idx,
                                       const GenerationRequest& request,
                                       const GenerationResources& resources);

/// Full pipeline: first line, lines 2-5, y1 substitution, ranked output.
/// Throws GenerationError when nothing survives.
std::vector<Limerick> generate_limericks(const GenerationRequest& request,
                                         const GenerationResources& resources);

/// The machine-readable output record for one poem.
std::string to_json_record(const Limerick& poem);

}  // namespace limerick
