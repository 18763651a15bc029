#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "limerick/generator.hpp"
#include "limerick/phonetics.hpp"
#include "limerick/templates.hpp"

namespace limerick {

/// Per-check verdicts for one poem. Strict checks cover the AABBA rhyme
/// scheme and lines 2-5; line-1 syllable/meter results are advisory only.
struct ValidationReport {
  bool rhyme_scheme = false;
  std::array<bool, 5> syllables{};   // per line; [0] advisory
  std::array<bool, 5> meter{};       // per line; [0] advisory
  std::array<bool, 5> template_membership{};  // [0] unused (line 1 untemplated)
  bool hard_pass = false;
  std::vector<std::string> notes;
};

/// Validate against hard constraints. Reports, never throws: missing words
/// or tags fail the corresponding check with a note.
ValidationReport validate_limerick(const Limerick& poem, const Lexicon& lexicon,
                                   const MeterSpec& meter,
                                   const TemplateBank& bank,
                                   const Tagger& tagger);

std::string to_json_report(const ValidationReport& report);

struct PopularityNotes {
  std::size_t skipped_lines = 0;  // shorter than n
};

/// Mean, over every n-gram occurrence in the line set, of that n-gram's
/// total occurrence count in the set. 1.0 means no repetition at all.
/// Undefined (throws) when no line has n tokens.
double ngram_mean_popularity(const std::vector<std::string>& lines, int n,
                             PopularityNotes* notes = nullptr);

/// Cardinality of the union of template ids across all lines of all poems.
int distinct_template_count(const std::vector<Limerick>& poems);

struct DiversityReport {
  int n = 0;
  std::string run;
  double mean_popularity = 0.0;  // >= 1 when defined
  int distinct_templates = 0;
  int sample_size = 0;
  bool defined = true;
  std::string note;
};

/// Fig-4-style comparison: per n, the mean popularity of seeded 50-line
/// samples of 5th lines per run, plus distinct-template counts.
std::vector<DiversityReport> compare_runs(const std::vector<Limerick>& run_a,
                                          const std::vector<Limerick>& run_b,
                                          const std::vector<int>& n_values,
                                          int sample_size = 50,
                                          std::uint64_t seed = 0,
                                          const std::string& label_a = "a",
                                          const std::string& label_b = "b");

/// CSV with header "n,run,mean_popularity,distinct_templates,sample_size".
void write_comparison_csv(const std::vector<DiversityReport>& rows,
                          std::ostream& out);

}  // namespace limerick
