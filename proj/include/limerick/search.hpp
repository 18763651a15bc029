#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "limerick/langmodel.hpp"
#include "limerick/phonetics.hpp"
#include "limerick/templates.hpp"

namespace limerick {

/// Beam-search knobs. Defaults follow the reference configuration: total
/// beam 360, per-template beam 12.
struct SearchConfig {
  int total_beam = 360;     // N
  int per_template = 12;    // n
  std::uint64_t rng_seed = 0;
  int max_line_tokens = 12;

  void validate() const;
};

/// An in-progress line. Tags stay aligned with words, and the tag sequence
/// is a viable prefix of some bank template at all times (AMTC). The
/// conditioning context (words of earlier lines) is shared between siblings.
struct PartialLine {
  std::vector<std::string> words;
  Template tags;
  std::vector<int> pron_choice;  // index into the lexicon entry per word
  int syllables_used = 0;
  double sum_logprob = 0.0;
  int line_idx = 0;
  int parent = 0;      // index into the owning poem set
  bool complete = false;
  int sample_attempts = 0;  // storyline draws spent on the final word
  std::shared_ptr<const std::vector<std::string>> context;

  const std::vector<std::string>& context_words() const;
  /// Mean log-probability per token; 0 for an empty line.
  double mean_logprob() const;
};

struct SearchBeam {
  std::vector<PartialLine> entries;
  int capacity = 0;
};

/// Scorer used to rank lines during selection. The default is
/// exp(mean log-probability), the geometric-mean token probability, which is
/// positive so multiplying by diversity sums keeps the intended order.
using LineScorer = std::function<double(const PartialLine&)>;
LineScorer geometric_mean_scorer();

/// Called for words whose extension would complete the line; returning false
/// rejects the completion (the partial-continuation path is unaffected).
using FinalWordPolicy =
    std::function<bool(const PartialLine&, const std::string&)>;

/// Filter F: zero the mass of words that cannot sit at the line's current
/// syllable offset (no pronunciation fits the meter). Surviving
/// probabilities are preserved unnormalized; use renormalized() to sample.
/// The reserved UNK token and words outside the lexicon never survive.
TokenDistribution filter_distribution(const TokenDistribution& dist,
                                      const PartialLine& line,
                                      const MeterSpec& meter,
                                      const Lexicon& lexicon);

/// First pronunciation of `word` that fits at `offset`, or -1.
int first_fitting_pronunciation(const Lexicon& lexicon, const MeterSpec& meter,
                                int line_idx, int offset,
                                const std::string& word);

/// One step of candidate expansion: query the model per entry, filter for
/// meter, keep only AMTC-viable tag extensions, and flag completions
/// (template match with the exact syllable target). Entries must share
/// line_idx and length.
SearchBeam extend_candidates(const SearchBeam& beam, const LanguageModel& model,
                             const TemplateBank& bank, const MeterSpec& meter,
                             const Lexicon& lexicon, const Tagger& tagger,
                             const SearchConfig& config,
                             const FinalWordPolicy& final_policy = {});

/// Multi-templated selection: partition candidates by (partial) template,
/// aggregate each subset by the mean of its top-n scores, pick the best
/// subset first, then repeatedly pick the subset maximizing
/// h_i * sum of diversity scores to already-chosen templates, appending each
/// winner's top-n lines, stopping before the beam exceeds N.
SearchBeam mtbs_select(const SearchBeam& candidates, const PosWeights& weights,
                       const SearchConfig& config,
                       const LineScorer& scorer = {});

/// Baseline selection: global top-N by per-token mean score; ties break
/// lexicographically by words.
SearchBeam candidate_rank_select(const SearchBeam& candidates,
                                 const SearchConfig& config,
                                 const LineScorer& scorer = {});

}  // namespace limerick
