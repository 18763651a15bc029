#include "limerick/search.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

namespace limerick {

namespace {

const std::vector<std::string> kNoContext;

// Deterministic tie order: score descending, then context+words ascending.
bool score_before(double score_a, const PartialLine& a, double score_b,
                  const PartialLine& b) {
  if (score_a != score_b) return score_a > score_b;
  if (a.context_words() != b.context_words())
    return a.context_words() < b.context_words();
  return a.words < b.words;
}

}  // namespace

void SearchConfig::validate() const {
  if (total_beam < 1) throw ContractViolation("total beam must be >= 1");
  if (per_template < 1) throw ContractViolation("per-template beam must be >= 1");
  if (per_template > total_beam)
    throw ContractViolation("per-template beam cannot exceed total beam");
  if (max_line_tokens < 1) throw ContractViolation("max line tokens must be >= 1");
}

const std::vector<std::string>& PartialLine::context_words() const {
  return context ? *context : kNoContext;
}

double PartialLine::mean_logprob() const {
  if (words.empty()) return 0.0;
  return sum_logprob / static_cast<double>(words.size());
}

LineScorer geometric_mean_scorer() {
  return [](const PartialLine& line) { return std::exp(line.mean_logprob()); };
}

int first_fitting_pronunciation(const Lexicon& lexicon, const MeterSpec& meter,
                                int line_idx, int offset,
                                const std::string& word) {
  if (!lexicon.contains(word)) return -1;
  const auto& prons = lexicon.lookup(word);
  for (std::size_t i = 0; i < prons.size(); ++i) {
    if (fits_meter(meter, line_idx, offset, prons[i].pattern))
      return static_cast<int>(i);
  }
  return -1;
}

TokenDistribution filter_distribution(const TokenDistribution& dist,
                                      const PartialLine& line,
                                      const MeterSpec& meter,
                                      const Lexicon& lexicon) {
  TokenDistribution filtered;
  filtered.context_len = dist.context_len;
  filtered.truncated = dist.truncated;
  filtered.support.reserve(dist.support.size());
  for (const auto& [word, p] : dist.support) {
    if (p <= 0.0) continue;
    if (word == kUnkToken) continue;
    if (first_fitting_pronunciation(lexicon, meter, line.line_idx,
                                    line.syllables_used, word) < 0)
      continue;
    filtered.support.emplace_back(word, p);
  }
  return filtered;
}

SearchBeam extend_candidates(const SearchBeam& beam, const LanguageModel& model,
                             const TemplateBank& bank, const MeterSpec& meter,
                             const Lexicon& lexicon, const Tagger& tagger,
                             const SearchConfig& config,
                             const FinalWordPolicy& final_policy) {
  config.validate();
  SearchBeam candidates;
  candidates.capacity = config.total_beam;
  if (beam.entries.empty()) return candidates;

  const int line_idx = beam.entries.front().line_idx;
  const std::size_t length = beam.entries.front().words.size();
  for (const PartialLine& entry : beam.entries) {
    if (entry.line_idx != line_idx || entry.words.size() != length)
      throw ContractViolation("beam entries must share line index and length");
  }
  const int target = meter.target(line_idx);

  std::set<std::tuple<int, std::vector<std::string>, bool>> seen;
  for (const PartialLine& entry : beam.entries) {
    std::vector<std::string> model_context = entry.context_words();
    model_context.insert(model_context.end(), entry.words.begin(),
                         entry.words.end());
    TokenDistribution dist = model.next_distribution(model_context);
    TokenDistribution filtered = filter_distribution(dist, entry, meter, lexicon);
    for (const auto& [word, p] : filtered.support) {
      auto tag = tagger.try_tag(word);
      if (!tag) continue;
      Template extended_tags = entry.tags;
      extended_tags.push_back(*tag);
      if (!bank.viable_prefix(line_idx, extended_tags)) continue;

      int pron = first_fitting_pronunciation(lexicon, meter, line_idx,
                                             entry.syllables_used, word);
      const auto& prons = lexicon.lookup(word);
      int new_syllables =
          entry.syllables_used + prons[static_cast<std::size_t>(pron)].syllables;

      bool template_done =
          bank.template_id(line_idx, extended_tags).has_value();
      bool completes = template_done && new_syllables == target;
      bool can_continue =
          new_syllables < target &&
          static_cast<int>(extended_tags.size()) < config.max_line_tokens &&
          !bank.next_tag_options(line_idx, extended_tags).empty();

      double lp = std::log(p);
      auto emit = [&](bool as_complete) {
        PartialLine next = entry;
        next.words.push_back(word);
        next.tags = extended_tags;
        next.pron_choice.push_back(pron);
        next.syllables_used = new_syllables;
        next.sum_logprob += lp;
        next.complete = as_complete;
        auto key = std::make_tuple(next.parent, next.words, as_complete);
        if (!seen.insert(key).second) return;
        candidates.entries.push_back(std::move(next));
      };

      if (completes && (!final_policy || final_policy(entry, word)))
        emit(true);
      if (can_continue) emit(false);
    }
  }
  return candidates;
}

SearchBeam mtbs_select(const SearchBeam& candidates, const PosWeights& weights,
                       const SearchConfig& config, const LineScorer& scorer_in) {
  config.validate();
  SearchBeam selected;
  selected.capacity = config.total_beam;
  if (candidates.entries.empty()) return selected;
  LineScorer scorer = scorer_in ? scorer_in : geometric_mean_scorer();

  const int n = config.per_template;
  const int total = config.total_beam;

  // Partition by (partial) template; order within a subset is by score.
  std::map<Template, std::vector<const PartialLine*>> subsets;
  std::map<const PartialLine*, double> scores;
  for (const PartialLine& entry : candidates.entries) {
    scores[&entry] = scorer(entry);
    subsets[entry.tags].push_back(&entry);
  }
  for (auto& [tags, lines] : subsets) {
    std::sort(lines.begin(), lines.end(),
              [&](const PartialLine* a, const PartialLine* b) {
                return score_before(scores[a], *a, scores[b], *b);
              });
  }

  // Aggregate score h_i: mean of the top-n scores (all, if fewer than n).
  std::map<Template, double> aggregate;
  for (const auto& [tags, lines] : subsets) {
    std::size_t take = std::min<std::size_t>(lines.size(),
                                             static_cast<std::size_t>(n));
    double sum = 0.0;
    for (std::size_t i = 0; i < take; ++i) sum += scores[lines[i]];
    aggregate[tags] = sum / static_cast<double>(take);
  }

  std::vector<Template> chosen;  // A
  std::map<Template, double> remaining = aggregate;  // B

  auto append_top_n = [&](const Template& tags) {
    const auto& lines = subsets[tags];
    std::size_t take = std::min<std::size_t>(lines.size(),
                                             static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < take; ++i)
      selected.entries.push_back(*lines[i]);
  };

  // First pick: plain argmax of h (lexicographically first template on ties).
  auto first = std::max_element(
      remaining.begin(), remaining.end(), [](const auto& a, const auto& b) {
        return a.second < b.second;  // map order breaks ties toward a smaller key
      });
  Template current = first->first;
  append_top_n(current);
  remaining.erase(current);
  chosen.push_back(current);

  while (static_cast<int>(selected.entries.size()) <= total - n &&
         !remaining.empty()) {
    Template best;
    double best_score = -1.0;
    for (const auto& [tags, h] : remaining) {
      double diversity = 0.0;
      for (const Template& prior : chosen)
        diversity += diversity_score(weights, tags, prior);
      double combined = h * diversity;
      if (combined > best_score) {
        best_score = combined;
        best = tags;
      }
    }
    append_top_n(best);
    remaining.erase(best);
    chosen.push_back(best);
  }
  return selected;
}

SearchBeam candidate_rank_select(const SearchBeam& candidates,
                                 const SearchConfig& config,
                                 const LineScorer& scorer_in) {
  config.validate();
  SearchBeam selected;
  selected.capacity = config.total_beam;
  if (candidates.entries.empty()) return selected;
  LineScorer scorer = scorer_in ? scorer_in : geometric_mean_scorer();

  std::vector<std::pair<double, const PartialLine*>> ranked;
  ranked.reserve(candidates.entries.size());
  for (const PartialLine& entry : candidates.entries)
    ranked.emplace_back(scorer(entry), &entry);
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) {
              return score_before(a.first, *a.second, b.first, *b.second);
            });
  std::size_t take = std::min<std::size_t>(
      ranked.size(), static_cast<std::size_t>(config.total_beam));
  for (std::size_t i = 0; i < take; ++i)
    selected.entries.push_back(*ranked[i].second);
  return selected;
}

}  // namespace limerick
