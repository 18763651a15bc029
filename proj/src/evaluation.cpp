#include "limerick/evaluation.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "limerick/storyline.hpp"

namespace limerick {

using nlohmann::json;

namespace {

// Can some pronunciation assignment give the line exactly `target` syllables?
bool syllables_reachable(const Lexicon& lexicon,
                         const std::vector<std::string>& words, int target) {
  std::set<int> reachable = {0};
  for (const std::string& word : words) {
    if (!lexicon.contains(word)) return false;
    std::set<int> next;
    for (int base : reachable)
      for (int count : lexicon.syllable_counts(word))
        if (base + count <= target) next.insert(base + count);
    if (next.empty()) return false;
    reachable = std::move(next);
  }
  return reachable.count(target) > 0;
}

// Can some pronunciation assignment both land on exactly `target` syllables
// and respect every must-stress position along the way?
bool meter_reachable(const Lexicon& lexicon, const MeterSpec& meter,
                     int line_idx, const std::vector<std::string>& words,
                     int target) {
  std::set<int> offsets = {0};
  for (const std::string& word : words) {
    if (!lexicon.contains(word)) return false;
    std::set<int> next;
    for (int offset : offsets) {
      for (const Pronunciation& pron : lexicon.lookup(word)) {
        if (offset + pron.syllables > target) continue;
        if (!fits_meter(meter, line_idx, offset, pron.pattern)) continue;
        next.insert(offset + pron.syllables);
      }
    }
    if (next.empty()) return false;
    offsets = std::move(next);
  }
  return offsets.count(target) > 0;
}

bool safe_rhymes(const Lexicon& lexicon, const std::string& a,
                 const std::string& b, std::vector<std::string>& notes) {
  try {
    return lexicon.rhymes(a, b);
  } catch (const AbsentWordError& e) {
    notes.push_back("rhyme check skipped, unknown word: " + e.word);
    return false;
  }
}

}  // namespace

ValidationReport validate_limerick(const Limerick& poem, const Lexicon& lexicon,
                                   const MeterSpec& meter,
                                   const TemplateBank& bank,
                                   const Tagger& tagger) {
  ValidationReport report;

  std::array<std::string, 5> finals;
  bool words_present = true;
  for (int i = 0; i < 5; ++i) {
    const auto& line = poem.lines[static_cast<std::size_t>(i)];
    if (line.empty()) {
      report.notes.push_back("line " + std::to_string(i + 1) + " is empty");
      words_present = false;
    } else {
      finals[static_cast<std::size_t>(i)] = line.back();
    }
  }

  if (words_present) {
    bool a1 = safe_rhymes(lexicon, finals[0], finals[1], report.notes);
    bool a2 = safe_rhymes(lexicon, finals[1], finals[4], report.notes);
    bool a3 = safe_rhymes(lexicon, finals[0], finals[4], report.notes);
    bool b1 = safe_rhymes(lexicon, finals[2], finals[3], report.notes);
    report.rhyme_scheme = a1 && a2 && a3 && b1;
  }

  for (int line_idx = 1; line_idx <= 5; ++line_idx) {
    const auto& words = poem.lines[static_cast<std::size_t>(line_idx - 1)];
    int target = meter.target(line_idx);
    bool syll = false, fit = false;
    if (!words.empty()) {
      if (line_idx == 1) {
        // Advisory: line 1 may run short, but must not overflow or misplace
        // stress where it does fill syllables.
        for (int lenient_target = 1; lenient_target <= target;
             ++lenient_target) {
          if (syllables_reachable(lexicon, words, lenient_target)) syll = true;
          if (meter_reachable(lexicon, meter, line_idx, words, lenient_target))
            fit = true;
        }
      } else {
        syll = syllables_reachable(lexicon, words, target);
        fit = meter_reachable(lexicon, meter, line_idx, words, target);
      }
    }
    report.syllables[static_cast<std::size_t>(line_idx - 1)] = syll;
    report.meter[static_cast<std::size_t>(line_idx - 1)] = fit;

    if (line_idx >= 2) {
      bool member = false;
      try {
        Template tags = tagger.tag_words(words);
        member = bank.template_id(line_idx, tags).has_value();
      } catch (const TaggingError& e) {
        report.notes.push_back("line " + std::to_string(line_idx) +
                               " untaggable word: " + e.word);
      }
      report.template_membership[static_cast<std::size_t>(line_idx - 1)] =
          member;
    }
  }

  report.hard_pass = report.rhyme_scheme;
  for (int line_idx = 2; line_idx <= 5; ++line_idx) {
    std::size_t i = static_cast<std::size_t>(line_idx - 1);
    report.hard_pass = report.hard_pass && report.syllables[i] &&
                       report.meter[i] && report.template_membership[i];
  }
  return report;
}

std::string to_json_report(const ValidationReport& report) {
  json out;
  out["rhyme_scheme"] = report.rhyme_scheme;
  out["syllables"] = report.syllables;
  out["meter"] = report.meter;
  json membership = json::array();
  for (int line_idx = 2; line_idx <= 5; ++line_idx)
    membership.push_back(
        report.template_membership[static_cast<std::size_t>(line_idx - 1)]);
  out["template_membership"] = membership;
  out["hard_pass"] = report.hard_pass;
  out["notes"] = report.notes;
  return out.dump();
}

double ngram_mean_popularity(const std::vector<std::string>& lines, int n,
                             PopularityNotes* notes) {
  if (n < 1) throw ContractViolation("ngram order must be >= 1");
  std::map<std::vector<std::string>, long long> counts;
  long long occurrences = 0;
  std::size_t skipped = 0;
  for (const std::string& line : lines) {
    std::istringstream in(line);
    std::vector<std::string> tokens;
    std::string token;
    while (in >> token) tokens.push_back(token);
    if (static_cast<int>(tokens.size()) < n) {
      ++skipped;
      continue;
    }
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size();
         ++i) {
      std::vector<std::string> gram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                    tokens.begin() + static_cast<std::ptrdiff_t>(i) +
                                        n);
      ++counts[gram];
      ++occurrences;
    }
  }
  if (notes) notes->skipped_lines = skipped;
  if (occurrences == 0)
    throw UndefinedMetricError("no line has " + std::to_string(n) + " tokens");
  // Each occurrence contributes its gram's total count; sum c^2 over grams.
  double weighted = 0.0;
  for (const auto& [gram, count] : counts)
    weighted += static_cast<double>(count) * static_cast<double>(count);
  return weighted / static_cast<double>(occurrences);
}

int distinct_template_count(const std::vector<Limerick>& poems) {
  std::set<int> ids;
  for (const Limerick& poem : poems)
    for (int id : poem.template_ids)
      if (id >= 0) ids.insert(id);
  return static_cast<int>(ids.size());
}

namespace {

// Seeded sample of `size` fifth lines (whole run when it is smaller).
std::vector<std::string> sample_fifth_lines(const std::vector<Limerick>& run,
                                            int size, std::uint64_t seed,
                                            bool* whole_run) {
  std::vector<std::string> lines;
  lines.reserve(run.size());
  for (const Limerick& poem : run) lines.push_back(poem.line_text(5));
  if (static_cast<int>(lines.size()) <= size) {
    if (whole_run) *whole_run = true;
    return lines;
  }
  if (whole_run) *whole_run = false;
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates; indices beyond `size` are left untouched.
  for (int i = 0; i < size; ++i) {
    std::size_t j = static_cast<std::size_t>(i) +
                    static_cast<std::size_t>(rng() % (lines.size() -
                                                      static_cast<std::size_t>(i)));
    std::swap(lines[static_cast<std::size_t>(i)], lines[j]);
  }
  lines.resize(static_cast<std::size_t>(size));
  return lines;
}

}  // namespace

std::vector<DiversityReport> compare_runs(const std::vector<Limerick>& run_a,
                                          const std::vector<Limerick>& run_b,
                                          const std::vector<int>& n_values,
                                          int sample_size, std::uint64_t seed,
                                          const std::string& label_a,
                                          const std::string& label_b) {
  if (run_a.empty() || run_b.empty())
    throw ContractViolation("compare_runs needs nonempty runs");
  std::vector<DiversityReport> rows;
  const std::vector<Limerick>* runs[2] = {&run_a, &run_b};
  const std::string labels[2] = {label_a, label_b};
  for (int n : n_values) {
    for (int r = 0; r < 2; ++r) {
      DiversityReport row;
      row.n = n;
      row.run = labels[r];
      row.distinct_templates = distinct_template_count(*runs[r]);
      bool whole_run = false;
      auto lines = sample_fifth_lines(*runs[r], sample_size,
                                      mix_seed(seed, static_cast<std::uint64_t>(r)),
                                      &whole_run);
      row.sample_size = static_cast<int>(lines.size());
      if (whole_run && static_cast<int>(lines.size()) < sample_size)
        row.note = "run smaller than sample size; used whole run";
      try {
        row.mean_popularity = ngram_mean_popularity(lines, n);
      } catch (const UndefinedMetricError& e) {
        row.defined = false;
        row.note = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_comparison_csv(const std::vector<DiversityReport>& rows,
                          std::ostream& out) {
  out << "n,run,mean_popularity,distinct_templates,sample_size\n";
  for (const DiversityReport& row : rows) {
    out << row.n << ',' << row.run << ',';
    if (row.defined)
      out << row.mean_popularity;
    else
      out << "undefined";
    out << ',' << row.distinct_templates << ',' << row.sample_size << '\n';
  }
}

}  // namespace limerick
