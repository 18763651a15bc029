#include "limerick/storyline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <random>
#include <sstream>

namespace limerick {

namespace {

// Top 53 bits of the engine output as a double in [0, 1). mt19937_64 is
// fully specified by the standard, so this is reproducible everywhere.
double next_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

bool EmbeddingSpace::contains(const std::string& word) const {
  return vectors_.count(word) > 0;
}

const std::vector<float>& EmbeddingSpace::vector_of(
    const std::string& word) const {
  auto it = vectors_.find(word);
  if (it == vectors_.end()) throw AbsentEmbeddingError(word);
  return it->second;
}

void EmbeddingSpace::add(const std::string& word, std::vector<float> vec) {
  if (vec.empty()) throw ContractViolation("empty embedding vector");
  if (dimension_ == 0) dimension_ = static_cast<int>(vec.size());
  if (static_cast<int>(vec.size()) != dimension_)
    throw ContractViolation("embedding dimension mismatch");
  vectors_[case_fold(word)] = std::move(vec);
}

EmbeddingSpace load_embeddings(std::istream& source,
                               EmbeddingLoadReport* report) {
  if (!source.good()) throw LoadError("embedding stream unreadable");
  EmbeddingSpace space;
  EmbeddingLoadReport local;
  std::string line;
  int declared_dim = 0;
  bool first = true;
  while (std::getline(source, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream in(line);
    if (first) {
      first = false;
      // Optional "count dim" header: two integer tokens.
      long long count = 0, dim = 0;
      std::istringstream probe(line);
      std::string extra;
      if (probe >> count >> dim && !(probe >> extra) && dim > 0) {
        declared_dim = static_cast<int>(dim);
        continue;
      }
    }
    std::string word;
    in >> word;
    std::vector<float> vec;
    double value;
    while (in >> value) vec.push_back(static_cast<float>(value));
    bool zero = std::all_of(vec.begin(), vec.end(),
                            [](float v) { return v == 0.0f; });
    bool bad_dim = vec.empty() ||
                   (declared_dim > 0 && static_cast<int>(vec.size()) != declared_dim) ||
                   (space.dimension() > 0 &&
                    static_cast<int>(vec.size()) != space.dimension());
    if (word.empty() || zero || bad_dim) {
      local.rejected.push_back(line);
      continue;
    }
    space.add(word, std::move(vec));
    ++local.loaded;
  }
  if (report) *report = local;
  if (local.loaded == 0) throw LoadError("no embeddings loaded");
  return space;
}

EmbeddingSpace load_embeddings_file(const std::string& path,
                                    EmbeddingLoadReport* report) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open embeddings: " + path);
  return load_embeddings(in, report);
}

double similarity(const EmbeddingSpace& space, const std::string& w1,
                  const std::string& w2) {
  const auto& a = space.vector_of(case_fold(w1));
  const auto& b = space.vector_of(case_fold(w2));
  double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    norm_a += static_cast<double>(a[i]) * static_cast<double>(a[i]);
    norm_b += static_cast<double>(b[i]) * static_cast<double>(b[i]);
  }
  double cosine = dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
  cosine = std::clamp(cosine, -1.0, 1.0);
  return (cosine + 1.0) / 2.0;
}

bool NameLexicon::contains(const std::string& word) const {
  return set_.count(case_fold(word)) > 0;
}

std::optional<char> NameLexicon::gender(const std::string& name) const {
  auto it = genders_.find(case_fold(name));
  if (it == genders_.end()) return std::nullopt;
  return it->second;
}

void NameLexicon::add(const std::string& name, std::optional<char> gender) {
  std::string folded = case_fold(name);
  if (set_.insert(folded).second) {
    names_.insert(std::lower_bound(names_.begin(), names_.end(), folded),
                  folded);
  }
  if (gender) genders_[folded] = *gender;
}

NameLexicon load_names(std::istream& source, const Lexicon& lexicon,
                       NameLoadReport* report) {
  if (!source.good()) throw LoadError("names stream unreadable");
  NameLexicon names;
  NameLoadReport local;
  std::string line;
  while (std::getline(source, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::string name = line;
    std::optional<char> gender;
    auto comma = line.find(',');
    if (comma != std::string::npos) {
      name = line.substr(0, comma);
      std::string tail = line.substr(comma + 1);
      if (tail != "F" && tail != "M")
        throw LoadError("bad name gender suffix: " + line);
      gender = tail[0];
    }
    if (!lexicon.contains(name)) {
      local.excluded.push_back(name);
      continue;
    }
    names.add(name, gender);
  }
  if (report) *report = local;
  if (names.names().empty()) throw LoadError("no usable names loaded");
  return names;
}

NameLexicon load_names_file(const std::string& path, const Lexicon& lexicon,
                            NameLoadReport* report) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open names: " + path);
  return load_names(in, lexicon, report);
}

const char* slot_name(StorylineSlot slot) {
  switch (slot) {
    case StorylineSlot::Y2: return "p(y2|y0)";
    case StorylineSlot::Y3: return "p(y3|y0)";
    case StorylineSlot::Y4: return "p(y4|y0,y2,y3)";
    case StorylineSlot::Y5: return "p(y5|y0,y2,y3)";
    case StorylineSlot::Y1: return "p(y1|y5)";
  }
  return "?";
}

TokenDistribution storyline_conditional(StorylineSlot slot,
                                        const Storyline& partial,
                                        const Lexicon& lexicon,
                                        const EmbeddingSpace& space,
                                        const NameLexicon& names,
                                        const std::set<std::string>& exclude) {
  TokenDistribution dist;
  std::vector<std::pair<std::string, double>> masses;

  auto sim_sum_023 = [&](const std::string& w) {
    return similarity(space, w, partial.prompt) +
           similarity(space, w, partial.y(2)) +
           similarity(space, w, partial.y(3));
  };

  if (slot == StorylineSlot::Y1) {
    if (partial.y(5).empty())
      throw ContractViolation("y1 conditional needs y5");
    for (const std::string& name : names.names()) {
      if (exclude.count(name)) continue;
      if (!lexicon.rhymes(name, partial.y(5))) continue;
      masses.emplace_back(name, 1.0);
    }
  } else {
    if (!space.contains(case_fold(partial.prompt)))
      throw AbsentEmbeddingError(partial.prompt);
    for (const auto& [word, vec] : space.vectors()) {
      if (!lexicon.contains(word)) continue;
      if (exclude.count(word)) continue;
      double mass = 0.0;
      switch (slot) {
        case StorylineSlot::Y2:
        case StorylineSlot::Y3:
          mass = similarity(space, word, partial.prompt);
          break;
        case StorylineSlot::Y4:
          if (partial.y(2).empty() || partial.y(3).empty())
            throw ContractViolation("y4 conditional needs y2 and y3");
          if (!lexicon.rhymes(word, partial.y(3))) continue;
          mass = sim_sum_023(word);
          break;
        case StorylineSlot::Y5:
          if (partial.y(2).empty() || partial.y(3).empty())
            throw ContractViolation("y5 conditional needs y2 and y3");
          if (!lexicon.rhymes(word, partial.y(2))) continue;
          mass = sim_sum_023(word);
          break;
        case StorylineSlot::Y1:
          break;
      }
      if (mass > 0.0) masses.emplace_back(word, mass);
    }
  }

  if (masses.empty())
    throw EmptySupportError(std::string("empty support for ") +
                            slot_name(slot));
  double total = 0.0;
  for (const auto& [word, mass] : masses) total += mass;
  for (auto& [word, mass] : masses) mass /= total;
  dist.support = std::move(masses);
  return dist;
}

std::optional<SampleResult> sample_word_constrained(
    const TokenDistribution& dist, const WordPredicate& accept,
    int max_attempts, std::uint64_t rng_seed) {
  if (max_attempts < 1) throw ContractViolation("max_attempts must be >= 1");
  if (dist.support.empty()) return std::nullopt;
  std::vector<double> cumulative;
  cumulative.reserve(dist.support.size());
  double running = 0.0;
  for (const auto& [word, p] : dist.support) {
    running += p;
    cumulative.push_back(running);
  }
  if (running <= 0.0) return std::nullopt;
  std::mt19937_64 rng(rng_seed);
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    double u = next_unit(rng) * running;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    std::size_t idx = static_cast<std::size_t>(
        std::min<std::ptrdiff_t>(it - cumulative.begin(),
                                 static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
    const std::string& word = dist.support[idx].first;
    if (!accept || accept(word)) return SampleResult{word, attempt};
  }
  return std::nullopt;
}

std::optional<SampleResult> argmax_word_constrained(
    const TokenDistribution& dist, const WordPredicate& accept) {
  const std::string* best = nullptr;
  double best_mass = -1.0;
  for (const auto& [word, p] : dist.support) {
    if (p > best_mass && (!accept || accept(word))) {
      best = &word;
      best_mass = p;
    }
  }
  if (!best) return std::nullopt;
  return SampleResult{*best, 1};
}

std::optional<Storyline> sample_storyline(const std::string& prompt,
                                          const Lexicon& lexicon,
                                          const EmbeddingSpace& space,
                                          const NameLexicon& names,
                                          std::uint64_t rng_seed,
                                          int max_tuple_attempts,
                                          int max_word_attempts) {
  const StorylineSlot order[] = {StorylineSlot::Y2, StorylineSlot::Y3,
                                 StorylineSlot::Y4, StorylineSlot::Y5,
                                 StorylineSlot::Y1};
  const int slot_index[] = {2, 3, 4, 5, 1};
  for (int tuple_attempt = 0; tuple_attempt < max_tuple_attempts;
       ++tuple_attempt) {
    Storyline story;
    story.prompt = case_fold(prompt);
    std::set<std::string> used;
    bool ok = true;
    for (int k = 0; k < 5 && ok; ++k) {
      TokenDistribution dist;
      try {
        dist = storyline_conditional(order[k], story, lexicon, space, names,
                                     used);
      } catch (const EmptySupportError&) {
        ok = false;
        break;
      }
      WordPredicate accept;
      if (order[k] == StorylineSlot::Y1) {
        // The y5~y2 rhyme is already guaranteed; requiring y1~y2 as well
        // keeps the triple pairwise even when pronunciations vary.
        accept = [&](const std::string& w) {
          return lexicon.rhymes(w, story.y(2));
        };
      }
      auto sampled = sample_word_constrained(
          dist, accept, max_word_attempts,
          mix_seed(rng_seed, static_cast<std::uint64_t>(tuple_attempt) * 16 +
                                 static_cast<std::uint64_t>(k)));
      if (!sampled) {
        ok = false;
        break;
      }
      story.y(slot_index[k]) = sampled->word;
      story.provenance[static_cast<std::size_t>(slot_index[k] - 1)] =
          slot_name(order[k]);
      used.insert(sampled->word);
    }
    if (ok) return story;
  }
  return std::nullopt;
}

}  // namespace limerick
