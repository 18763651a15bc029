#include "limerick/generator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace limerick {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& words) {
  std::string text;
  for (const auto& word : words) {
    if (!text.empty()) text += ' ';
    text += word;
  }
  return text;
}

StorylineSlot slot_for_line(int line_idx) {
  switch (line_idx) {
    case 2: return StorylineSlot::Y2;
    case 3: return StorylineSlot::Y3;
    case 4: return StorylineSlot::Y4;
    case 5: return StorylineSlot::Y5;
    default: throw ContractViolation("no storyline slot for line");
  }
}

// Line 1 is checked leniently: canonical first lines may run short and do
// not follow the 3/6/9 stress template, so only the length bound applies.
int lenient_line1_pronunciation(const Lexicon& lexicon, const MeterSpec& meter,
                                int offset, const std::string& word) {
  if (!lexicon.contains(word)) return -1;
  const auto& prons = lexicon.lookup(word);
  for (std::size_t i = 0; i < prons.size(); ++i) {
    if (offset + prons[i].syllables <= meter.target(1))
      return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

bool FirstLinePattern::is_slot(const std::string& token) {
  return token.size() > 2 && token.front() == '<' && token.back() == '>';
}

std::string FirstLinePattern::slot_tag(const std::string& token) {
  return token.substr(1, token.size() - 2);
}

std::vector<FirstLinePattern> load_patterns(std::istream& source) {
  if (!source.good()) throw LoadError("pattern stream unreadable");
  std::vector<FirstLinePattern> patterns;
  std::string line;
  while (std::getline(source, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    FirstLinePattern pattern;
    std::istringstream in(line);
    std::string token;
    while (in >> token) pattern.tokens.push_back(case_fold(token));
    if (pattern.tokens.empty()) continue;
    if (pattern.tokens.back() != "<name>")
      throw LoadError("first-line pattern must end in <NAME>: " + line);
    patterns.push_back(std::move(pattern));
  }
  if (patterns.empty()) throw LoadError("no first-line patterns");
  return patterns;
}

std::vector<FirstLinePattern> load_patterns_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open patterns: " + path);
  return load_patterns(in);
}

Mode parse_mode(const std::string& text) {
  std::string folded = case_fold(text);
  std::replace(folded.begin(), folded.end(), '-', '_');
  if (folded == "full" || folded == "mtbs") return Mode::Full;
  if (folded == "no_story") return Mode::NoStory;
  if (folded == "single_template") return Mode::SingleTemplate;
  if (folded == "candidate_rank") return Mode::CandidateRank;
  throw LoadError("unknown mode: " + text);
}

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::Full: return "full";
    case Mode::NoStory: return "no_story";
    case Mode::SingleTemplate: return "single_template";
    case Mode::CandidateRank: return "candidate_rank";
  }
  return "?";
}

void GenerationResources::validate() const {
  if (!lexicon || !bank || !meter || !tagger || !model || !embeddings ||
      !names || !patterns)
    throw ContractViolation("generation resources incomplete");
}

double PartialPoem::score() const {
  if (token_count == 0) return 0.0;
  return sum_logprob / static_cast<double>(token_count);
}

std::vector<std::string> PartialPoem::flattened() const {
  std::vector<std::string> words;
  for (const auto& line : lines)
    words.insert(words.end(), line.begin(), line.end());
  return words;
}

std::string Limerick::line_text(int line_idx) const {
  return join(lines[static_cast<std::size_t>(line_idx - 1)]);
}

PartialPoem make_first_line(const GenerationResources& resources,
                            const GenerationRequest& request) {
  resources.validate();
  const auto& patterns = *resources.patterns;
  if (patterns.empty()) throw ContractViolation("empty pattern list");
  const MeterSpec& meter = *resources.meter;
  const Lexicon& lexicon = *resources.lexicon;
  const std::uint64_t seed = request.search.rng_seed;

  std::size_t start =
      static_cast<std::size_t>(mix_seed(seed, 0x30) % patterns.size());
  for (std::size_t offset = 0; offset < patterns.size(); ++offset) {
    const FirstLinePattern& pattern =
        patterns[(start + offset) % patterns.size()];
    std::vector<std::string> words;
    std::vector<int> prons;
    int syllables = 0;
    int slot_ordinal = 0;
    bool ok = true;
    std::string placeholder;
    int name_offset = 0;

    for (const std::string& token : pattern.tokens) {
      if (token == "<name>") {
        // Uniform over names whose pronunciation fits the slot.
        std::vector<std::string> fitting;
        for (const std::string& name : resources.names->names()) {
          if (lenient_line1_pronunciation(lexicon, meter, syllables, name) >= 0)
            fitting.push_back(name);
        }
        if (fitting.empty()) {
          ok = false;
          break;
        }
        std::size_t pick = static_cast<std::size_t>(
            mix_seed(seed, 0x33) % fitting.size());
        placeholder = fitting[pick];
        name_offset = syllables;
        int pron =
            lenient_line1_pronunciation(lexicon, meter, syllables, placeholder);
        words.push_back(placeholder);
        prons.push_back(pron);
        syllables += lexicon.lookup(placeholder)[static_cast<std::size_t>(pron)]
                         .syllables;
      } else if (FirstLinePattern::is_slot(token)) {
        PosTag wanted = FirstLinePattern::slot_tag(token);
        std::transform(wanted.begin(), wanted.end(), wanted.begin(),
                       [](unsigned char c) { return std::toupper(c); });
        TokenDistribution dist = resources.model->next_distribution(words);
        TokenDistribution eligible;
        for (const auto& [word, p] : dist.support) {
          if (p <= 0.0 || word == kUnkToken) continue;
          auto tag = resources.tagger->try_tag(word);
          if (!tag || *tag != wanted) continue;
          if (lenient_line1_pronunciation(lexicon, meter, syllables, word) < 0)
            continue;
          eligible.support.emplace_back(word, p);
        }
        auto sampled = sample_word_constrained(
            eligible.renormalized(), {}, 1,
            mix_seed(mix_seed(seed, 0x31),
                     static_cast<std::uint64_t>(slot_ordinal)));
        ++slot_ordinal;
        if (!sampled) {
          ok = false;
          break;
        }
        int pron = lenient_line1_pronunciation(lexicon, meter, syllables,
                                               sampled->word);
        words.push_back(sampled->word);
        prons.push_back(pron);
        syllables +=
            lexicon.lookup(sampled->word)[static_cast<std::size_t>(pron)]
                .syllables;
      } else {
        int pron = lenient_line1_pronunciation(lexicon, meter, syllables,
                                               token);
        if (pron < 0) {
          ok = false;
          break;
        }
        words.push_back(token);
        prons.push_back(pron);
        syllables +=
            lexicon.lookup(token)[static_cast<std::size_t>(pron)].syllables;
      }
    }
    if (!ok) continue;

    PartialPoem poem;
    poem.lines.push_back(std::move(words));
    poem.pron_choices.push_back(std::move(prons));
    poem.storyline.prompt = case_fold(request.prompt);
    poem.placeholder_name = placeholder;
    poem.name_offset = name_offset;
    if (request.include_line1_in_score) {
      // The placeholder is never scored; it gets replaced by y1 later.
      std::vector<std::string> context;
      for (std::size_t i = 0; i + 1 < poem.lines[0].size(); ++i) {
        double lp = resources.model->token_logprob(poem.lines[0][i], context);
        if (lp != -std::numeric_limits<double>::infinity()) {
          poem.sum_logprob += lp;
          ++poem.token_count;
        }
        context.push_back(poem.lines[0][i]);
      }
    }
    return poem;
  }
  throw GenerationError("no first-line pattern could be instantiated", 1);
}

std::vector<PartialPoem> generate_line(const std::vector<PartialPoem>& poems,
                                       int line_idx,
                                       const GenerationRequest& request,
                                       const GenerationResources& resources) {
  resources.validate();
  request.search.validate();
  if (line_idx < 2 || line_idx > 5)
    throw ContractViolation("generate_line handles lines 2..5");
  for (const PartialPoem& poem : poems) {
    if (static_cast<int>(poem.lines.size()) != line_idx - 1)
      throw ContractViolation("poems must be complete up to the previous line");
  }
  if (poems.empty()) return {};

  const Lexicon& lexicon = *resources.lexicon;
  const MeterSpec& meter = *resources.meter;
  const std::uint64_t seed = request.search.rng_seed;

  // Single-template ablation follows one seeded template for the line.
  TemplateBank restricted;
  const TemplateBank* bank = resources.bank;
  if (request.mode == Mode::SingleTemplate) {
    const auto& line_templates = resources.bank->templates(line_idx);
    if (line_templates.empty())
      throw GenerationError("no templates for line", line_idx);
    std::size_t pick = static_cast<std::size_t>(
        mix_seed(seed, 0x50 + static_cast<std::uint64_t>(line_idx)) %
        line_templates.size());
    restricted = resources.bank->restricted_to(line_templates[pick].id);
    bank = &restricted;
  }
  PosWeights weights = compute_pos_weights(*bank, line_idx);

  const bool storyline_finals = request.mode != Mode::NoStory;

  // A final word is a provable dead end when the rhyme scheme can never be
  // closed around it: y2 needs both a rhyming vocabulary partner (for y5)
  // and a rhyming name (for y1); y3 needs a rhyming partner (for y4).
  auto partner_memo = std::make_shared<std::map<std::string, bool>>();
  auto has_rhyme_partner = [&, partner_memo](const std::string& word) {
    auto it = partner_memo->find(word);
    if (it != partner_memo->end()) return it->second;
    bool found = false;
    for (const auto& [candidate, vec] : resources.embeddings->vectors()) {
      if (candidate != word && lexicon.contains(candidate) &&
          lexicon.rhymes(candidate, word)) {
        found = true;
        break;
      }
    }
    (*partner_memo)[word] = found;
    return found;
  };
  auto name_memo = std::make_shared<std::map<std::string, bool>>();
  auto has_rhyming_name = [&, name_memo](const std::string& word) {
    auto it = name_memo->find(word);
    if (it != name_memo->end()) return it->second;
    bool found = false;
    for (const std::string& name : resources.names->names()) {
      if (lexicon.rhymes(name, word)) {
        found = true;
        break;
      }
    }
    (*name_memo)[word] = found;
    return found;
  };
  auto closes_rhyme_scheme = [&](const std::string& word) {
    if (line_idx == 2) return has_rhyme_partner(word) && has_rhyming_name(word);
    if (line_idx == 3) return has_rhyme_partner(word);
    return true;
  };

  // Per-parent conditioning context and storyline conditional (lazy).
  std::vector<std::shared_ptr<const std::vector<std::string>>> contexts;
  contexts.reserve(poems.size());
  for (const PartialPoem& poem : poems)
    contexts.push_back(
        std::make_shared<const std::vector<std::string>>(poem.flattened()));
  std::map<int, std::optional<TokenDistribution>> conditional_cache;
  auto conditional_for = [&](int parent) -> const std::optional<TokenDistribution>& {
    auto it = conditional_cache.find(parent);
    if (it != conditional_cache.end()) return it->second;
    std::optional<TokenDistribution> dist;
    try {
      std::set<std::string> used;
      for (int i = 1; i <= 5; ++i) {
        const std::string& y = poems[static_cast<std::size_t>(parent)].storyline.y(i);
        if (!y.empty()) used.insert(y);
      }
      dist = storyline_conditional(slot_for_line(line_idx),
                                   poems[static_cast<std::size_t>(parent)].storyline,
                                   lexicon, *resources.embeddings,
                                   *resources.names, used);
    } catch (const EmptySupportError&) {
      dist = std::nullopt;
    }
    return conditional_cache.emplace(parent, std::move(dist)).first->second;
  };

  FinalWordPolicy final_policy;
  if (storyline_finals) {
    // Final words come from the storyline sampler, never from the model.
    final_policy = [](const PartialLine&, const std::string&) { return false; };
  } else {
    final_policy = [&](const PartialLine& entry, const std::string& word) {
      const PartialPoem& parent = poems[static_cast<std::size_t>(entry.parent)];
      for (int i = 1; i <= 5; ++i)
        if (parent.storyline.y(i) == word) return false;
      if (line_idx == 4) return lexicon.rhymes(word, parent.storyline.y(3));
      if (line_idx == 5) return lexicon.rhymes(word, parent.storyline.y(2));
      return closes_rhyme_scheme(word);
    };
  }

  SearchBeam active;
  active.capacity = request.search.total_beam;
  for (std::size_t p = 0; p < poems.size(); ++p) {
    PartialLine entry;
    entry.line_idx = line_idx;
    entry.parent = static_cast<int>(p);
    entry.context = contexts[p];
    active.entries.push_back(std::move(entry));
  }

  const int target = meter.target(line_idx);
  std::vector<PartialLine> completed;

  for (int step = 0; step < request.search.max_line_tokens; ++step) {
    if (active.entries.empty()) break;
    SearchBeam candidates =
        extend_candidates(active, *resources.model, *bank, meter, lexicon,
                          *resources.tagger, request.search, final_policy);

    if (storyline_finals) {
      for (std::size_t e = 0; e < active.entries.size(); ++e) {
        const PartialLine& entry = active.entries[e];
        int remaining = target - entry.syllables_used;
        if (remaining < 1) continue;
        std::set<PosTag> completing;
        for (const NextTagOption& option :
             bank->next_tag_options(line_idx, entry.tags)) {
          if (option.completes) completing.insert(option.tag);
        }
        if (completing.empty()) continue;
        const auto& dist = conditional_for(entry.parent);
        if (!dist) continue;

        std::vector<std::string> model_context = entry.context_words();
        model_context.insert(model_context.end(), entry.words.begin(),
                             entry.words.end());
        TokenDistribution model_dist =
            resources.model->next_distribution(model_context);

        auto accept = [&](const std::string& word) {
          auto tag = resources.tagger->try_tag(word);
          if (!tag || !completing.count(*tag)) return false;
          if (model_dist.prob(word) <= 0.0) return false;
          if (!lexicon.contains(word)) return false;
          if (!closes_rhyme_scheme(word)) return false;
          const auto& prons = lexicon.lookup(word);
          for (const Pronunciation& pron : prons) {
            if (pron.syllables == remaining &&
                fits_meter(meter, line_idx, entry.syllables_used, pron.pattern))
              return true;
          }
          return false;
        };
        auto sampled = sample_word_constrained(
            *dist, accept, request.max_sample_attempts,
            mix_seed(mix_seed(mix_seed(mix_seed(seed, 0x40),
                                       static_cast<std::uint64_t>(line_idx)),
                              static_cast<std::uint64_t>(step)),
                     e));
        if (!sampled) continue;

        const std::string& word = sampled->word;
        PosTag tag = resources.tagger->tag(word);
        const auto& prons = lexicon.lookup(word);
        int pron_idx = -1;
        for (std::size_t i = 0; i < prons.size(); ++i) {
          if (prons[i].syllables == remaining &&
              fits_meter(meter, line_idx, entry.syllables_used,
                         prons[i].pattern)) {
            pron_idx = static_cast<int>(i);
            break;
          }
        }
        PartialLine done = entry;
        done.words.push_back(word);
        done.tags.push_back(tag);
        done.pron_choice.push_back(pron_idx);
        done.syllables_used = target;
        done.sum_logprob += std::log(model_dist.prob(word));
        done.complete = true;
        done.sample_attempts += sampled->attempts;
        candidates.entries.push_back(std::move(done));
      }
    }

    if (candidates.entries.empty()) break;
    SearchBeam selected =
        request.mode == Mode::CandidateRank
            ? candidate_rank_select(candidates, request.search)
            : mtbs_select(candidates, weights, request.search);

    active.entries.clear();
    for (PartialLine& entry : selected.entries) {
      if (entry.complete)
        completed.push_back(std::move(entry));
      else
        active.entries.push_back(std::move(entry));
    }
  }

  // Fold completed lines back into poems, then keep the best N.
  std::vector<PartialPoem> extended;
  extended.reserve(completed.size());
  for (const PartialLine& line : completed) {
    PartialPoem poem = poems[static_cast<std::size_t>(line.parent)];
    poem.lines.push_back(line.words);
    poem.pron_choices.push_back(line.pron_choice);
    auto id = bank->template_id(line_idx, line.tags);
    poem.template_ids.push_back(id ? *id : -1);
    poem.sum_logprob += line.sum_logprob;
    poem.token_count += static_cast<int>(line.words.size());
    poem.attempts += line.sample_attempts;
    poem.storyline.y(line_idx) = line.words.back();
    poem.storyline.provenance[static_cast<std::size_t>(line_idx - 1)] =
        storyline_finals ? slot_name(slot_for_line(line_idx)) : "lm";
    extended.push_back(std::move(poem));
  }
  std::sort(extended.begin(), extended.end(),
            [](const PartialPoem& a, const PartialPoem& b) {
              double sa = a.score(), sb = b.score();
              if (sa != sb) return sa > sb;
              return a.flattened() < b.flattened();
            });
  if (static_cast<int>(extended.size()) > request.search.total_beam)
    extended.resize(static_cast<std::size_t>(request.search.total_beam));
  return extended;
}

std::vector<Limerick> generate_limericks(const GenerationRequest& request,
                                         const GenerationResources& resources) {
  resources.validate();
  request.search.validate();
  std::string prompt = case_fold(request.prompt);
  if (!resources.lexicon->contains(prompt))
    throw ContractViolation("prompt not in vocabulary: " + prompt);
  if (!resources.embeddings->contains(prompt))
    throw ContractViolation("prompt not embedded: " + prompt);

  std::vector<PartialPoem> poems = {make_first_line(resources, request)};
  for (int line_idx = 2; line_idx <= 5; ++line_idx) {
    poems = generate_line(poems, line_idx, request, resources);
    if (poems.empty())
      throw GenerationError("generation died at line " +
                                std::to_string(line_idx),
                            line_idx);
  }

  const Lexicon& lexicon = *resources.lexicon;
  const MeterSpec& meter = *resources.meter;
  std::vector<Limerick> output;
  for (std::size_t p = 0; p < poems.size(); ++p) {
    PartialPoem& poem = poems[p];
    std::set<std::string> used;
    for (int i = 2; i <= 5; ++i) used.insert(poem.storyline.y(i));
    std::optional<TokenDistribution> dist;
    try {
      dist = storyline_conditional(StorylineSlot::Y1, poem.storyline, lexicon,
                                   *resources.embeddings, *resources.names,
                                   used);
    } catch (const EmptySupportError&) {
      continue;
    }
    auto accept = [&](const std::string& word) {
      if (!lexicon.rhymes(word, poem.storyline.y(2))) return false;
      return lenient_line1_pronunciation(lexicon, meter, poem.name_offset,
                                         word) >= 0;
    };
    auto sampled = sample_word_constrained(
        *dist, accept, request.max_sample_attempts,
        mix_seed(mix_seed(request.search.rng_seed, 0x70), p));
    if (!sampled) continue;

    poem.storyline.y(1) = sampled->word;
    poem.storyline.provenance[0] = slot_name(StorylineSlot::Y1);
    poem.attempts += sampled->attempts;
    poem.lines[0].back() = sampled->word;
    poem.pron_choices[0].back() = lenient_line1_pronunciation(
        lexicon, meter, poem.name_offset, sampled->word);

    Limerick record;
    for (int i = 0; i < 5; ++i)
      record.lines[static_cast<std::size_t>(i)] =
          poem.lines[static_cast<std::size_t>(i)];
    record.storyline = poem.storyline;
    record.score = poem.score();
    record.template_ids = poem.template_ids;
    record.attempts = poem.attempts;
    record.prompt = prompt;
    record.mode = request.mode;
    record.seed = request.search.rng_seed;
    output.push_back(std::move(record));
  }
  if (output.empty())
    throw GenerationError("no poem survived name substitution", 5);
  std::sort(output.begin(), output.end(),
            [](const Limerick& a, const Limerick& b) {
              if (a.score != b.score) return a.score > b.score;
              for (int i = 0; i < 5; ++i) {
                if (a.lines[static_cast<std::size_t>(i)] !=
                    b.lines[static_cast<std::size_t>(i)])
                  return a.lines[static_cast<std::size_t>(i)] <
                         b.lines[static_cast<std::size_t>(i)];
              }
              return false;
            });
  return output;
}

std::string to_json_record(const Limerick& poem) {
  json record;
  record["prompt"] = poem.prompt;
  record["mode"] = mode_name(poem.mode);
  record["seed"] = poem.seed;
  json lines = json::array();
  for (int i = 1; i <= 5; ++i) lines.push_back(poem.line_text(i));
  record["lines"] = lines;
  json storyline;
  storyline["y0"] = poem.storyline.prompt;
  for (int i = 1; i <= 5; ++i)
    storyline["y" + std::to_string(i)] = poem.storyline.y(i);
  record["storyline"] = storyline;
  record["score"] = poem.score;
  record["templates"] = poem.template_ids;
  record["attempts"] = poem.attempts;
  return record.dump();
}

}  // namespace limerick
