#include "limerick/templates.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "limerick/phonetics.hpp"

namespace limerick {

using nlohmann::json;

namespace {

std::string to_upper(const std::string& word) {
  std::string upper = word;
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return upper;
}

}  // namespace

void Tagger::add_word(const std::string& word, const PosTag& tag) {
  lexicon_tags_[case_fold(word)] = tag;
}

void Tagger::add_literal(const std::string& word) {
  literals_.insert(case_fold(word));
}

std::optional<PosTag> Tagger::try_tag(const std::string& word) const {
  std::string folded = case_fold(word);
  if (literals_.count(folded)) return to_upper(folded);
  auto it = lexicon_tags_.find(folded);
  if (it == lexicon_tags_.end()) return std::nullopt;
  return it->second;
}

PosTag Tagger::tag(const std::string& word) const {
  auto tag = try_tag(word);
  if (!tag) throw TaggingError(word);
  return *tag;
}

std::vector<PosTag> Tagger::tag_words(
    const std::vector<std::string>& words) const {
  std::vector<PosTag> tags;
  tags.reserve(words.size());
  for (const auto& word : words) tags.push_back(tag(word));
  return tags;
}

bool Tagger::known(const std::string& word) const {
  return try_tag(word).has_value();
}

std::set<PosTag> Tagger::inventory() const {
  std::set<PosTag> tags;
  for (const auto& [word, tag] : lexicon_tags_) tags.insert(tag);
  for (const auto& word : literals_) tags.insert(to_upper(word));
  return tags;
}

Tagger load_tagger(std::istream& tag_lexicon, std::istream& literals) {
  if (!tag_lexicon.good()) throw LoadError("tag lexicon unreadable");
  if (!literals.good()) throw LoadError("literal list unreadable");
  Tagger tagger;
  std::string line;
  while (std::getline(tag_lexicon, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
      throw LoadError("bad tag lexicon line: " + line);
    tagger.add_word(line.substr(0, tab), line.substr(tab + 1));
  }
  while (std::getline(literals, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    tagger.add_literal(line);
  }
  return tagger;
}

Tagger load_tagger_files(const std::string& tag_lexicon_path,
                         const std::string& literals_path) {
  std::ifstream tags(tag_lexicon_path);
  if (!tags) throw LoadError("cannot open tag lexicon: " + tag_lexicon_path);
  std::ifstream lits(literals_path);
  if (!lits) throw LoadError("cannot open literal list: " + literals_path);
  return load_tagger(tags, lits);
}

std::vector<TaggedRecord> load_corpus(std::istream& source) {
  if (!source.good()) throw LoadError("corpus unreadable");
  std::vector<TaggedRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (line.empty()) continue;
    json parsed;
    try {
      parsed = json::parse(line);
    } catch (const json::exception& e) {
      throw LoadError("corpus line " + std::to_string(line_no) + ": " +
                      e.what());
    }
    TaggedRecord record;
    record.id = parsed.value("id", "line" + std::to_string(line_no));
    if (!parsed.contains("lines") || !parsed["lines"].is_array())
      throw LoadError("corpus record " + record.id + ": missing lines");
    for (const auto& line_json : parsed["lines"]) {
      std::vector<TaggedWord> words;
      for (const auto& word_json : line_json) {
        words.push_back(TaggedWord{case_fold(word_json.at("word")),
                                   word_json.at("tag")});
      }
      record.lines.push_back(std::move(words));
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<TaggedRecord> load_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open corpus: " + path);
  return load_corpus(in);
}

const TemplateBank::LineIndex& TemplateBank::line(int line_idx) const {
  if (line_idx < 2 || line_idx > 5)
    throw ContractViolation("template line index out of range");
  return lines_[line_idx - 2];
}

TemplateBank::LineIndex& TemplateBank::line_mutable(int line_idx) {
  if (line_idx < 2 || line_idx > 5)
    throw ContractViolation("template line index out of range");
  return lines_[line_idx - 2];
}

void TemplateBank::add_template(int line_idx, const Template& tags,
                                const std::string& source_id) {
  if (tags.empty()) throw ContractViolation("empty template");
  LineIndex& index = line_mutable(line_idx);
  if (index.ids.count(tags)) return;  // first-seen source id wins
  LineTemplate stored;
  stored.line_idx = line_idx;
  stored.tags = tags;
  stored.source_id = source_id;
  stored.id = static_cast<int>(all_.size());
  index.ids[tags] = stored.id;
  index.templates.push_back(stored);
  all_.push_back(stored);

  int node = 0;
  for (const PosTag& tag : tags) {
    auto it = index.nodes[node].children.find(tag);
    if (it == index.nodes[node].children.end()) {
      int next = static_cast<int>(index.nodes.size());
      index.nodes[node].children.emplace(tag, next);
      index.nodes.push_back(TrieNode{});
      node = next;
    } else {
      node = it->second;
    }
  }
  index.nodes[node].terminal = true;
}

const TemplateBank::TrieNode* TemplateBank::walk(int line_idx,
                                                 const Template& partial) const {
  const LineIndex& index = line(line_idx);
  int node = 0;
  for (const PosTag& tag : partial) {
    auto it = index.nodes[node].children.find(tag);
    if (it == index.nodes[node].children.end()) return nullptr;
    node = it->second;
  }
  return &index.nodes[node];
}

bool TemplateBank::viable_prefix(int line_idx, const Template& partial) const {
  if (line(line_idx).templates.empty()) return false;
  return walk(line_idx, partial) != nullptr;
}

std::vector<NextTagOption> TemplateBank::next_tag_options(
    int line_idx, const Template& partial) const {
  std::vector<NextTagOption> options;
  const TrieNode* node = walk(line_idx, partial);
  if (!node) return options;
  const LineIndex& index = line(line_idx);
  for (const auto& [tag, child_id] : node->children) {
    const TrieNode& child = index.nodes[child_id];
    options.push_back(
        NextTagOption{tag, child.terminal, !child.children.empty()});
  }
  return options;
}

std::optional<int> TemplateBank::template_id(int line_idx,
                                             const Template& tags) const {
  const LineIndex& index = line(line_idx);
  auto it = index.ids.find(tags);
  if (it == index.ids.end()) return std::nullopt;
  return it->second;
}

const std::vector<LineTemplate>& TemplateBank::templates(int line_idx) const {
  return line(line_idx).templates;
}

std::size_t TemplateBank::line_count(int line_idx) const {
  return line(line_idx).templates.size();
}

const LineTemplate& TemplateBank::by_id(int id) const {
  for (const LineTemplate& t : all_)
    if (t.id == id) return t;
  throw ContractViolation("unknown template id");
}

TemplateBank TemplateBank::restricted_to(int id) const {
  const LineTemplate& keep = by_id(id);
  TemplateBank bank;
  // Preserve the global id so reports stay comparable across modes.
  LineIndex& index = bank.line_mutable(keep.line_idx);
  LineTemplate stored = keep;
  index.ids[stored.tags] = stored.id;
  index.templates.push_back(stored);
  bank.all_.push_back(stored);
  int node = 0;
  for (const PosTag& tag : stored.tags) {
    int next = static_cast<int>(index.nodes.size());
    index.nodes[node].children.emplace(tag, next);
    index.nodes.push_back(TrieNode{});
    node = next;
  }
  index.nodes[node].terminal = true;
  return bank;
}

bool TemplateBank::operator==(const TemplateBank& other) const {
  for (int line_idx = 2; line_idx <= 5; ++line_idx) {
    const auto& a = line(line_idx).templates;
    const auto& b = other.line(line_idx).templates;
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].tags != b[i].tags || a[i].id != b[i].id ||
          a[i].source_id != b[i].source_id)
        return false;
    }
  }
  return true;
}

TemplateBank extract_templates(const std::vector<TaggedRecord>& corpus,
                               ExtractionReport* report) {
  TemplateBank bank;
  for (const TaggedRecord& record : corpus) {
    if (record.lines.size() != 5)
      throw LoadError("corpus record " + record.id + ": expected 5 lines, got " +
                      std::to_string(record.lines.size()));
    for (int line_idx = 2; line_idx <= 5; ++line_idx) {
      const auto& words = record.lines[static_cast<std::size_t>(line_idx - 1)];
      Template tags;
      tags.reserve(words.size());
      for (const TaggedWord& word : words) tags.push_back(word.tag);
      if (tags.empty())
        throw LoadError("corpus record " + record.id + ": empty line " +
                        std::to_string(line_idx));
      bank.add_template(line_idx, tags, record.id);
    }
  }
  if (bank.total() == 0) throw LoadError("no templates");
  if (report) {
    for (int line_idx = 2; line_idx <= 5; ++line_idx)
      report->templates_per_line[line_idx] = bank.line_count(line_idx);
  }
  return bank;
}

void save_bank(const TemplateBank& bank, std::ostream& out) {
  json dump;
  dump["format_version"] = 1;
  json lines = json::object();
  for (int line_idx = 2; line_idx <= 5; ++line_idx) {
    json entries = json::array();
    for (const LineTemplate& t : bank.templates(line_idx)) {
      entries.push_back(
          {{"id", t.id}, {"tags", t.tags}, {"source_id", t.source_id}});
    }
    lines[std::to_string(line_idx)] = entries;
  }
  dump["lines"] = lines;
  out << dump.dump() << "\n";
}

TemplateBank load_bank(std::istream& in) {
  if (!in.good()) throw LoadError("template bank unreadable");
  json dump;
  try {
    in >> dump;
  } catch (const json::exception& e) {
    throw LoadError(std::string("bad template bank: ") + e.what());
  }
  if (dump.value("format_version", 0) != 1)
    throw LoadError("unsupported template bank version");
  // Rebuild in id order so bank ids survive the round trip.
  std::vector<std::pair<int, LineTemplate>> entries;
  for (int line_idx = 2; line_idx <= 5; ++line_idx) {
    for (const auto& entry : dump["lines"][std::to_string(line_idx)]) {
      LineTemplate t;
      t.line_idx = line_idx;
      t.id = entry.at("id");
      t.tags = entry.at("tags").get<Template>();
      t.source_id = entry.at("source_id");
      entries.emplace_back(t.id, t);
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  TemplateBank bank;
  for (const auto& [id, t] : entries)
    bank.add_template(t.line_idx, t.tags, t.source_id);
  if (bank.total() == 0) throw LoadError("no templates");
  return bank;
}

TemplateBank load_bank_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open template bank: " + path);
  return load_bank(in);
}

double PosWeights::at(const PosTag& tag) const {
  auto it = weights.find(tag);
  if (it == weights.end())
    throw ContractViolation("no weight for tag " + tag);
  return it->second;
}

PosWeights compute_pos_weights(const TemplateBank& bank, int line_idx) {
  const auto& templates = bank.templates(line_idx);
  if (templates.empty())
    throw ContractViolation("no templates for line " +
                            std::to_string(line_idx));
  std::map<PosTag, std::size_t> counts;
  std::size_t total = 0;
  for (const LineTemplate& t : templates) {
    for (const PosTag& tag : t.tags) {
      ++counts[tag];
      ++total;
    }
  }
  // softmax over 1/q_i, stabilized by subtracting the max exponent.
  double max_inverse = 0.0;
  std::map<PosTag, double> inverse;
  for (const auto& [tag, count] : counts) {
    double q = static_cast<double>(count) / static_cast<double>(total);
    inverse[tag] = 1.0 / q;
    max_inverse = std::max(max_inverse, inverse[tag]);
  }
  double denom = 0.0;
  for (auto& [tag, value] : inverse) {
    value = std::exp(value - max_inverse);
    denom += value;
  }
  PosWeights weights;
  weights.line_idx = line_idx;
  for (const auto& [tag, value] : inverse) weights.weights[tag] = value / denom;
  return weights;
}

double diversity_score(const PosWeights& weights, const Template& t1,
                       const Template& t2) {
  if (t1.size() != t2.size())
    throw ContractViolation("diversity score needs equal-length templates");
  double score = 0.0;
  for (std::size_t i = 0; i < t1.size(); ++i) {
    if (t1[i] == t2[i]) continue;
    score += std::max(weights.at(t1[i]), weights.at(t2[i]));
  }
  return score;
}

}  // namespace limerick
