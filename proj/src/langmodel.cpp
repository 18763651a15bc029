#include "limerick/langmodel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "httplib.h"
#include "json.hpp"
#include "limerick/phonetics.hpp"

namespace limerick {

using nlohmann::json;

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double TokenDistribution::prob(const std::string& word) const {
  auto it = std::lower_bound(
      support.begin(), support.end(), word,
      [](const auto& entry, const std::string& w) { return entry.first < w; });
  if (it == support.end() || it->first != word) return 0.0;
  return it->second;
}

double TokenDistribution::total_mass() const {
  double total = 0.0;
  for (const auto& [word, p] : support) total += p;
  return total;
}

TokenDistribution TokenDistribution::renormalized() const {
  TokenDistribution out = *this;
  double total = total_mass();
  if (total <= 0.0) {
    out.support.clear();
    return out;
  }
  for (auto& [word, p] : out.support) p /= total;
  return out;
}

double LanguageModel::token_logprob(
    const std::string& word, const std::vector<std::string>& context) const {
  double p = next_distribution(context).prob(word);
  return p > 0.0 ? std::log(p) : kNegInf;
}

NgramModel::NgramModel(int order, double alpha,
                       std::set<std::string> vocabulary)
    : order_(order), alpha_(alpha) {
  if (order < 1) throw ContractViolation("ngram order must be >= 1");
  if (alpha <= 0.0) throw ContractViolation("smoothing alpha must be > 0");
  if (vocabulary.empty()) throw ContractViolation("empty vocabulary");
  vocabulary_.assign(vocabulary.begin(), vocabulary.end());
  vocab_set_ = std::move(vocabulary);
}

std::vector<std::string> NgramModel::effective_context(
    const std::vector<std::string>& context) const {
  // Last order-1 words; unknown words collapse to UNK; short contexts are
  // left-padded with <s>.
  std::size_t keep = static_cast<std::size_t>(order_ - 1);
  std::vector<std::string> effective;
  effective.reserve(keep);
  std::size_t skip = context.size() > keep ? context.size() - keep : 0;
  for (std::size_t i = skip; i < context.size(); ++i) {
    const std::string& word = context[i];
    if (word == kSentenceStart || vocab_set_.count(word))
      effective.push_back(word);
    else
      effective.push_back(kUnkToken);
  }
  while (effective.size() < keep)
    effective.insert(effective.begin(), kSentenceStart);
  return effective;
}

void NgramModel::add_count(const std::vector<std::string>& context,
                           const std::string& word, long long count) {
  auto key = effective_context(context);
  counts_[key][word] += count;
  totals_[key] += count;
}

long long NgramModel::count(const std::vector<std::string>& context,
                            const std::string& word) const {
  auto key = effective_context(context);
  auto it = counts_.find(key);
  if (it == counts_.end()) return 0;
  auto word_it = it->second.find(word);
  return word_it == it->second.end() ? 0 : word_it->second;
}

bool NgramModel::in_vocabulary(const std::string& word) const {
  return vocab_set_.count(word) > 0;
}

TokenDistribution NgramModel::next_distribution(
    const std::vector<std::string>& context) const {
  auto key = effective_context(context);
  const std::map<std::string, long long>* observed = nullptr;
  long long total = 0;
  auto it = counts_.find(key);
  if (it != counts_.end()) {
    observed = &it->second;
    total = totals_.at(key);
  }
  double denom =
      static_cast<double>(total) + alpha_ * static_cast<double>(vocabulary_.size());
  TokenDistribution dist;
  dist.context_len = static_cast<int>(context.size());
  dist.support.reserve(vocabulary_.size());
  auto observed_it =
      observed ? observed->begin() : std::map<std::string, long long>::const_iterator{};
  for (const std::string& word : vocabulary_) {
    long long count = 0;
    if (observed) {
      while (observed_it != observed->end() && observed_it->first < word)
        ++observed_it;
      if (observed_it != observed->end() && observed_it->first == word)
        count = observed_it->second;
    }
    dist.support.emplace_back(word,
                              (static_cast<double>(count) + alpha_) / denom);
  }
  return dist;
}

double NgramModel::token_logprob(const std::string& word,
                                 const std::vector<std::string>& context) const {
  if (!vocab_set_.count(word)) return kNegInf;
  auto key = effective_context(context);
  long long c = 0;
  long long total = 0;
  auto it = counts_.find(key);
  if (it != counts_.end()) {
    total = totals_.at(key);
    auto word_it = it->second.find(word);
    if (word_it != it->second.end()) c = word_it->second;
  }
  double denom =
      static_cast<double>(total) + alpha_ * static_cast<double>(vocabulary_.size());
  return std::log((static_cast<double>(c) + alpha_) / denom);
}

void NgramModel::save(std::ostream& out) const {
  json dump;
  dump["format_version"] = 1;
  dump["order"] = order_;
  dump["alpha"] = alpha_;
  dump["vocabulary"] = vocabulary_;
  json counts = json::object();
  for (const auto& [context, words] : counts_) {
    std::string key;
    for (const auto& word : context) {
      if (!key.empty()) key += ' ';
      key += word;
    }
    json row = json::object();
    for (const auto& [word, count] : words) row[word] = count;
    counts[key] = row;
  }
  dump["counts"] = counts;
  out << dump.dump() << "\n";
}

NgramModel NgramModel::load(std::istream& in) {
  if (!in.good()) throw LoadError("ngram model unreadable");
  json dump;
  try {
    in >> dump;
  } catch (const json::exception& e) {
    throw LoadError(std::string("bad ngram model: ") + e.what());
  }
  if (dump.value("format_version", 0) != 1)
    throw LoadError("unsupported ngram model version");
  std::set<std::string> vocabulary;
  for (const auto& word : dump.at("vocabulary"))
    vocabulary.insert(word.get<std::string>());
  NgramModel model(dump.at("order"), dump.at("alpha"), std::move(vocabulary));
  for (const auto& [key, row] : dump.at("counts").items()) {
    std::vector<std::string> context;
    std::istringstream key_in(key);
    std::string token;
    while (key_in >> token) context.push_back(token);
    for (const auto& [word, count] : row.items())
      model.add_count(context, word, count.get<long long>());
  }
  return model;
}

NgramModel NgramModel::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open ngram model: " + path);
  return load(in);
}

NgramModel train_ngram(std::istream& corpus, int order, double alpha) {
  if (order < 1) throw ContractViolation("ngram order must be >= 1");
  if (alpha <= 0.0) throw ContractViolation("smoothing alpha must be > 0");
  if (!corpus.good()) throw LoadError("training corpus unreadable");
  std::vector<std::vector<std::string>> sentences;
  std::set<std::string> vocabulary;
  std::string line;
  while (std::getline(corpus, line)) {
    std::istringstream in(line);
    std::vector<std::string> tokens;
    std::string token;
    while (in >> token) tokens.push_back(case_fold(token));
    if (tokens.empty()) continue;
    for (const auto& t : tokens) vocabulary.insert(t);
    sentences.push_back(std::move(tokens));
  }
  if (sentences.empty()) throw LoadError("empty training corpus");
  NgramModel model(order, alpha, std::move(vocabulary));
  std::size_t pad = static_cast<std::size_t>(order - 1);
  for (const auto& tokens : sentences) {
    std::vector<std::string> padded(pad, kSentenceStart);
    padded.insert(padded.end(), tokens.begin(), tokens.end());
    for (std::size_t i = pad; i < padded.size(); ++i) {
      std::vector<std::string> context(padded.begin(), padded.begin() + i);
      model.add_count(context, padded[i]);
    }
  }
  return model;
}

NgramModel train_ngram_file(const std::string& path, int order, double alpha) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open training corpus: " + path);
  return train_ngram(in, order, alpha);
}

double score_line(const LanguageModel& model,
                  const std::vector<std::string>& words,
                  const std::vector<std::string>& conditioning_prefix) {
  if (words.empty()) throw ContractViolation("cannot score an empty line");
  std::vector<std::string> context = conditioning_prefix;
  double sum = 0.0;
  for (const std::string& word : words) {
    double lp = model.token_logprob(word, context);
    if (lp == kNegInf) return kNegInf;
    sum += lp;
    context.push_back(word);
  }
  return sum / static_cast<double>(words.size());
}

TokenDistribution remote_next_distribution(
    const RemoteEndpointConfig& config,
    const std::vector<std::string>& context) {
  if (config.top_k < 1) throw ContractViolation("top_k must be >= 1");
  std::string host = config.base_url;
  // Accept either "http://host:port" or bare "host:port".
  if (host.rfind("http://", 0) == 0) host = host.substr(7);
  while (!host.empty() && host.back() == '/') host.pop_back();

  httplib::Client client(("http://" + host).c_str());
  client.set_connection_timeout(0, config.timeout_ms * 1000);
  client.set_read_timeout(0, config.timeout_ms * 1000);

  json request;
  request["context"] = context;
  request["top_k"] = config.top_k;
  auto result = client.Post("/v1/distribution", request.dump(),
                            "application/json");
  if (!result)
    throw ScoringBackendError("remote scoring transport failure: " +
                              httplib::to_string(result.error()));
  if (result->status < 200 || result->status >= 300)
    throw ScoringBackendError("remote scoring status " +
                              std::to_string(result->status));
  json response;
  try {
    response = json::parse(result->body);
  } catch (const json::exception& e) {
    throw ScoringBackendError(std::string("remote scoring bad json: ") +
                              e.what());
  }
  if (!response.contains("tokens") || !response["tokens"].is_array())
    throw ScoringBackendError("remote scoring response missing tokens");
  std::map<std::string, double> masses;
  for (const auto& entry : response["tokens"]) {
    if (!entry.contains("token") || !entry.contains("logprob") ||
        !entry["token"].is_string() || !entry["logprob"].is_number())
      throw ScoringBackendError("remote scoring malformed token entry");
    masses[entry["token"].get<std::string>()] +=
        std::exp(entry["logprob"].get<double>());
  }
  if (masses.empty()) throw ScoringBackendError("remote scoring empty support");
  double total = 0.0;
  for (const auto& [token, mass] : masses) total += mass;
  if (total <= 0.0)
    throw ScoringBackendError("remote scoring zero total mass");
  TokenDistribution dist;
  dist.context_len = static_cast<int>(context.size());
  dist.truncated = true;
  for (const auto& [token, mass] : masses)
    dist.support.emplace_back(token, mass / total);
  return dist;
}

RemoteModel::RemoteModel(RemoteEndpointConfig config)
    : config_(std::move(config)) {}

TokenDistribution RemoteModel::next_distribution(
    const std::vector<std::string>& context) const {
  return remote_next_distribution(config_, context);
}

}  // namespace limerick
