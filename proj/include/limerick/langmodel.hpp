#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "limerick/errors.hpp"

namespace limerick {

/// Reserved symbols. Neither belongs to any model vocabulary; UNK stands in
/// for out-of-vocabulary context words and is never emitted.
inline constexpr const char* kUnkToken = "<unk>";
inline constexpr const char* kSentenceStart = "<s>";

/// Sparse next-word distribution, sorted by word.
struct TokenDistribution {
  std::vector<std::pair<std::string, double>> support;
  int context_len = 0;
  bool truncated = false;  // top-k cut from a remote backend

  double prob(const std::string& word) const;
  double total_mass() const;
  /// Same support scaled to sum 1; empty support stays empty.
  TokenDistribution renormalized() const;
};

/// Anything that can propose next words given the words so far.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;
  virtual TokenDistribution next_distribution(
      const std::vector<std::string>& context) const = 0;
  /// Natural-log probability of one token in context; -inf when the model
  /// assigns (or reports) no mass.
  virtual double token_logprob(const std::string& word,
                               const std::vector<std::string>& context) const;
};

/// Add-alpha smoothed n-gram model over a fixed vocabulary. Immutable after
/// construction/training; P(w|ctx) = (count + alpha) / (total + alpha*|V|)
/// using the last order-1 context words (left-padded with <s>).
class NgramModel : public LanguageModel {
 public:
  NgramModel(int order, double alpha, std::set<std::string> vocabulary);

  TokenDistribution next_distribution(
      const std::vector<std::string>& context) const override;
  double token_logprob(const std::string& word,
                       const std::vector<std::string>& context) const override;

  void add_count(const std::vector<std::string>& context,
                 const std::string& word, long long count = 1);
  long long count(const std::vector<std::string>& context,
                  const std::string& word) const;

  int order() const { return order_; }
  double alpha() const { return alpha_; }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  bool in_vocabulary(const std::string& word) const;

  void save(std::ostream& out) const;
  static NgramModel load(std::istream& in);
  static NgramModel load_file(const std::string& path);

 private:
  std::vector<std::string> effective_context(
      const std::vector<std::string>& context) const;

  int order_;
  double alpha_;
  std::vector<std::string> vocabulary_;  // sorted
  std::set<std::string> vocab_set_;
  std::map<std::vector<std::string>, std::map<std::string, long long>> counts_;
  std::map<std::vector<std::string>, long long> totals_;
};

/// Train from a tokenized text stream, one sentence per line, case-folded.
/// Sentences are left-padded with <s>; vocabulary is the observed tokens.
NgramModel train_ngram(std::istream& corpus, int order, double alpha);
NgramModel train_ngram_file(const std::string& path, int order, double alpha);

/// Scorer H: mean per-token natural-log probability of `words` given the
/// running prefix (higher is better). Any zero-probability token makes the
/// whole line -inf.
double score_line(const LanguageModel& model,
                  const std::vector<std::string>& words,
                  const std::vector<std::string>& conditioning_prefix = {});

struct RemoteEndpointConfig {
  std::string base_url;
  int timeout_ms = 2000;
  int top_k = 50;
};

/// One POST {base_url}/v1/distribution request; returns the top_k tokens with
/// probabilities renormalized over the returned support, flagged truncated.
TokenDistribution remote_next_distribution(
    const RemoteEndpointConfig& config,
    const std::vector<std::string>& context);

/// LanguageModel adapter over a remote endpoint.
class RemoteModel : public LanguageModel {
 public:
  explicit RemoteModel(RemoteEndpointConfig config);
  TokenDistribution next_distribution(
      const std::vector<std::string>& context) const override;
  const RemoteEndpointConfig& config() const { return config_; }

 private:
  RemoteEndpointConfig config_;
};

}  // namespace limerick
