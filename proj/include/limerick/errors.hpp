#pragma once

#include <stdexcept>
#include <string>

namespace limerick {

/// Base class for all recoverable engine errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A resource file could not be read or contained no usable data.
struct LoadError : Error {
  using Error::Error;
};

/// A word was queried that is not covered by the loaded lexicon.
struct AbsentWordError : Error {
  explicit AbsentWordError(const std::string& word)
      : Error("word not in lexicon: " + word), word(word) {}
  std::string word;
};

/// A word was queried that has no embedding vector.
struct AbsentEmbeddingError : Error {
  explicit AbsentEmbeddingError(const std::string& word)
      : Error("word not in embedding space: " + word), word(word) {}
  std::string word;
};

/// A word could not be resolved to a POS tag.
struct TaggingError : Error {
  explicit TaggingError(const std::string& word)
      : Error("word not taggable: " + word), word(word) {}
  std::string word;
};

/// The remote scoring backend failed (transport, status, or schema).
struct ScoringBackendError : Error {
  using Error::Error;
};

/// A storyline conditional has no word with positive mass.
struct EmptySupportError : Error {
  using Error::Error;
};

/// A metric was requested on data it is undefined for.
struct UndefinedMetricError : Error {
  using Error::Error;
};

/// No poem survived generation; reports how far the search got.
struct GenerationError : Error {
  GenerationError(const std::string& what, int deepest_line)
      : Error(what), deepest_line(deepest_line) {}
  int deepest_line = 0;
};

/// Caller broke a documented precondition; a bug, not an input problem.
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace limerick
