#pragma once

#include "pragma/core.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace pragma {

/**
 * Next-token distribution given a source sentence and a target-side prefix.
 *
 * This is the only place where the pragmatic speakers and listeners touch a
 * model backend. A backward (target -> source) translation model is an
 * ordinary ConditionalSequenceModel with the vocabularies swapped.
 *
 * Implementations must be deterministic and safe for concurrent reads.
 */
class ConditionalSequenceModel {
 public:
  virtual ~ConditionalSequenceModel() = default;

  virtual const Vocabulary& source_vocab() const = 0;
  virtual const Vocabulary& target_vocab() const = 0;
  /// Opaque identity used to tell model instances apart.
  virtual const std::string& identity_tag() const = 0;

  /// Distribution over the full target vocabulary, EOS included.
  /// Throws UnknownToken for out-of-vocabulary ids and InvalidInput for a
  /// terminated prefix.
  LogDistribution next_token_dist(const Sentence& source, const Sentence& prefix) const;

  /// Sum of next-token log probabilities along `sentence`, including the EOS
  /// step when the sentence is terminated.
  double sequence_logprob(const Sentence& source, const Sentence& sentence) const;

 protected:
  virtual LogDistribution compute_next_token_dist(const Sentence& source, const Sentence& prefix) const = 0;
  /// Default is the chain rule over compute_next_token_dist.
  virtual double compute_sequence_logprob(const Sentence& source, const Sentence& sentence) const;

  void check_source(const Sentence& source) const;
  void check_target(const Sentence& target) const;
};

inline LogDistribution next_token_dist(const ConditionalSequenceModel& model, const Sentence& source,
                                       const Sentence& prefix) {
  return model.next_token_dist(source, prefix);
}

inline double sequence_logprob(const ConditionalSequenceModel& model, const Sentence& source,
                               const Sentence& sentence) {
  return model.sequence_logprob(source, sentence);
}

/// log S0(continuation | source, prefix): the chain-rule product of the steps
/// that extend `prefix` into `full`. `full` must start with `prefix`.
double continuation_logprob(const ConditionalSequenceModel& model, const Sentence& source,
                            const Sentence& prefix, const Sentence& full);

/// Upper bound on the number of sequences brute-force enumeration may visit.
inline constexpr double kEnumerationLimit = 1e7;

/// Every terminated sentence of length <= max_len with nonzero probability,
/// in depth-first token-id order, scored by sequence_logprob.
/// Throws EnumerationTooLarge if |V|^max_len exceeds kEnumerationLimit.
std::vector<ScoredSentence> enumerate_sentences(const ConditionalSequenceModel& model, const Sentence& source,
                                                std::size_t max_len);

/// Terminated extensions of `prefix` with total length <= max_len, each with
/// the log probability of the continuation only (the prefix is given).
std::vector<ScoredSentence> enumerate_continuations(const ConditionalSequenceModel& model, const Sentence& source,
                                                    const Sentence& prefix, std::size_t max_len);

}  // namespace pragma
