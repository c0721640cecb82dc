#pragma once

/**
 * Shared domain types and log-space probability algebra.
 *
 * Every probability in the library lives in log space. Exact zeros are
 * negative infinity and are propagated as such; nothing is floored.
 * Wherever a maximum is taken, ties go to the lowest key.
 */

#include "pragma/errors.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace pragma {

using Key = std::uint32_t;
using TokenId = Key;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Tolerance for the sum-to-one invariant of every LogDistribution.
inline constexpr double kNormalizationTolerance = 1e-9;

// ============================================================================
// Vocabulary / Sentence
// ============================================================================

/**
 * Bidirectional surface <-> id map. Listed surfaces get ids 0..n-1 in the
 * order given; the end-of-sentence token is always appended as id n.
 */
class Vocabulary {
 public:
  static constexpr std::string_view kEosSurface = "</s>";

  Vocabulary() : Vocabulary(std::vector<std::string>{}) {}
  explicit Vocabulary(std::vector<std::string> surfaces);

  /// Size including EOS.
  std::size_t size() const noexcept { return surfaces_.size(); }
  TokenId eos() const noexcept { return static_cast<TokenId>(surfaces_.size() - 1); }
  bool contains(TokenId id) const noexcept { return id < surfaces_.size(); }

  std::string_view surface(TokenId id) const;
  std::optional<TokenId> find(std::string_view surface) const;
  /// Throws UnknownToken for surfaces not in the vocabulary.
  TokenId id(std::string_view surface) const;

  /// Surfaces of the listed (non-EOS) tokens, in id order.
  std::span<const std::string> listed() const noexcept {
    return {surfaces_.data(), surfaces_.size() - 1};
  }

  bool operator==(const Vocabulary& other) const { return surfaces_ == other.surfaces_; }

 private:
  std::vector<std::string> surfaces_;
  std::unordered_map<std::string, TokenId> index_;
};

/**
 * A token sequence. EOS is not stored among the tokens; `terminated` records
 * whether the sentence ends with it, so EOS can only ever be final.
 * A prefix is a sentence with terminated == false.
 */
struct Sentence {
  std::vector<TokenId> tokens;
  bool terminated = false;

  static Sentence complete(std::vector<TokenId> tokens) { return {std::move(tokens), true}; }
  static Sentence prefix(std::vector<TokenId> tokens = {}) { return {std::move(tokens), false}; }

  /// Length counting the EOS step.
  std::size_t length() const noexcept { return tokens.size() + (terminated ? 1 : 0); }
  bool empty() const noexcept { return tokens.empty() && !terminated; }

  /// Appends `token`; appending `eos` terminates the sentence.
  Sentence extended(TokenId token, TokenId eos) const;

  auto operator<=>(const Sentence&) const = default;
  bool operator==(const Sentence&) const = default;
};

struct ScoredSentence {
  Sentence sentence;
  double logprob = kNegInf;

  bool operator==(const ScoredSentence&) const = default;
};

/// Whitespace-tokenizes `line` into a terminated sentence.
Sentence parse_sentence(const Vocabulary& vocab, std::string_view line);
/// Space-joined surfaces; EOS is not rendered.
std::string render_sentence(const Vocabulary& vocab, const Sentence& sentence);
/// Like render_sentence but with an explicit trailing "</s>" when terminated.
std::string render_sentence_with_eos(const Vocabulary& vocab, const Sentence& sentence);
std::vector<std::string> split_whitespace(std::string_view text);

// ============================================================================
// LogDistribution
// ============================================================================

/**
 * A normalized distribution over a finite set of keys, stored in log space.
 * The support is kept sorted by key. Construction always checks that the
 * exponentiated weights sum to one within kNormalizationTolerance.
 */
class LogDistribution {
 public:
  /// Wraps already-normalized weights. Throws NormalizationError if the sum
  /// is off by more than `tolerance`, and AllZeroSupport if every weight is
  /// -inf.
  static LogDistribution from_normalized(std::vector<Key> keys, std::vector<double> logweights,
                                         double tolerance = kNormalizationTolerance);

  /// Point mass on `key`.
  static LogDistribution point_mass(Key key);

  std::span<const Key> support() const noexcept { return keys_; }
  std::span<const double> logweights() const noexcept { return logweights_; }
  std::size_t size() const noexcept { return keys_.size(); }

  bool contains(Key key) const;
  /// Log weight of `key`, or -inf when it is outside the support.
  double logprob(Key key) const;
  double prob(Key key) const;

  bool operator==(const LogDistribution&) const = default;

 private:
  LogDistribution(std::vector<Key> keys, std::vector<double> logweights)
      : keys_(std::move(keys)), logweights_(std::move(logweights)) {}

  std::vector<Key> keys_;
  std::vector<double> logweights_;
};

/// log(sum(exp(x))) over finite and -inf inputs; -inf for an all -inf input.
double log_sum_exp(std::span<const double> values);

/// `alpha * logp`, with the convention that alpha == 0 contributes exactly 0
/// even when logp is -inf.
inline double scaled_log(double alpha, double logp) { return alpha == 0.0 ? 0.0 : alpha * logp; }

/// Shifts `weights` by a single constant so they sum to one in probability
/// space. Throws AllZeroSupport if every weight is -inf.
LogDistribution log_normalize(std::span<const std::pair<Key, double>> weights);
LogDistribution log_normalize(std::vector<Key> keys, std::vector<double> logweights);

/// Key with the largest weight; ties go to the lowest key.
Key argmax(const LogDistribution& dist);

/// Keys of the `k` largest finite weights, ordered by weight descending and
/// key ascending on ties.
std::vector<Key> top_k(const LogDistribution& dist, std::size_t k);

// ----------------------------------------------------------------------------
// Audit hook: every LogDistribution construction is checked and counted.
// `checked` and `worst_error` cover the distributions that were produced;
// `rejected` counts inputs refused with NormalizationError.
// ----------------------------------------------------------------------------

struct DistributionAudit {
  std::uint64_t checked = 0;
  std::uint64_t rejected = 0;
  double worst_error = 0.0;
};

DistributionAudit distribution_audit();
void reset_distribution_audit();

// ============================================================================
// Configuration and traces
// ============================================================================

enum class RolloutPolicy {
  greedy,  // one greedy continuation per candidate
  exact,   // full enumeration of continuations
};

std::string_view to_string(RolloutPolicy policy);
RolloutPolicy parse_rollout_policy(std::string_view text);

struct PragmaticsConfig {
  double alpha = 0.1;
  std::size_t candidate_width_k = 2;
  std::size_t beam_width = 1;
  std::size_t max_len = 50;
  RolloutPolicy rollout = RolloutPolicy::greedy;

  /// Throws InvalidInput when a field is out of range.
  void validate() const;
};

struct CandidateRecord {
  TokenId token = 0;
  double base_logprob = kNegInf;
  std::optional<Sentence> rollout;  // continuation c+wd+k, when one was used
  bool rollout_truncated = false;
  double listener_logscore = kNegInf;
  double combined_score = kNegInf;  // unnormalized
  double step_logprob = kNegInf;    // after normalization over candidates
};

struct StepRecord {
  Sentence prefix;
  std::vector<CandidateRecord> candidates;
  TokenId chosen = 0;
};

struct DecodeTrace {
  std::vector<StepRecord> steps;

  bool any_rollout_truncated() const;
  /// Sum of the chosen candidates' normalized step log probabilities.
  double total_logprob() const;
};

struct DecodeResult {
  Sentence sentence;
  DecodeTrace trace;
};

}  // namespace pragma
