#pragma once

/**
 * Pragmatic speakers and listeners over a ConditionalSequenceModel.
 *
 * Naming: S0 is the base speaker (the forward model), L0 a backward
 * (target -> source) model, L1 the Bayesian listener over a distractor set
 * and S1 a speaker that weighs fluency against what a listener would infer.
 * "Global" variants score whole utterances; "incremental" variants apply the
 * same reasoning at every next-word decision.
 *
 * alpha is always an exponent on the listener term, so alpha == 0 reduces
 * every speaker to S0 on the same support.
 */

#include "pragma/decode.hpp"
#include "pragma/model.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

namespace pragma {

/// Source sentences a listener chooses between, with a prior over them.
/// Keys of the prior are positions in `sentences`.
class DistractorSet {
 public:
  /// Uniform prior. Sentences must be distinct and nonempty.
  explicit DistractorSet(std::vector<Sentence> sentences);
  DistractorSet(std::vector<Sentence> sentences, LogDistribution prior);

  const std::vector<Sentence>& sentences() const noexcept { return sentences_; }
  const LogDistribution& prior() const noexcept { return prior_; }
  std::size_t size() const noexcept { return sentences_.size(); }
  std::optional<Key> index_of(const Sentence& s) const;

 private:
  std::vector<Sentence> sentences_;
  LogDistribution prior_;
};

/// A finite stand-in for the space of target utterances. Duplicates are
/// dropped, first occurrence wins; keys of distributions over a
/// CandidateSet are positions in `utterances()`.
class CandidateSet {
 public:
  explicit CandidateSet(std::vector<Sentence> utterances);

  const std::vector<Sentence>& utterances() const noexcept { return utterances_; }
  std::size_t size() const noexcept { return utterances_.size(); }

 private:
  std::vector<Sentence> utterances_;
};

// ----------------------------------------------------------------------------
// Explicit distractors
// ----------------------------------------------------------------------------

/// L1(w | u) over the distractor set.
LogDistribution l1_sentence(const ConditionalSequenceModel& fwd, const DistractorSet& distractors, const Sentence& u);

/// S1-GP(u | w) over the candidate set.
LogDistribution s1_global(const ConditionalSequenceModel& fwd, const DistractorSet& distractors, const Sentence& w,
                          const CandidateSet& candidates, double alpha);

/// L1(w | wd, c): which distractor would have produced `wd` after `c`.
LogDistribution l1_word(const ConditionalSequenceModel& fwd, const DistractorSet& distractors, TokenId wd,
                        const Sentence& c);

/// S1(wd | w, c) over the target vocabulary.
LogDistribution s1_word(const ConditionalSequenceModel& fwd, const DistractorSet& distractors, const Sentence& w,
                        const Sentence& c, double alpha);

/// Incremental speaker with explicit distractors. Greedy when
/// config.beam_width == 1, beam search over s1_word otherwise; the trace
/// follows the returned sentence.
DecodeResult decode_s1_ip(const ConditionalSequenceModel& fwd, const DistractorSet& distractors, const Sentence& w,
                          const PragmaticsConfig& config);

// ----------------------------------------------------------------------------
// Cycle-consistent (no explicit distractors)
// ----------------------------------------------------------------------------

/// Ranks candidates by log S0(u | w) + alpha * log L0(w | u), best first;
/// ties are broken by token sequence.
std::vector<ScoredSentence> s1_cgp_rerank(const ConditionalSequenceModel& fwd, const ConditionalSequenceModel& bwd,
                                          const Sentence& w, const CandidateSet& candidates, double alpha);

/// Greedy continuations memoized per (source, prefix) for one decode.
class RolloutCache {
 public:
  /// Greedily unrolls `fwd` from `from` until EOS or max_len.
  Sentence rollout(const ConditionalSequenceModel& fwd, const Sentence& w, const Sentence& from, std::size_t max_len);

  std::size_t hits() const noexcept { return hits_; }
  std::size_t size() const noexcept { return memo_.size(); }

 private:
  using MemoKey = std::tuple<std::vector<TokenId>, Sentence, std::size_t>;
  std::map<MemoKey, Sentence> memo_;
  std::size_t hits_ = 0;
};

struct WordStep {
  LogDistribution dist;
  StepRecord record;
};

/**
 * One step of the cyclic incremental speaker with the greedy-rollout
 * approximation: the top candidate_width_k next tokens under S0 are each
 * completed greedily and scored by log S0(wd | w, c) + alpha * log L0(w |
 * c+wd+k). The distribution is over the candidates only. A rollout that
 * hits max_len without EOS is scored as-is and flagged in the record.
 */
WordStep s1_word_c(const ConditionalSequenceModel& fwd, const ConditionalSequenceModel& bwd, const Sentence& w,
                   const Sentence& c, const PragmaticsConfig& config, RolloutCache* cache = nullptr);

/// The same step with the continuation sum computed exactly:
/// log S0(wd | w, c) + log sum_k S0(k | w, c+wd) * L0(w | c+wd+k)^alpha
/// over every terminating continuation k within max_len.
LogDistribution s1_word_c_exact(const ConditionalSequenceModel& fwd, const ConditionalSequenceModel& bwd,
                                const Sentence& w, const Sentence& c, double alpha, std::size_t max_len);
WordStep s1_word_c_exact_step(const ConditionalSequenceModel& fwd, const ConditionalSequenceModel& bwd,
                              const Sentence& w, const Sentence& c, double alpha, std::size_t max_len);

/// Greedy decode over s1_word_c (config.rollout == greedy) or
/// s1_word_c_exact (config.rollout == exact).
DecodeResult decode_s1_cip(const ConditionalSequenceModel& fwd, const ConditionalSequenceModel& bwd,
                           const Sentence& w, const PragmaticsConfig& config);

/// Sum over the steps of `u` of log step(w, u[:t])[u[t]], EOS step included.
double incremental_logscore(const StepFn& step, const Sentence& w, const Sentence& u, TokenId eos);

/// Throws InvalidInput unless bwd maps fwd's target language back to its
/// source language.
void check_direction(const ConditionalSequenceModel& fwd, const ConditionalSequenceModel& bwd);

}  // namespace pragma
