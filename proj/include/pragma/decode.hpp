#pragma once

#include "pragma/model.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace pragma {

/// Next-token distribution for a source sentence and a target prefix.
using StepFn = std::function<LogDistribution(const Sentence& source, const Sentence& prefix)>;

/// The base speaker's word-level step.
StepFn base_step(const ConditionalSequenceModel& model);

/// Appends the argmax token until EOS or until the sentence reaches max_len;
/// in the latter case the result is returned with terminated == false.
Sentence greedy_decode(const StepFn& step, const Sentence& source, std::size_t max_len, TokenId eos);
Sentence greedy_decode(const ConditionalSequenceModel& model, const Sentence& source, std::size_t max_len);

/**
 * Beam search over `step` scores. Finished hypotheses compete by total log
 * probability; up to beam_width terminated sentences come back best first
 * (ties by token sequence). If nothing terminates within max_len the best
 * truncated hypotheses are returned instead, so beam_width == 1 always
 * agrees with greedy_decode.
 */
std::vector<ScoredSentence> beam_decode(const StepFn& step, const Sentence& source, std::size_t beam_width,
                                        std::size_t max_len, TokenId eos);
std::vector<ScoredSentence> beam_decode(const ConditionalSequenceModel& model, const Sentence& source,
                                        std::size_t beam_width, std::size_t max_len);

}  // namespace pragma
