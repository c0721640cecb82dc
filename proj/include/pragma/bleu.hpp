#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pragma {

enum class Tokenizer { whitespace };

struct BleuConfig {
  int max_order = 4;
  bool case_sensitive = true;
  Tokenizer tokenizer = Tokenizer::whitespace;

  void validate() const;
};

using TokenList = std::vector<std::string>;

std::vector<std::string> tokenize(std::string_view text, const BleuConfig& config = {});

/// Clipped n-gram counts accumulated over a corpus.
struct BleuStats {
  std::vector<std::size_t> matches;  // index n-1
  std::vector<std::size_t> totals;   // hypothesis n-grams, index n-1
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;

  explicit BleuStats(int max_order = 4);
  void add(const TokenList& hypothesis, const TokenList& reference);
};

struct BleuResult {
  double score = 0.0;  // in [0, 100]
  std::vector<double> precisions;
  double brevity_penalty = 0.0;
  int effective_order = 0;
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;
};

/**
 * Corpus BLEU with one reference per hypothesis and no smoothing.
 *
 * The order is reduced to the largest n for which the hypotheses contain at
 * least one n-gram; any zero precision up to that order gives 0. Brevity
 * penalty is exp(min(0, 1 - r/c)) over total lengths.
 * Throws LengthMismatch and EmptyCorpus.
 */
BleuResult bleu_corpus_detailed(std::span<const TokenList> hypotheses, std::span<const TokenList> references,
                                const BleuConfig& config = {});
double bleu_corpus(std::span<const TokenList> hypotheses, std::span<const TokenList> references,
                   const BleuConfig& config = {});

/// Sentence-level BLEU with add-one smoothing for n >= 2. Diagnostic only:
/// it is not comparable with corpus scores.
double sentence_bleu_diagnostic(const TokenList& hypothesis, const TokenList& reference,
                                const BleuConfig& config = {});

}  // namespace pragma
