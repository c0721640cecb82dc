#include "pragma/bleu.hpp"

#include "pragma/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

namespace pragma {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(const TokenList& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

TokenList folded(const TokenList& tokens, const BleuConfig& config) {
  if (config.case_sensitive) return tokens;
  TokenList out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(lower(t));
  return out;
}

int effective_order(const BleuStats& stats) {
  int order = 0;
  for (std::size_t n = 0; n < stats.totals.size(); ++n) {
    if (stats.totals[n] > 0) order = static_cast<int>(n) + 1;
  }
  return order;
}

double brevity_penalty(std::size_t hyp_length, std::size_t ref_length) {
  if (hyp_length == 0) return 0.0;
  return std::exp(std::min(0.0, 1.0 - static_cast<double>(ref_length) / static_cast<double>(hyp_length)));
}

}  // namespace

void BleuConfig::validate() const {
  if (max_order < 1) throw InvalidInput("BLEU max order must be >= 1");
}

std::vector<std::string> tokenize(std::string_view text, const BleuConfig& config) {
  auto tokens = split_whitespace(text);
  return folded(tokens, config);
}

BleuStats::BleuStats(int max_order)
    : matches(static_cast<std::size_t>(max_order), 0), totals(static_cast<std::size_t>(max_order), 0) {}

void BleuStats::add(const TokenList& hypothesis, const TokenList& reference) {
  hyp_length += hypothesis.size();
  ref_length += reference.size();
  for (std::size_t n = 1; n <= matches.size(); ++n) {
    NgramCounts hyp = count_ngrams(hypothesis, n);
    NgramCounts ref = count_ngrams(reference, n);
    for (const auto& [gram, count] : hyp) {
      totals[n - 1] += count;
      auto it = ref.find(gram);
      if (it != ref.end()) matches[n - 1] += std::min(count, it->second);
    }
  }
}

BleuResult bleu_corpus_detailed(std::span<const TokenList> hypotheses, std::span<const TokenList> references,
                                const BleuConfig& config) {
  config.validate();
  if (hypotheses.size() != references.size())
    throw LengthMismatch(std::to_string(hypotheses.size()) + " hypotheses but " + std::to_string(references.size()) +
                         " references");
  if (hypotheses.empty()) throw EmptyCorpus("BLEU needs at least one sentence pair");

  BleuStats stats(config.max_order);
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    stats.add(folded(hypotheses[i], config), folded(references[i], config));
  }

  BleuResult result;
  result.hyp_length = stats.hyp_length;
  result.ref_length = stats.ref_length;
  result.effective_order = effective_order(stats);
  result.brevity_penalty = brevity_penalty(stats.hyp_length, stats.ref_length);
  for (int n = 0; n < result.effective_order; ++n) {
    result.precisions.push_back(static_cast<double>(stats.matches[n]) / static_cast<double>(stats.totals[n]));
  }
  if (result.effective_order == 0) return result;

  double log_sum = 0.0;
  for (double p : result.precisions) {
    if (p == 0.0) return result;
    log_sum += std::log(p);
  }
  result.score = 100.0 * result.brevity_penalty * std::exp(log_sum / result.effective_order);
  return result;
}

double bleu_corpus(std::span<const TokenList> hypotheses, std::span<const TokenList> references,
                   const BleuConfig& config) {
  return bleu_corpus_detailed(hypotheses, references, config).score;
}

double sentence_bleu_diagnostic(const TokenList& hypothesis, const TokenList& reference, const BleuConfig& config) {
  config.validate();
  BleuStats stats(config.max_order);
  stats.add(folded(hypothesis, config), folded(reference, config));
  int order = effective_order(stats);
  if (order == 0 || stats.matches[0] == 0) return 0.0;
  double log_sum = 0.0;
  for (int n = 0; n < order; ++n) {
    double m = static_cast<double>(stats.matches[n]);
    double t = static_cast<double>(stats.totals[n]);
    log_sum += n == 0 ? std::log(m / t) : std::log((m + 1.0) / (t + 1.0));
  }
  return 100.0 * brevity_penalty(stats.hyp_length, stats.ref_length) * std::exp(log_sum / order);
}

}  // namespace pragma
