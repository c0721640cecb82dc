#include "pragma/model.hpp"

#include <algorithm>
#include <cmath>

namespace pragma {

void ConditionalSequenceModel::check_source(const Sentence& source) const {
  const Vocabulary& vocab = source_vocab();
  for (TokenId t : source.tokens) {
    if (!vocab.contains(t) || t == vocab.eos())
      throw UnknownToken("source token id " + std::to_string(t) + " is not in the source vocabulary");
  }
}

void ConditionalSequenceModel::check_target(const Sentence& target) const {
  const Vocabulary& vocab = target_vocab();
  for (TokenId t : target.tokens) {
    if (!vocab.contains(t) || t == vocab.eos())
      throw UnknownToken("target token id " + std::to_string(t) + " is not in the target vocabulary");
  }
}

LogDistribution ConditionalSequenceModel::next_token_dist(const Sentence& source, const Sentence& prefix) const {
  if (prefix.terminated) throw InvalidInput("next_token_dist called with a terminated prefix");
  check_source(source);
  check_target(prefix);
  return compute_next_token_dist(source, prefix);
}

double ConditionalSequenceModel::sequence_logprob(const Sentence& source, const Sentence& sentence) const {
  check_source(source);
  check_target(sentence);
  return compute_sequence_logprob(source, sentence);
}

double ConditionalSequenceModel::compute_sequence_logprob(const Sentence& source, const Sentence& sentence) const {
  return continuation_logprob(*this, source, Sentence::prefix(), sentence);
}

double continuation_logprob(const ConditionalSequenceModel& model, const Sentence& source, const Sentence& prefix,
                            const Sentence& full) {
  if (prefix.terminated) throw InvalidInput("continuation of a terminated prefix");
  if (full.tokens.size() < prefix.tokens.size() ||
      !std::equal(prefix.tokens.begin(), prefix.tokens.end(), full.tokens.begin()))
    throw InvalidInput("sentence does not extend the given prefix");

  const TokenId eos = model.target_vocab().eos();
  Sentence current = prefix;
  double total = 0.0;
  for (std::size_t t = prefix.tokens.size(); t < full.tokens.size(); ++t) {
    total += model.next_token_dist(source, current).logprob(full.tokens[t]);
    if (total == kNegInf) return kNegInf;
    current.tokens.push_back(full.tokens[t]);
  }
  if (full.terminated) total += model.next_token_dist(source, current).logprob(eos);
  return total;
}

namespace {

void check_guard(std::size_t vocab_size, std::size_t depth) {
  double visits = std::pow(static_cast<double>(vocab_size), static_cast<double>(depth));
  if (visits > kEnumerationLimit)
    throw EnumerationTooLarge("enumeration would visit " + std::to_string(visits) + " sequences (limit " +
                              std::to_string(static_cast<long long>(kEnumerationLimit)) + ")");
}

void expand(const ConditionalSequenceModel& model, const Sentence& source, Sentence& current, double logprob,
            std::size_t max_len, std::vector<ScoredSentence>& out) {
  // Room for at least the EOS step.
  if (current.length() >= max_len) return;
  const TokenId eos = model.target_vocab().eos();
  LogDistribution dist = model.next_token_dist(source, current);
  auto keys = dist.support();
  auto weights = dist.logweights();
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (weights[i] == kNegInf) continue;
    if (keys[i] == eos) {
      Sentence done = current;
      done.terminated = true;
      out.push_back({std::move(done), logprob + weights[i]});
      continue;
    }
    current.tokens.push_back(keys[i]);
    expand(model, source, current, logprob + weights[i], max_len, out);
    current.tokens.pop_back();
  }
}

}  // namespace

std::vector<ScoredSentence> enumerate_continuations(const ConditionalSequenceModel& model, const Sentence& source,
                                                    const Sentence& prefix, std::size_t max_len) {
  if (prefix.terminated) throw InvalidInput("cannot enumerate continuations of a terminated prefix");
  std::size_t depth = max_len > prefix.length() ? max_len - prefix.length() : 0;
  check_guard(model.target_vocab().size(), depth);
  std::vector<ScoredSentence> out;
  Sentence current = prefix;
  expand(model, source, current, 0.0, max_len, out);
  return out;
}

std::vector<ScoredSentence> enumerate_sentences(const ConditionalSequenceModel& model, const Sentence& source,
                                                std::size_t max_len) {
  return enumerate_continuations(model, source, Sentence::prefix(), max_len);
}

}  // namespace pragma
