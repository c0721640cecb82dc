#include "pragma/rsa.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace pragma {

namespace {

LogDistribution uniform_over(std::size_t n) {
  if (n == 0) throw InvalidInput("distractor set must not be empty");
  std::vector<Key> keys(n);
  std::vector<double> weights(n, -std::log(static_cast<double>(n)));
  for (std::size_t i = 0; i < n; ++i) keys[i] = static_cast<Key>(i);
  return LogDistribution::from_normalized(std::move(keys), std::move(weights));
}

void reject_empty_source(const Sentence& w) {
  if (w.tokens.empty()) throw InvalidInput("source sentence is empty");
}

Key require_member(const DistractorSet& distractors, const Sentence& w) {
  auto idx = distractors.index_of(w);
  if (!idx) throw InvalidInput("source sentence is not in the distractor set");
  return *idx;
}

LogDistribution normalize_or_throw(std::vector<Key> keys, std::vector<double> weights, const char* what) {
  try {
    return log_normalize(std::move(keys), std::move(weights));
  } catch (const AllZeroSupport&) {
    throw AllZeroSupport(std::string(what) + ": every score is zero");
  }
}

/// Sorted by score, then by token sequence with EOS as its id.
void sort_ranked(std::vector<ScoredSentence>& ranked, TokenId eos) {
  auto with_eos = [eos](const Sentence& s) {
    std::vector<TokenId> out = s.tokens;
    if (s.terminated) out.push_back(eos);
    return out;
  };
  std::stable_sort(ranked.begin(), ranked.end(), [&](const ScoredSentence& a, const ScoredSentence& b) {
    if (a.logprob != b.logprob) return a.logprob > b.logprob;
    return with_eos(a.sentence) < with_eos(b.sentence);
  });
}

/// Fills step_logprob from the normalized distribution and returns it.
LogDistribution finish_record(StepRecord& record, std::vector<Key> keys, std::vector<double> scores,
                              const char* what) {
  LogDistribution dist = normalize_or_throw(std::move(keys), std::move(scores), what);
  for (auto& cand : record.candidates) cand.step_logprob = dist.logprob(cand.token);
  record.chosen = argmax(dist);
  return dist;
}

/// s1_word with its per-candidate bookkeeping.
WordStep s1_word_step(const ConditionalSequenceModel& fwd, const DistractorSet& distractors, Key self,
                      const Sentence& c, double alpha) {
  const auto& sentences = distractors.sentences();
  std::vector<LogDistribution> per_source;
  per_source.reserve(sentences.size());
  for (const auto& s : sentences) per_source.push_back(fwd.next_token_dist(s, c));
  const LogDistribution& base = per_source[self];

  StepRecord record;
  record.prefix = c;
  std::vector<Key> keys;
  std::vector<double> scores;
  for (std::size_t i = 0; i < base.size(); ++i) {
    TokenId wd = base.support()[i];
    double base_lp = base.logweights()[i];
    keys.push_back(wd);
    if (base_lp == kNegInf) {
      scores.push_back(kNegInf);
      continue;
    }
    // L1(w | wd, c); the speaker's own source has nonzero likelihood here.
    std::vector<Key> wkeys;
    std::vector<double> wscores;
    for (std::size_t j = 0; j < sentences.size(); ++j) {
      wkeys.push_back(static_cast<Key>(j));
      wscores.push_back(distractors.prior().logprob(static_cast<Key>(j)) + per_source[j].logprob(wd));
    }
    double listener = log_normalize(std::move(wkeys), std::move(wscores)).logprob(self);
    double combined = base_lp + scaled_log(alpha, listener);
    scores.push_back(combined);
    CandidateRecord cand;
    cand.token = wd;
    cand.base_logprob = base_lp;
    cand.listener_logscore = listener;
    cand.combined_score = combined;
    record.candidates.push_back(std::move(cand));
  }
  LogDistribution dist = finish_record(record, std::move(keys), std::move(scores), "s1_word");
  return {std::move(dist), std::move(record)};
}

double backward_score(const ConditionalSequenceModel& bwd, const Sentence& u, const Sentence& w) {
  return bwd.sequence_logprob(u, w);
}

}  // namespace

// ============================================================================
// Sets
// ============================================================================

DistractorSet::DistractorSet(std::vector<Sentence> sentences)
    : DistractorSet(sentences, uniform_over(sentences.size())) {}

DistractorSet::DistractorSet(std::vector<Sentence> sentences, LogDistribution prior)
    : sentences_(std::move(sentences)), prior_(std::move(prior)) {
  if (sentences_.empty()) throw InvalidInput("distractor set must not be empty");
  std::set<Sentence> seen;
  for (const auto& s : sentences_) {
    reject_empty_source(s);
    if (!seen.insert(s).second) throw InvalidInput("distractor set contains a duplicate sentence");
  }
  for (Key k : prior_.support()) {
    if (k >= sentences_.size()) throw InvalidInput("prior has a key outside the distractor set");
  }
}

std::optional<Key> DistractorSet::index_of(const Sentence& s) const {
  for (std::size_t i = 0; i < sentences_.size(); ++i) {
    if (sentences_[i] == s) return static_cast<Key>(i);
  }
  return std::nullopt;
}

CandidateSet::CandidateSet(std::vector<Sentence> utterances) {
  std::set<Sentence> seen;
  for (auto& u : utterances) {
    if (seen.insert(u).second) utterances_.push_back(std::move(u));
  }
  if (utterances_.empty()) throw InvalidInput("candidate set must not be empty");
}

void check_direction(const ConditionalSequenceModel& fwd, const ConditionalSequenceModel& bwd) {
  if (!(bwd.source_vocab() == fwd.target_vocab()) || !(bwd.target_vocab() == fwd.source_vocab()))
    throw InvalidInput("backward model vocabularies do not mirror the forward model (" + fwd.identity_tag() +
                       " vs " + bwd.identity_tag() + ")");
}

// ============================================================================
// Explicit distractors
// ============================================================================

LogDistribution l1_sentence(const ConditionalSequenceModel& fwd, const DistractorSet& distractors, const Sentence& u) {
  if (!u.terminated) throw InvalidInput("l1_sentence needs a complete utterance");
  std::vector<Key> keys;
  std::vector<double> scores;
  const auto& sentences = distractors.sentences();
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    keys.push_back(static_cast<Key>(i));
    double prior = distractors.prior().logprob(static_cast<Key>(i));
    scores.push_back(prior == kNegInf ? kNegInf : prior + fwd.sequence_logprob(sentences[i], u));
  }
  return normalize_or_throw(std::move(keys), std::move(scores), "l1_sentence");
}

LogDistribution s1_global(const ConditionalSequenceModel& fwd, const DistractorSet& distractors, const Sentence& w,
                          const CandidateSet& candidates, double alpha) {
  Key self = require_member(distractors, w);
  std::vector<Key> keys;
  std::vector<double> scores;
  const auto& us = candidates.utterances();
  for (std::size_t j = 0; j < us.size(); ++j) {
    keys.push_back(static_cast<Key>(j));
    double base = fwd.sequence_logprob(w, us[j]);
    if (base == kNegInf) {
      scores.push_back(kNegInf);
      continue;
    }
    scores.push_back(base + scaled_log(alpha, l1_sentence(fwd, distractors, us[j]).logprob(self)));
  }
  return normalize_or_throw(std::move(keys), std::move(scores), "s1_global");
}

LogDistribution l1_word(const ConditionalSequenceModel& fwd, const DistractorSet& distractors, TokenId wd,
                        const Sentence& c) {
  std::vector<Key> keys;
  std::vector<double> scores;
  const auto& sentences = distractors.sentences();
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    keys.push_back(static_cast<Key>(i));
    scores.push_back(distractors.prior().logprob(static_cast<Key>(i)) +
                     fwd.next_token_dist(sentences[i], c).logprob(wd));
  }
  return normalize_or_throw(std::move(keys), std::move(scores), "l1_word");
}

LogDistribution s1_word(const ConditionalSequenceModel& fwd, const DistractorSet& distractors, const Sentence& w,
                        const Sentence& c, double alpha) {
  return s1_word_step(fwd, distractors, require_member(distractors, w), c, alpha).dist;
}

DecodeResult decode_s1_ip(const ConditionalSequenceModel& fwd, const DistractorSet& distractors, const Sentence& w,
                          const PragmaticsConfig& config) {
  config.validate();
  reject_empty_source(w);
  Key self = require_member(distractors, w);
  const TokenId eos = fwd.target_vocab().eos();
  DecodeResult result;

  if (config.beam_width == 1) {
    Sentence c = Sentence::prefix();
    while (!c.terminated && c.length() < config.max_len) {
      WordStep step = s1_word_step(fwd, distractors, self, c, config.alpha);
      step.record.chosen = argmax(step.dist);
      c = c.extended(step.record.chosen, eos);
      result.trace.steps.push_back(std::move(step.record));
    }
    result.sentence = std::move(c);
    return result;
  }

  StepFn step = [&](const Sentence&, const Sentence& prefix) {
    return s1_word_step(fwd, distractors, self, prefix, config.alpha).dist;
  };
  auto beam = beam_decode(step, w, config.beam_width, config.max_len, eos);
  result.sentence = beam.front().sentence;
  // Replay the steps along the winning hypothesis for the trace.
  Sentence c = Sentence::prefix();
  std::vector<TokenId> path = result.sentence.tokens;
  if (result.sentence.terminated) path.push_back(eos);
  for (TokenId token : path) {
    WordStep ws = s1_word_step(fwd, distractors, self, c, config.alpha);
    ws.record.chosen = token;
    c = c.extended(token, eos);
    result.trace.steps.push_back(std::move(ws.record));
  }
  return result;
}

// ============================================================================
// Cycle-consistent speakers
// ============================================================================

std::vector<ScoredSentence> s1_cgp_rerank(const ConditionalSequenceModel& fwd, const ConditionalSequenceModel& bwd,
                                          const Sentence& w, const CandidateSet& candidates, double alpha) {
  check_direction(fwd, bwd);
  std::vector<ScoredSentence> ranked;
  for (const auto& u : candidates.utterances()) {
    if (!u.terminated) throw InvalidInput("s1_cgp_rerank candidates must be complete sentences");
    double base = fwd.sequence_logprob(w, u);
    double score = base == kNegInf ? kNegInf : base + scaled_log(alpha, backward_score(bwd, u, w));
    ranked.push_back({u, score});
  }
  sort_ranked(ranked, fwd.target_vocab().eos());
  return ranked;
}

Sentence RolloutCache::rollout(const ConditionalSequenceModel& fwd, const Sentence& w, const Sentence& from,
                               std::size_t max_len) {
  const TokenId eos = fwd.target_vocab().eos();
  std::vector<Sentence> path;
  Sentence current = from;
  Sentence result;
  while (true) {
    if (current.terminated || current.length() >= max_len) {
      result = current;
      break;
    }
    auto it = memo_.find({w.tokens, current, max_len});
    if (it != memo_.end()) {
      ++hits_;
      result = it->second;
      break;
    }
    path.push_back(current);
    current = current.extended(argmax(fwd.next_token_dist(w, current)), eos);
  }
  for (auto& p : path) memo_.emplace(MemoKey{w.tokens, std::move(p), max_len}, result);
  return result;
}

WordStep s1_word_c(const ConditionalSequenceModel& fwd, const ConditionalSequenceModel& bwd, const Sentence& w,
                   const Sentence& c, const PragmaticsConfig& config, RolloutCache* cache) {
  config.validate();
  reject_empty_source(w);
  if (c.terminated) throw InvalidInput("prefix is already terminated");
  if (c.length() >= config.max_len) throw InvalidInput("prefix has reached max_len");

  RolloutCache local;
  RolloutCache& rollouts = cache ? *cache : local;
  const TokenId eos = fwd.target_vocab().eos();
  LogDistribution base = fwd.next_token_dist(w, c);

  StepRecord record;
  record.prefix = c;
  std::vector<Key> keys;
  std::vector<double> scores;
  for (TokenId wd : top_k(base, config.candidate_width_k)) {
    CandidateRecord cand;
    cand.token = wd;
    cand.base_logprob = base.logprob(wd);
    Sentence rolled = rollouts.rollout(fwd, w, c.extended(wd, eos), config.max_len);
    cand.rollout_truncated = !rolled.terminated;
    cand.listener_logscore = backward_score(bwd, rolled, w);
    cand.rollout = std::move(rolled);
    cand.combined_score = cand.base_logprob + scaled_log(config.alpha, cand.listener_logscore);
    keys.push_back(wd);
    scores.push_back(cand.combined_score);
    record.candidates.push_back(std::move(cand));
  }
  LogDistribution dist = finish_record(record, std::move(keys), std::move(scores), "s1_word_c");
  return {std::move(dist), std::move(record)};
}

WordStep s1_word_c_exact_step(const ConditionalSequenceModel& fwd, const ConditionalSequenceModel& bwd,
                              const Sentence& w, const Sentence& c, double alpha, std::size_t max_len) {
  reject_empty_source(w);
  if (c.terminated) throw InvalidInput("prefix is already terminated");
  if (c.length() >= max_len) throw InvalidInput("prefix has reached max_len");
  const TokenId eos = fwd.target_vocab().eos();
  LogDistribution base = fwd.next_token_dist(w, c);

  StepRecord record;
  record.prefix = c;
  std::vector<Key> keys;
  std::vector<double> scores;
  for (std::size_t i = 0; i < base.size(); ++i) {
    TokenId wd = base.support()[i];
    double base_lp = base.logweights()[i];
    keys.push_back(wd);
    if (base_lp == kNegInf) {
      scores.push_back(kNegInf);
      continue;
    }
    Sentence next = c.extended(wd, eos);
    double marginal;
    if (next.terminated) {
      marginal = scaled_log(alpha, backward_score(bwd, next, w));
    } else {
      std::vector<double> terms;
      for (const auto& k : enumerate_continuations(fwd, w, next, max_len)) {
        terms.push_back(k.logprob + scaled_log(alpha, backward_score(bwd, k.sentence, w)));
      }
      marginal = log_sum_exp(terms);
    }
    CandidateRecord cand;
    cand.token = wd;
    cand.base_logprob = base_lp;
    cand.listener_logscore = marginal;
    cand.combined_score = base_lp + marginal;
    scores.push_back(cand.combined_score);
    record.candidates.push_back(std::move(cand));
  }
  LogDistribution dist = finish_record(record, std::move(keys), std::move(scores), "s1_word_c_exact");
  return {std::move(dist), std::move(record)};
}

LogDistribution s1_word_c_exact(const ConditionalSequenceModel& fwd, const ConditionalSequenceModel& bwd,
                                const Sentence& w, const Sentence& c, double alpha, std::size_t max_len) {
  return s1_word_c_exact_step(fwd, bwd, w, c, alpha, max_len).dist;
}

DecodeResult decode_s1_cip(const ConditionalSequenceModel& fwd, const ConditionalSequenceModel& bwd,
                           const Sentence& w, const PragmaticsConfig& config) {
  config.validate();
  reject_empty_source(w);
  check_direction(fwd, bwd);
  const TokenId eos = fwd.target_vocab().eos();
  RolloutCache cache;
  DecodeResult result;
  Sentence c = Sentence::prefix();
  while (!c.terminated && c.length() < config.max_len) {
    WordStep step = config.rollout == RolloutPolicy::exact
                        ? s1_word_c_exact_step(fwd, bwd, w, c, config.alpha, config.max_len)
                        : s1_word_c(fwd, bwd, w, c, config, &cache);
    step.record.chosen = argmax(step.dist);
    c = c.extended(step.record.chosen, eos);
    result.trace.steps.push_back(std::move(step.record));
  }
  result.sentence = std::move(c);
  return result;
}

double incremental_logscore(const StepFn& step, const Sentence& w, const Sentence& u, TokenId eos) {
  double total = 0.0;
  Sentence c = Sentence::prefix();
  std::vector<TokenId> path = u.tokens;
  if (u.terminated) path.push_back(eos);
  for (TokenId token : path) {
    total += step(w, c).logprob(token);
    if (total == kNegInf) return kNegInf;
    c = c.extended(token, eos);
  }
  return total;
}

}  // namespace pragma
