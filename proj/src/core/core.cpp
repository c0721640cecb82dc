#include "pragma/core.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <numeric>

namespace pragma {

// ============================================================================
// Vocabulary / Sentence
// ============================================================================

Vocabulary::Vocabulary(std::vector<std::string> surfaces) : surfaces_(std::move(surfaces)) {
  surfaces_.emplace_back(kEosSurface);
  index_.reserve(surfaces_.size());
  for (std::size_t i = 0; i < surfaces_.size(); ++i) {
    const std::string& s = surfaces_[i];
    if (s.empty()) throw InvalidInput("empty surface form in vocabulary");
    if (std::any_of(s.begin(), s.end(), [](unsigned char ch) { return std::isspace(ch); }))
      throw InvalidInput("surface form contains whitespace: '" + s + "'");
    if (i + 1 < surfaces_.size() && s == kEosSurface)
      throw InvalidInput("surface form '" + s + "' is reserved for end of sentence");
    if (!index_.emplace(s, static_cast<TokenId>(i)).second)
      throw InvalidInput("duplicate surface form '" + s + "'");
  }
}

std::string_view Vocabulary::surface(TokenId id) const {
  if (!contains(id)) throw UnknownToken("token id " + std::to_string(id) + " out of range");
  return surfaces_[id];
}

std::optional<TokenId> Vocabulary::find(std::string_view surface) const {
  auto it = index_.find(std::string(surface));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::id(std::string_view surface) const {
  if (auto id = find(surface)) return *id;
  throw UnknownToken("unknown token '" + std::string(surface) + "'");
}

Sentence Sentence::extended(TokenId token, TokenId eos) const {
  if (terminated) throw InvalidInput("cannot extend a terminated sentence");
  Sentence out = *this;
  if (token == eos) {
    out.terminated = true;
  } else {
    out.tokens.push_back(token);
  }
  return out;
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

Sentence parse_sentence(const Vocabulary& vocab, std::string_view line) {
  Sentence out;
  out.terminated = true;
  for (const auto& word : split_whitespace(line)) {
    TokenId id = vocab.id(word);
    if (id == vocab.eos()) throw InvalidInput("explicit end-of-sentence token in input");
    out.tokens.push_back(id);
  }
  return out;
}

std::string render_sentence(const Vocabulary& vocab, const Sentence& sentence) {
  std::string out;
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    if (i) out += ' ';
    out += vocab.surface(sentence.tokens[i]);
  }
  return out;
}

std::string render_sentence_with_eos(const Vocabulary& vocab, const Sentence& sentence) {
  std::string out = render_sentence(vocab, sentence);
  if (sentence.terminated) {
    if (!out.empty()) out += ' ';
    out += Vocabulary::kEosSurface;
  }
  return out;
}

// ============================================================================
// Audit
// ============================================================================

namespace {

std::atomic<std::uint64_t> g_checked{0};
std::atomic<std::uint64_t> g_rejected{0};
std::atomic<double> g_worst{0.0};

void record_check(double error, bool violated) {
  if (violated) {
    g_rejected.fetch_add(1, std::memory_order_relaxed);
    return;
  }
  g_checked.fetch_add(1, std::memory_order_relaxed);
  double current = g_worst.load(std::memory_order_relaxed);
  while (error > current && !g_worst.compare_exchange_weak(current, error)) {
  }
}

}  // namespace

DistributionAudit distribution_audit() {
  return {g_checked.load(), g_rejected.load(), g_worst.load()};
}

void reset_distribution_audit() {
  g_checked = 0;
  g_rejected = 0;
  g_worst = 0.0;
}

// ============================================================================
// LogDistribution
// ============================================================================

double log_sum_exp(std::span<const double> values) {
  double max = kNegInf;
  for (double v : values) max = std::max(max, v);
  if (max == kNegInf) return kNegInf;
  if (std::isinf(max)) return max;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max);
  return max + std::log(sum);
}

LogDistribution LogDistribution::from_normalized(std::vector<Key> keys, std::vector<double> logweights,
                                                 double tolerance) {
  if (keys.size() != logweights.size())
    throw InvalidInput("key and weight counts differ");
  if (keys.empty()) throw AllZeroSupport("empty support");

  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  std::vector<Key> sorted_keys;
  std::vector<double> sorted_weights;
  sorted_keys.reserve(keys.size());
  sorted_weights.reserve(keys.size());
  for (std::size_t i : order) {
    if (!sorted_keys.empty() && sorted_keys.back() == keys[i])
      throw InvalidInput("duplicate key " + std::to_string(keys[i]));
    if (std::isnan(logweights[i]) || logweights[i] == std::numeric_limits<double>::infinity())
      throw NormalizationError("non-finite log weight for key " + std::to_string(keys[i]));
    sorted_keys.push_back(keys[i]);
    sorted_weights.push_back(logweights[i]);
  }

  bool any_finite = std::any_of(sorted_weights.begin(), sorted_weights.end(),
                                [](double w) { return w != kNegInf; });
  if (!any_finite) throw AllZeroSupport("every weight is zero");

  double total = 0.0;
  for (double w : sorted_weights) total += std::exp(w);
  double error = std::abs(total - 1.0);
  bool violated = !(error <= tolerance);
  record_check(error, violated);
  if (violated)
    throw NormalizationError("distribution sums to " + std::to_string(total));

  return LogDistribution(std::move(sorted_keys), std::move(sorted_weights));
}

LogDistribution LogDistribution::point_mass(Key key) { return from_normalized({key}, {0.0}); }

bool LogDistribution::contains(Key key) const {
  return std::binary_search(keys_.begin(), keys_.end(), key);
}

double LogDistribution::logprob(Key key) const {
  auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
  if (it == keys_.end() || *it != key) return kNegInf;
  return logweights_[static_cast<std::size_t>(it - keys_.begin())];
}

double LogDistribution::prob(Key key) const { return std::exp(logprob(key)); }

LogDistribution log_normalize(std::vector<Key> keys, std::vector<double> logweights) {
  for (double w : logweights) {
    if (std::isnan(w) || w == std::numeric_limits<double>::infinity())
      throw NormalizationError("log weight is NaN or +inf");
  }
  double total = log_sum_exp(logweights);
  if (total == kNegInf) throw AllZeroSupport("every weight is zero");
  for (double& w : logweights) {
    if (w != kNegInf) w -= total;
  }
  return LogDistribution::from_normalized(std::move(keys), std::move(logweights));
}

LogDistribution log_normalize(std::span<const std::pair<Key, double>> weights) {
  std::vector<Key> keys;
  std::vector<double> values;
  keys.reserve(weights.size());
  values.reserve(weights.size());
  for (const auto& [k, w] : weights) {
    keys.push_back(k);
    values.push_back(w);
  }
  return log_normalize(std::move(keys), std::move(values));
}

Key argmax(const LogDistribution& dist) {
  auto keys = dist.support();
  auto weights = dist.logweights();
  std::size_t best = 0;
  // Support is sorted by key, so a strict comparison keeps the lowest key.
  for (std::size_t i = 1; i < keys.size(); ++i) {
    if (weights[i] > weights[best]) best = i;
  }
  return keys[best];
}

std::vector<Key> top_k(const LogDistribution& dist, std::size_t k) {
  auto keys = dist.support();
  auto weights = dist.logweights();
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (weights[i] != kNegInf) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return weights[a] > weights[b]; });
  if (idx.size() > k) idx.resize(k);
  std::vector<Key> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(keys[i]);
  return out;
}

// ============================================================================
// Config / trace
// ============================================================================

std::string_view to_string(RolloutPolicy policy) {
  switch (policy) {
    case RolloutPolicy::greedy:
      return "greedy";
    case RolloutPolicy::exact:
      return "exact";
  }
  return "greedy";
}

RolloutPolicy parse_rollout_policy(std::string_view text) {
  if (text == "greedy") return RolloutPolicy::greedy;
  if (text == "exact") return RolloutPolicy::exact;
  throw InvalidInput("unknown rollout policy '" + std::string(text) + "'");
}

void PragmaticsConfig::validate() const {
  if (!(alpha >= 0.0) || std::isinf(alpha)) throw InvalidInput("alpha must be a finite value >= 0");
  if (candidate_width_k < 1) throw InvalidInput("candidate width must be >= 1");
  if (beam_width < 1) throw InvalidInput("beam width must be >= 1");
  if (max_len < 1) throw InvalidInput("max_len must be >= 1");
}

bool DecodeTrace::any_rollout_truncated() const {
  for (const auto& step : steps) {
    for (const auto& c : step.candidates) {
      if (c.rollout_truncated) return true;
    }
  }
  return false;
}

double DecodeTrace::total_logprob() const {
  double total = 0.0;
  for (const auto& step : steps) {
    for (const auto& c : step.candidates) {
      if (c.token == step.chosen) total += c.step_logprob;
    }
  }
  return total;
}

}  // namespace pragma
