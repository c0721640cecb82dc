#include "support.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace pragma::testing {

std::vector<Tokens> all_sequences(std::size_t listed, std::size_t lo, std::size_t hi) {
  std::vector<Tokens> out;
  std::vector<Tokens> layer{Tokens{}};
  for (std::size_t len = 0; len <= hi; ++len) {
    if (len >= lo) out.insert(out.end(), layer.begin(), layer.end());
    std::vector<Tokens> next;
    for (const auto& s : layer) {
      for (TokenId t = 0; t < listed; ++t) {
        Tokens e = s;
        e.push_back(t);
        next.push_back(std::move(e));
      }
    }
    layer = std::move(next);
  }
  return out;
}

namespace {

std::vector<std::string> words(const std::string& stem, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(stem + std::to_string(i));
  return out;
}

std::vector<double> normalized(std::vector<double> w) {
  double total = 0.0;
  for (double v : w) total += v;
  for (double& v : w) v /= total;
  return w;
}

}  // namespace

RandomModelShape random_shape(std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x5eed5eedULL);
  RandomModelShape s;
  s.source_listed = std::uniform_int_distribution<std::size_t>(2, 3)(rng);
  s.target_listed = std::uniform_int_distribution<std::size_t>(2, 5)(rng);
  s.max_source_len = std::uniform_int_distribution<std::size_t>(1, 2)(rng);
  s.max_len = std::uniform_int_distribution<std::size_t>(2, 4)(rng);
  s.zero_rate = std::uniform_real_distribution<double>(0.0, 0.4)(rng);
  return s;
}

RandomModels random_models(std::uint64_t seed) { return random_models(seed, random_shape(seed)); }

RandomModels random_models(std::uint64_t seed, const RandomModelShape& shape) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  std::bernoulli_distribution zero(shape.zero_rate);

  TabularModelSpec fwd;
  fwd.source_vocab = Vocabulary(words("s", shape.source_listed));
  fwd.target_vocab = Vocabulary(words("t", shape.target_listed));
  TabularModelSpec bwd;
  bwd.source_vocab = fwd.target_vocab;
  bwd.target_vocab = fwd.source_vocab;

  RandomModels out;
  out.shape = shape;
  auto sources = all_sequences(shape.source_listed, 1, shape.max_source_len);
  auto prefixes = all_sequences(shape.target_listed, 0, shape.max_len - 1);
  for (const auto& s : sources) {
    out.sources.push_back(Sentence::complete(s));
    for (const auto& p : prefixes) {
      std::vector<double> w(shape.target_listed + 1);
      for (std::size_t t = 0; t < shape.target_listed; ++t) w[t] = zero(rng) ? 0.0 : weight(rng);
      w[shape.target_listed] = weight(rng);
      fwd.entries[{s, p}] = normalized(std::move(w));
    }
  }
  // Backward sources include max_len-token sequences: truncated rollouts.
  auto targets = all_sequences(shape.target_listed, 0, shape.max_len);
  auto source_prefixes = all_sequences(shape.source_listed, 0, shape.max_source_len);
  for (const auto& u : targets) {
    for (const auto& p : source_prefixes) {
      std::vector<double> w(shape.source_listed + 1);
      for (double& v : w) v = weight(rng);
      bwd.entries[{u, p}] = normalized(std::move(w));
    }
  }
  fwd.validate();
  bwd.validate();
  std::string tag = "random:" + std::to_string(seed);
  out.fwd = std::make_shared<TabularModel>(std::move(fwd), tag + ":fwd");
  out.bwd = std::make_shared<TabularModel>(std::move(bwd), tag + ":bwd");
  return out;
}

namespace reference {

const std::vector<double>& row(const TabularModelSpec& m, const Tokens& source, const Tokens& prefix) {
  auto it = m.entries.find({source, prefix});
  if (it == m.entries.end()) throw std::out_of_range("reference: no table row");
  return it->second;
}

double sentence_prob(const TabularModelSpec& m, const Tokens& source, const Tokens& tokens, bool terminated) {
  double p = 1.0;
  Tokens prefix;
  for (TokenId t : tokens) {
    p *= row(m, source, prefix)[t];
    if (p == 0.0) return 0.0;
    prefix.push_back(t);
  }
  if (terminated) p *= row(m, source, prefix)[m.target_vocab.eos()];
  return p;
}

namespace {

struct Walker {
  const TabularModelSpec& fwd;
  const TabularModelSpec& bwd;
  const Tokens& w;
  double alpha;
  std::size_t max_len;

  double listener(const Tokens& u) const { return std::pow(sentence_prob(bwd, u, w, true), alpha); }

  // Sum over complete extensions of `prefix` of P(extension) * listener^alpha.
  double mass(const Tokens& prefix) const {
    const auto& r = row(fwd, w, prefix);
    TokenId eos = fwd.target_vocab.eos();
    double total = 0.0;
    if (prefix.size() + 1 <= max_len && r[eos] > 0.0) total += r[eos] * listener(prefix);
    if (prefix.size() + 2 <= max_len) {
      for (TokenId t = 0; t < eos; ++t) {
        if (r[t] == 0.0) continue;
        Tokens next = prefix;
        next.push_back(t);
        total += r[t] * mass(next);
      }
    }
    return total;
  }

  void collect(const Tokens& prefix, double prob, std::vector<Utterance>& out) const {
    const auto& r = row(fwd, w, prefix);
    TokenId eos = fwd.target_vocab.eos();
    if (prefix.size() + 1 <= max_len && r[eos] > 0.0) {
      double p = prob * r[eos];
      out.push_back({prefix, p, p * listener(prefix)});
    }
    if (prefix.size() + 2 <= max_len) {
      for (TokenId t = 0; t < eos; ++t) {
        if (r[t] == 0.0) continue;
        Tokens next = prefix;
        next.push_back(t);
        collect(next, prob * r[t], out);
      }
    }
  }
};

}  // namespace

std::vector<double> incremental_speaker(const TabularModelSpec& fwd, const TabularModelSpec& bwd, const Tokens& w,
                                        const Tokens& c, double alpha, std::size_t max_len) {
  Walker walk{fwd, bwd, w, alpha, max_len};
  const auto& r = row(fwd, w, c);
  TokenId eos = fwd.target_vocab.eos();
  std::vector<double> weights(r.size(), 0.0);
  for (TokenId t = 0; t < r.size(); ++t) {
    if (r[t] == 0.0) continue;
    if (t == eos) {
      weights[t] = r[t] * walk.listener(c);
    } else {
      Tokens next = c;
      next.push_back(t);
      weights[t] = next.size() + 1 <= max_len ? r[t] * walk.mass(next) : 0.0;
    }
  }
  double total = 0.0;
  for (double v : weights) total += v;
  std::vector<double> out(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) out[i] = std::log(weights[i] / total);
  return out;
}

std::vector<Utterance> global_speaker(const TabularModelSpec& fwd, const TabularModelSpec& bwd, const Tokens& w,
                                      double alpha, std::size_t max_len) {
  Walker walk{fwd, bwd, w, alpha, max_len};
  std::vector<Utterance> out;
  walk.collect({}, 1.0, out);
  return out;
}

}  // namespace reference

// ---------------------------------------------------------------------------

CycleFamilyMember cycle_family_member(std::uint64_t seed, bool collision) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  // Source ids: A=0 B=1 C=2, EOS=3. Target ids: u=0 x=1 y=2 z=3, EOS=4.
  Vocabulary src({"A", "B", "C"});
  Vocabulary tgt({"u", "x", "y", "z"});
  const TokenId A = 0, B = 1, C = 2;
  const TokenId u = 0, x = 1, y = 2, z = 3;

  TabularModelSpec fwd{src, tgt, {}};
  auto pair_row = [&](TokenId own) {
    double a = uni(0.45, 0.49);
    double r = uni(1.002, 1.028);
    double p_own = collision ? a / r : a * r;
    std::vector<double> row(5, 0.0);
    row[u] = a;
    row[own] = p_own;
    row[own == x ? y : x] = 1.0 - a - p_own;
    return row;
  };
  std::vector<double> after(5, 0.0);
  after[4] = 1.0;
  fwd.entries[{{A}, {}}] = pair_row(x);
  fwd.entries[{{B}, {}}] = pair_row(y);
  fwd.entries[{{C}, {}}] = {0.0, 0.0, 0.0, 1.0, 0.0};
  for (TokenId s : {A, B, C})
    for (TokenId t : {u, x, y, z}) fwd.entries[{{s}, {t}}] = after;

  auto back_row = [&](double pa, double pb, double pc) { return std::vector<double>{pa, pb, pc, 0.0}; };
  std::vector<double> back_after{0.0, 0.0, 0.0, 1.0};

  TabularModelSpec bwd{tgt, src, {}};
  double lu = uni(0.40, 0.598);
  double lx = uni(0.85, 0.99);
  double ly = uni(0.85, 0.99);
  bwd.entries[{{u}, {}}] = back_row(lu, 0.999 - lu, 0.001);
  bwd.entries[{{x}, {}}] = back_row(lx, 0.999 - lx, 0.001);
  bwd.entries[{{y}, {}}] = back_row(0.999 - ly, ly, 0.001);
  bwd.entries[{{z}, {}}] = back_row(0.01, 0.01, 0.98);

  TabularModelSpec eval{tgt, src, {}};
  eval.entries[{{u}, {}}] = back_row(0.7, 0.29, 0.01);
  eval.entries[{{x}, {}}] = back_row(0.9, 0.09, 0.01);
  eval.entries[{{y}, {}}] = back_row(0.09, 0.9, 0.01);
  eval.entries[{{z}, {}}] = back_row(0.05, 0.05, 0.9);
  for (TokenId t : {u, x, y, z}) {
    for (TokenId s : {A, B, C}) {
      bwd.entries[{{t}, {s}}] = back_after;
      eval.entries[{{t}, {s}}] = back_after;
    }
  }

  std::string tag = "cycle-family:" + std::to_string(seed);
  CycleFamilyMember m;
  m.fwd = std::make_shared<TabularModel>(std::move(fwd), tag + ":fwd");
  m.bwd = std::make_shared<TabularModel>(std::move(bwd), tag + ":bwd");
  m.eval_bwd = std::make_shared<TabularModel>(std::move(eval), tag + ":eval");
  m.corpus = {Sentence::complete({A}), Sentence::complete({B}), Sentence::complete({C})};
  m.collision = collision;
  return m;
}

}  // namespace pragma::testing
