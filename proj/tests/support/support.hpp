#pragma once

// Test-only helpers: seeded random tabular models, an independent
// linear-space reference for the pragmatic speaker scores, and generated
// model families for the evaluation checks.

#include "pragma/tabular.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace pragma::testing {

using Tokens = std::vector<TokenId>;

// ---------------------------------------------------------------------------
// Random enumerable models

struct RandomModelShape {
  std::size_t source_listed = 3;  // source vocabulary without EOS
  std::size_t target_listed = 4;  // target vocabulary without EOS
  std::size_t max_source_len = 2; // source sentences have 1..max_source_len tokens
  std::size_t max_len = 4;        // target length bound, EOS included
  double zero_rate = 0.2;         // chance a non-EOS forward entry is exactly zero
};

struct RandomModels {
  RandomModelShape shape;
  std::shared_ptr<const TabularModel> fwd;
  std::shared_ptr<const TabularModel> bwd;
  std::vector<Sentence> sources;  // every terminated source sentence the tables cover
};

/// Shape drawn from `seed` within vocab <= 6 (EOS included) and max_len <= 4.
RandomModelShape random_shape(std::uint64_t seed);

/// Full-coverage forward and backward tables. Forward EOS entries and every
/// backward entry are strictly positive; other forward entries may be zero.
RandomModels random_models(std::uint64_t seed, const RandomModelShape& shape);
RandomModels random_models(std::uint64_t seed);

/// All token sequences over ids [0, listed) with length in [lo, hi].
std::vector<Tokens> all_sequences(std::size_t listed, std::size_t lo, std::size_t hi);

// ---------------------------------------------------------------------------
// Reference computations on raw tables, in probability space

namespace reference {

/// Row of the table for (source, prefix); throws if absent.
const std::vector<double>& row(const TabularModelSpec& m, const Tokens& source, const Tokens& prefix);

/// Probability of `tokens` (+ EOS when terminated) given `source`.
double sentence_prob(const TabularModelSpec& m, const Tokens& source, const Tokens& tokens, bool terminated);

/// Normalized incremental speaker over the target vocabulary at prefix c,
/// with every continuation of c+wd summed out (up to max_len, EOS counted).
/// Returned as log probabilities; zero entries are -inf.
std::vector<double> incremental_speaker(const TabularModelSpec& fwd, const TabularModelSpec& bwd, const Tokens& w,
                                        const Tokens& c, double alpha, std::size_t max_len);

struct Utterance {
  Tokens tokens;
  double prob = 0.0;  // base speaker probability
  double score = 0.0; // prob * listener^alpha
};

/// Every complete target sentence of length <= max_len with nonzero
/// probability, with its global pragmatic score.
std::vector<Utterance> global_speaker(const TabularModelSpec& fwd, const TabularModelSpec& bwd, const Tokens& w,
                                      double alpha, std::size_t max_len);

}  // namespace reference

// ---------------------------------------------------------------------------
// Ambiguous-pair family for cycle-consistency checks

struct CycleFamilyMember {
  std::shared_ptr<const TabularModel> fwd;
  std::shared_ptr<const TabularModel> bwd;       // used by the pragmatic speaker
  std::shared_ptr<const TabularModel> eval_bwd;  // independent back-translator
  std::vector<Sentence> corpus;
  bool collision = false;  // whether base greedy decoding merges two sources
};

/**
 * Sources A, B, C and targets u, x, y, z. A prefers u narrowly over x, B
 * prefers u narrowly over y, C maps to z. With `collision` false, A and B
 * prefer x and y outright. The margin between u and x or y is kept small
 * enough that alpha = 0.1 already separates A from B.
 */
CycleFamilyMember cycle_family_member(std::uint64_t seed, bool collision);

}  // namespace pragma::testing
