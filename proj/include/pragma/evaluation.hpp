#pragma once

#include "pragma/bleu.hpp"
#include "pragma/core.hpp"
#include "pragma/model.hpp"
#include "pragma/rsa.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace pragma {

/// A complete translation system: source sentence in, target sentence out.
/// `model_tags` lists every model the system consults, so evaluation can
/// refuse a back-translator the system itself has access to.
struct Translator {
  std::string name;
  std::vector<std::string> model_tags;
  Vocabulary source_vocab;
  Vocabulary target_vocab;
  std::function<Sentence(const Sentence&)> translate;
};

struct BackTranslator {
  std::string identity_tag;
  Vocabulary target_vocab;  // the original source language
  std::function<Sentence(const Sentence&)> translate;
};

Translator base_translator(std::shared_ptr<const ConditionalSequenceModel> fwd, std::size_t max_len);
Translator cip_translator(std::shared_ptr<const ConditionalSequenceModel> fwd,
                          std::shared_ptr<const ConditionalSequenceModel> bwd, PragmaticsConfig config);
Translator cgp_translator(std::shared_ptr<const ConditionalSequenceModel> fwd,
                          std::shared_ptr<const ConditionalSequenceModel> bwd, PragmaticsConfig config);
BackTranslator greedy_back_translator(std::shared_ptr<const ConditionalSequenceModel> bwd, std::size_t max_len);

// ----------------------------------------------------------------------------
// Cycle consistency
// ----------------------------------------------------------------------------

struct CycleRecord {
  std::size_t index = 0;
  std::string source;
  std::string pivot;
  std::string back_translation;
  bool recovered = false;       // back-translation equals the source
  double sentence_bleu = 0.0;   // diagnostic only
};

struct CycleReport {
  std::string system;
  std::string back_translator;
  double score = 0.0;
  BleuResult bleu;
  std::vector<CycleRecord> records;
};

/**
 * Translates every sentence forward, back-translates it with an independent
 * system and scores the back-translations against the originals with corpus
 * BLEU. Throws SameBackTranslator if the back-translator's identity tag is
 * one of the forward system's model tags, and EmptyCorpus for no input.
 * Sentences are translated on up to `jobs` threads; the report keeps input
 * order.
 */
CycleReport cycle_consistency(const Translator& fwd_system, const BackTranslator& independent_bwd,
                              const std::vector<Sentence>& corpus, const BleuConfig& config = {},
                              std::size_t jobs = 1);

// ----------------------------------------------------------------------------
// Many-to-one survey
// ----------------------------------------------------------------------------

struct CollisionEvidence {
  Sentence origin;                               // corpus sentence that produced the pivot
  std::vector<ScoredSentence> back_translations; // n-best of the pivot under bwd
  Sentence reforward_a;
  Sentence reforward_b;

  bool operator==(const CollisionEvidence&) const = default;
};

struct CollisionPair {
  Sentence source_a;  // source_a < source_b
  Sentence source_b;
  Sentence pivot;
  CollisionEvidence evidence;

  bool operator==(const CollisionPair&) const = default;
};

/**
 * For each corpus sentence w: pivot = greedy fwd(w); take the n_back best
 * back-translations of the pivot by beam search on bwd; every unordered pair
 * of distinct back-translations that both greedily re-translate to the pivot
 * is a collision. Pairs are deduplicated across the corpus, first
 * occurrence kept.
 */
std::vector<CollisionPair> survey_many_to_one(const ConditionalSequenceModel& fwd, const ConditionalSequenceModel& bwd,
                                              const std::vector<Sentence>& corpus, std::size_t n_back = 2,
                                              std::size_t max_len = 50, std::size_t jobs = 1);

/// Re-runs both forward translations and checks they reproduce the pivot.
bool verify_collision(const ConditionalSequenceModel& fwd, const CollisionPair& pair, std::size_t max_len = 50);

}  // namespace pragma
