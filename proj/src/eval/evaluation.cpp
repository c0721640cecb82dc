#include "pragma/evaluation.hpp"

#include "pragma/decode.hpp"
#include "pragma/parallel.hpp"

#include <algorithm>
#include <set>
#include <utility>

namespace pragma {

Translator base_translator(std::shared_ptr<const ConditionalSequenceModel> fwd, std::size_t max_len) {
  Translator t;
  t.name = "s0";
  t.model_tags = {fwd->identity_tag()};
  t.source_vocab = fwd->source_vocab();
  t.target_vocab = fwd->target_vocab();
  t.translate = [fwd, max_len](const Sentence& w) { return greedy_decode(*fwd, w, max_len); };
  return t;
}

Translator cip_translator(std::shared_ptr<const ConditionalSequenceModel> fwd,
                          std::shared_ptr<const ConditionalSequenceModel> bwd, PragmaticsConfig config) {
  config.validate();
  check_direction(*fwd, *bwd);
  Translator t;
  t.name = "s1-cip";
  t.model_tags = {fwd->identity_tag(), bwd->identity_tag()};
  t.source_vocab = fwd->source_vocab();
  t.target_vocab = fwd->target_vocab();
  t.translate = [fwd, bwd, config](const Sentence& w) { return decode_s1_cip(*fwd, *bwd, w, config).sentence; };
  return t;
}

Translator cgp_translator(std::shared_ptr<const ConditionalSequenceModel> fwd,
                          std::shared_ptr<const ConditionalSequenceModel> bwd, PragmaticsConfig config) {
  config.validate();
  check_direction(*fwd, *bwd);
  Translator t;
  t.name = "s1-cgp";
  t.model_tags = {fwd->identity_tag(), bwd->identity_tag()};
  t.source_vocab = fwd->source_vocab();
  t.target_vocab = fwd->target_vocab();
  t.translate = [fwd, bwd, config](const Sentence& w) {
    std::vector<Sentence> beam;
    for (auto& scored : beam_decode(*fwd, w, config.beam_width, config.max_len)) beam.push_back(std::move(scored.sentence));
    return s1_cgp_rerank(*fwd, *bwd, w, CandidateSet(std::move(beam)), config.alpha).front().sentence;
  };
  return t;
}

BackTranslator greedy_back_translator(std::shared_ptr<const ConditionalSequenceModel> bwd, std::size_t max_len) {
  BackTranslator b;
  b.identity_tag = bwd->identity_tag();
  b.target_vocab = bwd->target_vocab();
  b.translate = [bwd, max_len](const Sentence& u) { return greedy_decode(*bwd, u, max_len); };
  return b;
}

CycleReport cycle_consistency(const Translator& fwd_system, const BackTranslator& independent_bwd,
                              const std::vector<Sentence>& corpus, const BleuConfig& config, std::size_t jobs) {
  const auto& tags = fwd_system.model_tags;
  if (independent_bwd.identity_tag.empty() ||
      std::find(tags.begin(), tags.end(), independent_bwd.identity_tag) != tags.end())
    throw SameBackTranslator("back-translator '" + independent_bwd.identity_tag +
                             "' is also used by the system under evaluation");
  if (corpus.empty()) throw EmptyCorpus("cycle consistency needs at least one sentence");

  struct Outcome {
    Sentence pivot;
    Sentence back;
  };
  auto outcomes = parallel_map(corpus.size(), jobs, [&](std::size_t i) {
    Sentence pivot = fwd_system.translate(corpus[i]);
    Sentence back = independent_bwd.translate(pivot);
    return Outcome{std::move(pivot), std::move(back)};
  });

  CycleReport report;
  report.system = fwd_system.name;
  report.back_translator = independent_bwd.identity_tag;
  std::vector<TokenList> hyps;
  std::vector<TokenList> refs;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CycleRecord rec;
    rec.index = i;
    rec.source = render_sentence(fwd_system.source_vocab, corpus[i]);
    rec.pivot = render_sentence(fwd_system.target_vocab, outcomes[i].pivot);
    rec.back_translation = render_sentence(independent_bwd.target_vocab, outcomes[i].back);
    TokenList hyp = tokenize(rec.back_translation, config);
    TokenList ref = tokenize(rec.source, config);
    rec.recovered = hyp == ref;
    rec.sentence_bleu = sentence_bleu_diagnostic(hyp, ref, config);
    hyps.push_back(std::move(hyp));
    refs.push_back(std::move(ref));
    report.records.push_back(std::move(rec));
  }
  report.bleu = bleu_corpus_detailed(hyps, refs, config);
  report.score = report.bleu.score;
  return report;
}

std::vector<CollisionPair> survey_many_to_one(const ConditionalSequenceModel& fwd, const ConditionalSequenceModel& bwd,
                                              const std::vector<Sentence>& corpus, std::size_t n_back,
                                              std::size_t max_len, std::size_t jobs) {
  check_direction(fwd, bwd);
  if (n_back < 1) throw InvalidInput("n_back must be >= 1");

  auto per_sentence = parallel_map(corpus.size(), jobs, [&](std::size_t i) {
    std::vector<CollisionPair> found;
    const Sentence& w = corpus[i];
    Sentence pivot = greedy_decode(fwd, w, max_len);
    auto back = beam_decode(bwd, pivot, n_back, max_len);
    std::vector<Sentence> reforward;
    for (const auto& b : back) {
      reforward.push_back(b.sentence.terminated && !b.sentence.tokens.empty() ? greedy_decode(fwd, b.sentence, max_len)
                                                                               : Sentence{});
    }
    for (std::size_t a = 0; a < back.size(); ++a) {
      for (std::size_t b = a + 1; b < back.size(); ++b) {
        const Sentence& sa = back[a].sentence;
        const Sentence& sb = back[b].sentence;
        if (sa == sb || !sa.terminated || !sb.terminated || sa.tokens.empty() || sb.tokens.empty()) continue;
        if (reforward[a] != pivot || reforward[b] != pivot) continue;
        CollisionPair pair;
        bool swap = sb < sa;
        pair.source_a = swap ? sb : sa;
        pair.source_b = swap ? sa : sb;
        pair.pivot = pivot;
        pair.evidence.origin = w;
        pair.evidence.back_translations = back;
        pair.evidence.reforward_a = swap ? reforward[b] : reforward[a];
        pair.evidence.reforward_b = swap ? reforward[a] : reforward[b];
        found.push_back(std::move(pair));
      }
    }
    return found;
  });

  std::vector<CollisionPair> out;
  std::set<std::pair<Sentence, Sentence>> seen;
  for (auto& found : per_sentence) {
    for (auto& pair : found) {
      if (seen.emplace(pair.source_a, pair.source_b).second) out.push_back(std::move(pair));
    }
  }
  return out;
}

bool verify_collision(const ConditionalSequenceModel& fwd, const CollisionPair& pair, std::size_t max_len) {
  if (pair.source_a == pair.source_b) return false;
  return greedy_decode(fwd, pair.source_a, max_len) == pair.pivot &&
         greedy_decode(fwd, pair.source_b, max_len) == pair.pivot;
}

}  // namespace pragma
