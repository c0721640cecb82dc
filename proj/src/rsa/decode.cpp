#include "pragma/decode.hpp"

#include <algorithm>

namespace pragma {

StepFn base_step(const ConditionalSequenceModel& model) {
  return [&model](const Sentence& source, const Sentence& prefix) { return model.next_token_dist(source, prefix); };
}

Sentence greedy_decode(const StepFn& step, const Sentence& source, std::size_t max_len, TokenId eos) {
  Sentence out = Sentence::prefix();
  while (!out.terminated && out.length() < max_len) {
    out = out.extended(argmax(step(source, out)), eos);
  }
  return out;
}

Sentence greedy_decode(const ConditionalSequenceModel& model, const Sentence& source, std::size_t max_len) {
  return greedy_decode(base_step(model), source, max_len, model.target_vocab().eos());
}

namespace {

// Orders by score, then by token sequence with EOS compared as its id, which
// matches argmax's lowest-id tie-break.
struct Better {
  TokenId eos;

  bool operator()(const ScoredSentence& a, const ScoredSentence& b) const {
    if (a.logprob != b.logprob) return a.logprob > b.logprob;
    auto with_eos = [this](const Sentence& s) {
      std::vector<TokenId> out = s.tokens;
      if (s.terminated) out.push_back(eos);
      return out;
    };
    return with_eos(a.sentence) < with_eos(b.sentence);
  }
};

}  // namespace

std::vector<ScoredSentence> beam_decode(const StepFn& step, const Sentence& source, std::size_t beam_width,
                                        std::size_t max_len, TokenId eos) {
  if (beam_width < 1) throw InvalidInput("beam width must be >= 1");
  const Better better{eos};
  std::vector<ScoredSentence> beam{{Sentence::prefix(), 0.0}};
  std::vector<ScoredSentence> finished;
  std::vector<ScoredSentence> truncated;

  while (!beam.empty()) {
    std::vector<ScoredSentence> expansions;
    for (const auto& hyp : beam) {
      if (hyp.sentence.length() >= max_len) {
        truncated.push_back(hyp);
        continue;
      }
      LogDistribution dist = step(source, hyp.sentence);
      auto keys = dist.support();
      auto weights = dist.logweights();
      for (std::size_t i = 0; i < keys.size(); ++i) {
        if (weights[i] == kNegInf) continue;
        expansions.push_back({hyp.sentence.extended(keys[i], eos), hyp.logprob + weights[i]});
      }
    }
    std::sort(expansions.begin(), expansions.end(), better);
    if (expansions.size() > beam_width) expansions.resize(beam_width);

    beam.clear();
    for (auto& e : expansions) {
      if (e.sentence.terminated) {
        finished.push_back(std::move(e));
      } else {
        beam.push_back(std::move(e));
      }
    }

    // Scores only decrease along a hypothesis, so once beam_width finished
    // hypotheses beat every live one nothing can change the result.
    if (finished.size() >= beam_width && !beam.empty()) {
      std::sort(finished.begin(), finished.end(), better);
      if (finished[beam_width - 1].logprob >= beam.front().logprob) break;
    }
  }

  std::vector<ScoredSentence>& pool = finished.empty() ? truncated : finished;
  std::sort(pool.begin(), pool.end(), better);
  if (pool.size() > beam_width) pool.resize(beam_width);
  return pool;
}

std::vector<ScoredSentence> beam_decode(const ConditionalSequenceModel& model, const Sentence& source,
                                        std::size_t beam_width, std::size_t max_len) {
  return beam_decode(base_step(model), source, beam_width, max_len, model.target_vocab().eos());
}

}  // namespace pragma
