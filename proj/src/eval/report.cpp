#include "pragma/report.hpp"

#include <cstdio>
#include <sstream>

namespace pragma {

ordered_json logprob_json(double value) {
  if (value == kNegInf) return nullptr;
  return value;
}

std::string format_score(double score) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", score);
  return buf;
}

ordered_json trace_to_json(const DecodeTrace& trace, const Vocabulary& target_vocab) {
  ordered_json steps = ordered_json::array();
  for (const auto& step : trace.steps) {
    ordered_json candidates = ordered_json::array();
    for (const auto& c : step.candidates) {
      ordered_json cj;
      cj["token"] = std::string(target_vocab.surface(c.token));
      cj["base_logprob"] = logprob_json(c.base_logprob);
      cj["rollout"] = c.rollout ? ordered_json(render_sentence_with_eos(target_vocab, *c.rollout)) : ordered_json();
      cj["rollout_truncated"] = c.rollout_truncated;
      cj["listener_logscore"] = logprob_json(c.listener_logscore);
      cj["combined_score"] = logprob_json(c.combined_score);
      cj["step_logprob"] = logprob_json(c.step_logprob);
      candidates.push_back(std::move(cj));
    }
    ordered_json sj;
    sj["prefix"] = render_sentence(target_vocab, step.prefix);
    sj["candidates"] = std::move(candidates);
    sj["chosen"] = std::string(target_vocab.surface(step.chosen));
    steps.push_back(std::move(sj));
  }
  return steps;
}

ordered_json cycle_record_to_json(const CycleRecord& record) {
  ordered_json j;
  j["index"] = record.index;
  j["source"] = record.source;
  j["pivot"] = record.pivot;
  j["back_translation"] = record.back_translation;
  j["scores"] = {{"recovered", record.recovered}, {"sentence_bleu_diagnostic", record.sentence_bleu}};
  return j;
}

std::string cycle_report_text(const CycleReport& report) {
  std::ostringstream out;
  out << "system: " << report.system << '\n';
  out << "back_translator: " << report.back_translator << '\n';
  out << "cycle_bleu: " << format_score(report.score) << '\n';
  out << "sentences: " << report.records.size() << '\n';
  for (const auto& r : report.records) {
    out << "[" << r.index << "] " << (r.recovered ? "ok" : "LOST") << "\n";
    out << "  source: " << r.source << "\n";
    out << "  pivot: " << r.pivot << "\n";
    out << "  back_translation: " << r.back_translation << "\n";
    out << "  sentence_bleu (diagnostic only): " << format_score(r.sentence_bleu) << "\n";
  }
  return out.str();
}

std::string cycle_report_jsonl(const CycleReport& report) {
  std::string out;
  for (const auto& r : report.records) out += cycle_record_to_json(r).dump() + "\n";
  return out;
}

ordered_json collision_to_json(const CollisionPair& pair, std::size_t index, const Vocabulary& source_vocab,
                               const Vocabulary& target_vocab) {
  ordered_json backs = ordered_json::array();
  for (const auto& b : pair.evidence.back_translations) {
    backs.push_back({{"sentence", render_sentence(source_vocab, b.sentence)}, {"logprob", logprob_json(b.logprob)}});
  }
  ordered_json j;
  j["index"] = index;
  j["source_a"] = render_sentence(source_vocab, pair.source_a);
  j["source_b"] = render_sentence(source_vocab, pair.source_b);
  j["pivot"] = render_sentence(target_vocab, pair.pivot);
  j["evidence"] = {{"origin", render_sentence(source_vocab, pair.evidence.origin)},
                   {"back_translations", std::move(backs)},
                   {"reforward_a", render_sentence(target_vocab, pair.evidence.reforward_a)},
                   {"reforward_b", render_sentence(target_vocab, pair.evidence.reforward_b)}};
  return j;
}

std::string survey_report_text(const std::vector<CollisionPair>& pairs, const Vocabulary& source_vocab,
                               const Vocabulary& target_vocab) {
  std::ostringstream out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    out << "[" << i << "] " << render_sentence(source_vocab, p.source_a) << " | "
        << render_sentence(source_vocab, p.source_b) << " -> " << render_sentence(target_vocab, p.pivot) << '\n';
  }
  out << pairs.size() << (pairs.size() == 1 ? " collision" : " collisions") << '\n';
  return out.str();
}

std::string survey_report_jsonl(const std::vector<CollisionPair>& pairs, const Vocabulary& source_vocab,
                                const Vocabulary& target_vocab) {
  std::string out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out += collision_to_json(pairs[i], i, source_vocab, target_vocab).dump() + "\n";
  }
  return out;
}

}  // namespace pragma
