#pragma once

// Structured text and line-delimited JSON renderings of decode traces,
// cycle-consistency reports and collision surveys. Field order is fixed.

#include "pragma/evaluation.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace pragma {

using ordered_json = nlohmann::ordered_json;

/// Log probabilities are written as numbers; -inf becomes null.
ordered_json logprob_json(double value);

ordered_json trace_to_json(const DecodeTrace& trace, const Vocabulary& target_vocab);

ordered_json cycle_record_to_json(const CycleRecord& record);
std::string cycle_report_text(const CycleReport& report);
std::string cycle_report_jsonl(const CycleReport& report);

ordered_json collision_to_json(const CollisionPair& pair, std::size_t index, const Vocabulary& source_vocab,
                               const Vocabulary& target_vocab);
std::string survey_report_text(const std::vector<CollisionPair>& pairs, const Vocabulary& source_vocab,
                               const Vocabulary& target_vocab);
std::string survey_report_jsonl(const std::vector<CollisionPair>& pairs, const Vocabulary& source_vocab,
                                const Vocabulary& target_vocab);

/// "%.2f" formatting used for every printed BLEU score.
std::string format_score(double score);

}  // namespace pragma
