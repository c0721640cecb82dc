#pragma once

#include "pragma/adapter/channel.hpp"
#include "pragma/adapter/protocol.hpp"
#include "pragma/model.hpp"

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pragma {

struct ScorerEndpoint {
  enum class Transport { stdio_subprocess, tcp };

  Transport transport = Transport::stdio_subprocess;
  std::string command;  // stdio_subprocess
  std::string host;     // tcp
  std::uint16_t port = 0;
  std::chrono::milliseconds timeout{30000};
  std::string identity_tag;

  void validate() const;

  /// "stdio:COMMAND" or "tcp:HOST:PORT". The identity tag defaults to the
  /// spec string itself.
  static ScorerEndpoint parse(std::string_view spec);
};

/// Tolerance within which a remote distribution is silently renormalized.
inline constexpr double kRemoteNormalizationTolerance = 1e-6;

/// One scoring request in local token ids.
struct ScoreRequest {
  enum class Kind { next_token, sequence };
  Kind kind = Kind::next_token;
  Sentence source;
  Sentence target;  // the prefix for next_token, the scored sentence for sequence

  static ScoreRequest next_token(Sentence source, Sentence prefix) {
    return {Kind::next_token, std::move(source), std::move(prefix)};
  }
  static ScoreRequest sequence(Sentence source, Sentence sentence) {
    return {Kind::sequence, std::move(source), std::move(sentence)};
  }
};

/// Per-item failure inside a batch.
struct ScoreError {
  std::string code;
  std::string message;
};

using ScoreResult = std::variant<LogDistribution, double, ScoreError>;

/**
 * A ConditionalSequenceModel served over pragma-score v1.
 *
 * Vocabularies come from the handshake; wire ids are translated to local ids
 * so that EOS is last locally even if the server puts it elsewhere. Calls are
 * serialized on the single connection, so one instance may be shared between
 * threads.
 */
class RemoteModel final : public ConditionalSequenceModel {
 public:
  RemoteModel(std::unique_ptr<LineChannel> channel, ScorerEndpoint endpoint);

  const Vocabulary& source_vocab() const override { return source_vocab_; }
  const Vocabulary& target_vocab() const override { return target_vocab_; }
  const std::string& identity_tag() const override { return endpoint_.identity_tag; }
  const std::string& server_model_tag() const { return server_model_tag_; }

  /// One round trip for the whole list. Results follow request order.
  std::vector<ScoreResult> batch(const std::vector<ScoreRequest>& requests) const;

 protected:
  LogDistribution compute_next_token_dist(const Sentence& source, const Sentence& prefix) const override;
  double compute_sequence_logprob(const Sentence& source, const Sentence& sentence) const override;

 private:
  wire::Response round_trip(wire::Request request) const;
  wire::WireIds to_wire(const Sentence& sentence, bool source_side) const;
  LogDistribution to_distribution(const std::vector<double>& wire_logprobs) const;
  std::string validate_request(const ScoreRequest& request) const;

  std::unique_ptr<LineChannel> channel_;
  ScorerEndpoint endpoint_;
  Vocabulary source_vocab_;
  Vocabulary target_vocab_;
  std::string server_model_tag_;
  std::vector<std::int64_t> source_to_wire_;
  std::vector<std::int64_t> target_to_wire_;
  std::vector<TokenId> target_from_wire_;

  mutable std::mutex mutex_;
  mutable wire::RequestId next_id_ = 1;
  mutable bool broken_ = false;
};

/// Opens the transport and performs the handshake.
std::shared_ptr<RemoteModel> connect(const ScorerEndpoint& endpoint);

/// Batch scoring for any model. Remote models use a single wire batch; other
/// models are scored locally. Failures are reported per item.
std::vector<ScoreResult> batch_score(const ConditionalSequenceModel& model, const std::vector<ScoreRequest>& requests);

}  // namespace pragma
