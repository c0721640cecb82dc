#pragma once

/**
 * pragma-score v1 wire messages (docs/protocol.md).
 *
 * One JSON object per line. Every request carries a client-chosen "id" that
 * the response echoes. Token ids are indices into the vocabularies fixed at
 * handshake. Log probabilities are JSON numbers printed with 17 significant
 * digits; null stands for -inf (probability zero).
 */

#include "pragma/errors.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pragma::wire {

inline constexpr std::string_view kProtocol = "pragma-score v1";

using RequestId = std::uint64_t;
using WireIds = std::vector<std::int64_t>;

namespace error_code {
inline constexpr std::string_view bad_request = "bad-request";
inline constexpr std::string_view unknown_token = "unknown-token";
inline constexpr std::string_view missing_entry = "missing-entry";
inline constexpr std::string_view unsupported_protocol = "unsupported-protocol";
inline constexpr std::string_view internal = "internal";
}  // namespace error_code

struct HandshakeRequest {
  std::string protocol{kProtocol};
};

/// `source` may end with the source EOS id; `prefix` never contains EOS.
struct NextTokenRequest {
  WireIds source;
  WireIds prefix;
};

/// `sentence` ends with the target EOS id when it is complete.
struct SequenceRequest {
  WireIds source;
  WireIds sentence;
};

struct BatchItem {
  RequestId id = 0;
  std::variant<NextTokenRequest, SequenceRequest> body;
};

struct BatchRequest {
  std::vector<BatchItem> items;
};

struct Request {
  RequestId id = 0;
  std::variant<HandshakeRequest, NextTokenRequest, SequenceRequest, BatchRequest> body;
};

struct HandshakeResponse {
  std::string protocol{kProtocol};
  std::vector<std::string> source_vocab;  // EOS included, at source_eos_id
  std::vector<std::string> target_vocab;  // EOS included, at eos_id
  std::int64_t source_eos_id = 0;
  std::int64_t eos_id = 0;
  std::string model_tag;
};

struct LogprobsResponse {
  std::vector<double> logprobs;  // indexed by target id; -inf allowed
};

struct LogprobResponse {
  double logprob = 0.0;
};

struct ErrorResponse {
  std::string code;
  std::string message;
};

struct Response;

struct BatchResponse {
  std::vector<Response> items;
};

struct Response {
  std::optional<RequestId> id;  // absent only when the request id was unreadable
  std::variant<HandshakeResponse, LogprobsResponse, LogprobResponse, ErrorResponse, BatchResponse> body;
};

std::string encode(const Request& request);
std::string encode(const Response& response);

/// Throws ProtocolError on malformed input. The partially decoded id, if
/// any, is available through decode_request_id for error replies.
Request decode_request(std::string_view line);
std::optional<RequestId> decode_request_id(std::string_view line);
Response decode_response(std::string_view line);

}  // namespace pragma::wire
