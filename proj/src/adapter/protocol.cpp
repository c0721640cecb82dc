#include "pragma/adapter/protocol.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>

namespace pragma::wire {

using json = nlohmann::ordered_json;

namespace {

json number_or_null(double v) {
  if (v == -std::numeric_limits<double>::infinity()) return nullptr;
  return v;
}

double read_logprob(const json& j) {
  if (j.is_null()) return -std::numeric_limits<double>::infinity();
  if (!j.is_number()) throw ProtocolError("log probability must be a number or null");
  double v = j.get<double>();
  if (std::isnan(v) || std::isinf(v)) throw ProtocolError("log probability is not finite");
  return v;
}

WireIds read_ids(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_array()) throw ProtocolError(std::string("field '") + field + "' must be an array");
  WireIds out;
  for (const auto& v : *it) {
    if (!v.is_number_integer()) throw ProtocolError(std::string("field '") + field + "' must hold integers");
    out.push_back(v.get<std::int64_t>());
  }
  return out;
}

const json& require(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end()) throw ProtocolError(std::string("missing field '") + field + "'");
  return *it;
}

std::string require_string(const json& obj, const char* field) {
  const json& v = require(obj, field);
  if (!v.is_string()) throw ProtocolError(std::string("field '") + field + "' must be a string");
  return v.get<std::string>();
}

RequestId read_id(const json& obj) {
  const json& v = require(obj, "id");
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw ProtocolError("field 'id' must be a nonnegative integer");
  return v.get<RequestId>();
}

json parse_object(std::string_view line) {
  json j = json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ProtocolError("message is not a JSON object");
  return j;
}

json score_request_json(RequestId id, const std::variant<NextTokenRequest, SequenceRequest>& body) {
  json j;
  j["id"] = id;
  if (const auto* nt = std::get_if<NextTokenRequest>(&body)) {
    j["kind"] = "next_token_logprobs";
    j["source"] = nt->source;
    j["prefix"] = nt->prefix;
  } else {
    const auto& sq = std::get<SequenceRequest>(body);
    j["kind"] = "sequence_logprob";
    j["source"] = sq.source;
    j["sentence"] = sq.sentence;
  }
  return j;
}

std::variant<NextTokenRequest, SequenceRequest> score_request_from(const json& j, const std::string& kind) {
  if (kind == "next_token_logprobs") return NextTokenRequest{read_ids(j, "source"), read_ids(j, "prefix")};
  if (kind == "sequence_logprob") return SequenceRequest{read_ids(j, "source"), read_ids(j, "sentence")};
  throw ProtocolError("unknown request kind '" + kind + "'");
}

json response_json(const Response& r) {
  json j;
  j["id"] = r.id ? json(*r.id) : json(nullptr);
  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, HandshakeResponse>) {
          j["kind"] = "handshake";
          j["protocol"] = body.protocol;
          j["source_vocab"] = body.source_vocab;
          j["target_vocab"] = body.target_vocab;
          j["source_eos_id"] = body.source_eos_id;
          j["eos_id"] = body.eos_id;
          j["model_tag"] = body.model_tag;
        } else if constexpr (std::is_same_v<T, LogprobsResponse>) {
          j["kind"] = "logprobs";
          json arr = json::array();
          for (double v : body.logprobs) arr.push_back(number_or_null(v));
          j["logprobs"] = std::move(arr);
        } else if constexpr (std::is_same_v<T, LogprobResponse>) {
          j["kind"] = "logprob";
          j["logprob"] = number_or_null(body.logprob);
        } else if constexpr (std::is_same_v<T, ErrorResponse>) {
          j["kind"] = "error";
          j["code"] = body.code;
          j["message"] = body.message;
        } else {
          j["kind"] = "batch";
          json arr = json::array();
          for (const auto& item : body.items) arr.push_back(response_json(item));
          j["responses"] = std::move(arr);
        }
      },
      r.body);
  return j;
}

Response response_from(const json& j) {
  Response r;
  const json& id = require(j, "id");
  if (!id.is_null()) r.id = read_id(j);
  std::string kind = require_string(j, "kind");
  if (kind == "handshake") {
    HandshakeResponse h;
    h.protocol = require_string(j, "protocol");
    h.source_vocab = require(j, "source_vocab").get<std::vector<std::string>>();
    h.target_vocab = require(j, "target_vocab").get<std::vector<std::string>>();
    h.source_eos_id = require(j, "source_eos_id").get<std::int64_t>();
    h.eos_id = require(j, "eos_id").get<std::int64_t>();
    h.model_tag = require_string(j, "model_tag");
    r.body = std::move(h);
  } else if (kind == "logprobs") {
    const json& arr = require(j, "logprobs");
    if (!arr.is_array()) throw ProtocolError("field 'logprobs' must be an array");
    LogprobsResponse lp;
    for (const auto& v : arr) lp.logprobs.push_back(read_logprob(v));
    r.body = std::move(lp);
  } else if (kind == "logprob") {
    r.body = LogprobResponse{read_logprob(require(j, "logprob"))};
  } else if (kind == "error") {
    r.body = ErrorResponse{require_string(j, "code"), require_string(j, "message")};
  } else if (kind == "batch") {
    const json& arr = require(j, "responses");
    if (!arr.is_array()) throw ProtocolError("field 'responses' must be an array");
    BatchResponse b;
    for (const auto& item : arr) {
      if (!item.is_object()) throw ProtocolError("batch response items must be objects");
      b.items.push_back(response_from(item));
    }
    r.body = std::move(b);
  } else {
    throw ProtocolError("unknown response kind '" + kind + "'");
  }
  return r;
}

}  // namespace

std::string encode(const Request& request) {
  json j;
  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, HandshakeRequest>) {
          j["id"] = request.id;
          j["kind"] = "handshake";
          j["protocol"] = body.protocol;
        } else if constexpr (std::is_same_v<T, BatchRequest>) {
          j["id"] = request.id;
          j["kind"] = "batch";
          json arr = json::array();
          for (const auto& item : body.items) arr.push_back(score_request_json(item.id, item.body));
          j["requests"] = std::move(arr);
        } else {
          j = score_request_json(request.id, body);
        }
      },
      request.body);
  return j.dump();
}

std::string encode(const Response& response) { return response_json(response).dump(); }

std::optional<RequestId> decode_request_id(std::string_view line) {
  try {
    return read_id(parse_object(line));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

Request decode_request(std::string_view line) {
  try {
    json j = parse_object(line);
    Request r;
    r.id = read_id(j);
    std::string kind = require_string(j, "kind");
    if (kind == "handshake") {
      r.body = HandshakeRequest{require_string(j, "protocol")};
    } else if (kind == "batch") {
      const json& arr = require(j, "requests");
      if (!arr.is_array()) throw ProtocolError("field 'requests' must be an array");
      BatchRequest b;
      for (const auto& item : arr) {
        if (!item.is_object()) throw ProtocolError("batch items must be objects");
        b.items.push_back({read_id(item), score_request_from(item, require_string(item, "kind"))});
      }
      r.body = std::move(b);
    } else {
      std::visit([&](auto&& body) { r.body = std::move(body); }, score_request_from(j, kind));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed request: ") + e.what());
  }
}

Response decode_response(std::string_view line) {
  try {
    return response_from(parse_object(line));
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed response: ") + e.what());
  }
}

}  // namespace pragma::wire
