#include "pragma/adapter/remote_model.hpp"

#include <charconv>
#include <cmath>
#include <set>

namespace pragma {

void ScorerEndpoint::validate() const {
  if (timeout.count() <= 0) throw InvalidInput("scorer timeout must be positive");
  if (identity_tag.empty()) throw InvalidInput("scorer identity tag must not be empty");
  if (transport == Transport::stdio_subprocess && command.empty()) throw InvalidInput("scorer command is empty");
  if (transport == Transport::tcp && (host.empty() || port == 0)) throw InvalidInput("scorer address needs host and port");
}

ScorerEndpoint ScorerEndpoint::parse(std::string_view spec) {
  ScorerEndpoint e;
  e.identity_tag = std::string(spec);
  if (spec.starts_with("stdio:")) {
    e.transport = Transport::stdio_subprocess;
    e.command = std::string(spec.substr(6));
  } else if (spec.starts_with("tcp:")) {
    e.transport = Transport::tcp;
    std::string_view rest = spec.substr(4);
    auto colon = rest.rfind(':');
    if (colon == std::string_view::npos) throw InvalidInput("tcp endpoint needs HOST:PORT: " + std::string(spec));
    e.host = std::string(rest.substr(0, colon));
    std::string_view port = rest.substr(colon + 1);
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
    if (ec != std::errc() || ptr != port.data() + port.size() || value == 0 || value > 65535)
      throw InvalidInput("bad port in scorer endpoint: " + std::string(spec));
    e.port = static_cast<std::uint16_t>(value);
  } else {
    throw InvalidInput("scorer endpoint must start with stdio: or tcp: (" + std::string(spec) + ")");
  }
  e.validate();
  return e;
}

namespace {

struct WireVocab {
  Vocabulary local;
  std::vector<std::int64_t> to_wire;  // local id -> wire id
};

WireVocab build_vocab(const std::vector<std::string>& surfaces, std::int64_t eos_id, const char* side) {
  if (eos_id < 0 || static_cast<std::size_t>(eos_id) >= surfaces.size())
    throw HandshakeFailed(std::string(side) + " eos id is out of range");
  std::vector<std::string> listed;
  WireVocab out{Vocabulary(), {}};
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    if (static_cast<std::int64_t>(i) == eos_id) continue;
    listed.push_back(surfaces[i]);
    out.to_wire.push_back(static_cast<std::int64_t>(i));
  }
  out.to_wire.push_back(eos_id);
  try {
    out.local = Vocabulary(std::move(listed));
  } catch (const Error& e) {
    throw HandshakeFailed(std::string(side) + " vocabulary rejected: " + e.what());
  }
  return out;
}

[[noreturn]] void throw_remote(const wire::ErrorResponse& err) {
  std::string text = "scorer error [" + err.code + "]: " + err.message;
  if (err.code == wire::error_code::unknown_token) throw UnknownToken(text);
  if (err.code == wire::error_code::missing_entry) throw MissingEntry(text);
  throw RemoteError(err.code, "scorer error: " + err.message);
}

}  // namespace

RemoteModel::RemoteModel(std::unique_ptr<LineChannel> channel, ScorerEndpoint endpoint)
    : channel_(std::move(channel)), endpoint_(std::move(endpoint)) {
  endpoint_.validate();
  wire::Response response;
  try {
    response = round_trip({0, wire::HandshakeRequest{}});
  } catch (const Timeout&) {
    throw;
  } catch (const Error& e) {
    throw HandshakeFailed(std::string("handshake with ") + channel_->describe() + " failed: " + e.what());
  }
  if (const auto* err = std::get_if<wire::ErrorResponse>(&response.body))
    throw HandshakeFailed("scorer refused handshake [" + err->code + "]: " + err->message);
  const auto* hs = std::get_if<wire::HandshakeResponse>(&response.body);
  if (hs == nullptr) throw HandshakeFailed("scorer answered the handshake with another message kind");
  if (hs->protocol != wire::kProtocol)
    throw HandshakeFailed("scorer speaks '" + hs->protocol + "', expected '" + std::string(wire::kProtocol) + "'");

  auto src = build_vocab(hs->source_vocab, hs->source_eos_id, "source");
  auto tgt = build_vocab(hs->target_vocab, hs->eos_id, "target");
  source_vocab_ = std::move(src.local);
  target_vocab_ = std::move(tgt.local);
  source_to_wire_ = std::move(src.to_wire);
  target_to_wire_ = std::move(tgt.to_wire);
  target_from_wire_.assign(target_to_wire_.size(), 0);
  for (std::size_t local = 0; local < target_to_wire_.size(); ++local)
    target_from_wire_[static_cast<std::size_t>(target_to_wire_[local])] = static_cast<TokenId>(local);
  server_model_tag_ = hs->model_tag;
}

wire::Response RemoteModel::round_trip(wire::Request request) const {
  std::lock_guard lock(mutex_);
  if (broken_) throw TransportError("connection to " + channel_->describe() + " is no longer usable");
  request.id = next_id_++;
  try {
    channel_->send_line(wire::encode(request), endpoint_.timeout);
    wire::Response response = wire::decode_response(channel_->receive_line(endpoint_.timeout));
    if (!response.id || *response.id != request.id) {
      throw ProtocolError("response id " + (response.id ? std::to_string(*response.id) : std::string("null")) +
                          " does not match request id " + std::to_string(request.id));
    }
    return response;
  } catch (const Error&) {
    // After a timeout or a garbled message the stream position is unknown.
    broken_ = true;
    throw;
  }
}

wire::WireIds RemoteModel::to_wire(const Sentence& sentence, bool source_side) const {
  const auto& table = source_side ? source_to_wire_ : target_to_wire_;
  wire::WireIds ids;
  ids.reserve(sentence.length());
  for (TokenId t : sentence.tokens) ids.push_back(table[t]);
  if (sentence.terminated) ids.push_back(table.back());
  return ids;
}

LogDistribution RemoteModel::to_distribution(const std::vector<double>& wire_logprobs) const {
  if (wire_logprobs.size() != target_vocab_.size())
    throw ProtocolError("logprobs has " + std::to_string(wire_logprobs.size()) + " entries, target vocabulary has " +
                        std::to_string(target_vocab_.size()));
  double total = log_sum_exp(wire_logprobs);
  if (total == kNegInf) throw NormalizationError("remote distribution puts zero mass everywhere");
  double mass = std::exp(total);
  if (!(std::abs(mass - 1.0) <= kRemoteNormalizationTolerance))
    throw NormalizationError("remote distribution sums to " + std::to_string(mass));
  std::vector<Key> keys(wire_logprobs.size());
  std::vector<double> logs(wire_logprobs.size());
  for (std::size_t w = 0; w < wire_logprobs.size(); ++w) {
    keys[w] = target_from_wire_[w];
    logs[w] = wire_logprobs[w] == kNegInf ? kNegInf : wire_logprobs[w] - total;
  }
  return LogDistribution::from_normalized(std::move(keys), std::move(logs));
}

LogDistribution RemoteModel::compute_next_token_dist(const Sentence& source, const Sentence& prefix) const {
  auto response = round_trip({0, wire::NextTokenRequest{to_wire(source, true), to_wire(prefix, false)}});
  if (const auto* err = std::get_if<wire::ErrorResponse>(&response.body)) throw_remote(*err);
  const auto* lp = std::get_if<wire::LogprobsResponse>(&response.body);
  if (lp == nullptr) throw ProtocolError("expected a logprobs response");
  return to_distribution(lp->logprobs);
}

double RemoteModel::compute_sequence_logprob(const Sentence& source, const Sentence& sentence) const {
  auto response = round_trip({0, wire::SequenceRequest{to_wire(source, true), to_wire(sentence, false)}});
  if (const auto* err = std::get_if<wire::ErrorResponse>(&response.body)) throw_remote(*err);
  const auto* lp = std::get_if<wire::LogprobResponse>(&response.body);
  if (lp == nullptr) throw ProtocolError("expected a logprob response");
  if (lp->logprob > 1e-9) throw ProtocolError("remote sequence log probability is positive");
  return std::min(lp->logprob, 0.0);
}

std::string RemoteModel::validate_request(const ScoreRequest& request) const {
  for (TokenId t : request.source.tokens)
    if (t >= source_vocab_.eos()) return "source token id " + std::to_string(t) + " is not in the vocabulary";
  for (TokenId t : request.target.tokens)
    if (t >= target_vocab_.eos()) return "target token id " + std::to_string(t) + " is not in the vocabulary";
  if (request.kind == ScoreRequest::Kind::next_token && request.target.terminated)
    return "next-token prefix must not be terminated";
  return {};
}

std::vector<ScoreResult> RemoteModel::batch(const std::vector<ScoreRequest>& requests) const {
  std::vector<ScoreResult> results(requests.size(), ScoreError{});
  std::vector<std::size_t> sent;  // request index for each wire item
  wire::BatchRequest batch;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& r = requests[i];
    std::string problem = validate_request(r);
    if (!problem.empty()) {
      results[i] = ScoreError{std::string(wire::error_code::bad_request), problem};
      continue;
    }
    wire::BatchItem item;
    item.id = i;
    if (r.kind == ScoreRequest::Kind::next_token)
      item.body = wire::NextTokenRequest{to_wire(r.source, true), to_wire(r.target, false)};
    else
      item.body = wire::SequenceRequest{to_wire(r.source, true), to_wire(r.target, false)};
    batch.items.push_back(std::move(item));
    sent.push_back(i);
  }
  if (sent.empty()) return results;

  auto response = round_trip({0, std::move(batch)});
  if (const auto* err = std::get_if<wire::ErrorResponse>(&response.body)) throw_remote(*err);
  const auto* br = std::get_if<wire::BatchResponse>(&response.body);
  if (br == nullptr) throw ProtocolError("expected a batch response");
  if (br->items.size() != sent.size())
    throw ProtocolError("batch response has " + std::to_string(br->items.size()) + " items for " +
                        std::to_string(sent.size()) + " requests");

  for (std::size_t k = 0; k < sent.size(); ++k) {
    std::size_t i = sent[k];
    const auto& item = br->items[k];
    if (!item.id || *item.id != i)
      throw ProtocolError("batch item " + std::to_string(k) + " answers the wrong request id");
    if (const auto* err = std::get_if<wire::ErrorResponse>(&item.body)) {
      results[i] = ScoreError{err->code, err->message};
    } else if (requests[i].kind == ScoreRequest::Kind::next_token) {
      const auto* lp = std::get_if<wire::LogprobsResponse>(&item.body);
      if (lp == nullptr) throw ProtocolError("batch item " + std::to_string(k) + " should be logprobs");
      try {
        results[i] = to_distribution(lp->logprobs);
      } catch (const NormalizationError& e) {
        results[i] = ScoreError{"invalid-distribution", e.what()};
      }
    } else {
      const auto* lp = std::get_if<wire::LogprobResponse>(&item.body);
      if (lp == nullptr) throw ProtocolError("batch item " + std::to_string(k) + " should be a logprob");
      results[i] = std::min(lp->logprob, 0.0);
    }
  }
  return results;
}

std::shared_ptr<RemoteModel> connect(const ScorerEndpoint& endpoint) {
  endpoint.validate();
  std::unique_ptr<LineChannel> channel =
      endpoint.transport == ScorerEndpoint::Transport::tcp
          ? open_tcp_channel(endpoint.host, endpoint.port, endpoint.timeout)
          : open_subprocess_channel(endpoint.command);
  return std::make_shared<RemoteModel>(std::move(channel), endpoint);
}

std::vector<ScoreResult> batch_score(const ConditionalSequenceModel& model, const std::vector<ScoreRequest>& requests) {
  if (const auto* remote = dynamic_cast<const RemoteModel*>(&model)) return remote->batch(requests);
  std::vector<ScoreResult> results;
  results.reserve(requests.size());
  for (const auto& r : requests) {
    try {
      if (r.kind == ScoreRequest::Kind::next_token)
        results.emplace_back(model.next_token_dist(r.source, r.target));
      else
        results.emplace_back(model.sequence_logprob(r.source, r.target));
    } catch (const UnknownToken& e) {
      results.emplace_back(ScoreError{std::string(wire::error_code::bad_request), e.what()});
    } catch (const InvalidInput& e) {
      results.emplace_back(ScoreError{std::string(wire::error_code::bad_request), e.what()});
    } catch (const MissingEntry& e) {
      results.emplace_back(ScoreError{std::string(wire::error_code::missing_entry), e.what()});
    }
  }
  return results;
}

}  // namespace pragma
