#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>

#include <nlohmann/json.hpp>

namespace deckeval {

/// One text-in, text-out model call. Every field participates in the digest.
struct GatewayRequest {
  std::string model_id;
  std::string prompt;
  double temperature = 0.0;
  int max_tokens = 512;
  bool sampling_enabled = false;
  // Distinguishes repeated draws of an otherwise identical sampled request so
  // that each draw gets its own cassette entry.
  int sample_index = 0;

  bool deterministic() const { return temperature == 0.0 && !sampling_enabled; }
  void validate() const;
  nlohmann::json to_json() const;
  static GatewayRequest from_json(const nlohmann::json& j);
  /// Hex SHA-256 of the canonical JSON form.
  std::string digest() const;
};

/// Something that can answer a GatewayRequest over the network.
class CompletionTransport {
 public:
  virtual ~CompletionTransport() = default;
  /// Throws TransportError on retryable failures, ProtocolError otherwise.
  virtual std::string send(const GatewayRequest& request) = 0;
};

enum class CassetteMode { Record, Replay, Passthrough };

CassetteMode parse_cassette_mode(std::string_view name);

struct CassetteEntry {
  std::string digest;
  nlohmann::json request;
  std::string response;
  std::string timestamp;
};

/// Recorded request/response store. Access is serialized internally.
class Cassette {
 public:
  explicit Cassette(CassetteMode mode) : mode_(mode) {}
  Cassette(const Cassette&) = delete;
  Cassette& operator=(const Cassette&) = delete;

  /// Loads a cassette file; a missing file is an empty cassette unless the
  /// mode is Replay.
  static std::shared_ptr<Cassette> load(const std::filesystem::path& path, CassetteMode mode);
  /// Writes entries ordered by digest, one JSON record per line.
  void save(const std::filesystem::path& path) const;

  CassetteMode mode() const { return mode_; }
  std::optional<std::string> lookup(const std::string& digest) const;
  void store(CassetteEntry entry);
  std::size_t size() const;

 private:
  CassetteMode mode_;
  mutable std::mutex mu_;
  std::map<std::string, CassetteEntry> entries_;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{250};
};

/// Single boundary for every model interaction.
class Gateway {
 public:
  Gateway(std::shared_ptr<Cassette> cassette, std::shared_ptr<CompletionTransport> transport,
          RetryPolicy retry = {}, int max_in_flight = 4);

  /// Replay: stored bytes or CassetteMissError; never touches the transport.
  /// Record: calls the transport and stores the answer. Passthrough: calls
  /// the transport only.
  std::string complete(const GatewayRequest& request);

  const std::shared_ptr<Cassette>& cassette() const { return cassette_; }
  int max_in_flight() const { return max_in_flight_; }

 private:
  std::string send_with_retry(const GatewayRequest& request);

  std::shared_ptr<Cassette> cassette_;
  std::shared_ptr<CompletionTransport> transport_;
  RetryPolicy retry_;
  int max_in_flight_;
  std::counting_semaphore<64> in_flight_;
};

// HTTP transports -------------------------------------------------------------

struct HttpEndpoint {
  std::string base_url;  // scheme://host[:port]
  std::string path = "/v1/complete";
  /// Name of the environment variable holding a bearer token. Tokens are
  /// never taken from flags or config values.
  std::string token_env = "DECKEVAL_API_TOKEN";
  /// "simple": {model, prompt, temperature, max_tokens, do_sample, seed} -> {text}
  /// "openai-chat": chat-completions request -> choices[0].message.content
  std::string format = "simple";
  std::chrono::seconds timeout{120};
};

class HttpCompletionTransport : public CompletionTransport {
 public:
  explicit HttpCompletionTransport(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::string send(const GatewayRequest& request) override;

 private:
  HttpEndpoint endpoint_;
};

/// Posts the request prompt verbatim as a JSON body and returns the raw
/// response body. Used for the remote scorer endpoint.
class HttpJsonPostTransport : public CompletionTransport {
 public:
  explicit HttpJsonPostTransport(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::string send(const GatewayRequest& request) override;

 private:
  HttpEndpoint endpoint_;
};

}  // namespace deckeval
