#include "deckeval/gateway.hpp"

#include <openssl/evp.h>

#include <algorithm>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "deckeval/errors.hpp"
#include "deckeval/io.hpp"
#include "deckeval/text.hpp"

namespace deckeval {

using nlohmann::json;

namespace {

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 digest failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

/// RAII slot on the in-flight semaphore.
class InFlightSlot {
 public:
  explicit InFlightSlot(std::counting_semaphore<64>& sem) : sem_(sem) { sem_.acquire(); }
  ~InFlightSlot() { sem_.release(); }
  InFlightSlot(const InFlightSlot&) = delete;
  InFlightSlot& operator=(const InFlightSlot&) = delete;

 private:
  std::counting_semaphore<64>& sem_;
};

}  // namespace

void GatewayRequest::validate() const {
  if (temperature < 0.0) throw ContractError("gateway temperature must be >= 0");
  if (max_tokens < 1) throw ContractError("gateway max_tokens must be >= 1");
  if (model_id.empty()) throw ContractError("gateway request needs a model_id");
}

json GatewayRequest::to_json() const {
  return json{{"model_id", model_id},
              {"prompt", prompt},
              {"temperature", temperature},
              {"max_tokens", max_tokens},
              {"sampling_enabled", sampling_enabled},
              {"sample_index", sample_index}};
}

GatewayRequest GatewayRequest::from_json(const json& j) {
  GatewayRequest r;
  r.model_id = j.at("model_id").get<std::string>();
  r.prompt = j.at("prompt").get<std::string>();
  r.temperature = j.at("temperature").get<double>();
  r.max_tokens = j.at("max_tokens").get<int>();
  r.sampling_enabled = j.at("sampling_enabled").get<bool>();
  r.sample_index = j.value("sample_index", 0);
  return r;
}

std::string GatewayRequest::digest() const { return sha256_hex(to_json().dump()); }

CassetteMode parse_cassette_mode(std::string_view name) {
  auto n = text::to_lower(name);
  if (n == "record") return CassetteMode::Record;
  if (n == "replay") return CassetteMode::Replay;
  if (n == "passthrough") return CassetteMode::Passthrough;
  throw ContractError("unknown cassette mode '" + std::string(name) + "'");
}

std::shared_ptr<Cassette> Cassette::load(const std::filesystem::path& path, CassetteMode mode) {
  auto cassette = std::make_shared<Cassette>(mode);
  if (!std::filesystem::exists(path)) {
    if (mode == CassetteMode::Replay) throw ContractError("replay cassette not found: " + path.string());
    return cassette;
  }
  for (const auto& record : io::read_jsonl(path)) {
    CassetteEntry e;
    e.digest = record.at("digest").get<std::string>();
    e.request = record.at("request");
    e.response = record.at("response").get<std::string>();
    e.timestamp = record.value("timestamp", std::string());
    cassette->entries_.emplace(e.digest, std::move(e));
  }
  return cassette;
}

void Cassette::save(const std::filesystem::path& path) const {
  std::lock_guard lock(mu_);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write cassette " + path.string());
  for (const auto& [digest, e] : entries_) {
    out << json{{"digest", digest}, {"request", e.request}, {"response", e.response}, {"timestamp", e.timestamp}}.dump()
        << '\n';
  }
}

std::optional<std::string> Cassette::lookup(const std::string& digest) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(digest);
  if (it == entries_.end()) return std::nullopt;
  return it->second.response;
}

void Cassette::store(CassetteEntry entry) {
  std::lock_guard lock(mu_);
  auto digest = entry.digest;
  entries_.insert_or_assign(std::move(digest), std::move(entry));
}

std::size_t Cassette::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

Gateway::Gateway(std::shared_ptr<Cassette> cassette, std::shared_ptr<CompletionTransport> transport,
                 RetryPolicy retry, int max_in_flight)
    : cassette_(std::move(cassette)),
      transport_(std::move(transport)),
      retry_(retry),
      max_in_flight_(std::clamp(max_in_flight, 1, 64)),
      in_flight_(max_in_flight_) {
  if (!cassette_) cassette_ = std::make_shared<Cassette>(CassetteMode::Passthrough);
  if (retry_.max_attempts < 1) retry_.max_attempts = 1;
}

std::string Gateway::complete(const GatewayRequest& request) {
  request.validate();
  const auto digest = request.digest();
  switch (cassette_->mode()) {
    case CassetteMode::Replay: {
      auto hit = cassette_->lookup(digest);
      if (!hit) throw CassetteMissError(digest);
      return *hit;
    }
    case CassetteMode::Record: {
      auto response = send_with_retry(request);
      cassette_->store(CassetteEntry{digest, request.to_json(), response, utc_now()});
      return response;
    }
    case CassetteMode::Passthrough:
      return send_with_retry(request);
  }
  throw ContractError("unreachable cassette mode");
}

std::string Gateway::send_with_retry(const GatewayRequest& request) {
  if (!transport_) throw ContractError("no completion endpoint configured for model '" + request.model_id + "'");
  InFlightSlot slot(in_flight_);
  auto delay = retry_.base_delay;
  for (int attempt = 1;; ++attempt) {
    try {
      return transport_->send(request);
    } catch (const TransportError& e) {
      if (attempt >= retry_.max_attempts) {
        throw TransportError(std::string(e.what()) + " (after " + std::to_string(attempt) + " attempts)");
      }
    }
    std::this_thread::sleep_for(delay);
    delay *= 2;
  }
}

}  // namespace deckeval
