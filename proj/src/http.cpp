// Every use of cpp-httplib lives in this translation unit.
#include "httplib.h"

#include <cmath>
#include <cstdlib>

#include <nlohmann/json.hpp>

#include "deckeval/errors.hpp"
#include "deckeval/gateway.hpp"
#include "deckeval/heuristics.hpp"

namespace deckeval {

using nlohmann::json;

namespace {

httplib::Client make_client(const std::string& base_url, std::chrono::seconds timeout) {
  httplib::Client cli(base_url);
  if (!cli.is_valid()) throw ContractError("invalid endpoint base URL '" + base_url + "'");
  cli.set_connection_timeout(timeout);
  cli.set_read_timeout(timeout);
  cli.set_write_timeout(timeout);
  return cli;
}

httplib::Headers auth_headers(const std::string& token_env) {
  httplib::Headers headers;
  if (token_env.empty()) return headers;
  if (const char* token = std::getenv(token_env.c_str()); token && *token) {
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }
  return headers;
}

std::string check_response(const httplib::Result& res, const std::string& what) {
  if (!res) throw TransportError(what + ": " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500) {
    throw TransportError(what + ": HTTP " + std::to_string(res->status));
  }
  if (res->status < 200 || res->status >= 300) {
    throw ProtocolError(what + ": HTTP " + std::to_string(res->status) + ": " + res->body);
  }
  return res->body;
}

json parse_body(const std::string& body, const std::string& what) {
  auto j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw ProtocolError(what + ": response is not JSON");
  return j;
}

}  // namespace

std::string HttpCompletionTransport::send(const GatewayRequest& request) {
  auto cli = make_client(endpoint_.base_url, endpoint_.timeout);
  json body;
  if (endpoint_.format == "openai-chat") {
    body = json{{"model", request.model_id},
                {"messages", json::array({json{{"role", "user"}, {"content", request.prompt}}})},
                {"temperature", request.temperature},
                {"max_tokens", request.max_tokens},
                {"seed", request.sample_index}};
  } else if (endpoint_.format == "simple") {
    body = json{{"model", request.model_id},
                {"prompt", request.prompt},
                {"temperature", request.temperature},
                {"max_tokens", request.max_tokens},
                {"do_sample", request.sampling_enabled},
                {"seed", request.sample_index}};
  } else {
    throw ContractError("unknown completion endpoint format '" + endpoint_.format + "'");
  }
  const std::string what = "completion " + endpoint_.base_url + endpoint_.path;
  auto res = cli.Post(endpoint_.path, auth_headers(endpoint_.token_env), body.dump(), "application/json");
  auto reply = parse_body(check_response(res, what), what);
  try {
    if (endpoint_.format == "openai-chat") return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    return reply.at("text").get<std::string>();
  } catch (const json::exception& e) {
    throw ProtocolError(what + ": unexpected response shape: " + e.what());
  }
}

std::string HttpJsonPostTransport::send(const GatewayRequest& request) {
  auto cli = make_client(endpoint_.base_url, endpoint_.timeout);
  const std::string what = "POST " + endpoint_.base_url + endpoint_.path;
  auto res = cli.Post(endpoint_.path, auth_headers(endpoint_.token_env), request.prompt, "application/json");
  return check_response(res, what);
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string base_url, std::chrono::seconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
  auto cli = make_client(base_url_, timeout_);
  const std::string what = "GET " + base_url_ + "/capabilities";
  auto caps = parse_body(check_response(cli.Get("/capabilities"), what), what);
  try {
    dim_ = caps.at("dimension").get<std::size_t>();
    id_ = caps.value("id", "remote:" + base_url_);
  } catch (const json::exception& e) {
    throw ProtocolError(what + ": " + e.what());
  }
  if (dim_ == 0) throw ProtocolError(what + ": advertised dimension is zero");
}

Embedding HttpEmbeddingProvider::embed(std::string_view text) const {
  std::string t(text);
  return embed_batch(std::span<const std::string>(&t, 1)).front();
}

std::vector<Embedding> HttpEmbeddingProvider::embed_batch(std::span<const std::string> texts) const {
  std::vector<std::string> missing;
  {
    std::lock_guard lock(mu_);
    for (const auto& t : texts) {
      if (!cache_.count(t) && std::find(missing.begin(), missing.end(), t) == missing.end()) missing.push_back(t);
    }
  }
  if (!missing.empty()) {
    auto cli = make_client(base_url_, timeout_);
    const std::string what = "POST " + base_url_ + "/embed";
    auto res = cli.Post("/embed", json{{"texts", missing}}.dump(), "application/json");
    auto reply = parse_body(check_response(res, what), what);
    std::vector<Embedding> vectors;
    try {
      vectors = reply.at("vectors").get<std::vector<Embedding>>();
    } catch (const json::exception& e) {
      throw ProtocolError(what + ": " + e.what());
    }
    if (vectors.size() != missing.size()) throw ProtocolError(what + ": vector count mismatch");
    std::lock_guard lock(mu_);
    for (std::size_t i = 0; i < missing.size(); ++i) {
      auto& v = vectors[i];
      if (v.size() != dim_) throw ProtocolError(what + ": vector of dimension " + std::to_string(v.size()));
      double norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
      if (norm == 0.0) throw ProtocolError(what + ": zero vector");
      for (double& x : v) x /= norm;
      cache_.emplace(missing[i], std::move(v));
    }
  }
  std::vector<Embedding> out;
  out.reserve(texts.size());
  std::lock_guard lock(mu_);
  for (const auto& t : texts) out.push_back(cache_.at(t));
  return out;
}

}  // namespace deckeval
