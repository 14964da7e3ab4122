#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deckeval/gateway.hpp"
#include "deckeval/model.hpp"

namespace deckeval {

namespace fs = std::filesystem;

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitPartial = 3, kExitTransport = 4 };

struct EndpointConfig {
  std::string base_url;
  std::string path;
  std::string format = "simple";
  std::string token_env = "DECKEVAL_API_TOKEN";
  int timeout_s = 120;
};

struct RunConfig {
  std::uint64_t seed = 0;

  std::optional<EndpointConfig> completion;
  std::optional<EndpointConfig> remote_scorer;
  std::optional<std::string> embedding_url;
  std::size_t stub_dim = 256;

  std::optional<fs::path> cassette_path;
  CassetteMode cassette_mode = CassetteMode::Passthrough;

  std::string completion_model = "gpt-4o";
  std::string phi3_model = "phi-3-mini";
  int geval_iterations = 128;
  double geval_temperature = 1.0;
  int max_in_flight = 4;
  int max_parallel = 1;

  double overlap_threshold = 0.80;
  double aspect_tolerance = 1e-3;
  bool model_intro_conclusion = false;

  // inputs
  std::optional<fs::path> decks;
  std::optional<fs::path> sections;
  std::optional<fs::path> corpus;
  std::optional<fs::path> documents;
  std::optional<fs::path> topics;
  std::vector<fs::path> samples;
  std::vector<fs::path> scores;
  fs::path out_dir = ".";

  // Not configurable from files; lets tests and fixture tools stand in for
  // the HTTP endpoint.
  std::shared_ptr<CompletionTransport> transport_override;

  void validate() const;
};

/// Reads a JSON config file. Relative paths resolve against the file's
/// directory. Secrets are rejected: tokens only come from the environment.
RunConfig load_config(const fs::path& path);
void apply_config_json(RunConfig& cfg, const nlohmann::json& j, const fs::path& base_dir);

struct CommandResult {
  int exit_code = kExitOk;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<nlohmann::json> errors;  // machine-readable, one per problem
};

CommandResult cmd_ingest(const RunConfig& cfg);
CommandResult cmd_perturb(const RunConfig& cfg, Metric metric);
CommandResult cmd_score(const RunConfig& cfg, const std::string& scorer, Metric metric);
CommandResult cmd_evaluate(const RunConfig& cfg);
CommandResult cmd_filter(const RunConfig& cfg);

/// Runs `body`, mapping library exceptions onto exit codes and error records.
CommandResult run_guarded(const std::function<CommandResult()>& body);

}  // namespace deckeval
