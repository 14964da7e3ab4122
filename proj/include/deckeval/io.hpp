#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace deckeval::io {

/// First line of every file the tool writes: {"header": {...}}.
nlohmann::json make_header(const std::string& kind, std::optional<std::uint64_t> seed = std::nullopt);
bool is_header(const nlohmann::json& record);

/// Reads one JSON record per line, skipping blank lines and header records.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

/// Reads the header record, if the file starts with one.
std::optional<nlohmann::json> read_header(const std::filesystem::path& path);

/// Line-oriented writer that refuses to replace an existing file.
class JsonlWriter {
 public:
  JsonlWriter(const std::filesystem::path& path, const nlohmann::json& header);
  void write(const nlohmann::json& record);
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

/// Writes a whole text file; throws if it already exists.
void write_new_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace deckeval::io
