#include "deckeval/io.hpp"

#include <string>

#include "deckeval/errors.hpp"

namespace deckeval::io {

using nlohmann::json;

namespace {

std::ofstream open_new(const std::filesystem::path& path) {
  if (std::filesystem::exists(path)) {
    throw ContractError("refusing to overwrite existing output " + path.string());
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

json make_header(const std::string& kind, std::optional<std::uint64_t> seed) {
  json h{{"format", "deckeval/" + kind}, {"version", 1}};
  if (seed) h["seed"] = *seed;
  return json{{"header", std::move(h)}};
}

bool is_header(const json& record) { return record.is_object() && record.size() == 1 && record.contains("header"); }

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedInputError("cannot read " + path.string());
  std::vector<json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw MalformedInputError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (is_header(record)) continue;
    out.push_back(std::move(record));
  }
  return out;
}

std::optional<json> read_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string line;
  if (!in || !std::getline(in, line)) return std::nullopt;
  auto record = json::parse(line, nullptr, false);
  if (record.is_discarded() || !is_header(record)) return std::nullopt;
  return record["header"];
}

JsonlWriter::JsonlWriter(const std::filesystem::path& path, const json& header)
    : path_(path), out_(open_new(path)) {
  write(header);
}

void JsonlWriter::write(const json& record) {
  out_ << record.dump() << '\n';
  if (!out_) throw Error("write failed on " + path_.string());
}

void JsonlWriter::close() { out_.close(); }

void write_new_file(const std::filesystem::path& path, const std::string& contents) {
  auto out = open_new(path);
  out << contents;
  if (!out) throw Error("write failed on " + path.string());
}

}  // namespace deckeval::io
