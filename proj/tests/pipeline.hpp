#pragma once

// Fixture pipeline shared by the tests and the cassette recorder:
// ingest -> perturb -> geval score -> evaluate over tests/fixtures/pipeline.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "deckeval/app.hpp"
#include "deckeval/llm_scoring.hpp"
#include "deckeval/text.hpp"
#include "support.hpp"

namespace testsupport {

inline std::filesystem::path pipeline_fixture_dir() {
  return std::filesystem::path(DECKEVAL_TEST_DATA) / "fixtures" / "pipeline";
}

namespace detail {

inline std::string between(const std::string& s, const std::string& open, const std::string& close) {
  auto a = s.find(open);
  if (a == std::string::npos) return {};
  a += open.size();
  auto b = s.find(close, a);
  return s.substr(a, b == std::string::npos ? std::string::npos : b - a);
}

inline std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

inline std::string python_list(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", '" : "'") + items[i] + "'";
  return out + "]";
}

}  // namespace detail

/// Deterministic stand-in for the completion model. Scores track what the
/// perturbations did to the deck, with a little prompt-dependent noise.
inline std::string fake_model(const GatewayRequest& r) {
  using nlohmann::json;
  const auto& p = r.prompt;
  if (p.rfind("You are now an expert at generating highly informative summary", 0) == 0) {
    auto node = detail::lines_of(detail::between(p, "Do NOT mention section title in the summary.\n", "\x01"));
    const std::string title = node.empty() ? "untitled" : node[0];
    auto words = text::split_words(node.size() > 1 ? node[1] : "");
    words.resize(std::min<std::size_t>(words.size(), 6));
    return title + " covers " + text::join(words, " ") + ".";
  }
  if (p.rfind("I have the summary of a document", 0) == 0) {
    std::vector<std::string> topics;
    for (const auto& line : detail::lines_of(detail::between(p, "as follows:\n", "\nFrom this summary"))) {
      auto cut = line.find(" covers");
      if (cut != std::string::npos) topics.push_back(line.substr(0, cut));
    }
    return "Here are the topics: " + detail::python_list(topics);
  }
  if (p.rfind("Here is a list of topics extracted", 0) == 0) {
    auto topics = json::parse(detail::lines_of(p).at(1)).get<std::vector<std::string>>();
    auto slide = json::parse(detail::between(p, "about that document:\n", "\n"));
    const auto title = normalize_topic(slide.at("title").get<std::string>());
    if (std::find(topics.begin(), topics.end(), title) != topics.end()) return detail::python_list({title});
    return "[]";
  }
  if (p.find("Write the evaluation steps") != std::string::npos) {
    return "1. Read every slide.\n2. Compare the slides against the criterion.\n3. Assign a score from 1 to 5.";
  }
  if (p.find("Evaluation Form (scores ONLY)") != std::string::npos) {
    std::vector<std::string> slides;
    for (const auto& line : detail::lines_of(p)) {
      if (line.rfind("Slide ", 0) == 0) slides.push_back(line.substr(line.find(": ") + 2));
    }
    double base = 0;
    if (p.find("Source Document Summary") != std::string::npos) {
      base = 1.0 + 4.0 * (static_cast<double>(slides.size()) - 2.0) / 6.0;
    } else {
      auto unique = slides;
      std::sort(unique.begin(), unique.end());
      unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
      base = 5.0 - 0.5 * static_cast<double>(slides.size() - unique.size());
    }
    std::uint64_t h = 1469598103934665603ULL + static_cast<std::uint64_t>(r.sample_index);
    for (unsigned char c : p) h = (h ^ c) * 1099511628211ULL;
    const int noise = h % 3 == 0 ? 1 : 0;
    const int score = std::clamp(static_cast<int>(std::lround(base)) - noise, 1, 5);
    return "- Score: " + std::to_string(score);
  }
  return "I am not sure.";
}

inline void expect_ok(const CommandResult& r, const char* step) {
  if (r.exit_code != kExitOk) {
    std::string errors;
    for (const auto& e : r.errors) errors += e.dump() + "\n";
    throw std::runtime_error(std::string(step) + " exited " + std::to_string(r.exit_code) + "\n" + errors);
  }
}

/// Runs the whole fixture pipeline into `work` and returns report.json.
inline std::string run_fixture_pipeline(RunConfig cfg, const std::filesystem::path& work) {
  cfg.out_dir = work / "ingest";
  expect_ok(cmd_ingest(cfg), "ingest");
  cfg.corpus = work / "ingest" / "corpus.jsonl";
  cfg.documents = work / "ingest" / "documents.jsonl";

  std::vector<std::filesystem::path> samples, scores;
  for (Metric m : {Metric::Redundancy, Metric::Coverage}) {
    const std::string name(metric_name(m));
    cfg.out_dir = work / name;
    expect_ok(cmd_perturb(cfg, m), "perturb");
    cfg.samples = {work / name / ("samples-" + name + ".jsonl")};
    expect_ok(cmd_score(cfg, "geval", m), "score");
    samples.push_back(cfg.samples.front());
    scores.push_back(work / name / ("scores-geval-" + name + ".jsonl"));
  }
  cfg.samples = samples;
  cfg.scores = scores;
  cfg.out_dir = work / "eval";
  expect_ok(cmd_evaluate(cfg), "evaluate");
  return slurp(work / "eval" / "report.json");
}

}  // namespace testsupport
