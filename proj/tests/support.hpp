#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "deckeval/gateway.hpp"
#include "deckeval/heuristics.hpp"
#include "deckeval/model.hpp"

namespace testsupport {

using namespace deckeval;

inline Slide slide(std::string title, std::string text = {}, std::vector<std::string> descriptions = {}) {
  Slide s;
  s.title = std::move(title);
  s.text_summary = std::move(text);
  for (const auto& d : descriptions) s.image_captions.push_back(d.substr(0, d.find('.')));
  s.image_descriptions = std::move(descriptions);
  return s;
}

/// Titles made of a single repeated character; with the stub embedder their
/// n-gram buckets rarely collide, so the slides are close to orthogonal.
inline std::string glyph_text(int i) {
  static const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
  return std::string(4, alphabet.at(static_cast<std::size_t>(i)));
}

/// m slides, every slide carries one image and distinct wording.
inline Presentation numbered_deck(int m, std::string id = "deck") {
  Presentation p;
  p.id = std::move(id);
  p.language_tag = "en";
  for (int i = 0; i < m; ++i) {
    const auto n = std::to_string(i + 1);
    p.slides.push_back(slide("Topic " + n, "Body text for part " + n + ".",
                             {"Figure " + n + " shows a chart. It has axes."}));
  }
  return p;
}

inline Presentation glyph_deck(int m, std::string id = "glyphs") {
  Presentation p;
  p.id = std::move(id);
  p.language_tag = "en";
  for (int i = 0; i < m; ++i) p.slides.push_back(slide(glyph_text(i)));
  return p;
}

/// Texts whose stub embeddings share no bucket, found greedily.
inline std::vector<std::string> orthogonal_texts(const EmbeddingProvider& emb, std::size_t count) {
  std::vector<std::string> picked;
  std::vector<Embedding> vecs;
  for (int i = 0; i < 36 && picked.size() < count; ++i) {
    auto t = glyph_text(i);
    auto v = emb.embed(t);
    bool ok = true;
    for (const auto& u : vecs) {
      for (std::size_t k = 0; k < u.size() && ok; ++k) ok = !(u[k] != 0.0 && v[k] != 0.0);
    }
    if (!ok) continue;
    picked.push_back(t);
    vecs.push_back(v);
  }
  return picked;
}

/// Transport answering with a caller-supplied function; counts calls.
class ScriptedTransport : public CompletionTransport {
 public:
  using Script = std::function<std::string(const GatewayRequest&)>;
  explicit ScriptedTransport(Script script) : script_(std::move(script)) {}

  std::string send(const GatewayRequest& request) override {
    ++calls;
    {
      std::lock_guard lock(mu_);
      seen.push_back(request);
    }
    return script_(request);
  }

  std::atomic<int> calls{0};
  std::vector<GatewayRequest> seen;

 private:
  Script script_;
  std::mutex mu_;
};

/// An English talk that passes every corpus rule.
inline Presentation clean_deck(std::string id = "clean") {
  Presentation p;
  p.id = std::move(id);
  p.language_tag = "en";
  p.slides = {
      slide("Introduction", "Why graph models matter for protein design."),
      slide("Background", "Earlier work used sequence alignment and hand tuned energy terms.",
            {"A timeline of prior methods. Arrows link each method to its successor."}),
      slide("Method", "We encode residues as nodes and contacts as weighted edges."),
      slide("Training", "The network is trained on forty thousand structures with early stopping.",
            {"A loss curve over epochs. Validation loss flattens after epoch twelve."}),
      slide("Results", "Accuracy improves by four points on the held out benchmark."),
      slide("Limitations", "Large complexes exceed memory on a single device."),
      slide("Future work", "We plan to add side chain geometry and ligand contacts."),
      slide("Conclusion", "Graph encodings give a simple and strong baseline."),
  };
  return p;
}

/// Six decks: one clean deck and one deck failing each rule exactly once.
inline std::vector<Presentation> crafted_corpus() {
  std::vector<Presentation> out;
  out.push_back(clean_deck());

  Presentation short_deck = clean_deck("too_short");
  short_deck.slides = {short_deck.slides.front(), short_deck.slides[4], short_deck.slides.back()};
  out.push_back(short_deck);

  Presentation no_cues = clean_deck("no_cues");
  no_cues.slides.front().title = "Motivation";
  no_cues.slides.back().title = "Outlook";
  no_cues.slides.back().text_summary = "Graph encodings give a simple and strong baseline for design.";
  out.push_back(no_cues);

  Presentation repeated = clean_deck("repeated");
  repeated.slides.insert(repeated.slides.begin() + 3, repeated.slides[2]);
  out.push_back(repeated);

  Presentation french = clean_deck("french");
  french.language_tag = "fr";
  out.push_back(french);

  Presentation four_three = clean_deck("four_three");
  four_three.aspect_ratio = {1024, 768};
  out.push_back(four_three);
  return out;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  static std::atomic<int> counter{0};
  auto dir = std::filesystem::temp_directory_path() /
             ("deckeval_" + name + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  out << contents;
}

}  // namespace testsupport
