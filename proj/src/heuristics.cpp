#include "deckeval/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "deckeval/errors.hpp"
#include "deckeval/text.hpp"

namespace deckeval {

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t salt) {
  std::uint64_t h = 1469598103934665603ULL ^ (salt * 0x100000001b3ULL);
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<Embedding> embed_all(const EmbeddingProvider& emb, const std::vector<std::string>& texts) {
  auto out = emb.embed_batch(texts);
  if (out.size() != texts.size()) throw ProtocolError("embedding provider returned the wrong number of vectors");
  return out;
}

void collect_units(const DocumentNode& node, std::vector<std::string>& out) {
  const std::string& unit = node.summary && !text::trim(*node.summary).empty() ? *node.summary : node.body;
  if (!text::trim(unit).empty()) out.push_back(unit);
  for (const auto& c : node.children) collect_units(c, out);
}

std::vector<std::string> slide_texts(const Presentation& p) {
  std::vector<std::string> out;
  out.reserve(p.slides.size());
  for (const auto& s : p.slides) out.push_back(slide_plain_text(s));
  return out;
}

}  // namespace

std::vector<Embedding> EmbeddingProvider::embed_batch(std::span<const std::string> texts) const {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

StubEmbedder::StubEmbedder(std::size_t dim) : dim_(dim) {
  if (dim < 8) throw ContractError("stub embedder dimension must be >= 8");
}

Embedding StubEmbedder::embed(std::string_view input) const {
  Embedding v(dim_, 0.0);
  const std::string s = text::to_lower(input);
  if (s.empty()) {
    v[fnv1a("", 0) % dim_] = 1.0;
    return v;
  }
  for (std::size_t n = 1; n <= 3; ++n) {
    if (s.size() < n) break;
    for (std::size_t i = 0; i + n <= s.size(); ++i) v[fnv1a(std::string_view(s).substr(i, n), n) % dim_] += 1.0;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

std::unique_ptr<EmbeddingProvider> stub_embedder(std::size_t dim) { return std::make_unique<StubEmbedder>(dim); }

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ContractError("cosine of vectors with different dimensions");
  double dot = 0.0;
  double nu = 0.0;
  double nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw NumericDomainError("cosine of a zero vector");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

std::vector<std::string> document_units(const Document& doc) {
  std::vector<std::string> out;
  collect_units(doc.root, out);
  return out;
}

double coverage_heuristic(const Document& doc, const Presentation& p, const EmbeddingProvider& emb) {
  auto units = document_units(doc);
  if (units.empty()) throw DegenerateInputError("document has no text units");
  if (p.slides.empty()) throw DegenerateInputError("presentation has no slides");
  auto doc_vecs = embed_all(emb, units);
  auto slide_vecs = embed_all(emb, slide_texts(p));
  double sum = 0.0;
  for (const auto& x : doc_vecs) {
    for (const auto& y : slide_vecs) sum += cosine(x, y);
  }
  return sum / (static_cast<double>(doc_vecs.size()) * static_cast<double>(slide_vecs.size()));
}

double redundancy_heuristic(const Presentation& p, const EmbeddingProvider& emb) {
  if (p.slides.empty()) throw DegenerateInputError("presentation has no slides");
  auto vecs = embed_all(emb, slide_texts(p));
  const std::size_t n = vecs.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) sum += cosine(vecs[i], vecs[j]);
  }
  return 1.0 - sum / static_cast<double>(n * n);
}

double text_image_heuristic(const Presentation& p, const EmbeddingProvider& emb) {
  std::vector<std::string> image_texts;
  std::vector<std::string> body_texts;
  for (const auto& s : p.slides) {
    if (!s.has_image() || text::trim(s.text_summary).empty()) continue;
    std::vector<std::string> parts;
    for (const auto& c : s.image_captions) {
      if (!text::trim(c).empty()) parts.push_back(c);
    }
    for (const auto& d : s.image_descriptions) parts.push_back(d);
    image_texts.push_back(text::join(parts, " "));
    body_texts.push_back(s.text_summary);
  }
  if (image_texts.empty()) {
    throw InapplicableMetricError("deck '" + p.id + "' has no slide with both text and images");
  }
  auto img = embed_all(emb, image_texts);
  auto txt = embed_all(emb, body_texts);
  double sum = 0.0;
  for (std::size_t i = 0; i < img.size(); ++i) sum += cosine(img[i], txt[i]);
  return sum / static_cast<double>(img.size());
}

}  // namespace deckeval
