#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "deckeval/model.hpp"

namespace deckeval {

using Embedding = std::vector<double>;

/// text -> unit-norm vector of fixed dimension. Implementations must be safe
/// for concurrent embed() calls.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual Embedding embed(std::string_view text) const = 0;
  virtual std::vector<Embedding> embed_batch(std::span<const std::string> texts) const;
  virtual std::size_t dimension() const = 0;
  virtual std::string id() const = 0;
};

/// Hashed character n-gram embedder (n = 1..3) for deterministic,
/// network-free runs. Counts are non-negative, so cosines are in [0, 1].
class StubEmbedder : public EmbeddingProvider {
 public:
  explicit StubEmbedder(std::size_t dim = 256);
  Embedding embed(std::string_view text) const override;
  std::size_t dimension() const override { return dim_; }
  std::string id() const override { return "stub-ngram-" + std::to_string(dim_); }

 private:
  std::size_t dim_;
};

std::unique_ptr<EmbeddingProvider> stub_embedder(std::size_t dim = 256);

/// Remote provider speaking {texts:[...]} -> {vectors:[[...]]} on
/// POST <base>/embed, with GET <base>/capabilities -> {dimension, id}.
/// Vectors are cached per text for the provider's lifetime.
class HttpEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(std::string base_url, std::chrono::seconds timeout = std::chrono::seconds(60));
  Embedding embed(std::string_view text) const override;
  std::vector<Embedding> embed_batch(std::span<const std::string> texts) const override;
  std::size_t dimension() const override { return dim_; }
  std::string id() const override { return id_; }

 private:
  std::string base_url_;
  std::chrono::seconds timeout_;
  std::size_t dim_ = 0;
  std::string id_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, Embedding> cache_;
};

/// dot(u,v) / (|u| |v|), clamped to [-1, 1].
double cosine(std::span<const double> u, std::span<const double> v);

/// Document text units for coverage: node summaries when present, bodies
/// otherwise; empty units are skipped. Root included if it has text.
std::vector<std::string> document_units(const Document& doc);

/// Mean cosine over all (document unit, slide) pairs.
double coverage_heuristic(const Document& doc, const Presentation& p, const EmbeddingProvider& emb);
/// 1 - mean cosine over all ordered slide pairs, self-pairs included.
double redundancy_heuristic(const Presentation& p, const EmbeddingProvider& emb);
/// Mean per-slide cosine(images, text) over slides having both.
double text_image_heuristic(const Presentation& p, const EmbeddingProvider& emb);

}  // namespace deckeval
