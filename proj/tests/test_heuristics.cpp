#include <gtest/gtest.h>

#include <cmath>

#include "deckeval/errors.hpp"
#include "deckeval/heuristics.hpp"
#include "support.hpp"

using namespace deckeval;
using testsupport::slide;

namespace {

Presentation deck_of(const std::vector<std::string>& titles) {
  Presentation p;
  p.id = "t";
  for (const auto& t : titles) p.slides.push_back(slide(t));
  return p;
}

// m unique orthogonal slides plus k copies of k distinct slides:
// the self-similarity sum is (m - k) + 4k over (m + k)^2 pairs.
double orthogonal_redundancy(int m, int k) {
  const double n = m + k;
  return 1.0 - (m + 3.0 * k) / (n * n);
}

}  // namespace

TEST(Stub, UnitNormAndDeterministic) {
  StubEmbedder emb(64);
  auto a = emb.embed("Graph neural networks");
  double norm = 0;
  for (double x : a) norm += x * x;
  EXPECT_NEAR(norm, 1.0, 1e-12);
  EXPECT_EQ(a, emb.embed("graph NEURAL networks"));
  EXPECT_EQ(emb.dimension(), 64u);
  EXPECT_EQ(emb.id(), "stub-ngram-64");
  EXPECT_THROW(StubEmbedder(4), ContractError);
  EXPECT_NO_THROW(emb.embed(""));
}

TEST(Cosine, Basics) {
  std::vector<double> u{1, 0, 0};
  std::vector<double> v{0, 2, 0};
  std::vector<double> w{3, 0, 0};
  EXPECT_DOUBLE_EQ(cosine(u, v), 0.0);
  EXPECT_DOUBLE_EQ(cosine(u, w), 1.0);
  std::vector<double> z{0, 0, 0};
  EXPECT_THROW(cosine(u, z), NumericDomainError);
  std::vector<double> short_v{1, 0};
  EXPECT_THROW(cosine(u, short_v), ContractError);
}

TEST(Units, SummaryPreferredOverBody) {
  Document d{"d", DocumentNode{"d", "", std::nullopt, {}}};
  d.root.children.push_back(DocumentNode{"A", "long body", std::string("short"), {}});
  d.root.children.push_back(DocumentNode{"B", "only body", std::nullopt, {}});
  d.root.children.push_back(DocumentNode{"C", "", std::string("  "), {}});
  EXPECT_EQ(document_units(d), (std::vector<std::string>{"short", "only body"}));
}

TEST(Coverage, TwoByTwoOrthogonal) {
  StubEmbedder emb(256);
  auto texts = testsupport::orthogonal_texts(emb, 2);
  ASSERT_EQ(texts.size(), 2u);
  Document d{"d", DocumentNode{"d", "", std::nullopt, {}}};
  for (const auto& t : texts) d.root.children.push_back(DocumentNode{t, t, std::nullopt, {}});
  auto p = deck_of(texts);
  // pairs: two identical (1), two orthogonal (0)
  EXPECT_NEAR(coverage_heuristic(d, p, emb), 0.5, 1e-12);
  Document empty{"e", DocumentNode{"e", "", std::nullopt, {}}};
  EXPECT_THROW(coverage_heuristic(empty, p, emb), DegenerateInputError);
}

TEST(Redundancy, OrthogonalDeckMatchesClosedForm) {
  StubEmbedder emb(256);
  auto texts = testsupport::orthogonal_texts(emb, 10);
  ASSERT_EQ(texts.size(), 10u);
  EXPECT_NEAR(redundancy_heuristic(deck_of(texts), emb), 0.9, 1e-12);
  for (int k = 1; k <= 8; ++k) {
    auto with_copies = texts;
    for (int c = 0; c < k; ++c) with_copies.push_back(texts[static_cast<std::size_t>(c)]);
    EXPECT_NEAR(redundancy_heuristic(deck_of(with_copies), emb), orthogonal_redundancy(10, k), 1e-12) << k;
  }
}

TEST(Redundancy, ClosedFormIsNotMonotoneInCopies) {
  // 10 slides, 2d copies: the score dips then rises again
  EXPECT_LT(orthogonal_redundancy(10, 2), orthogonal_redundancy(10, 0));
  EXPECT_LT(orthogonal_redundancy(10, 4), orthogonal_redundancy(10, 2));
  EXPECT_GT(orthogonal_redundancy(10, 6), orthogonal_redundancy(10, 4));
  EXPECT_GT(orthogonal_redundancy(10, 8), orthogonal_redundancy(10, 6));
}

TEST(Redundancy, IdenticalSlidesScoreZero) {
  StubEmbedder emb(128);
  EXPECT_NEAR(redundancy_heuristic(deck_of({"same", "same", "same"}), emb), 0.0, 1e-12);
  Presentation none;
  EXPECT_THROW(redundancy_heuristic(none, emb), DegenerateInputError);
}

TEST(TextImage, UsesSlidesWithBothParts) {
  StubEmbedder emb(256);
  Presentation p;
  p.id = "ti";
  p.slides.push_back(slide("A", "bbbb", {"bbbb"}));
  p.slides.push_back(slide("B", "no image here"));
  p.slides.push_back(slide("C", "", {"only image"}));
  // caption equals description here, so the image text is "bbbb bbbb"
  auto img = emb.embed("bbbb bbbb");
  auto txt = emb.embed("bbbb");
  EXPECT_NEAR(text_image_heuristic(p, emb), cosine(img, txt), 1e-12);

  Presentation bare;
  bare.id = "bare";
  bare.slides.push_back(slide("only", "text"));
  EXPECT_THROW(text_image_heuristic(bare, emb), InapplicableMetricError);
}

TEST(TextImage, MatchedBeatsShuffled) {
  StubEmbedder emb(512);
  Presentation p;
  p.id = "m";
  p.slides.push_back(slide("1", "protein folding structure", {"protein folding structure diagram"}));
  p.slides.push_back(slide("2", "stock market returns", {"stock market returns chart"}));
  Presentation swapped = p;
  std::swap(swapped.slides[0].image_descriptions, swapped.slides[1].image_descriptions);
  std::swap(swapped.slides[0].image_captions, swapped.slides[1].image_captions);
  EXPECT_GT(text_image_heuristic(p, emb), text_image_heuristic(swapped, emb));
}
