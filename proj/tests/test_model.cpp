#include <gtest/gtest.h>

#include <set>

#include <nlohmann/json.hpp>

#include "deckeval/errors.hpp"
#include "deckeval/model.hpp"
#include "deckeval/rng.hpp"
#include "support.hpp"

using namespace deckeval;
using testsupport::slide;

TEST(Metric, NamesRoundTrip) {
  for (Metric m : kAllMetrics) EXPECT_EQ(parse_metric(metric_name(m)), m);
  EXPECT_EQ(parse_metric("Text-Image-Alignment"), Metric::TextImageAlignment);
  EXPECT_EQ(parse_metric("FLOW"), Metric::Flow);
  EXPECT_THROW(parse_metric("style"), ContractError);
  EXPECT_TRUE(requires_document(Metric::Coverage));
  EXPECT_FALSE(requires_document(Metric::Flow));
}

TEST(LabelScore, Normalization) {
  EXPECT_DOUBLE_EQ(normalize_label_score(5), 1.0);
  EXPECT_DOUBLE_EQ(normalize_label_score(3), 0.5);
  EXPECT_DOUBLE_EQ(normalize_label_score(1), 0.0);
  EXPECT_THROW(normalize_label_score(0), ContractError);
  EXPECT_THROW(normalize_label_score(6), ContractError);
}

TEST(ScoreResult, RangeChecked) {
  EXPECT_NO_THROW(ScoreResult::make(0.0, std::nullopt, "x"));
  EXPECT_NO_THROW(ScoreResult::make(1.0, "fine", "x"));
  EXPECT_THROW(ScoreResult::make(1.0001, std::nullopt, "x"), ContractError);
  EXPECT_THROW(ScoreResult::make(-0.1, std::nullopt, "x"), ContractError);
}

TEST(ImageField, FlattenAndSplit) {
  EXPECT_EQ(flatten_image_field({}), "No Images");
  EXPECT_EQ(flatten_image_field({"a cat"}), "Image1: a cat");
  EXPECT_EQ(flatten_image_field({"a", "b, c"}), "Image1: a, Image2: b, c");
  EXPECT_EQ(split_image_field("No Images"), std::vector<std::string>{});
  EXPECT_EQ(split_image_field("Image1: a, Image2: b, c"), (std::vector<std::string>{"a", "b, c"}));
  EXPECT_THROW(split_image_field("a picture"), MalformedInputError);
}

TEST(Slide, Validation) {
  Slide s = slide("T", "body", {"One. Two."});
  EXPECT_NO_THROW(s.validate());
  s.image_captions.push_back("extra");
  EXPECT_THROW(s.validate(), ContractError);
  EXPECT_THROW(slide("  ").validate(), ContractError);
}

TEST(Slide, PlainTextSkipsEmptyParts) {
  Slide s = slide("Title", "", {"Pic. More."});
  EXPECT_EQ(slide_plain_text(s), "Title Pic Pic. More.");
}

TEST(Presentation, JsonRoundTrip) {
  auto p = testsupport::numbered_deck(3, "p1");
  p.aspect_ratio = {4, 3};
  p.source_uri = "https://example.org/deck";
  auto j = presentation_to_json(p);
  EXPECT_EQ(j.at("aspect_ratio"), "4:3");
  EXPECT_EQ(j.at("slides").at(0).at("image"), "Image1: Figure 1 shows a chart. It has axes.");
  EXPECT_EQ(presentation_from_json(j), p);
  EXPECT_EQ(deserialize_presentation(serialize_presentation(p)), p);
}

TEST(Presentation, MalformedRecords) {
  EXPECT_THROW(deserialize_presentation("{not json"), MalformedInputError);
  EXPECT_THROW(deserialize_presentation(R"({"id":"x","slides":[]})"), MalformedInputError);
  EXPECT_THROW(deserialize_presentation(R"({"id":"x"})"), MalformedInputError);
  EXPECT_THROW(
      deserialize_presentation(
          R"({"id":"x","aspect_ratio":"wide","slides":[{"title":"a","text":"","image":"No Images","image-caption":"No Images"}]})"),
      MalformedInputError);
}

TEST(Presentation, NoImageSlideUsesSentinel) {
  Presentation p;
  p.id = "x";
  p.slides.push_back(slide("Only text", "words"));
  auto j = presentation_to_json(p);
  EXPECT_EQ(j["slides"][0]["image"], "No Images");
  EXPECT_EQ(j["slides"][0]["image-caption"], "No Images");
}

TEST(Document, JsonRoundTrip) {
  Document d{"doc", DocumentNode{"doc", "", std::nullopt, {}}};
  DocumentNode child{"Intro", "Some text", std::string("short"), {}};
  d.root.children.push_back(child);
  EXPECT_EQ(document_from_json(document_to_json(d)), d);
}

TEST(Trace, WireIndicesAreOneBased) {
  PerturbationTrace t;
  t.metric = Metric::Flow;
  t.degree = 1;
  t.selected_indices = {0, 3};
  t.permutation = std::vector<std::pair<int, int>>{{0, 3}, {3, 0}};
  t.rng_seed = 42;
  auto j = trace_to_json(t);
  EXPECT_EQ(j["selected_indices"], nlohmann::json::array({1, 4}));
  EXPECT_EQ(j["permutation"][0], nlohmann::json::array({1, 4}));
  EXPECT_EQ(trace_from_json(j), t);
  j["selected_indices"] = nlohmann::json::array({0});
  EXPECT_THROW(trace_from_json(j), MalformedInputError);
}

TEST(Trace, Validation) {
  PerturbationTrace t;
  t.metric = Metric::Flow;
  t.degree = 0;
  EXPECT_NO_THROW(t.validate());
  t.selected_indices = {1};
  EXPECT_THROW(t.validate(), ContractError);

  t.degree = 2;
  t.selected_indices = {1, 2};
  t.permutation = std::vector<std::pair<int, int>>{{1, 2}, {2, 2}};
  EXPECT_THROW(t.validate(), ContractError);
  t.permutation = std::vector<std::pair<int, int>>{{1, 2}, {2, 1}};
  EXPECT_NO_THROW(t.validate());
}

TEST(LabeledSample, ScoreMustMatchDegree) {
  LabeledSample s;
  s.presentation = testsupport::numbered_deck(2);
  s.metric = Metric::Redundancy;
  s.degree = 2;
  s.score = 3;
  s.trace.metric = Metric::Redundancy;
  s.trace.degree = 2;
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.id(), "deck/redundancy/d2");
  s.score = 4;
  EXPECT_THROW(s.validate(), ContractError);
  s.score = 3;
  s.metric = Metric::Coverage;
  s.trace.metric = Metric::Coverage;
  EXPECT_THROW(s.validate(), ContractError);  // coverage needs a document
}

TEST(SummaryCap, ReferenceSections) {
  EXPECT_EQ(summary_word_cap("Methods"), 30u);
  EXPECT_EQ(summary_word_cap("References"), 20u);
  EXPECT_EQ(summary_word_cap("reference"), 20u);
  EXPECT_TRUE(is_reference_section(" References "));
}

TEST(Rng, SampleIsDistinctAndSeeded) {
  Rng a(7), b(7), c(8);
  auto sa = a.sample(10, 6);
  EXPECT_EQ(sa, b.sample(10, 6));
  EXPECT_NE(sa, c.sample(10, 6));
  std::set<int> uniq(sa.begin(), sa.end());
  EXPECT_EQ(uniq.size(), 6u);
  for (int v : sa) {
    EXPECT_GE(v, 0);
    EXPECT_LT(v, 10);
  }
}

TEST(Rng, BelowIsRoughlyUniform) {
  Rng r(1);
  std::vector<int> counts(6, 0);
  for (int i = 0; i < 60000; ++i) ++counts[r.below(6)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
}

TEST(Rng, DerivedSeedsDiffer) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t item = 0; item < 50; ++item) {
    for (std::uint64_t d = 0; d < 5; ++d) seen.insert(derive_seed(123, item, d));
  }
  EXPECT_EQ(seen.size(), 250u);
  EXPECT_EQ(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
}
