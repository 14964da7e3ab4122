#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "deckeval/errors.hpp"
#include "deckeval/llm_scoring.hpp"
#include "support.hpp"

using namespace deckeval;
using nlohmann::json;
using testsupport::ScriptedTransport;

namespace {

std::shared_ptr<ScriptedTransport> scripted(ScriptedTransport::Script s) {
  return std::make_shared<ScriptedTransport>(std::move(s));
}

bool is_steps_request(const GatewayRequest& r) { return r.prompt.find("Write the evaluation steps") != std::string::npos; }

}  // namespace

TEST(ListParse, PythonStyle) {
  EXPECT_EQ(parse_string_list("['graph theory', \"neural nets\", 'it\\'s']"),
            (std::vector<std::string>{"graph theory", "neural nets", "it's"}));
  EXPECT_EQ(parse_string_list("Sure! Here you go:\n[alpha, beta]\nHope that helps."),
            (std::vector<std::string>{"alpha", "beta"}));
  EXPECT_TRUE(parse_string_list("[]").empty());
  EXPECT_THROW(parse_string_list("no list"), ParseError);
  EXPECT_THROW(parse_string_list("['open]"), ParseError);
}

TEST(ListParse, TopicNormalization) {
  EXPECT_EQ(normalize_topic("  Graph   Theory "), "graph_theory");
  EXPECT_EQ(normalize_topic("already_fine"), "already_fine");
}

TEST(Likert, FirstIntegerInRange) {
  EXPECT_EQ(parse_likert_score("4"), 4);
  EXPECT_EQ(parse_likert_score("Score: 3/5"), 3);
  EXPECT_EQ(parse_likert_score("- Flow: 5"), 5);
  EXPECT_EQ(parse_likert_score("10 out of 10, so 2"), 2);
  EXPECT_EQ(parse_likert_score("4.5"), std::nullopt);
  EXPECT_EQ(parse_likert_score("zero"), std::nullopt);
  EXPECT_EQ(parse_likert_score("0"), std::nullopt);
}

TEST(Topics, ExtractDeduplicates) {
  auto t = scripted([](const GatewayRequest&) { return std::string("['Graph Theory', 'graph theory', 'results']"); });
  Gateway gw(nullptr, t);
  EXPECT_EQ(extract_topics("summary", gw, "m"), (std::vector<std::string>{"graph_theory", "results"}));
  EXPECT_THROW(extract_topics("  ", gw, "m"), ContractError);
  auto empty = scripted([](const GatewayRequest&) { return std::string("[]"); });
  Gateway gw2(nullptr, empty);
  EXPECT_THROW(extract_topics("summary", gw2, "m"), ParseError);
}

TEST(Topics, AssignmentDropsUnknownAndFallsBack) {
  std::vector<std::string> topics{"graph_theory", "protein_folding", "results"};
  auto slide = testsupport::slide("Folding proteins", "Protein folding with graphs.");

  auto good = scripted([](const GatewayRequest&) { return std::string("['results', 'made_up']"); });
  Gateway gw(nullptr, good);
  auto a = assign_topics(slide, topics, gw, "m");
  EXPECT_EQ(a.indices, std::vector<int>{2});
  EXPECT_FALSE(a.used_fallback);
  EXPECT_NE(a.note.find("made_up"), std::string::npos);

  auto junk = scripted([](const GatewayRequest&) { return std::string("I cannot tell."); });
  Gateway gw2(nullptr, junk);
  auto b = assign_topics(slide, topics, gw2, "m");
  EXPECT_TRUE(b.used_fallback);
  EXPECT_EQ(b.indices, std::vector<int>{1});
}

TEST(Topics, OverlapTieGoesToLowestIndex) {
  auto slide = testsupport::slide("nothing shared");
  EXPECT_EQ(best_overlap_topic(slide, {"alpha", "beta"}), 0);
  auto s2 = testsupport::slide("beta alpha");
  EXPECT_EQ(best_overlap_topic(s2, {"gamma", "alpha", "beta"}), 1);
}

TEST(Topics, BuildModelPerSlide) {
  auto deck = testsupport::numbered_deck(3);
  auto t = scripted([](const GatewayRequest& r) {
    if (r.prompt.find("extract all major themes") != std::string::npos) return std::string("['topic 1', 'topic 3']");
    if (r.prompt.find("Topic 3") != std::string::npos) return std::string("['topic_3']");
    return std::string("['topic_1']");
  });
  Gateway gw(nullptr, t);
  auto built = build_topic_model("summary", deck, gw, "m");
  EXPECT_EQ(built.model.topics, (std::vector<std::string>{"topic_1", "topic_3"}));
  EXPECT_EQ(built.model.slide_topics, (std::vector<std::vector<int>>{{0}, {0}, {1}}));
  EXPECT_NO_THROW(built.model.validate(3));
}

TEST(Geval, AlternatingScoresAverageToMiddle) {
  auto t = scripted([](const GatewayRequest& r) {
    if (is_steps_request(r)) return std::string("1. Read the deck.");
    return std::string(r.sample_index % 2 ? "5" : "1");
  });
  Gateway gw(nullptr, t, {}, 4);
  PromptedScorerConfig cfg;
  cfg.model_id = "m";
  cfg.n_iterations = 20;
  auto s = geval_score(testsupport::numbered_deck(3), Metric::Flow, std::nullopt, cfg, gw);
  EXPECT_DOUBLE_EQ(s.mean, 3.0);
  EXPECT_DOUBLE_EQ(s.value, 0.5);
  EXPECT_EQ(s.parsed, 20);
  EXPECT_EQ(t->calls.load(), 21);
}

TEST(Geval, DefaultIterationsAndSampledRequests) {
  std::mutex mu;
  std::set<int> indices;
  int steps = 0;
  auto t = scripted([&](const GatewayRequest& r) {
    std::lock_guard lock(mu);
    if (is_steps_request(r)) {
      ++steps;
      EXPECT_TRUE(r.deterministic());
      return std::string("steps");
    }
    EXPECT_FALSE(r.deterministic());
    EXPECT_DOUBLE_EQ(r.temperature, 1.0);
    indices.insert(r.sample_index);
    return std::string("4");
  });
  Gateway gw(nullptr, t);
  PromptedScorerConfig cfg;
  cfg.model_id = "m";
  EXPECT_EQ(cfg.n_iterations, 128);
  auto s = geval_score(testsupport::numbered_deck(2), Metric::Redundancy, std::nullopt, cfg, gw);
  EXPECT_EQ(steps, 1);
  EXPECT_EQ(indices.size(), 128u);
  EXPECT_DOUBLE_EQ(s.value, 0.75);
}

TEST(Geval, UnparseableDrawsAreDropped) {
  auto t = scripted([](const GatewayRequest& r) {
    if (is_steps_request(r)) return std::string("steps");
    return std::string(r.sample_index < 3 ? "I refuse" : "2");
  });
  Gateway gw(nullptr, t);
  PromptedScorerConfig cfg{"m", 8};
  auto s = geval_score(testsupport::numbered_deck(2), Metric::Flow, std::nullopt, cfg, gw);
  EXPECT_EQ(s.dropped, 3);
  EXPECT_EQ(s.parsed, 5);
  EXPECT_DOUBLE_EQ(s.value, 0.25);

  auto never = scripted([](const GatewayRequest&) { return std::string("nope"); });
  Gateway gw2(nullptr, never);
  EXPECT_THROW(geval_score(testsupport::numbered_deck(2), Metric::Flow, std::nullopt, cfg, gw2), ScorerError);
}

TEST(Geval, CoverageNeedsSummary) {
  auto t = scripted([](const GatewayRequest&) { return std::string("3"); });
  Gateway gw(nullptr, t);
  PromptedScorerConfig cfg{"m", 2};
  EXPECT_THROW(geval_score(testsupport::numbered_deck(2), Metric::Coverage, std::nullopt, cfg, gw), ContractError);
  EXPECT_DOUBLE_EQ(geval_score(testsupport::numbered_deck(2), Metric::Coverage, "doc", cfg, gw).value, 0.5);
  cfg.n_iterations = 0;
  EXPECT_THROW(geval_score(testsupport::numbered_deck(2), Metric::Flow, std::nullopt, cfg, gw), ContractError);
}

TEST(Explain, VerbatimDeterministicAnswer) {
  auto t = scripted([](const GatewayRequest& r) {
    EXPECT_TRUE(r.deterministic());
    return std::string("  The presentation follows a natural, coherent flow\n");
  });
  Gateway gw(nullptr, t);
  EXPECT_EQ(prompted_explanation(testsupport::numbered_deck(2), Metric::Flow, gw, "m"),
            "  The presentation follows a natural, coherent flow\n");
}

TEST(Remote, ValidatesReply) {
  std::string reply;
  json sent;
  auto t = scripted([&](const GatewayRequest& r) {
    sent = json::parse(r.prompt);
    EXPECT_EQ(r.model_id, "remote-scorer");
    return reply;
  });
  Gateway gw(nullptr, t);
  auto deck = testsupport::numbered_deck(2);
  reply = R"({"value": 0.4})";
  auto s = remote_score(deck, "why", Metric::Redundancy, gw);
  EXPECT_DOUBLE_EQ(s.value, 0.4);
  EXPECT_EQ(s.explanation, "why");
  EXPECT_EQ(sent["metric"], "redundancy");
  EXPECT_EQ(sent["explanation"], "why");
  EXPECT_EQ(sent["presentation"]["slides"].size(), 2u);
  for (const char* bad : {R"({"value": 1.5})", R"({"score": 0.2})", "not json", R"({"value": "0.3"})"}) {
    reply = bad;
    EXPECT_THROW(remote_score(deck, "why", Metric::Redundancy, gw), ProtocolError) << bad;
  }
}
