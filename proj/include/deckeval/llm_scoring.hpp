#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deckeval/gateway.hpp"
#include "deckeval/model.hpp"
#include "deckeval/perturb.hpp"

namespace deckeval {

inline constexpr int kDefaultGevalIterations = 128;

/// Parses a python-style list of quoted strings, e.g. "['a', 'b']". Text
/// around the outermost brackets is ignored. Throws ParseError.
std::vector<std::string> parse_string_list(std::string_view response);

/// Lowercase, trimmed, whitespace runs collapsed to '_'.
std::string normalize_topic(std::string_view topic);

/// First integer token of the response that lies in 1..5.
std::optional<int> parse_likert_score(std::string_view response);

std::vector<std::string> extract_topics(std::string_view document_summary, Gateway& gateway,
                                        const std::string& model_id);

struct TopicAssignment {
  std::vector<int> indices;  // ascending, at least one
  bool used_fallback = false;
  std::string note;
};

/// Topics are matched to the slide through the model; labels not in
/// `topics` are dropped. When nothing valid remains, the topic with the
/// largest token overlap with the slide text is used (lowest index on ties).
TopicAssignment assign_topics(const Slide& slide, const std::vector<std::string>& topics, Gateway& gateway,
                              const std::string& model_id);

/// Token-overlap fallback used by assign_topics.
int best_overlap_topic(const Slide& slide, const std::vector<std::string>& topics);

struct TopicModelBuild {
  TopicModel model;
  std::vector<std::string> notes;
};

TopicModelBuild build_topic_model(std::string_view document_summary, const Presentation& p, Gateway& gateway,
                                  const std::string& model_id);

struct PromptedScorerConfig {
  std::string model_id;
  int n_iterations = kDefaultGevalIterations;
  // Repeated draws are only informative when decoding samples.
  double temperature = 1.0;
  int max_tokens = 8;
};

struct PromptedScore {
  double value = 0.0;   // (mean - 1) / 4
  double mean = 0.0;    // mean parsed 1..5 score
  int parsed = 0;       // iterations that yielded a score
  int dropped = 0;
};

/// G-Eval style scoring: one deterministic request for evaluation steps, then
/// n_iterations sampled scoring requests averaged and normalized to [0,1].
/// Coverage requires the document summary.
PromptedScore geval_score(const Presentation& p, Metric metric, std::optional<std::string_view> document_summary,
                          const PromptedScorerConfig& config, Gateway& gateway);

/// In-context explanation, returned verbatim. Deterministic decoding.
std::string prompted_explanation(const Presentation& p, Metric metric, Gateway& gateway, const std::string& model_id,
                                 std::string_view document_summary = {});

/// Posts {metric, presentation, explanation} to the scorer behind `gateway`
/// and validates the {value} reply.
ScoreResult remote_score(const Presentation& p, std::string_view explanation, Metric metric, Gateway& gateway,
                         const std::string& endpoint_id = "remote-scorer");

}  // namespace deckeval
