#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "deckeval/model.hpp"

namespace deckeval::prompts {

// Extraction prompts for a multimodal model looking at one slide image.
extern const std::string_view kTextPrompt;
extern const std::string_view kImagePrompt;

/// Per-node summarization template; "<Text in the node>" is the placeholder.
extern const std::string_view kSummaryPrompt;
/// Topic extraction template; "{<Input summary>}" is the placeholder.
extern const std::string_view kTopicPrompt;
/// In-context explanation prompt for redundancy; "<input_slide>" placeholder.
extern const std::string_view kRedundancyExplanationPrompt;

std::string summary_prompt(const DocumentNode& node);
std::string topic_prompt(std::string_view document_summary);
std::string topic_assignment_prompt(const Slide& slide, const std::vector<std::string>& topics);

/// Slides rendered for prompting: one "Slide k: {record}" line per slide.
std::string render_slides(const Presentation& p);

/// Explanation prompt for the metric. Coverage needs the flattened document
/// summary; other metrics ignore it.
std::string explanation_prompt(Metric metric, const Presentation& p, std::string_view document_summary = {});

/// First G-Eval stage: ask for evaluation steps.
std::string geval_steps_prompt(Metric metric);
/// Second G-Eval stage: score the deck with the steps inlined.
std::string geval_score_prompt(Metric metric, std::string_view steps, const Presentation& p,
                               std::string_view document_summary = {});

/// Yes/No English check over a deck's text.
std::string language_prompt(std::string_view deck_text);
/// Intro/conclusion judgment over a batch of consecutive slides.
std::string intro_conclusion_prompt(const std::vector<Slide>& batch, std::size_t first_index);

}  // namespace deckeval::prompts
