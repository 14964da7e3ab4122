#include "deckeval/prompts.hpp"

#include <nlohmann/json.hpp>

#include "deckeval/errors.hpp"
#include "deckeval/text.hpp"

namespace deckeval::prompts {

namespace {

std::string replace_once(std::string_view tmpl, std::string_view placeholder, std::string_view value) {
  std::string out(tmpl);
  auto pos = out.find(placeholder);
  if (pos == std::string::npos) throw ContractError("prompt template lacks placeholder " + std::string(placeholder));
  out.replace(pos, placeholder.size(), value);
  return out;
}

constexpr std::string_view kCoverageExplanationPrompt = R"(
You are a helpful language model and your task is to judge a presentation based on whether it covers the major topics of its source document. The input will be a summary of the source document followed by a list of slides, where each slide will contain a textual description of both the text and the image present in the slide.

<input_document>

<input_slide>

Your output must be suggestions on which topics from the source document need to be added. Your output format should strictly follow the template outlined below. For example, if you feel topic 1 and topic 2 are missing from the slides, include them in your response as so:
"The following topics from the source document should be added: Topic 1, Topic 2"
If you feel that the presentation covers every major topic of the document, respond with the following sentence:

"All major topics from the source document are covered in this presentation".
)";

constexpr std::string_view kTextImageExplanationPrompt = R"(
You are a helpful language model and your task is to judge a presentation based on whether the images on each slide are relevant to the text on the same slide. The input will be in the form of a list of slides, where each slide will contain a textual description of both the text and the image present in the slide.

<input_slide>

Your output must be suggestions on which slides have images that do not match their text. Your output format should strictly follow the template outlined below. For example, if you feel slides with topic 1 and topic 2 have misplaced images, include these slides in your response as so:
"The following slides seem to have images misaligned with the text:
1. Topic 1
2. Topic 2"
If you feel that every image matches the text of its slide, respond with the following sentence:

"All the slides have images relevant to their text".
)";

constexpr std::string_view kFlowExplanationPrompt = R"(
You are a helpful language model and your task is to judge a presentation based on whether its slides follow a logical order. The input will be in the form of a list of slides, where each slide will contain a textual description of both the text and the image present in the slide.

<input_slide>

Your output must be suggestions on how the slides should be reordered. Your output format should strictly follow the template outlined below. For example, if you feel the slide with topic 1 should be at position 1 and the slide with topic 2 at position 2, include these slides in your response as so:
"The progression of topics would be more coherent if the slide were ordered:
1. Topic 1
2. Topic 2"
If you feel that the order of the slides is already logical, respond with the following sentence:

"The presentation follows a natural, coherent flow".
)";

std::string_view metric_title(Metric m) {
  switch (m) {
    case Metric::Coverage:
      return "Coverage";
    case Metric::Redundancy:
      return "Redundancy";
    case Metric::TextImageAlignment:
      return "Text-Image Alignment";
    case Metric::Flow:
      return "Flow";
  }
  return "";
}

std::string_view metric_definition(Metric m) {
  switch (m) {
    case Metric::Coverage:
      return "the degree to which the slides carry the important content of the source document. A high score "
             "means no major topic of the document is missing from the deck.";
    case Metric::Redundancy:
      return "the absence of repeated material. A high score means no slide restates text or images that another "
             "slide already presents.";
    case Metric::TextImageAlignment:
      return "how well the images on each slide correspond to and support the text on that same slide. A high "
             "score means every image is relevant to its slide.";
    case Metric::Flow:
      return "how logically the content progresses from slide to slide. A high score means ideas, topics and "
             "sections follow a coherent order with smooth transitions.";
  }
  return "";
}

}  // namespace

const std::string_view kTextPrompt =
    R"(I have input an image of a slide from a presentation. Your task is to carefully go through the text content of the slide, and describe the text present in two sentences and two sentences only. Do NOT consider the images on the slide. If there is no text, just return "No Text". Make it concise)";

const std::string_view kImagePrompt =
    R"(I have input an image of a slide from a presentation. Your task is to carefully go through the image(s) of the slide, and describe the image(s) present in two sentences and two sentences only (per image). Do NOT consider the text on the slide. If there are no images, just return No Images. If there are multiple images, return Image1: <description>, Image2: <description> and so on. Exclude logos, templates and backgrounds.)";

const std::string_view kSummaryPrompt = R"(You are now an expert at generating highly informative summary from a given titled document.
Read the document very carefully. The summary should be as informative and coherent as possible.The summary should be balanced. Include the key points and main ideas without adding non-essential information.
The goal is to convey the core message and important details in a clear and concise manner.
Keep summary for each section in exactly 30 words. For the passage titled "Reference", keep the summary in 20 words.
Do NOT mention section title in the summary.
<Text in the node>
)";

const std::string_view kTopicPrompt = R"(I have the summary of a document, as follows:
{<Input summary>}
From this summary, please extract all major themes / topics in the form of keywords. Be as detailed as possible and extract all relavant topics.

Your output must be in the form of a python list, with each topic separated by commas. Make sure all topics are lowercase, and all spaces are separated by underscores.
)";

const std::string_view kRedundancyExplanationPrompt = R"(
You are a helpful language model and your task is to judge a presentation based on whether it contains redundant information. This can include any repetitive text/images. The input will be in the form of a list of slides, where each slide will contain a textual description of both the text and the image present in the slide.

<input_slide>

Your output must be suggestions on which slides need to be removed. Your output format should strictly follow the template outlined below. For example, if you feel slides with topic 1 and topic 2 need to be removed, include these slides in your response as so:
"The following topics in the slide seem to be repeated:
1. Topic 1
2. Topic 2"
If you feel that there is no redundancy in the slide and it is concise, respond with the following sentence:

"Slides are concise and there is little to no redundant information".
)";

std::string summary_prompt(const DocumentNode& node) {
  std::string content = node.title.empty() ? node.body : node.title + "\n" + node.body;
  return replace_once(kSummaryPrompt, "<Text in the node>", content);
}

std::string topic_prompt(std::string_view document_summary) {
  return replace_once(kTopicPrompt, "{<Input summary>}", document_summary);
}

std::string topic_assignment_prompt(const Slide& slide, const std::vector<std::string>& topics) {
  nlohmann::json list = topics;
  std::string out = "Here is a list of topics extracted from a document:\n";
  out += list.dump();
  out += "\n\nHere is the content of one slide from a presentation about that document:\n";
  out += slide_to_json(slide).dump();
  out +=
      "\n\nAssign one or more topics from the list to this slide. Use only topics that appear in the list, "
      "spelled exactly as given. Your output must be in the form of a python list.\n";
  return out;
}

std::string render_slides(const Presentation& p) {
  std::string out;
  for (std::size_t i = 0; i < p.slides.size(); ++i) {
    out += "Slide " + std::to_string(i + 1) + ": " + slide_to_json(p.slides[i]).dump() + "\n";
  }
  return out;
}

std::string explanation_prompt(Metric metric, const Presentation& p, std::string_view document_summary) {
  const auto slides = render_slides(p);
  switch (metric) {
    case Metric::Coverage:
      if (text::trim(document_summary).empty()) throw ContractError("coverage explanation prompt needs a document summary");
      return replace_once(replace_once(kCoverageExplanationPrompt, "<input_document>", document_summary), "<input_slide>",
                          slides);
    case Metric::Redundancy:
      return replace_once(kRedundancyExplanationPrompt, "<input_slide>", slides);
    case Metric::TextImageAlignment:
      return replace_once(kTextImageExplanationPrompt, "<input_slide>", slides);
    case Metric::Flow:
      return replace_once(kFlowExplanationPrompt, "<input_slide>", slides);
  }
  throw ContractError("no explanation prompt for metric");
}

std::string geval_steps_prompt(Metric metric) {
  std::string out = "You will be given a presentation made of slides";
  if (requires_document(metric)) out += ", together with a summary of the source document it was made from";
  out += ". Your task is to rate the presentation on one metric.\n\nEvaluation Criteria:\n\n";
  out += std::string(metric_title(metric)) + " (1-5) - " + std::string(metric_definition(metric));
  out +=
      "\n\nWrite the evaluation steps a careful reviewer should follow to assign this score. Return only the "
      "numbered steps.\n";
  return out;
}

std::string geval_score_prompt(Metric metric, std::string_view steps, const Presentation& p,
                               std::string_view document_summary) {
  std::string out = "You will be given a presentation made of slides";
  if (requires_document(metric)) out += ", together with a summary of the source document it was made from";
  out += ". Your task is to rate the presentation on one metric.\n\nEvaluation Criteria:\n\n";
  out += std::string(metric_title(metric)) + " (1-5) - " + std::string(metric_definition(metric));
  out += "\n\nEvaluation Steps:\n\n";
  out += text::trim(steps);
  out += "\n\n";
  if (requires_document(metric)) {
    if (text::trim(document_summary).empty()) throw ContractError("coverage scoring prompt needs a document summary");
    out += "Source Document Summary:\n\n" + std::string(document_summary) + "\n\n";
  }
  out += "Presentation:\n\n" + render_slides(p);
  out += "\nEvaluation Form (scores ONLY):\n\n- " + std::string(metric_title(metric)) + ":";
  return out;
}

std::string language_prompt(std::string_view deck_text) {
  return "Is the following presentation text written in English? Answer with Yes or No only.\n\n" +
         std::string(deck_text) + "\n";
}

std::string intro_conclusion_prompt(const std::vector<Slide>& batch, std::size_t first_index) {
  std::string out =
      "Below are consecutive slides from a presentation. Decide whether any of them is an introductory slide "
      "(title, agenda, introduction or overview) and whether any of them is a concluding slide (conclusion, "
      "summary, thanks, questions or references).\n\n";
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out += "Slide " + std::to_string(first_index + i + 1) + ": " + slide_to_json(batch[i]).dump() + "\n";
  }
  out += "\nAnswer with a JSON object of the form {\"intro\": true|false, \"conclusion\": true|false}.\n";
  return out;
}

}  // namespace deckeval::prompts
