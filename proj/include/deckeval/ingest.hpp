#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deckeval/model.hpp"

namespace deckeval {

class Gateway;

/// One section as produced by a section-wise PDF extractor.
struct RawSectionExtract {
  std::vector<std::string> heading_path;  // ancestor headings, outermost first
  std::string heading;
  std::string body;
};

/// Builds a Slide from the responses to the text and image extraction
/// prompts. "No Text" maps to an empty text summary and "No Images" to no
/// images. Throws IngestError carrying the offending response.
Slide extract_slide_features(std::string_view text_response, std::string_view image_response,
                             std::optional<std::string> title_override = std::nullopt);

/// Nests the extracts by heading path under a root titled `document_id`.
/// Parents must precede their children. Throws StructureError on orphans and
/// DegenerateInputError on an empty list.
Document build_document_tree(const std::string& document_id, const std::vector<RawSectionExtract>& extracts);

/// Summarizes one node given the filled summary prompt.
using Summarizer = std::function<std::string(const DocumentNode& node, const std::string& prompt)>;

Summarizer gateway_summarizer(Gateway& gateway, std::string model_id);

struct SummarizeOptions {
  int max_parallel = 1;
};

struct SummarizeResult {
  Document document;
  std::vector<std::string> warnings;  // truncations
};

/// Pre-order summarization. Nodes with a body get the summarizer's answer
/// capped at summary_word_cap(title) words; body-less nodes get an empty
/// summary. A node's effective summary is flatten_summary over its subtree.
SummarizeResult summarize_document(const Document& doc, const Summarizer& summarizer,
                                   const SummarizeOptions& options = {});

/// Pre-order concatenation of node summaries separated by '\n'. Empty
/// summaries are skipped; a missing summary is a ContractError.
std::string flatten_summary(const Document& doc);
std::string flatten_summary(const DocumentNode& node);

/// Node headings in pre-order, root excluded.
std::vector<std::string> preorder_headings(const Document& doc);

}  // namespace deckeval
