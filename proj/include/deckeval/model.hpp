#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace deckeval {

enum class Metric { Coverage, Redundancy, TextImageAlignment, Flow };

inline constexpr Metric kAllMetrics[] = {Metric::Coverage, Metric::Redundancy,
                                         Metric::TextImageAlignment, Metric::Flow};

/// Wire name: "coverage", "redundancy", "text_image_alignment", "flow".
std::string_view metric_name(Metric metric);
/// Accepts the wire name, case-insensitively, with '-' or '_' separators.
Metric parse_metric(std::string_view name);

inline bool requires_document(Metric metric) { return metric == Metric::Coverage; }

/// One textualized slide. Images only exist as text (caption + description).
struct Slide {
  std::string title;
  std::string text_summary;
  std::vector<std::string> image_captions;
  std::vector<std::string> image_descriptions;

  bool has_image() const { return !image_descriptions.empty(); }
  /// Throws ContractError when the invariants do not hold.
  void validate() const;

  bool operator==(const Slide&) const = default;
};

struct AspectRatio {
  int width = 16;
  int height = 9;
  bool operator==(const AspectRatio&) const = default;
};

struct Presentation {
  std::string id;
  std::vector<Slide> slides;  // reading order of the original deck
  AspectRatio aspect_ratio;
  std::string language_tag;
  std::optional<std::string> source_uri;

  void validate() const;
  bool operator==(const Presentation&) const = default;
};

struct DocumentNode {
  std::string title;
  std::string body;
  std::optional<std::string> summary;
  std::vector<DocumentNode> children;

  bool operator==(const DocumentNode&) const = default;
};

struct Document {
  std::string id;
  DocumentNode root;

  bool operator==(const Document&) const = default;
};

/// Nodes titled "Reference"/"References" get a tighter summary budget.
bool is_reference_section(std::string_view title);
/// 30 words, or 20 for reference sections.
std::size_t summary_word_cap(std::string_view title);

/// What a perturbation did. Indices are 0-based here and 1-based on the wire.
struct PerturbationTrace {
  Metric metric = Metric::Redundancy;
  int degree = 0;
  std::vector<int> selected_indices;
  std::optional<std::vector<std::pair<int, int>>> permutation;  // old -> new
  std::optional<std::vector<std::string>> removed_topics;
  std::optional<std::vector<int>> inserted_positions;
  std::uint64_t rng_seed = 0;

  void validate() const;
  bool operator==(const PerturbationTrace&) const = default;
};

struct LabeledSample {
  Presentation presentation;
  std::optional<Document> document;
  Metric metric = Metric::Redundancy;
  int degree = 0;
  int score = 5;
  std::string explanation;
  PerturbationTrace trace;

  /// "<presentation id>/<metric>/d<degree>"; unique within one expansion.
  std::string id() const;
  void validate() const;
  bool operator==(const LabeledSample&) const = default;
};

struct ScoreResult {
  double value = 0.0;
  std::optional<std::string> explanation;
  std::string scorer_id;

  /// Validates value ∈ [0,1].
  static ScoreResult make(double value, std::optional<std::string> explanation,
                          std::string scorer_id);
  bool operator==(const ScoreResult&) const = default;
};

/// Maps a 1..5 label onto [0,1] with (score - 1) / 4.
double normalize_label_score(int score);

// Wire format -------------------------------------------------------------

/// "No Images" for an empty list, otherwise "Image1: a, Image2: b, ...".
std::string flatten_image_field(const std::vector<std::string>& items);
std::vector<std::string> split_image_field(std::string_view field);

/// Space-separated title, text, captions and descriptions; used wherever a
/// slide has to be reduced to a single text unit.
std::string slide_plain_text(const Slide& slide);

nlohmann::json slide_to_json(const Slide& slide);
Slide slide_from_json(const nlohmann::json& j);
nlohmann::json presentation_to_json(const Presentation& p);
Presentation presentation_from_json(const nlohmann::json& j);
nlohmann::json document_node_to_json(const DocumentNode& node);
DocumentNode document_node_from_json(const nlohmann::json& j);
nlohmann::json document_to_json(const Document& doc);
Document document_from_json(const nlohmann::json& j);
nlohmann::json trace_to_json(const PerturbationTrace& trace);
PerturbationTrace trace_from_json(const nlohmann::json& j);
nlohmann::json sample_to_json(const LabeledSample& sample);
LabeledSample sample_from_json(const nlohmann::json& j);
nlohmann::json score_to_json(const std::string& sample_id, Metric metric,
                             const ScoreResult& score);

/// One compact JSON line per presentation (corpus file format).
std::string serialize_presentation(const Presentation& p);
Presentation deserialize_presentation(std::string_view line);

}  // namespace deckeval
