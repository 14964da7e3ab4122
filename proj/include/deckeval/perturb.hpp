#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deckeval/model.hpp"
#include "deckeval/rng.hpp"

namespace deckeval {

/// Document topics and the topics assigned to each slide of one deck.
struct TopicModel {
  std::vector<std::string> topics;           // lowercase, underscore-separated, unique
  std::vector<std::vector<int>> slide_topics;  // one entry per slide

  void validate(std::size_t slide_count) const;
  bool operator==(const TopicModel&) const = default;
};

nlohmann::json topic_model_to_json(const TopicModel& tm);
TopicModel topic_model_from_json(const nlohmann::json& j);

/// Number of units a degree-d perturbation touches: ceil(n * d * 20 / 100),
/// at least 1 and at most n.
int perturbation_count(int n, int degree);

/// perturbation_count(n, degree) distinct indices from [0, n), ascending.
std::vector<int> select_fraction(int n, int degree, Rng& rng);

/// Uniform permutation of 0..k-1 with no fixed points (k >= 2).
std::vector<int> random_derangement(int k, Rng& rng);

/// Moves the slide at selected[i] to permuted[i]. Both lists hold the same
/// positions; the rest of the deck is untouched.
std::vector<Slide> permute_slides(const std::vector<Slide>& slides, std::span<const int> selected,
                                  std::span<const int> permuted);
/// Same, but only the image fields move; titles and text stay in place.
std::vector<Slide> permute_images(const std::vector<Slide>& slides, std::span<const int> selected,
                                  std::span<const int> permuted);

LabeledSample perturb_redundancy(const Presentation& p, int degree, Rng& rng);
LabeledSample perturb_flow(const Presentation& p, int degree, Rng& rng);
LabeledSample perturb_text_image(const Presentation& p, int degree, Rng& rng);
LabeledSample perturb_coverage(const Document& doc, const Presentation& p, const TopicModel& tm, int degree,
                               Rng& rng);

/// Unperturbed degree-0 sample with the metric's positive explanation.
LabeledSample positive_sample(const Presentation& p, Metric metric, std::optional<Document> doc,
                              std::uint64_t rng_seed);

/// The four positive sentences, byte-exact.
std::string_view positive_explanation(Metric metric);

/// Renders the pseudo ground-truth explanation for a trace. `slide_titles`
/// are the titles of the perturbed deck; Coverage reads the trace's removed
/// topics instead.
std::string render_explanation(Metric metric, const PerturbationTrace& trace,
                               std::span<const std::string> slide_titles = {});

struct CorpusItem {
  Presentation presentation;
  std::optional<Document> document;
  std::optional<TopicModel> topics;  // required for Coverage
};

struct ItemError {
  std::size_t item_index;
  std::string presentation_id;
  int degree;
  std::string message;
};

struct ExpansionResult {
  std::vector<LabeledSample> samples;  // input order, degrees 0..4 per item
  std::vector<ItemError> errors;
};

/// Five samples per item (degrees 0..4). Each cell draws from
/// derive_seed(seed, item, degree). A failing item is skipped and reported.
ExpansionResult expand_dataset(const std::vector<CorpusItem>& corpus, Metric metric, std::uint64_t seed,
                               int max_parallel = 1);

}  // namespace deckeval
