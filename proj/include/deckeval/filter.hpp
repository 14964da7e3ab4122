#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "deckeval/gateway.hpp"
#include "deckeval/model.hpp"

namespace deckeval {

enum class RuleKind { Length, IntroConclusion, Overlap, Language, AspectRatio };

inline constexpr std::array<RuleKind, 5> kAllRules = {RuleKind::Length, RuleKind::IntroConclusion, RuleKind::Overlap,
                                                      RuleKind::Language, RuleKind::AspectRatio};

std::string_view rule_name(RuleKind rule);

struct RuleFailure {
  RuleKind rule = RuleKind::Length;
  std::string detail;
  bool operator==(const RuleFailure&) const = default;
};

struct FilterVerdict {
  std::string presentation_id;
  std::vector<RuleFailure> failures;

  bool passed() const { return failures.empty(); }
};

struct FilterOptions {
  int min_slides = 5;
  int max_slides = 35;
  double overlap_threshold = 0.80;  // fail when strictly above
  double aspect_tolerance = 1e-3;   // relative, against 16:9
  // When set, the language fallback and the intro/conclusion judgment go
  // through the model instead of the built-in heuristics.
  Gateway* gateway = nullptr;
  std::string model_id;
  bool model_intro_conclusion = false;
};

/// Each check returns nullopt on pass.
std::optional<RuleFailure> check_length(const Presentation& p, const FilterOptions& opts = {});
std::optional<RuleFailure> check_overlap(const Presentation& p, const FilterOptions& opts = {});
std::optional<RuleFailure> check_aspect_ratio(const Presentation& p, const FilterOptions& opts = {});
std::optional<RuleFailure> check_language(const Presentation& p, const FilterOptions& opts = {});
std::optional<RuleFailure> check_intro_conclusion(const Presentation& p, const FilterOptions& opts = {});

/// Jaccard similarity of the lowercase token sets of two slides.
double slide_overlap(const Slide& a, const Slide& b);

enum class LanguageGuess { English, NotEnglish, Inconclusive };

struct LanguageStats {
  std::size_t letters = 0;         // code points that are letters, ASCII or not
  double non_ascii_share = 0.0;    // non-ASCII letters / letters
  double english_cosine = 0.0;     // a-z frequency profile vs. English
  double th_rate = 0.0;            // th/wh/sh bigrams per ASCII letter
};

LanguageStats language_stats(std::string_view text);
/// Character-frequency classifier used for untagged decks.
LanguageGuess guess_language(std::string_view text);

FilterVerdict evaluate_deck(const Presentation& p, const FilterOptions& opts = {});

struct FilterReport {
  std::vector<FilterVerdict> verdicts;        // sorted by presentation id
  std::array<std::size_t, 5> rejections{};    // indexed like kAllRules
  std::size_t kept = 0;
};

struct FilterResult {
  std::vector<Presentation> kept;  // input order
  FilterReport report;
};

FilterResult filter_corpus(const std::vector<Presentation>& corpus, const FilterOptions& opts = {});

nlohmann::json filter_report_to_json(const FilterReport& report);

}  // namespace deckeval
