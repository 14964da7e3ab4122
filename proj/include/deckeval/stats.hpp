#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "deckeval/model.hpp"

namespace deckeval {

/// Parallel ids and values.
struct RatingSeries {
  std::vector<std::string> ids;
  std::vector<double> values;

  static RatingSeries from_values(std::vector<double> values);
  std::size_t size() const { return values.size(); }
  void validate() const;
};

/// 1-based mid-ranks; ties share the average of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

double pearson(std::span<const double> a, std::span<const double> b);

/// Spearman's rho: Pearson correlation of the mid-ranks.
double spearman(const RatingSeries& a, const RatingSeries& b);
double spearman(std::span<const double> a, std::span<const double> b);

/// Kendall's tau-b, O(n log n) (Knight's algorithm).
double kendall_tau(const RatingSeries& a, const RatingSeries& b);
double kendall_tau(std::span<const double> a, std::span<const double> b);

struct DegreeObservation {
  std::string item_id;  // groups the five samples of one source deck
  int degree = 0;
  double pseudo_score = 0.0;
  double model_score = 0.0;
};

struct DegreeCell {
  double kendall = 0.0;
  std::size_t n = 0;
};

struct DegreeTable {
  std::map<int, DegreeCell> cells;  // degree 1..4
  std::vector<std::string> notes;
};

/// For each degree d, tau-b over the degree-d samples together with the
/// degree-0 samples of the same items. Undefined buckets are noted, not
/// reported.
DegreeTable per_degree_correlation(const std::vector<DegreeObservation>& samples);

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Lowercase, ASCII punctuation removed, whitespace split, no stemming.
std::vector<std::string> rouge_tokens(std::string_view text);

/// Clipped n-gram overlap, n in 1..3.
RougeScore rouge_n(std::string_view candidate, std::string_view reference, int n);
/// Longest common subsequence over tokens.
RougeScore rouge_l(std::string_view candidate, std::string_view reference);

struct AgreementSummary {
  double mean_rho = 0.0;
  double max_rho = 0.0;
  double mean_tau = 0.0;
  double max_tau = 0.0;
  std::size_t pairs_used = 0;
  std::vector<std::string> notes;
};

/// Pairwise rho and tau over the three annotator pairs; mean and max.
AgreementSummary inter_annotator(const RatingSeries& first, const RatingSeries& second, const RatingSeries& third);

// Reports -----------------------------------------------------------------

struct MetricCorrelation {
  double spearman = 0.0;
  double kendall = 0.0;
  std::size_t n = 0;
};

struct RougeMeans {
  double r1 = 0.0;
  double r2 = 0.0;
  double r3 = 0.0;
  double rl = 0.0;
  std::size_t pairs = 0;
};

struct EvalReport {
  std::map<std::string, MetricCorrelation> per_metric;
  std::map<std::string, DegreeTable> per_degree;
  std::optional<RougeMeans> rouge;
  std::vector<std::string> notes;
};

nlohmann::json report_to_json(const EvalReport& report);
/// Tab-separated rows metric, degree, kendall, n for plotting.
std::string degree_table_tsv(const EvalReport& report);

struct ScoredSample {
  std::string id;
  Metric metric = Metric::Redundancy;
  std::string item_id;
  int degree = 0;
  int pseudo_score = 5;
  std::string reference_explanation;
  std::optional<double> model_score;  // missing scores are excluded pairwise
  std::optional<std::string> model_explanation;
};

/// Per-metric rho/tau against normalized pseudo scores, per-degree tables,
/// and ROUGE means whenever model explanations are present.
EvalReport build_report(const std::vector<ScoredSample>& samples);

}  // namespace deckeval
