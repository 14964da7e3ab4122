#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "deckeval/errors.hpp"
#include "deckeval/stats.hpp"

using namespace deckeval;

namespace {

// Straight pair counting; ties in both series count for neither.
double brute_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
  long conc = 0, disc = 0, tx = 0, ty = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0 && dy == 0) continue;
      if (dx == 0) {
        ++tx;
      } else if (dy == 0) {
        ++ty;
      } else if ((dx > 0) == (dy > 0)) {
        ++conc;
      } else {
        ++disc;
      }
    }
  }
  const double denom = std::sqrt(static_cast<double>(conc + disc + tx) * static_cast<double>(conc + disc + ty));
  return static_cast<double>(conc - disc) / denom;
}

std::vector<double> sort_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = mid;
    i = j + 1;
  }
  return r;
}

double textbook_pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
    saa += a[i] * a[i];
    sbb += b[i] * b[i];
    sab += a[i] * b[i];
  }
  return (n * sab - sa * sb) / std::sqrt((n * saa - sa * sa) * (n * sbb - sb * sb));
}

bool constant(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; });
}

}  // namespace

TEST(Ranks, MidRanksForTies) {
  std::vector<double> v{10, 20, 20, 30, 10, 20};
  EXPECT_EQ(average_ranks(v), (std::vector<double>{1.5, 4, 4, 6, 1.5, 4}));
}

TEST(Spearman, PerfectAndReversed) {
  std::vector<double> a{1, 2, 3, 4, 5};
  std::vector<double> b{2, 4, 6, 8, 100};
  std::vector<double> c{5, 4, 3, 2, 1};
  EXPECT_NEAR(spearman(a, b), 1.0, 1e-12);
  EXPECT_NEAR(spearman(a, c), -1.0, 1e-12);
}

TEST(Spearman, TextbookExample) {
  // no ties: 1 - 6 sum d^2 / (n (n^2 - 1)); d = (0, -1, 1, -2, 2) -> 10
  std::vector<double> a{1, 2, 3, 4, 5};
  std::vector<double> b{1, 3, 2, 5, 4};
  EXPECT_NEAR(spearman(a, b), 1.0 - 6.0 * 4.0 / (5.0 * 24.0), 1e-12);
}

TEST(Kendall, SmallCases) {
  std::vector<double> a{1, 2, 3, 4};
  std::vector<double> b{1, 2, 4, 3};
  // 5 concordant, 1 discordant
  EXPECT_NEAR(kendall_tau(a, b), 4.0 / 6.0, 1e-12);
  std::vector<double> x{1, 1, 2, 3};
  std::vector<double> y{1, 2, 2, 3};
  // C=4, D=0, ties only in x: 1, only in y: 1 -> 4 / sqrt(5*5)
  EXPECT_NEAR(kendall_tau(x, y), 4.0 / 5.0, 1e-12);
}

TEST(Correlation, ConstantSeriesIsUndefined) {
  std::vector<double> a{1, 1, 1};
  std::vector<double> b{1, 2, 3};
  EXPECT_THROW(spearman(a, b), UndefinedCorrelationError);
  EXPECT_THROW(kendall_tau(b, a), UndefinedCorrelationError);
  std::vector<double> one{1};
  EXPECT_THROW(kendall_tau(one, one), UndefinedCorrelationError);
}

TEST(Correlation, LengthMismatchIsContract) {
  std::vector<double> a{1, 2, 3};
  std::vector<double> b{1, 2};
  EXPECT_THROW(spearman(a, b), ContractError);
  EXPECT_THROW(kendall_tau(a, b), ContractError);
}

TEST(Correlation, SeriesIdsMustAlign) {
  RatingSeries a{{"x", "y", "z"}, {1, 2, 3}};
  RatingSeries b{{"x", "z", "y"}, {1, 2, 3}};
  EXPECT_THROW(kendall_tau(a, b), ContractError);
  b.ids = a.ids;
  EXPECT_NEAR(kendall_tau(a, b), 1.0, 1e-12);
}

TEST(Correlation, RandomSeriesMatchOracles) {
  std::mt19937_64 gen(2024);
  int checked = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int n = 2 + static_cast<int>(gen() % 40);
    const int levels = 1 + static_cast<int>(gen() % 8);  // few levels -> many ties
    std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      x[static_cast<std::size_t>(i)] = static_cast<double>(gen() % static_cast<unsigned>(levels));
      y[static_cast<std::size_t>(i)] =
          rep % 2 ? static_cast<double>(gen() % 1000) / 1000.0 : static_cast<double>(gen() % static_cast<unsigned>(levels));
    }
    if (constant(x) || constant(y)) {
      EXPECT_THROW(kendall_tau(x, y), UndefinedCorrelationError);
      EXPECT_THROW(spearman(x, y), UndefinedCorrelationError);
      continue;
    }
    EXPECT_NEAR(kendall_tau(x, y), brute_tau_b(x, y), 1e-12);
    EXPECT_NEAR(spearman(x, y), textbook_pearson(sort_ranks(x), sort_ranks(y)), 1e-12);
    EXPECT_EQ(average_ranks(x), sort_ranks(x));
    ++checked;
  }
  EXPECT_GT(checked, 800);
}

TEST(PerDegree, PairsEachDegreeWithPositives) {
  std::vector<DegreeObservation> obs;
  // three items; the model score falls with degree for all of them
  for (int item = 0; item < 3; ++item) {
    for (int d = 0; d <= 4; ++d) {
      obs.push_back({"i" + std::to_string(item), d, (4.0 - d) / 4.0, 0.9 - 0.1 * d + 0.01 * item});
    }
  }
  auto table = per_degree_correlation(obs);
  ASSERT_EQ(table.cells.size(), 4u);
  for (int d = 1; d <= 4; ++d) {
    EXPECT_EQ(table.cells.at(d).n, 6u);
    // pseudo is two-valued: 9 pos-neg pairs concordant, 6 x-ties
    EXPECT_NEAR(table.cells.at(d).kendall, 9.0 / std::sqrt(9.0 * 15.0), 1e-12);
  }
}

TEST(PerDegree, UndefinedBucketIsNoted) {
  std::vector<DegreeObservation> obs{{"a", 0, 1.0, 0.5}, {"a", 1, 0.75, 0.5}, {"b", 0, 1.0, 0.5}, {"b", 1, 0.75, 0.5}};
  auto table = per_degree_correlation(obs);
  EXPECT_TRUE(table.cells.empty());
  EXPECT_FALSE(table.notes.empty());
}

TEST(Rouge, Tokens) {
  EXPECT_EQ(rouge_tokens("The Cat, sat!  on-the mat."),
            (std::vector<std::string>{"the", "cat", "sat", "onthe", "mat"}));
}

TEST(Rouge, HandComputed) {
  const std::string ref = "the cat sat on the mat";
  const std::string cand = "the cat was on the mat";
  // unigrams: overlap the x2, cat, on, mat = 5 of 6
  EXPECT_NEAR(rouge_n(cand, ref, 1).f1, 5.0 / 6.0, 1e-12);
  // bigrams: the cat, on the, the mat = 3 of 5
  EXPECT_NEAR(rouge_n(cand, ref, 2).f1, 3.0 / 5.0, 1e-12);
  // trigrams: on the mat = 1 of 4
  EXPECT_NEAR(rouge_n(cand, ref, 3).f1, 1.0 / 4.0, 1e-12);
  // LCS: the cat on the mat = 5
  EXPECT_NEAR(rouge_l(cand, ref).f1, 5.0 / 6.0, 1e-12);
}

TEST(Rouge, ClippedCountsAndAsymmetry) {
  // candidate "the the the" vs reference "the cat": overlap clipped to 1
  auto s = rouge_n("the the the", "the cat", 1);
  EXPECT_NEAR(s.precision, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(s.recall, 0.5, 1e-12);
  EXPECT_NEAR(s.f1, 2 * (1.0 / 3.0) * 0.5 / (1.0 / 3.0 + 0.5), 1e-12);
  auto l = rouge_l("a b c d", "a c");
  EXPECT_NEAR(l.precision, 0.5, 1e-12);
  EXPECT_NEAR(l.recall, 1.0, 1e-12);
}

TEST(Rouge, EdgeCases) {
  EXPECT_DOUBLE_EQ(rouge_n("a b", "c d", 1).f1, 0.0);
  EXPECT_DOUBLE_EQ(rouge_n("a", "a", 2).f1, 0.0);  // no bigrams on either side
  EXPECT_DOUBLE_EQ(rouge_n("same words here", "same words here", 3).f1, 1.0);
  EXPECT_THROW(rouge_n("", "a", 1), DegenerateInputError);
  EXPECT_THROW(rouge_l("a", "!!"), DegenerateInputError);
  EXPECT_THROW(rouge_n("a", "a", 4), ContractError);
}

TEST(InterAnnotator, ThreeRaters) {
  RatingSeries a = RatingSeries::from_values({1, 2, 3});
  RatingSeries b = RatingSeries::from_values({1, 2, 3});
  RatingSeries c = RatingSeries::from_values({3, 2, 1});
  auto s = inter_annotator(a, b, c);
  EXPECT_EQ(s.pairs_used, 3u);
  EXPECT_NEAR(s.mean_tau, (1.0 - 1.0 - 1.0) / 3.0, 1e-12);
  EXPECT_NEAR(s.max_tau, 1.0, 1e-12);
  EXPECT_NEAR(s.mean_rho, -1.0 / 3.0, 1e-12);
}

TEST(InterAnnotator, ConstantRaterSkipped) {
  RatingSeries a = RatingSeries::from_values({1, 2, 3});
  RatingSeries flat = RatingSeries::from_values({2, 2, 2});
  EXPECT_THROW(inter_annotator(a, flat, flat), UndefinedCorrelationError);
  // a constant rater spoils two of the three pairs
  RatingSeries b = RatingSeries::from_values({1, 3, 2});
  EXPECT_THROW(inter_annotator(a, b, flat), UndefinedCorrelationError);
}

TEST(Report, GroupsByMetricAndComputesRouge) {
  std::vector<ScoredSample> samples;
  for (int item = 0; item < 4; ++item) {
    for (int d = 0; d <= 4; ++d) {
      ScoredSample s;
      s.id = "i" + std::to_string(item) + "/flow/d" + std::to_string(d);
      s.metric = Metric::Flow;
      s.item_id = "i" + std::to_string(item);
      s.degree = d;
      s.pseudo_score = 5 - d;
      s.reference_explanation = "a b c";
      s.model_score = 1.0 - 0.2 * d;
      s.model_explanation = "a b c";
      samples.push_back(s);
    }
  }
  samples.back().model_score.reset();
  auto r = build_report(samples);
  ASSERT_TRUE(r.per_metric.count("flow"));
  EXPECT_EQ(r.per_metric["flow"].n, 19u);
  EXPECT_NEAR(r.per_metric["flow"].spearman, 1.0, 1e-12);
  EXPECT_NEAR(r.per_metric["flow"].kendall, 1.0, 1e-12);
  ASSERT_TRUE(r.rouge);
  EXPECT_EQ(r.rouge->pairs, 20u);
  EXPECT_DOUBLE_EQ(r.rouge->r1, 1.0);
  EXPECT_FALSE(r.notes.empty());

  auto j = report_to_json(r);
  EXPECT_EQ(j["per_metric"]["flow"]["n"], 19);
  // the unscored degree-4 sample drops its positive from that bucket too
  EXPECT_EQ(j["per_degree"]["flow"]["degrees"]["4"]["n"], 6);
  EXPECT_EQ(j["per_degree"]["flow"]["degrees"]["3"]["n"], 8);
  auto tsv = degree_table_tsv(r);
  EXPECT_EQ(tsv.substr(0, tsv.find('\n')), "metric\tdegree\tkendall\tn");
  EXPECT_EQ(std::count(tsv.begin(), tsv.end(), '\n'), 5);
}
