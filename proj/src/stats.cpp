#include "deckeval/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "deckeval/errors.hpp"

namespace deckeval {

namespace {

void check_pair(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("series lengths differ");
  if (a.size() < 2) throw UndefinedCorrelationError("correlation needs at least two observations");
}

void check_aligned(const RatingSeries& a, const RatingSeries& b) {
  a.validate();
  b.validate();
  if (!a.ids.empty() && !b.ids.empty() && a.ids != b.ids) throw ContractError("rating series are not aligned by id");
}

std::int64_t pairs_in_runs(const std::vector<double>& sorted) {
  std::int64_t total = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const auto t = static_cast<std::int64_t>(j - i);
    total += t * (t - 1) / 2;
    i = j;
  }
  return total;
}

/// Sorts v ascending and returns the number of strictly inverted pairs.
std::int64_t merge_count(std::vector<double>& v, std::vector<double>& scratch, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = merge_count(v, scratch, lo, mid) + merge_count(v, scratch, mid, hi);
  std::size_t i = lo;
  std::size_t j = mid;
  std::size_t k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      scratch[k++] = v[j++];
    } else {
      scratch[k++] = v[i++];
    }
  }
  while (i < mid) scratch[k++] = v[i++];
  while (j < hi) scratch[k++] = v[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo), scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace

RatingSeries RatingSeries::from_values(std::vector<double> values) {
  RatingSeries s;
  s.ids.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) s.ids.push_back(std::to_string(i));
  s.values = std::move(values);
  return s;
}

void RatingSeries::validate() const {
  if (!ids.empty() && ids.size() != values.size()) throw ContractError("rating series ids and values differ in length");
  for (double v : values) {
    if (std::isnan(v)) throw ContractError("rating series contains NaN");
  }
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = mid;
    i = j;
  }
  return ranks;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  check_pair(a, b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw UndefinedCorrelationError("correlation of a constant series");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double spearman(std::span<const double> a, std::span<const double> b) {
  check_pair(a, b);
  auto ra = average_ranks(a);
  auto rb = average_ranks(b);
  return pearson(ra, rb);
}

double spearman(const RatingSeries& a, const RatingSeries& b) {
  check_aligned(a, b);
  return spearman(std::span<const double>(a.values), std::span<const double>(b.values));
}

double kendall_tau(std::span<const double> a, std::span<const double> b) {
  check_pair(a, b);
  const std::size_t n = a.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a[x] < a[y] || (a[x] == a[y] && b[x] < b[y]);
  });

  const auto n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  std::int64_t ties_a = 0;
  std::int64_t ties_ab = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && a[order[j]] == a[order[i]]) ++j;
    const auto t = static_cast<std::int64_t>(j - i);
    ties_a += t * (t - 1) / 2;
    std::size_t k = i;
    while (k < j) {
      std::size_t l = k;
      while (l < j && b[order[l]] == b[order[k]]) ++l;
      const auto u = static_cast<std::int64_t>(l - k);
      ties_ab += u * (u - 1) / 2;
      k = l;
    }
    i = j;
  }

  std::vector<double> bs(n);
  for (std::size_t k = 0; k < n; ++k) bs[k] = b[order[k]];
  std::vector<double> scratch(n);
  const std::int64_t swaps = merge_count(bs, scratch, 0, n);
  const std::int64_t ties_b = pairs_in_runs(bs);

  const double denom = std::sqrt(static_cast<double>(n0 - ties_a) * static_cast<double>(n0 - ties_b));
  if (denom == 0.0) throw UndefinedCorrelationError("tau-b undefined: a series is constant");
  const double numer = static_cast<double>(n0 - ties_a - ties_b + ties_ab - 2 * swaps);
  return std::clamp(numer / denom, -1.0, 1.0);
}

double kendall_tau(const RatingSeries& a, const RatingSeries& b) {
  check_aligned(a, b);
  return kendall_tau(std::span<const double>(a.values), std::span<const double>(b.values));
}

DegreeTable per_degree_correlation(const std::vector<DegreeObservation>& samples) {
  DegreeTable table;
  std::map<std::string, const DegreeObservation*> positives;
  for (const auto& s : samples) {
    if (s.degree == 0) positives.emplace(s.item_id, &s);
  }
  for (int d = 1; d <= 4; ++d) {
    std::vector<double> pseudo;
    std::vector<double> model;
    for (const auto& s : samples) {
      if (s.degree != d) continue;
      auto pos = positives.find(s.item_id);
      if (pos == positives.end()) continue;
      pseudo.push_back(pos->second->pseudo_score);
      model.push_back(pos->second->model_score);
      pseudo.push_back(s.pseudo_score);
      model.push_back(s.model_score);
    }
    if (pseudo.size() < 2) {
      table.notes.push_back("degree " + std::to_string(d) + ": fewer than 2 paired samples");
      continue;
    }
    try {
      const double tau = kendall_tau(pseudo, model);
      table.cells[d] = DegreeCell{tau, pseudo.size()};
    } catch (const UndefinedCorrelationError& e) {
      table.notes.push_back("degree " + std::to_string(d) + ": " + e.what());
    }
  }
  return table;
}

AgreementSummary inter_annotator(const RatingSeries& first, const RatingSeries& second, const RatingSeries& third) {
  const RatingSeries* raters[] = {&first, &second, &third};
  AgreementSummary out;
  std::vector<double> rhos;
  std::vector<double> taus;
  for (int x = 0; x < 3; ++x) {
    for (int y = x + 1; y < 3; ++y) {
      try {
        rhos.push_back(spearman(*raters[x], *raters[y]));
        taus.push_back(kendall_tau(*raters[x], *raters[y]));
      } catch (const UndefinedCorrelationError& e) {
        out.notes.push_back("annotators " + std::to_string(x + 1) + "/" + std::to_string(y + 1) + " skipped: " + e.what());
      }
    }
  }
  if (rhos.size() < 2) throw UndefinedCorrelationError("fewer than two annotator pairs have a defined correlation");
  auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); };
  out.mean_rho = mean(rhos);
  out.max_rho = *std::max_element(rhos.begin(), rhos.end());
  out.mean_tau = mean(taus);
  out.max_tau = *std::max_element(taus.begin(), taus.end());
  out.pairs_used = rhos.size();
  return out;
}

}  // namespace deckeval
