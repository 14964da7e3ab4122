#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "deckeval/errors.hpp"
#include "deckeval/stats.hpp"

namespace deckeval {

using nlohmann::json;

namespace {

std::vector<std::string> checked_tokens(std::string_view text, const char* which) {
  auto tokens = rouge_tokens(text);
  if (tokens.empty()) throw DegenerateInputError(std::string("ROUGE ") + which + " has no tokens");
  return tokens;
}

RougeScore from_counts(double overlap, double cand, double ref) {
  RougeScore s;
  s.precision = cand > 0 ? overlap / cand : 0.0;
  s.recall = ref > 0 ? overlap / ref : 0.0;
  s.f1 = (s.precision + s.recall) > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

std::map<std::vector<std::string>, int> ngram_counts(const std::vector<std::string>& tokens, int n) {
  std::map<std::vector<std::string>, int> out;
  const auto un = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + un <= tokens.size(); ++i) {
    ++out[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                   tokens.begin() + static_cast<std::ptrdiff_t>(i + un))];
  }
  return out;
}

}  // namespace

std::vector<std::string> rouge_tokens(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::ispunct(u)) continue;
    cleaned.push_back(static_cast<char>(std::tolower(u)));
  }
  std::istringstream in(cleaned);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(std::move(w));
  return out;
}

RougeScore rouge_n(std::string_view candidate, std::string_view reference, int n) {
  if (n < 1 || n > 3) throw ContractError("rouge_n supports n in 1..3");
  auto cand = ngram_counts(checked_tokens(candidate, "candidate"), n);
  auto ref = ngram_counts(checked_tokens(reference, "reference"), n);
  long overlap = 0;
  long cand_total = 0;
  long ref_total = 0;
  for (const auto& [gram, c] : cand) {
    cand_total += c;
    if (auto it = ref.find(gram); it != ref.end()) overlap += std::min(c, it->second);
  }
  for (const auto& [gram, c] : ref) ref_total += c;
  return from_counts(static_cast<double>(overlap), static_cast<double>(cand_total), static_cast<double>(ref_total));
}

RougeScore rouge_l(std::string_view candidate, std::string_view reference) {
  auto cand = checked_tokens(candidate, "candidate");
  auto ref = checked_tokens(reference, "reference");
  std::vector<std::size_t> prev(ref.size() + 1, 0);
  std::vector<std::size_t> cur(ref.size() + 1, 0);
  for (std::size_t i = 1; i <= cand.size(); ++i) {
    for (std::size_t j = 1; j <= ref.size(); ++j) {
      cur[j] = cand[i - 1] == ref[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return from_counts(static_cast<double>(prev[ref.size()]), static_cast<double>(cand.size()),
                     static_cast<double>(ref.size()));
}

EvalReport build_report(const std::vector<ScoredSample>& samples) {
  EvalReport report;
  std::map<std::string, std::vector<const ScoredSample*>> by_metric;
  for (const auto& s : samples) by_metric[std::string(metric_name(s.metric))].push_back(&s);

  double r1 = 0, r2 = 0, r3 = 0, rl = 0;
  std::size_t rouge_pairs = 0;

  for (const auto& [name, group] : by_metric) {
    std::vector<double> pseudo;
    std::vector<double> model;
    std::vector<DegreeObservation> obs;
    std::size_t missing = 0;
    for (const auto* s : group) {
      if (!s->model_score) {
        ++missing;
        continue;
      }
      const double p = normalize_label_score(s->pseudo_score);
      pseudo.push_back(p);
      model.push_back(*s->model_score);
      obs.push_back(DegreeObservation{s->item_id, s->degree, p, *s->model_score});
    }
    if (missing > 0) report.notes.push_back(name + ": " + std::to_string(missing) + " samples without a model score excluded");
    if (pseudo.size() < 2) {
      report.notes.push_back(name + ": fewer than 2 scored samples, no correlation reported");
    } else {
      try {
        MetricCorrelation c{spearman(pseudo, model), kendall_tau(pseudo, model), pseudo.size()};
        report.per_metric[name] = c;
      } catch (const UndefinedCorrelationError& e) {
        report.notes.push_back(name + ": " + e.what());
      }
    }
    if (!obs.empty()) report.per_degree[name] = per_degree_correlation(obs);

    for (const auto* s : group) {
      if (!s->model_explanation) continue;
      try {
        r1 += rouge_n(*s->model_explanation, s->reference_explanation, 1).f1;
        r2 += rouge_n(*s->model_explanation, s->reference_explanation, 2).f1;
        r3 += rouge_n(*s->model_explanation, s->reference_explanation, 3).f1;
        rl += rouge_l(*s->model_explanation, s->reference_explanation).f1;
        ++rouge_pairs;
      } catch (const DegenerateInputError& e) {
        report.notes.push_back(s->id + ": ROUGE skipped, " + e.what());
      }
    }
  }
  if (rouge_pairs > 0) {
    const auto n = static_cast<double>(rouge_pairs);
    report.rouge = RougeMeans{r1 / n, r2 / n, r3 / n, rl / n, rouge_pairs};
  }
  return report;
}

json report_to_json(const EvalReport& report) {
  json j;
  j["per_metric"] = json::object();
  for (const auto& [name, c] : report.per_metric) {
    j["per_metric"][name] = json{{"spearman", c.spearman}, {"kendall", c.kendall}, {"n", c.n}};
  }
  j["per_degree"] = json::object();
  for (const auto& [name, table] : report.per_degree) {
    json cells = json::object();
    for (const auto& [d, cell] : table.cells) cells[std::to_string(d)] = json{{"kendall", cell.kendall}, {"n", cell.n}};
    j["per_degree"][name] = json{{"degrees", cells}, {"notes", table.notes}};
  }
  if (report.rouge) {
    const auto& r = *report.rouge;
    j["rouge"] = json{{"r1", r.r1}, {"r2", r.r2}, {"r3", r.r3}, {"rl", r.rl}, {"pairs", r.pairs}};
  }
  j["notes"] = report.notes;
  return j;
}

std::string degree_table_tsv(const EvalReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "metric\tdegree\tkendall\tn\n";
  for (const auto& [name, table] : report.per_degree) {
    for (const auto& [d, cell] : table.cells) out << name << '\t' << d << '\t' << cell.kendall << '\t' << cell.n << '\n';
  }
  return out.str();
}

}  // namespace deckeval
