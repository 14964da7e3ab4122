#include "deckeval/perturb.hpp"

#include <algorithm>
#include <future>
#include <set>

#include <nlohmann/json.hpp>

#include "deckeval/errors.hpp"
#include "deckeval/text.hpp"

namespace deckeval {

namespace {

constexpr int kMaxCoverageRedraws = 32;

struct ListedItem {
  int index;  // 0-based
  std::string label;
};

std::string_view negative_prefix(Metric metric) {
  switch (metric) {
    case Metric::Coverage:
      return "The following topics from the source document should be added: ";
    case Metric::Redundancy:
      return "The following topics in the slide seem to be repeated: ";
    case Metric::TextImageAlignment:
      return "The following slides seem to have images misaligned with the text: ";
    case Metric::Flow:
      return "The progression of topics would be more coherent if the slide were ordered: ";
  }
  return "";
}

const std::string& title_at(std::span<const std::string> titles, int index) {
  if (index < 0 || static_cast<std::size_t>(index) >= titles.size()) {
    throw ContractError("explanation refers to slide " + std::to_string(index + 1) + " but only " +
                        std::to_string(titles.size()) + " titles were supplied");
  }
  return titles[static_cast<std::size_t>(index)];
}

std::string render_items(Metric metric, std::vector<ListedItem> items) {
  if (items.empty()) throw ContractError("negative explanation needs at least one item");
  std::sort(items.begin(), items.end(), [](const ListedItem& a, const ListedItem& b) { return a.index < b.index; });
  std::string out(negative_prefix(metric));
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(items[i].index + 1) + ". " + items[i].label;
  }
  return out;
}

std::vector<std::string> titles_of(const std::vector<Slide>& slides) {
  std::vector<std::string> out;
  out.reserve(slides.size());
  for (const auto& s : slides) out.push_back(s.title);
  return out;
}

LabeledSample make_sample(Presentation perturbed, std::optional<Document> doc, PerturbationTrace trace) {
  LabeledSample s;
  s.metric = trace.metric;
  s.degree = trace.degree;
  s.score = 5 - trace.degree;
  auto titles = titles_of(perturbed.slides);
  s.explanation = render_explanation(trace.metric, trace, titles);
  s.presentation = std::move(perturbed);
  s.document = std::move(doc);
  s.trace = std::move(trace);
  return s;
}

void check_degree(int degree) {
  if (degree < 1 || degree > 4) throw ContractError("perturbation degree must be in 1..4, got " + std::to_string(degree));
}

void check_positions(std::size_t n, std::span<const int> selected, std::span<const int> permuted) {
  if (selected.size() != permuted.size()) throw ContractError("selected and permuted positions differ in length");
  std::vector<int> a(selected.begin(), selected.end());
  std::vector<int> b(permuted.begin(), permuted.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b) throw ContractError("permuted positions must be a rearrangement of the selected positions");
  if (std::adjacent_find(a.begin(), a.end()) != a.end()) throw ContractError("selected positions repeat");
  for (int i : a) {
    if (i < 0 || static_cast<std::size_t>(i) >= n) throw ContractError("slide position out of range");
  }
}

/// Picks k positions from `candidates`, then a fixed-point-free rearrangement.
std::pair<std::vector<int>, std::vector<int>> pick_and_derange(const std::vector<int>& candidates, int degree,
                                                               Rng& rng) {
  const int c = static_cast<int>(candidates.size());
  // A single selected slide cannot move; widen to two.
  const int k = std::min(c, std::max(2, perturbation_count(c, degree)));
  std::vector<int> selected;
  for (int i : rng.sample(c, k)) selected.push_back(candidates[static_cast<std::size_t>(i)]);
  std::sort(selected.begin(), selected.end());
  auto der = random_derangement(k, rng);
  std::vector<int> permuted(selected.size());
  for (std::size_t i = 0; i < selected.size(); ++i) permuted[i] = selected[static_cast<std::size_t>(der[i])];
  return {selected, permuted};
}

std::vector<std::pair<int, int>> zip(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<std::pair<int, int>> out;
  for (std::size_t i = 0; i < a.size(); ++i) out.emplace_back(a[i], b[i]);
  return out;
}

std::vector<int> surviving_slides(const TopicModel& tm, const std::vector<int>& removed_topics) {
  std::set<int> removed(removed_topics.begin(), removed_topics.end());
  std::vector<int> keep;
  for (std::size_t s = 0; s < tm.slide_topics.size(); ++s) {
    const auto& assigned = tm.slide_topics[s];
    bool hit = std::any_of(assigned.begin(), assigned.end(), [&](int t) { return removed.count(t) > 0; });
    if (!hit) keep.push_back(static_cast<int>(s));
  }
  return keep;
}

}  // namespace

void TopicModel::validate(std::size_t slide_count) const {
  if (topics.empty()) throw ContractError("topic model has no topics");
  std::set<std::string> seen;
  for (const auto& t : topics) {
    if (!seen.insert(t).second) throw ContractError("duplicate topic '" + t + "'");
  }
  if (slide_topics.size() != slide_count) {
    throw ContractError("topic model covers " + std::to_string(slide_topics.size()) + " slides, deck has " +
                        std::to_string(slide_count));
  }
  for (const auto& assigned : slide_topics) {
    for (int t : assigned) {
      if (t < 0 || static_cast<std::size_t>(t) >= topics.size()) throw ContractError("topic index out of range");
    }
  }
}

nlohmann::json topic_model_to_json(const TopicModel& tm) {
  return nlohmann::json{{"topics", tm.topics}, {"slide_topics", tm.slide_topics}};
}

TopicModel topic_model_from_json(const nlohmann::json& j) {
  TopicModel tm;
  tm.topics = j.at("topics").get<std::vector<std::string>>();
  tm.slide_topics = j.at("slide_topics").get<std::vector<std::vector<int>>>();
  return tm;
}

int perturbation_count(int n, int degree) {
  if (n < 1) throw DegenerateInputError("cannot select from an empty set");
  check_degree(degree);
  // ceil(n * d * 20 / 100) in integers
  const int k = (n * degree * 20 + 99) / 100;
  return std::clamp(k, 1, n);
}

std::vector<int> select_fraction(int n, int degree, Rng& rng) {
  auto picked = rng.sample(n, perturbation_count(n, degree));
  std::sort(picked.begin(), picked.end());
  return picked;
}

std::vector<int> random_derangement(int k, Rng& rng) {
  if (k < 2) throw ContractError("a derangement needs at least two elements");
  std::vector<int> perm(static_cast<std::size_t>(k));
  for (;;) {
    for (int i = 0; i < k; ++i) perm[static_cast<std::size_t>(i)] = i;
    rng.shuffle(perm);
    bool fixed = false;
    for (int i = 0; i < k && !fixed; ++i) fixed = perm[static_cast<std::size_t>(i)] == i;
    if (!fixed) return perm;
  }
}

std::vector<Slide> permute_slides(const std::vector<Slide>& slides, std::span<const int> selected,
                                  std::span<const int> permuted) {
  check_positions(slides.size(), selected, permuted);
  std::vector<Slide> out(slides);
  for (std::size_t i = 0; i < selected.size(); ++i) {
    out[static_cast<std::size_t>(permuted[i])] = slides[static_cast<std::size_t>(selected[i])];
  }
  return out;
}

std::vector<Slide> permute_images(const std::vector<Slide>& slides, std::span<const int> selected,
                                  std::span<const int> permuted) {
  check_positions(slides.size(), selected, permuted);
  std::vector<Slide> out(slides);
  for (std::size_t i = 0; i < selected.size(); ++i) {
    const auto& from = slides[static_cast<std::size_t>(selected[i])];
    auto& to = out[static_cast<std::size_t>(permuted[i])];
    to.image_captions = from.image_captions;
    to.image_descriptions = from.image_descriptions;
  }
  return out;
}

LabeledSample perturb_redundancy(const Presentation& p, int degree, Rng& rng) {
  check_degree(degree);
  p.validate();
  const int m = static_cast<int>(p.slides.size());
  auto selected = select_fraction(m, degree, rng);

  struct Entry {
    int source;
    bool copy;
  };
  std::vector<Entry> seq;
  for (int i = 0; i < m; ++i) seq.push_back({i, false});
  for (int s : selected) {
    auto pos = rng.between(0, seq.size());
    seq.insert(seq.begin() + static_cast<std::ptrdiff_t>(pos), Entry{s, true});
  }

  Presentation out = p;
  out.slides.clear();
  std::vector<int> inserted;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    out.slides.push_back(p.slides[static_cast<std::size_t>(seq[i].source)]);
    if (seq[i].copy) inserted.push_back(static_cast<int>(i));
  }

  PerturbationTrace trace;
  trace.metric = Metric::Redundancy;
  trace.degree = degree;
  trace.selected_indices = std::move(selected);
  trace.inserted_positions = std::move(inserted);
  trace.rng_seed = rng.seed();
  return make_sample(std::move(out), std::nullopt, std::move(trace));
}

LabeledSample perturb_flow(const Presentation& p, int degree, Rng& rng) {
  check_degree(degree);
  p.validate();
  const int m = static_cast<int>(p.slides.size());
  if (m < 2) throw DegenerateInputError("flow perturbation needs at least two slides");
  std::vector<int> all(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) all[static_cast<std::size_t>(i)] = i;
  auto [selected, permuted] = pick_and_derange(all, degree, rng);

  Presentation out = p;
  out.slides = permute_slides(p.slides, selected, permuted);

  PerturbationTrace trace;
  trace.metric = Metric::Flow;
  trace.degree = degree;
  trace.permutation = zip(selected, permuted);
  trace.selected_indices = std::move(selected);
  trace.rng_seed = rng.seed();
  return make_sample(std::move(out), std::nullopt, std::move(trace));
}

LabeledSample perturb_text_image(const Presentation& p, int degree, Rng& rng) {
  check_degree(degree);
  p.validate();
  std::vector<int> with_images;
  for (std::size_t i = 0; i < p.slides.size(); ++i) {
    if (p.slides[i].has_image()) with_images.push_back(static_cast<int>(i));
  }
  if (with_images.size() < 2) {
    throw InapplicableMetricError("text-image perturbation needs at least two slides with images, deck '" + p.id +
                                  "' has " + std::to_string(with_images.size()));
  }
  auto [selected, permuted] = pick_and_derange(with_images, degree, rng);

  Presentation out = p;
  out.slides = permute_images(p.slides, selected, permuted);

  PerturbationTrace trace;
  trace.metric = Metric::TextImageAlignment;
  trace.degree = degree;
  trace.permutation = zip(selected, permuted);
  trace.selected_indices = std::move(selected);
  trace.rng_seed = rng.seed();
  return make_sample(std::move(out), std::nullopt, std::move(trace));
}

LabeledSample perturb_coverage(const Document& doc, const Presentation& p, const TopicModel& tm, int degree,
                               Rng& rng) {
  check_degree(degree);
  p.validate();
  const int m = static_cast<int>(p.slides.size());
  if (m < 2) throw DegenerateInputError("coverage perturbation needs at least two slides");
  tm.validate(p.slides.size());

  const int t = static_cast<int>(tm.topics.size());
  const int k = perturbation_count(t, degree);

  std::vector<int> chosen;  // draw order
  std::vector<int> keep;
  bool accepted = false;
  for (int attempt = 0; attempt < kMaxCoverageRedraws && !accepted; ++attempt) {
    chosen = rng.sample(t, k);
    keep = surviving_slides(tm, chosen);
    accepted = !keep.empty() && static_cast<int>(keep.size()) < m;
  }
  if (!accepted) {
    // Back off from the last draw, most recent topic first.
    while (!chosen.empty() && (keep = surviving_slides(tm, chosen)).empty()) chosen.pop_back();
    if (chosen.empty() || static_cast<int>(keep.size()) >= m) {
      throw DegenerateInputError("coverage perturbation of deck '" + p.id +
                                 "' cannot remove slides without emptying it");
    }
  }

  std::sort(chosen.begin(), chosen.end());
  std::vector<std::string> removed_topics;
  for (int topic : chosen) removed_topics.push_back(tm.topics[static_cast<std::size_t>(topic)]);

  Presentation out = p;
  out.slides.clear();
  std::vector<int> removed_slides;
  std::size_t next_keep = 0;
  for (int s = 0; s < m; ++s) {
    if (next_keep < keep.size() && keep[next_keep] == s) {
      out.slides.push_back(p.slides[static_cast<std::size_t>(s)]);
      ++next_keep;
    } else {
      removed_slides.push_back(s);
    }
  }

  PerturbationTrace trace;
  trace.metric = Metric::Coverage;
  trace.degree = degree;
  trace.selected_indices = std::move(removed_slides);
  trace.removed_topics = std::move(removed_topics);
  trace.rng_seed = rng.seed();
  return make_sample(std::move(out), doc, std::move(trace));
}

std::string_view positive_explanation(Metric metric) {
  switch (metric) {
    case Metric::Coverage:
      return "All major topics from the source document are covered in this presentation";
    case Metric::Redundancy:
      return "Slides are concise and there is little to no redundant information";
    case Metric::TextImageAlignment:
      return "All the slides have images relevant to their text";
    case Metric::Flow:
      return "The presentation follows a natural, coherent flow";
  }
  return "";
}

LabeledSample positive_sample(const Presentation& p, Metric metric, std::optional<Document> doc,
                              std::uint64_t rng_seed) {
  p.validate();
  PerturbationTrace trace;
  trace.metric = metric;
  trace.degree = 0;
  trace.rng_seed = rng_seed;
  return make_sample(p, std::move(doc), std::move(trace));
}

std::string render_explanation(Metric metric, const PerturbationTrace& trace,
                               std::span<const std::string> slide_titles) {
  if (trace.metric != metric) throw ContractError("trace metric does not match requested metric");
  if (trace.degree == 0) return std::string(positive_explanation(metric));

  std::vector<ListedItem> items;
  switch (metric) {
    case Metric::Coverage: {
      if (!trace.removed_topics || trace.removed_topics->empty()) {
        throw ContractError("coverage explanation needs removed topic labels");
      }
      return std::string(negative_prefix(metric)) + text::join(*trace.removed_topics, ", ");
    }
    case Metric::Redundancy: {
      if (!trace.inserted_positions) throw ContractError("redundancy trace lacks inserted positions");
      for (int pos : *trace.inserted_positions) items.push_back({pos, title_at(slide_titles, pos)});
      break;
    }
    case Metric::TextImageAlignment: {
      for (int pos : trace.selected_indices) items.push_back({pos, title_at(slide_titles, pos)});
      break;
    }
    case Metric::Flow: {
      if (!trace.permutation) throw ContractError("flow trace lacks a permutation");
      // Position `from` should hold the slide that now sits at `to`.
      for (auto [from, to] : *trace.permutation) items.push_back({from, title_at(slide_titles, to)});
      break;
    }
  }
  return render_items(metric, std::move(items));
}

ExpansionResult expand_dataset(const std::vector<CorpusItem>& corpus, Metric metric, std::uint64_t seed,
                               int max_parallel) {
  auto expand_item = [&](std::size_t index) -> std::pair<std::vector<LabeledSample>, std::optional<ItemError>> {
    const auto& item = corpus[index];
    std::vector<LabeledSample> out;
    int degree = 0;
    try {
      if (requires_document(metric) && (!item.document || !item.topics)) {
        throw ContractError("coverage needs a document and a topic model");
      }
      out.push_back(positive_sample(item.presentation, metric,
                                    requires_document(metric) ? item.document : std::nullopt,
                                    derive_seed(seed, index, 0)));
      for (degree = 1; degree <= 4; ++degree) {
        Rng rng(derive_seed(seed, index, static_cast<std::uint64_t>(degree)));
        switch (metric) {
          case Metric::Coverage:
            out.push_back(perturb_coverage(*item.document, item.presentation, *item.topics, degree, rng));
            break;
          case Metric::Redundancy:
            out.push_back(perturb_redundancy(item.presentation, degree, rng));
            break;
          case Metric::TextImageAlignment:
            out.push_back(perturb_text_image(item.presentation, degree, rng));
            break;
          case Metric::Flow:
            out.push_back(perturb_flow(item.presentation, degree, rng));
            break;
        }
        out.back().validate();
      }
    } catch (const std::exception& e) {
      return {{}, ItemError{index, item.presentation.id, degree, e.what()}};
    }
    return {std::move(out), std::nullopt};
  };

  ExpansionResult result;
  const std::size_t batch = static_cast<std::size_t>(std::max(1, max_parallel));
  for (std::size_t start = 0; start < corpus.size(); start += batch) {
    const std::size_t end = std::min(corpus.size(), start + batch);
    std::vector<std::future<std::pair<std::vector<LabeledSample>, std::optional<ItemError>>>> pending;
    for (std::size_t i = start; i < end; ++i) {
      pending.push_back(std::async(batch > 1 ? std::launch::async : std::launch::deferred, expand_item, i));
    }
    for (auto& fut : pending) {
      auto [samples, error] = fut.get();
      if (error) {
        result.errors.push_back(std::move(*error));
        continue;
      }
      for (auto& s : samples) result.samples.push_back(std::move(s));
    }
  }
  return result;
}

}  // namespace deckeval
