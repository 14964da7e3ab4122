#include "deckeval/model.hpp"

#include <algorithm>
#include <charconv>
#include <string>

#include <nlohmann/json.hpp>

#include "deckeval/errors.hpp"
#include "deckeval/text.hpp"

namespace deckeval {

using nlohmann::json;

namespace {

constexpr std::string_view kNoImages = "No Images";

std::string image_marker(std::size_t one_based) { return "Image" + std::to_string(one_based) + ": "; }

template <typename T>
T required(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw MalformedInputError(std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw MalformedInputError(std::string("bad field '") + key + "': " + e.what());
  }
}

std::vector<int> to_wire_indices(const std::vector<int>& v) {
  std::vector<int> out(v);
  for (auto& i : out) ++i;
  return out;
}

std::vector<int> from_wire_indices(const std::vector<int>& v) {
  std::vector<int> out(v);
  for (auto& i : out) {
    if (i < 1) throw MalformedInputError("slide index on the wire must be >= 1");
    --i;
  }
  return out;
}

AspectRatio parse_aspect(std::string_view s) {
  auto colon = s.find(':');
  if (colon == std::string_view::npos) throw MalformedInputError("aspect_ratio must be \"W:H\"");
  AspectRatio ar{};
  auto w = s.substr(0, colon);
  auto h = s.substr(colon + 1);
  auto r1 = std::from_chars(w.data(), w.data() + w.size(), ar.width);
  auto r2 = std::from_chars(h.data(), h.data() + h.size(), ar.height);
  if (r1.ec != std::errc{} || r1.ptr != w.data() + w.size() || r2.ec != std::errc{} ||
      r2.ptr != h.data() + h.size()) {
    throw MalformedInputError("aspect_ratio must be \"W:H\", got \"" + std::string(s) + "\"");
  }
  return ar;
}

}  // namespace

std::string_view metric_name(Metric metric) {
  switch (metric) {
    case Metric::Coverage:
      return "coverage";
    case Metric::Redundancy:
      return "redundancy";
    case Metric::TextImageAlignment:
      return "text_image_alignment";
    case Metric::Flow:
      return "flow";
  }
  return "unknown";
}

Metric parse_metric(std::string_view name) {
  std::string norm = text::to_lower(name);
  std::replace(norm.begin(), norm.end(), '-', '_');
  for (Metric m : kAllMetrics) {
    if (norm == metric_name(m)) return m;
  }
  if (norm == "text_image" || norm == "textimagealignment") return Metric::TextImageAlignment;
  throw ContractError("unknown metric '" + std::string(name) + "'");
}

void Slide::validate() const {
  if (image_captions.size() != image_descriptions.size()) {
    throw ContractError("slide '" + title + "': caption and description counts differ");
  }
  if (text::trim(title).empty()) throw ContractError("slide title must be non-empty");
}

void Presentation::validate() const {
  if (slides.empty()) throw ContractError("presentation '" + id + "' has no slides");
  for (const auto& s : slides) s.validate();
}

bool is_reference_section(std::string_view title) {
  auto t = text::trim(title);
  return text::equals_ci(t, "reference") || text::equals_ci(t, "references");
}

std::size_t summary_word_cap(std::string_view title) { return is_reference_section(title) ? 20 : 30; }

void PerturbationTrace::validate() const {
  if (degree < 0 || degree > 4) throw ContractError("trace degree must be in 0..4");
  if (degree == 0) {
    if (!selected_indices.empty() || permutation || removed_topics || inserted_positions) {
      throw ContractError("degree-0 trace must not record any perturbation");
    }
    return;
  }
  if (permutation) {
    std::vector<int> from;
    std::vector<int> to;
    for (auto [a, b] : *permutation) {
      from.push_back(a);
      to.push_back(b);
    }
    std::sort(from.begin(), from.end());
    std::sort(to.begin(), to.end());
    std::vector<int> sel(selected_indices);
    std::sort(sel.begin(), sel.end());
    if (from != sel || to != sel) throw ContractError("trace permutation is not a bijection over selected_indices");
  }
}

std::string LabeledSample::id() const {
  return presentation.id + "/" + std::string(metric_name(metric)) + "/d" + std::to_string(degree);
}

void LabeledSample::validate() const {
  if (degree < 0 || degree > 4) throw ContractError("sample degree must be in 0..4");
  if (score != 5 - degree) throw ContractError("sample score must equal 5 - degree");
  if (requires_document(metric) && !document) throw ContractError("coverage sample requires a document");
  if (trace.metric != metric || trace.degree != degree) throw ContractError("trace does not match sample");
  trace.validate();
  presentation.validate();
}

ScoreResult ScoreResult::make(double value, std::optional<std::string> explanation, std::string scorer_id) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw ContractError("score value " + std::to_string(value) + " outside [0,1]");
  }
  return ScoreResult{value, std::move(explanation), std::move(scorer_id)};
}

double normalize_label_score(int score) {
  if (score < 1 || score > 5) throw ContractError("label score must be in 1..5, got " + std::to_string(score));
  return (score - 1) / 4.0;
}

std::string flatten_image_field(const std::vector<std::string>& items) {
  if (items.empty()) return std::string(kNoImages);
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += image_marker(i + 1);
    out += items[i];
  }
  return out;
}

std::vector<std::string> split_image_field(std::string_view field) {
  if (field == kNoImages) return {};
  std::vector<std::string> out;
  std::string first = image_marker(1);
  if (field.substr(0, first.size()) != first) {
    throw MalformedInputError("image field must be \"No Images\" or start with \"Image1: \"");
  }
  std::size_t pos = first.size();
  for (std::size_t k = 2;; ++k) {
    std::string sep = ", " + image_marker(k);
    auto next = field.find(sep, pos);
    if (next == std::string_view::npos) {
      out.emplace_back(field.substr(pos));
      break;
    }
    out.emplace_back(field.substr(pos, next - pos));
    pos = next + sep.size();
  }
  return out;
}

std::string slide_plain_text(const Slide& slide) {
  std::vector<std::string> parts;
  auto add = [&](const std::string& s) {
    if (!text::trim(s).empty()) parts.push_back(s);
  };
  add(slide.title);
  add(slide.text_summary);
  for (const auto& c : slide.image_captions) add(c);
  for (const auto& d : slide.image_descriptions) add(d);
  return text::join(parts, " ");
}

json slide_to_json(const Slide& slide) {
  return json{{"title", slide.title},
              {"text", slide.text_summary},
              {"image-caption", flatten_image_field(slide.image_captions)},
              {"image", flatten_image_field(slide.image_descriptions)}};
}

Slide slide_from_json(const json& j) {
  Slide s;
  s.title = required<std::string>(j, "title");
  s.text_summary = required<std::string>(j, "text");
  s.image_descriptions = split_image_field(required<std::string>(j, "image"));
  auto captions = required<std::string>(j, "image-caption");
  if ((captions.empty() || captions == kNoImages) && !s.image_descriptions.empty()) {
    s.image_captions.assign(s.image_descriptions.size(), "");
  } else {
    s.image_captions = split_image_field(captions);
  }
  try {
    s.validate();
  } catch (const ContractError& e) {
    throw MalformedInputError(e.what());
  }
  return s;
}

json presentation_to_json(const Presentation& p) {
  json slides = json::array();
  for (const auto& s : p.slides) slides.push_back(slide_to_json(s));
  json j{{"id", p.id},
         {"slides", std::move(slides)},
         {"aspect_ratio", std::to_string(p.aspect_ratio.width) + ":" + std::to_string(p.aspect_ratio.height)},
         {"language", p.language_tag}};
  if (p.source_uri) j["source_uri"] = *p.source_uri;
  return j;
}

Presentation presentation_from_json(const json& j) {
  Presentation p;
  p.id = required<std::string>(j, "id");
  auto slides = j.find("slides");
  if (slides == j.end() || !slides->is_array()) throw MalformedInputError("presentation '" + p.id + "' lacks slides");
  for (const auto& s : *slides) p.slides.push_back(slide_from_json(s));
  p.aspect_ratio = parse_aspect(j.value("aspect_ratio", std::string("16:9")));
  p.language_tag = j.value("language", std::string());
  if (auto it = j.find("source_uri"); it != j.end() && it->is_string()) p.source_uri = it->get<std::string>();
  if (p.slides.empty()) throw MalformedInputError("presentation '" + p.id + "' has no slides");
  return p;
}

json document_node_to_json(const DocumentNode& node) {
  json children = json::array();
  for (const auto& c : node.children) children.push_back(document_node_to_json(c));
  json j{{"title", node.title}, {"body", node.body}, {"children", std::move(children)}};
  if (node.summary) j["summary"] = *node.summary;
  return j;
}

DocumentNode document_node_from_json(const json& j) {
  DocumentNode n;
  n.title = required<std::string>(j, "title");
  n.body = j.value("body", std::string());
  if (auto it = j.find("summary"); it != j.end() && it->is_string()) n.summary = it->get<std::string>();
  if (auto it = j.find("children"); it != j.end()) {
    for (const auto& c : *it) n.children.push_back(document_node_from_json(c));
  }
  return n;
}

json document_to_json(const Document& doc) { return json{{"id", doc.id}, {"root", document_node_to_json(doc.root)}}; }

Document document_from_json(const json& j) {
  return Document{required<std::string>(j, "id"), document_node_from_json(required<json>(j, "root"))};
}

json trace_to_json(const PerturbationTrace& trace) {
  json j{{"metric", metric_name(trace.metric)},
         {"degree", trace.degree},
         {"selected_indices", to_wire_indices(trace.selected_indices)},
         {"rng_seed", trace.rng_seed}};
  if (trace.permutation) {
    json perm = json::array();
    for (auto [from, to] : *trace.permutation) perm.push_back({from + 1, to + 1});
    j["permutation"] = std::move(perm);
  }
  if (trace.removed_topics) j["removed_topics"] = *trace.removed_topics;
  if (trace.inserted_positions) j["inserted_positions"] = to_wire_indices(*trace.inserted_positions);
  return j;
}

PerturbationTrace trace_from_json(const json& j) {
  PerturbationTrace t;
  t.metric = parse_metric(required<std::string>(j, "metric"));
  t.degree = required<int>(j, "degree");
  t.selected_indices = from_wire_indices(required<std::vector<int>>(j, "selected_indices"));
  t.rng_seed = required<std::uint64_t>(j, "rng_seed");
  if (auto it = j.find("permutation"); it != j.end()) {
    std::vector<std::pair<int, int>> perm;
    for (const auto& pair : *it) {
      if (!pair.is_array() || pair.size() != 2) throw MalformedInputError("permutation entries must be [old, new]");
      int from = pair[0].get<int>();
      int to = pair[1].get<int>();
      if (from < 1 || to < 1) throw MalformedInputError("slide index on the wire must be >= 1");
      perm.emplace_back(from - 1, to - 1);
    }
    t.permutation = std::move(perm);
  }
  if (auto it = j.find("removed_topics"); it != j.end()) t.removed_topics = it->get<std::vector<std::string>>();
  if (auto it = j.find("inserted_positions"); it != j.end()) {
    t.inserted_positions = from_wire_indices(it->get<std::vector<int>>());
  }
  return t;
}

json sample_to_json(const LabeledSample& sample) {
  json j{{"id", sample.id()},
         {"metric", metric_name(sample.metric)},
         {"degree", sample.degree},
         {"score", sample.score},
         {"explanation", sample.explanation},
         {"trace", trace_to_json(sample.trace)},
         {"presentation", presentation_to_json(sample.presentation)}};
  if (sample.document) j["document"] = document_to_json(*sample.document);
  return j;
}

LabeledSample sample_from_json(const json& j) {
  LabeledSample s;
  s.metric = parse_metric(required<std::string>(j, "metric"));
  s.degree = required<int>(j, "degree");
  s.score = required<int>(j, "score");
  s.explanation = required<std::string>(j, "explanation");
  s.trace = trace_from_json(required<json>(j, "trace"));
  s.presentation = presentation_from_json(required<json>(j, "presentation"));
  if (auto it = j.find("document"); it != j.end() && !it->is_null()) s.document = document_from_json(*it);
  try {
    s.validate();
  } catch (const ContractError& e) {
    throw MalformedInputError(std::string("invalid labeled sample: ") + e.what());
  }
  return s;
}

json score_to_json(const std::string& sample_id, Metric metric, const ScoreResult& score) {
  json j{{"id", sample_id}, {"metric", metric_name(metric)}, {"value", score.value}, {"scorer_id", score.scorer_id}};
  if (score.explanation) j["explanation"] = *score.explanation;
  return j;
}

std::string serialize_presentation(const Presentation& p) { return presentation_to_json(p).dump(); }

Presentation deserialize_presentation(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw MalformedInputError(std::string("presentation record is not JSON: ") + e.what());
  }
  return presentation_from_json(j);
}

}  // namespace deckeval
