#include "deckeval/llm_scoring.hpp"

#include <algorithm>
#include <cctype>
#include <future>
#include <set>

#include <nlohmann/json.hpp>

#include "deckeval/errors.hpp"
#include "deckeval/prompts.hpp"
#include "deckeval/text.hpp"

namespace deckeval {

namespace {

GatewayRequest deterministic_request(const std::string& model_id, std::string prompt, int max_tokens = 512) {
  GatewayRequest req;
  req.model_id = model_id;
  req.prompt = std::move(prompt);
  req.temperature = 0.0;
  req.sampling_enabled = false;
  req.max_tokens = max_tokens;
  return req;
}

}  // namespace

std::vector<std::string> parse_string_list(std::string_view response) {
  auto open = response.find('[');
  auto close = response.rfind(']');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    throw ParseError("response is not a bracketed list", std::string(response));
  }
  auto body = response.substr(open + 1, close - open - 1);
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < body.size()) {
    char c = body[i];
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      ++i;
      continue;
    }
    std::string item;
    if (c == '\'' || c == '"') {
      const char quote = c;
      ++i;
      bool closed = false;
      while (i < body.size()) {
        char d = body[i++];
        if (d == '\\' && i < body.size()) {
          item.push_back(body[i++]);
        } else if (d == quote) {
          closed = true;
          break;
        } else {
          item.push_back(d);
        }
      }
      if (!closed) throw ParseError("unterminated quoted list item", std::string(response));
    } else {
      while (i < body.size() && body[i] != ',') item.push_back(body[i++]);
      item = text::trim(item);
    }
    out.push_back(std::move(item));
  }
  return out;
}

std::string normalize_topic(std::string_view topic) {
  return text::join(text::split_words(text::to_lower(topic)), "_");
}

std::optional<int> parse_likert_score(std::string_view response) {
  std::size_t i = 0;
  while (i < response.size()) {
    if (!std::isdigit(static_cast<unsigned char>(response[i]))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < response.size() && std::isdigit(static_cast<unsigned char>(response[i]))) ++i;
    // "4.5" is not an integer token
    if (i < response.size() && response[i] == '.' && i + 1 < response.size() &&
        std::isdigit(static_cast<unsigned char>(response[i + 1]))) {
      ++i;
      while (i < response.size() && std::isdigit(static_cast<unsigned char>(response[i]))) ++i;
      continue;
    }
    auto token = response.substr(start, i - start);
    if (token.size() == 1 && token[0] >= '1' && token[0] <= '5') return token[0] - '0';
  }
  return std::nullopt;
}

std::vector<std::string> extract_topics(std::string_view document_summary, Gateway& gateway,
                                        const std::string& model_id) {
  if (text::trim(document_summary).empty()) throw ContractError("topic extraction needs a non-empty summary");
  auto raw = gateway.complete(deterministic_request(model_id, prompts::topic_prompt(document_summary)));
  std::vector<std::string> topics;
  std::set<std::string> seen;
  for (const auto& item : parse_string_list(raw)) {
    auto t = normalize_topic(item);
    if (t.empty() || !seen.insert(t).second) continue;
    topics.push_back(std::move(t));
  }
  if (topics.empty()) throw ParseError("topic list is empty", raw);
  return topics;
}

int best_overlap_topic(const Slide& slide, const std::vector<std::string>& topics) {
  if (topics.empty()) throw ContractError("no topics to choose from");
  auto tokens = text::normalized_tokens(slide_plain_text(slide));
  std::set<std::string> vocab(tokens.begin(), tokens.end());
  int best = 0;
  std::size_t best_overlap = 0;
  for (std::size_t t = 0; t < topics.size(); ++t) {
    std::string spaced = topics[t];
    std::replace(spaced.begin(), spaced.end(), '_', ' ');
    std::size_t overlap = 0;
    for (const auto& tok : text::normalized_tokens(spaced)) overlap += vocab.count(tok);
    if (overlap > best_overlap) {
      best_overlap = overlap;
      best = static_cast<int>(t);
    }
  }
  return best;
}

TopicAssignment assign_topics(const Slide& slide, const std::vector<std::string>& topics, Gateway& gateway,
                              const std::string& model_id) {
  if (topics.empty()) throw ContractError("topic assignment needs a non-empty topic list");
  auto raw = gateway.complete(deterministic_request(model_id, prompts::topic_assignment_prompt(slide, topics)));

  TopicAssignment out;
  std::vector<std::string> labels;
  try {
    labels = parse_string_list(raw);
  } catch (const ParseError&) {
    out.note = "unparseable assignment response";
  }
  std::set<int> picked;
  std::vector<std::string> dropped;
  for (const auto& label : labels) {
    auto norm = normalize_topic(label);
    auto it = std::find(topics.begin(), topics.end(), norm);
    if (it == topics.end()) {
      dropped.push_back(label);
    } else {
      picked.insert(static_cast<int>(it - topics.begin()));
    }
  }
  if (!dropped.empty()) out.note = "dropped unknown labels: " + text::join(dropped, ", ");
  if (picked.empty()) {
    picked.insert(best_overlap_topic(slide, topics));
    out.used_fallback = true;
    out.note = (out.note.empty() ? std::string() : out.note + "; ") + "fell back to token overlap for slide '" +
               slide.title + "'";
  }
  out.indices.assign(picked.begin(), picked.end());
  return out;
}

TopicModelBuild build_topic_model(std::string_view document_summary, const Presentation& p, Gateway& gateway,
                                  const std::string& model_id) {
  TopicModelBuild out;
  out.model.topics = extract_topics(document_summary, gateway, model_id);
  for (const auto& slide : p.slides) {
    auto a = assign_topics(slide, out.model.topics, gateway, model_id);
    if (!a.note.empty()) out.notes.push_back(p.id + ": " + a.note);
    out.model.slide_topics.push_back(std::move(a.indices));
  }
  return out;
}

PromptedScore geval_score(const Presentation& p, Metric metric, std::optional<std::string_view> document_summary,
                          const PromptedScorerConfig& config, Gateway& gateway) {
  if (config.n_iterations < 1) throw ContractError("geval needs at least one iteration");
  if (requires_document(metric) && (!document_summary || text::trim(*document_summary).empty())) {
    throw ContractError("coverage scoring needs the source document");
  }
  const std::string_view summary = document_summary.value_or(std::string_view{});

  auto steps = gateway.complete(deterministic_request(config.model_id, prompts::geval_steps_prompt(metric)));
  const auto score_prompt = prompts::geval_score_prompt(metric, steps, p, summary);

  auto draw = [&](int i) -> std::optional<int> {
    GatewayRequest req;
    req.model_id = config.model_id;
    req.prompt = score_prompt;
    req.temperature = config.temperature;
    req.sampling_enabled = config.temperature > 0.0;
    req.max_tokens = config.max_tokens;
    req.sample_index = i;
    return parse_likert_score(gateway.complete(req));
  };

  PromptedScore out;
  long sum = 0;
  const int batch = gateway.max_in_flight();
  for (int start = 0; start < config.n_iterations; start += batch) {
    const int end = std::min(config.n_iterations, start + batch);
    std::vector<std::future<std::optional<int>>> pending;
    for (int i = start; i < end; ++i) {
      pending.push_back(std::async(batch > 1 ? std::launch::async : std::launch::deferred, draw, i));
    }
    for (auto& fut : pending) {
      if (auto s = fut.get()) {
        sum += *s;
        ++out.parsed;
      } else {
        ++out.dropped;
      }
    }
  }
  if (out.parsed == 0) throw ScorerError("no parseable score in " + std::to_string(config.n_iterations) + " iterations");
  out.mean = static_cast<double>(sum) / out.parsed;
  out.value = (out.mean - 1.0) / 4.0;
  return out;
}

std::string prompted_explanation(const Presentation& p, Metric metric, Gateway& gateway, const std::string& model_id,
                                 std::string_view document_summary) {
  return gateway.complete(deterministic_request(model_id, prompts::explanation_prompt(metric, p, document_summary)));
}

ScoreResult remote_score(const Presentation& p, std::string_view explanation, Metric metric, Gateway& gateway,
                         const std::string& endpoint_id) {
  nlohmann::json body{{"metric", metric_name(metric)},
                      {"presentation", presentation_to_json(p)},
                      {"explanation", std::string(explanation)}};
  auto raw = gateway.complete(deterministic_request(endpoint_id, body.dump(), 16));
  auto reply = nlohmann::json::parse(raw, nullptr, false);
  if (reply.is_discarded() || !reply.is_object() || !reply.contains("value") || !reply["value"].is_number()) {
    throw ProtocolError("remote scorer reply lacks a numeric 'value': " + raw);
  }
  const double value = reply["value"].get<double>();
  if (!(value >= 0.0 && value <= 1.0)) {
    throw ProtocolError("remote scorer returned " + std::to_string(value) + ", outside [0,1]");
  }
  return ScoreResult::make(value, std::string(explanation), "remote");
}

}  // namespace deckeval
