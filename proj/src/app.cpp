#include "deckeval/app.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "deckeval/errors.hpp"
#include "deckeval/filter.hpp"
#include "deckeval/heuristics.hpp"
#include "deckeval/ingest.hpp"
#include "deckeval/io.hpp"
#include "deckeval/llm_scoring.hpp"
#include "deckeval/perturb.hpp"
#include "deckeval/stats.hpp"

namespace deckeval {

using nlohmann::json;

namespace {

constexpr const char* kRemoteScorerModel = "remote-scorer";

class MissingInputError : public ContractError {
 public:
  explicit MissingInputError(const fs::path& path)
      : ContractError("input not found: " + path.string()), path_(path.string()) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Exits with code 2; carries extra fields for the error record.
class UsageError : public ContractError {
 public:
  UsageError(const std::string& msg, json extra = json::object()) : ContractError(msg), extra_(std::move(extra)) {}
  const json& extra() const { return extra_; }

 private:
  json extra_;
};

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const MissingInputError*>(&e)) return "missing_input";
  if (dynamic_cast<const UsageError*>(&e)) return "usage";
  if (dynamic_cast<const CassetteMissError*>(&e)) return "cassette_miss";
  if (dynamic_cast<const TransportError*>(&e)) return "transport";
  if (dynamic_cast<const ProtocolError*>(&e)) return "protocol";
  if (dynamic_cast<const ParseError*>(&e)) return "parse";
  if (dynamic_cast<const ScorerError*>(&e)) return "scorer";
  if (dynamic_cast<const StructureError*>(&e)) return "structure";
  if (dynamic_cast<const IngestError*>(&e)) return "ingest";
  if (dynamic_cast<const InapplicableMetricError*>(&e)) return "inapplicable_metric";
  if (dynamic_cast<const DegenerateInputError*>(&e)) return "degenerate_input";
  if (dynamic_cast<const MalformedInputError*>(&e)) return "malformed_input";
  if (dynamic_cast<const NumericDomainError*>(&e)) return "numeric_domain";
  if (dynamic_cast<const UndefinedCorrelationError*>(&e)) return "undefined_correlation";
  if (dynamic_cast<const ContractError*>(&e)) return "contract";
  return "internal";
}

json item_error(std::size_t index, const std::string& id, const std::exception& e) {
  json j{{"item", index}, {"id", id}, {"error", error_kind(e)}, {"message", e.what()}};
  if (auto* ie = dynamic_cast<const IngestError*>(&e); ie && ie->retryable()) j["retryable"] = true;
  if (auto* se = dynamic_cast<const StructureError*>(&e)) j["orphan_path"] = se->orphan_path();
  return j;
}

const fs::path& require_input(const std::optional<fs::path>& path, const char* flag) {
  if (!path) throw UsageError(std::string("missing required input ") + flag);
  if (!fs::exists(*path)) throw MissingInputError(*path);
  return *path;
}

void require_file(const fs::path& path) {
  if (!fs::exists(path)) throw MissingInputError(path);
}

fs::path output_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  auto path = cfg.out_dir / name;
  if (fs::exists(path)) throw UsageError("refusing to overwrite existing output " + path.string(), {{"path", path.string()}});
  return path;
}

HttpEndpoint to_endpoint(const EndpointConfig& ec, const char* default_path) {
  HttpEndpoint ep;
  ep.base_url = ec.base_url;
  ep.path = ec.path.empty() ? default_path : ec.path;
  ep.format = ec.format;
  ep.token_env = ec.token_env;
  ep.timeout = std::chrono::seconds(ec.timeout_s);
  return ep;
}

/// Sends remote-scorer traffic to its own endpoint, everything else to the
/// completion endpoint.
class RoutingTransport : public CompletionTransport {
 public:
  RoutingTransport(std::shared_ptr<CompletionTransport> completion, std::shared_ptr<CompletionTransport> scorer)
      : completion_(std::move(completion)), scorer_(std::move(scorer)) {}

  std::string send(const GatewayRequest& request) override {
    auto& target = request.model_id == kRemoteScorerModel ? scorer_ : completion_;
    if (!target) throw ContractError("no endpoint configured for model '" + request.model_id + "'");
    return target->send(request);
  }

 private:
  std::shared_ptr<CompletionTransport> completion_;
  std::shared_ptr<CompletionTransport> scorer_;
};

struct Services {
  std::shared_ptr<Cassette> cassette;
  std::unique_ptr<Gateway> gateway;
  std::optional<fs::path> cassette_path;
  bool has_backend = false;  // any way at all to answer a request

  void persist() const {
    if (cassette && cassette_path && cassette->mode() == CassetteMode::Record) cassette->save(*cassette_path);
  }
};

Services make_services(const RunConfig& cfg) {
  Services s;
  s.cassette_path = cfg.cassette_path;
  s.cassette = cfg.cassette_path ? Cassette::load(*cfg.cassette_path, cfg.cassette_mode)
                                 : std::make_shared<Cassette>(cfg.cassette_mode);
  std::shared_ptr<CompletionTransport> completion = cfg.transport_override;
  std::shared_ptr<CompletionTransport> scorer = cfg.transport_override;
  if (!completion && cfg.completion) completion = std::make_shared<HttpCompletionTransport>(to_endpoint(*cfg.completion, "/v1/complete"));
  if (!scorer && cfg.remote_scorer) scorer = std::make_shared<HttpJsonPostTransport>(to_endpoint(*cfg.remote_scorer, "/score"));
  std::shared_ptr<CompletionTransport> routed;
  if (completion || scorer) routed = std::make_shared<RoutingTransport>(completion, scorer);
  s.has_backend = routed != nullptr || cfg.cassette_mode == CassetteMode::Replay;
  s.gateway = std::make_unique<Gateway>(s.cassette, routed, RetryPolicy{}, cfg.max_in_flight);
  return s;
}

template <class F>
CommandResult with_services(const RunConfig& cfg, F&& body) {
  Services s = make_services(cfg);
  try {
    auto r = body(s);
    s.persist();
    return r;
  } catch (...) {
    try {
      s.persist();
    } catch (...) {
    }
    throw;
  }
}

// Failures that end the whole run rather than a single item.
bool is_fatal(const std::exception& e) {
  return dynamic_cast<const TransportError*>(&e) || dynamic_cast<const CassetteMissError*>(&e);
}

std::map<std::string, Document> load_documents(const fs::path& path) {
  std::map<std::string, Document> out;
  for (const auto& rec : io::read_jsonl(path)) {
    auto doc = document_from_json(rec);
    out.emplace(doc.id, std::move(doc));
  }
  return out;
}

std::vector<json> read_many(const std::vector<fs::path>& paths) {
  std::vector<json> out;
  for (const auto& p : paths) {
    require_file(p);
    for (auto& rec : io::read_jsonl(p)) out.push_back(std::move(rec));
  }
  return out;
}

std::unique_ptr<EmbeddingProvider> make_embedder(const RunConfig& cfg) {
  if (cfg.embedding_url) return std::make_unique<HttpEmbeddingProvider>(*cfg.embedding_url);
  return stub_embedder(cfg.stub_dim);
}

void check_no_secrets(const json& j, const std::string& where) {
  if (!j.is_object()) return;
  for (const auto& [key, value] : j.items()) {
    auto k = key;
    std::transform(k.begin(), k.end(), k.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    const bool secret = k == "token" || k.ends_with("_token") || k.find("authorization") != std::string::npos ||
                        k.find("api_key") != std::string::npos || k.find("apikey") != std::string::npos ||
                        k.find("secret") != std::string::npos || k.find("password") != std::string::npos;
    if (secret) {
      throw UsageError("config key '" + where + key + "' looks like a credential; set token_env and export the token instead");
    }
    check_no_secrets(value, where + key + ".");
  }
}

EndpointConfig endpoint_from_json(const json& j) {
  EndpointConfig ec;
  ec.base_url = j.at("base_url").get<std::string>();
  ec.path = j.value("path", std::string());
  ec.format = j.value("format", ec.format);
  ec.token_env = j.value("token_env", ec.token_env);
  ec.timeout_s = j.value("timeout_s", ec.timeout_s);
  return ec;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

void RunConfig::validate() const {
  if (cassette_mode == CassetteMode::Replay && !cassette_path) throw UsageError("replay mode requires a cassette path");
  if (cassette_mode == CassetteMode::Record && !cassette_path) throw UsageError("record mode requires a cassette path");
  if (geval_iterations < 1) throw UsageError("geval iterations must be at least 1");
  if (max_in_flight < 1 || max_parallel < 1) throw UsageError("concurrency limits must be at least 1");
  if (!(overlap_threshold >= 0.0 && overlap_threshold <= 1.0)) throw UsageError("overlap threshold must lie in [0,1]");
  if (!(aspect_tolerance >= 0.0)) throw UsageError("aspect tolerance must be non-negative");
}

void apply_config_json(RunConfig& cfg, const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  check_no_secrets(j, "");
  try {
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("cassette")) {
      const auto& c = j.at("cassette");
      if (c.contains("path")) cfg.cassette_path = resolve(base_dir, c.at("path").get<std::string>());
      if (c.contains("mode")) cfg.cassette_mode = parse_cassette_mode(c.at("mode").get<std::string>());
    }
    if (j.contains("endpoints")) {
      const auto& e = j.at("endpoints");
      if (e.contains("completion")) cfg.completion = endpoint_from_json(e.at("completion"));
      if (e.contains("remote_scorer")) cfg.remote_scorer = endpoint_from_json(e.at("remote_scorer"));
      if (e.contains("embedding")) cfg.embedding_url = e.at("embedding").at("base_url").get<std::string>();
    }
    if (j.contains("models")) {
      const auto& m = j.at("models");
      cfg.completion_model = m.value("completion", cfg.completion_model);
      cfg.phi3_model = m.value("phi3eval", cfg.phi3_model);
    }
    if (j.contains("geval")) {
      cfg.geval_iterations = j.at("geval").value("iterations", cfg.geval_iterations);
      cfg.geval_temperature = j.at("geval").value("temperature", cfg.geval_temperature);
    }
    if (j.contains("embedder")) cfg.stub_dim = j.at("embedder").value("stub_dim", cfg.stub_dim);
    if (j.contains("thresholds")) {
      cfg.overlap_threshold = j.at("thresholds").value("overlap", cfg.overlap_threshold);
      cfg.aspect_tolerance = j.at("thresholds").value("aspect_tol", cfg.aspect_tolerance);
    }
    if (j.contains("filter")) cfg.model_intro_conclusion = j.at("filter").value("model_intro_conclusion", false);
    cfg.max_in_flight = j.value("max_in_flight", cfg.max_in_flight);
    cfg.max_parallel = j.value("max_parallel", cfg.max_parallel);
    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      auto opt = [&](const char* key, std::optional<fs::path>& slot) {
        if (p.contains(key)) slot = resolve(base_dir, p.at(key).get<std::string>());
      };
      opt("decks", cfg.decks);
      opt("sections", cfg.sections);
      opt("corpus", cfg.corpus);
      opt("documents", cfg.documents);
      opt("topics", cfg.topics);
      auto many = [&](const char* key, std::vector<fs::path>& slot) {
        if (!p.contains(key)) return;
        slot.clear();
        const auto& v = p.at(key);
        if (v.is_string()) {
          slot.push_back(resolve(base_dir, v.get<std::string>()));
        } else {
          for (const auto& s : v) slot.push_back(resolve(base_dir, s.get<std::string>()));
        }
      };
      many("samples", cfg.samples);
      many("scores", cfg.scores);
      if (p.contains("out_dir")) cfg.out_dir = resolve(base_dir, p.at("out_dir").get<std::string>());
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad config: ") + e.what());
  }
}

RunConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw MissingInputError(path);
  std::ifstream in(path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw UsageError("config " + path.string() + " is not valid JSON");
  RunConfig cfg;
  apply_config_json(cfg, j, path.parent_path());
  return cfg;
}

CommandResult run_guarded(const std::function<CommandResult()>& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    CommandResult r;
    json err{{"error", error_kind(e)}, {"message", e.what()}};
    if (auto* m = dynamic_cast<const MissingInputError*>(&e)) err["path"] = m->path();
    if (auto* u = dynamic_cast<const UsageError*>(&e)) err.update(u->extra());
    if (auto* c = dynamic_cast<const CassetteMissError*>(&e)) err["digest"] = c->digest();
    r.exit_code = dynamic_cast<const TransportError*>(&e) ? kExitTransport : kExitUsage;
    r.errors.push_back(std::move(err));
    return r;
  }
}

// ---------------------------------------------------------------------------

CommandResult cmd_ingest(const RunConfig& cfg) {
  cfg.validate();
  if (!cfg.decks && !cfg.sections) throw UsageError("ingest needs decks and/or sections input");
  if (cfg.decks) require_file(*cfg.decks);
  if (cfg.sections) require_file(*cfg.sections);
  const auto corpus_out = cfg.decks ? std::optional(output_path(cfg, "corpus.jsonl")) : std::nullopt;
  const auto docs_out = cfg.sections ? std::optional(output_path(cfg, "documents.jsonl")) : std::nullopt;

  return with_services(cfg, [&](Services& s) {
    CommandResult r;
    r.summary["command"] = "ingest";
    if (cfg.decks) {
      std::vector<Presentation> decks;
      const auto records = io::read_jsonl(*cfg.decks);
      for (std::size_t i = 0; i < records.size(); ++i) {
        const auto id = records[i].value("id", std::string());
        try {
          json rec = records[i];
          json slides = json::array();
          for (const auto& sl : rec.at("slides")) {
            if (sl.contains("text_response")) {
              std::optional<std::string> title;
              if (sl.contains("title")) title = sl.at("title").get<std::string>();
              auto slide = extract_slide_features(sl.at("text_response").get<std::string>(),
                                                  sl.value("image_response", std::string("\"No Images\"")), title);
              slides.push_back(slide_to_json(slide));
            } else {
              slides.push_back(sl);
            }
          }
          rec["slides"] = std::move(slides);
          auto p = presentation_from_json(rec);
          p.validate();
          decks.push_back(std::move(p));
        } catch (const json::exception& e) {
          r.errors.push_back(item_error(i, id, MalformedInputError(e.what())));
        } catch (const Error& e) {
          if (is_fatal(e)) throw;
          r.errors.push_back(item_error(i, id, e));
        }
      }
      io::JsonlWriter out(*corpus_out, io::make_header("corpus", cfg.seed));
      for (const auto& p : decks) out.write(presentation_to_json(p));
      out.close();
      r.summary["presentations"] = decks.size();
      r.summary["outputs"].push_back(corpus_out->string());
    }
    if (cfg.sections) {
      std::vector<std::string> order;
      std::map<std::string, std::vector<RawSectionExtract>> grouped;
      for (const auto& rec : io::read_jsonl(*cfg.sections)) {
        try {
          const auto doc_id = rec.at("doc_id").get<std::string>();
          if (!grouped.count(doc_id)) order.push_back(doc_id);
          grouped[doc_id].push_back(RawSectionExtract{rec.at("heading_path").get<std::vector<std::string>>(),
                                                      rec.at("heading").get<std::string>(),
                                                      rec.value("body", std::string())});
        } catch (const json::exception& e) {
          throw MalformedInputError(std::string("section record: ") + e.what());
        }
      }
      auto summarizer = gateway_summarizer(*s.gateway, cfg.completion_model);
      std::vector<Document> docs;
      std::vector<std::string> warnings;
      for (std::size_t i = 0; i < order.size(); ++i) {
        try {
          auto tree = build_document_tree(order[i], grouped[order[i]]);
          auto res = summarize_document(tree, summarizer, SummarizeOptions{cfg.max_parallel});
          for (auto& w : res.warnings) warnings.push_back(order[i] + ": " + w);
          docs.push_back(std::move(res.document));
        } catch (const Error& e) {
          if (is_fatal(e)) throw;
          r.errors.push_back(item_error(i, order[i], e));
        }
      }
      io::JsonlWriter out(*docs_out, io::make_header("documents", cfg.seed));
      for (const auto& d : docs) out.write(document_to_json(d));
      out.close();
      r.summary["documents"] = docs.size();
      r.summary["warnings"] = warnings;
      r.summary["outputs"].push_back(docs_out->string());
    }
    if (!r.errors.empty()) r.exit_code = kExitPartial;
    return r;
  });
}

CommandResult cmd_perturb(const RunConfig& cfg, Metric metric) {
  cfg.validate();
  const auto& corpus_path = require_input(cfg.corpus, "corpus");
  const bool coverage = requires_document(metric);
  if (coverage && !cfg.documents) throw UsageError("coverage perturbation needs a documents input");
  if (coverage) require_input(cfg.documents, "documents");
  if (cfg.topics) require_file(*cfg.topics);
  const auto samples_out = output_path(cfg, "samples-" + std::string(metric_name(metric)) + ".jsonl");
  const auto topics_out =
      coverage && !cfg.topics ? std::optional(output_path(cfg, "topics-coverage.jsonl")) : std::nullopt;

  return with_services(cfg, [&](Services& s) {
    CommandResult r;
    r.summary["command"] = "perturb";
    r.summary["metric"] = metric_name(metric);

    std::vector<CorpusItem> items;
    for (const auto& rec : io::read_jsonl(corpus_path)) items.push_back(CorpusItem{presentation_from_json(rec), {}, {}});

    if (coverage) {
      auto docs = load_documents(*cfg.documents);
      std::map<std::string, TopicModel> given;
      if (cfg.topics) {
        for (const auto& rec : io::read_jsonl(*cfg.topics)) {
          try {
            given.emplace(rec.at("id").get<std::string>(), topic_model_from_json(rec));
          } catch (const json::exception& e) {
            throw MalformedInputError(std::string("topic record: ") + e.what());
          }
        }
      }
      std::vector<json> built;
      std::vector<std::string> notes;
      for (std::size_t i = 0; i < items.size(); ++i) {
        auto& item = items[i];
        auto d = docs.find(item.presentation.id);
        if (d == docs.end()) continue;  // reported by expand_dataset
        item.document = d->second;
        if (cfg.topics) {
          if (auto t = given.find(item.presentation.id); t != given.end()) item.topics = t->second;
          continue;
        }
        try {
          auto tm = build_topic_model(flatten_summary(*item.document), item.presentation, *s.gateway,
                                      cfg.completion_model);
          for (auto& n : tm.notes) notes.push_back(std::move(n));
          item.topics = tm.model;
          json rec = topic_model_to_json(tm.model);
          rec["id"] = item.presentation.id;
          built.push_back(std::move(rec));
        } catch (const Error& e) {
          if (is_fatal(e)) throw;
          r.errors.push_back(item_error(i, item.presentation.id, e));
        }
      }
      if (topics_out) {
        io::JsonlWriter out(*topics_out, io::make_header("topics", cfg.seed));
        for (const auto& rec : built) out.write(rec);
        out.close();
        r.summary["outputs"].push_back(topics_out->string());
      }
      r.summary["topic_notes"] = notes;
    }

    auto expansion = expand_dataset(items, metric, cfg.seed, cfg.max_parallel);
    std::set<std::string> already;
    for (const auto& e : r.errors) already.insert(e.at("id").get<std::string>());
    for (const auto& e : expansion.errors) {
      if (already.count(e.presentation_id)) continue;  // topic build failed first
      r.errors.push_back(json{{"item", e.item_index},
                              {"id", e.presentation_id},
                              {"degree", e.degree},
                              {"error", "perturbation"},
                              {"message", e.message}});
    }
    io::JsonlWriter out(samples_out, io::make_header("samples", cfg.seed));
    for (const auto& sample : expansion.samples) out.write(sample_to_json(sample));
    out.close();
    r.summary["samples"] = expansion.samples.size();
    r.summary["outputs"].push_back(samples_out.string());
    if (!r.errors.empty()) r.exit_code = kExitPartial;
    return r;
  });
}

CommandResult cmd_score(const RunConfig& cfg, const std::string& scorer, Metric metric) {
  cfg.validate();
  static const std::set<std::string> kScorers = {"heuristic", "geval", "phi3eval", "remote"};
  if (!kScorers.count(scorer)) throw UsageError("unknown scorer '" + scorer + "'");
  if (scorer == "heuristic" && metric == Metric::Flow) throw UsageError("no heuristic defined for Flow");
  if (cfg.samples.empty()) throw UsageError("score needs a samples input");
  for (const auto& p : cfg.samples) require_file(p);
  const auto scores_out = output_path(cfg, "scores-" + scorer + "-" + std::string(metric_name(metric)) + ".jsonl");

  return with_services(cfg, [&](Services& s) {
    CommandResult r;
    r.summary["command"] = "score";
    r.summary["scorer"] = scorer;
    r.summary["metric"] = metric_name(metric);

    std::vector<LabeledSample> samples;
    std::size_t skipped = 0;
    for (const auto& rec : read_many(cfg.samples)) {
      auto sample = sample_from_json(rec);
      if (sample.metric != metric) {
        ++skipped;
        continue;
      }
      samples.push_back(std::move(sample));
    }
    if (scorer != "heuristic" && !s.has_backend && !samples.empty()) {
      throw UsageError("scorer '" + scorer + "' needs a completion endpoint or a replay cassette");
    }

    std::unique_ptr<EmbeddingProvider> emb;
    if (scorer == "heuristic") emb = make_embedder(cfg);
    PromptedScorerConfig pcfg;
    pcfg.model_id = scorer == "phi3eval" ? cfg.phi3_model : cfg.completion_model;
    pcfg.n_iterations = cfg.geval_iterations;
    pcfg.temperature = cfg.geval_temperature;

    std::vector<json> results;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& sample = samples[i];
      const auto id = sample.id();
      try {
        ScoreResult result;
        if (scorer == "heuristic") {
          double v = 0.0;
          switch (metric) {
            case Metric::Coverage:
              if (!sample.document) throw ContractError("coverage sample has no document");
              v = coverage_heuristic(*sample.document, sample.presentation, *emb);
              break;
            case Metric::Redundancy: v = redundancy_heuristic(sample.presentation, *emb); break;
            case Metric::TextImageAlignment: v = text_image_heuristic(sample.presentation, *emb); break;
            case Metric::Flow: throw UsageError("no heuristic defined for Flow");
          }
          result = ScoreResult::make(v, std::nullopt, "heuristic/" + emb->id());
        } else {
          std::optional<std::string> summary;
          if (requires_document(metric)) {
            if (!sample.document) throw ContractError("coverage sample has no document");
            summary = flatten_summary(*sample.document);
          }
          if (scorer == "remote") {
            auto explanation = prompted_explanation(sample.presentation, metric, *s.gateway, cfg.completion_model,
                                                    summary.value_or(std::string()));
            result = remote_score(sample.presentation, explanation, metric, *s.gateway, kRemoteScorerModel);
          } else {
            std::optional<std::string_view> sv;
            if (summary) sv = *summary;
            auto ps = geval_score(sample.presentation, metric, sv, pcfg, *s.gateway);
            result = ScoreResult::make(ps.value, std::nullopt, scorer + "/" + pcfg.model_id);
          }
        }
        results.push_back(score_to_json(id, metric, result));
      } catch (const Error& e) {
        if (is_fatal(e)) throw;
        r.errors.push_back(item_error(i, id, e));
      }
    }
    io::JsonlWriter out(scores_out, io::make_header("scores", cfg.seed));
    for (const auto& rec : results) out.write(rec);
    out.close();
    r.summary["scored"] = results.size();
    r.summary["skipped_other_metric"] = skipped;
    r.summary["outputs"].push_back(scores_out.string());
    if (!r.errors.empty()) r.exit_code = kExitPartial;
    return r;
  });
}

CommandResult cmd_evaluate(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.samples.empty()) throw UsageError("evaluate needs a samples input");
  if (cfg.scores.empty()) throw UsageError("evaluate needs a scores input");
  const auto report_out = output_path(cfg, "report.json");
  const auto table_out = output_path(cfg, "degree_table.tsv");

  std::vector<ScoredSample> rows;
  std::map<std::string, std::size_t> index;
  for (const auto& rec : read_many(cfg.samples)) {
    auto sample = sample_from_json(rec);
    const auto id = sample.id();
    if (index.count(id)) throw UsageError("duplicate sample id " + id, {{"id", id}});
    index.emplace(id, rows.size());
    rows.push_back(ScoredSample{id, sample.metric, sample.presentation.id, sample.degree, sample.score,
                                sample.explanation, std::nullopt, std::nullopt});
  }

  std::vector<std::string> orphans;
  std::vector<std::string> duplicates;
  for (const auto& rec : read_many(cfg.scores)) {
    std::string id;
    try {
      id = rec.at("id").get<std::string>();
      auto it = index.find(id);
      if (it == index.end() || metric_name(rows[it->second].metric) != rec.at("metric").get<std::string>()) {
        orphans.push_back(id);
        continue;
      }
      auto& row = rows[it->second];
      if (row.model_score) {
        duplicates.push_back(id);
        continue;
      }
      row.model_score = rec.at("value").get<double>();
      if (rec.contains("explanation")) row.model_explanation = rec.at("explanation").get<std::string>();
    } catch (const json::exception& e) {
      throw MalformedInputError(std::string("score record: ") + e.what());
    }
  }
  if (!orphans.empty()) {
    throw UsageError(std::to_string(orphans.size()) + " scores have no matching sample", {{"orphans", orphans}});
  }
  if (!duplicates.empty()) throw UsageError("samples scored more than once", {{"duplicates", duplicates}});

  const auto report = build_report(rows);
  json doc = report_to_json(report);
  doc["header"] = io::make_header("report", cfg.seed)["header"];
  io::write_new_file(report_out, doc.dump(2) + "\n");
  io::write_new_file(table_out, degree_table_tsv(report));

  CommandResult r;
  r.summary["command"] = "evaluate";
  r.summary["samples"] = rows.size();
  r.summary["outputs"] = {report_out.string(), table_out.string()};
  return r;
}

CommandResult cmd_filter(const RunConfig& cfg) {
  cfg.validate();
  const auto& corpus_path = require_input(cfg.corpus, "corpus");
  const auto kept_out = output_path(cfg, "kept.jsonl");
  const auto report_out = output_path(cfg, "filter_report.json");

  return with_services(cfg, [&](Services& s) {
    CommandResult r;
    r.summary["command"] = "filter";
    std::vector<Presentation> corpus;
    const auto records = io::read_jsonl(corpus_path);
    json malformed = json::array();
    for (std::size_t i = 0; i < records.size(); ++i) {
      try {
        corpus.push_back(presentation_from_json(records[i]));
      } catch (const Error& e) {
        auto err = item_error(i, records[i].value("id", std::string()), e);
        malformed.push_back(err);
        r.errors.push_back(std::move(err));
      }
    }
    FilterOptions opts;
    opts.overlap_threshold = cfg.overlap_threshold;
    opts.aspect_tolerance = cfg.aspect_tolerance;
    if (s.has_backend) {
      opts.gateway = s.gateway.get();
      opts.model_id = cfg.completion_model;
      opts.model_intro_conclusion = cfg.model_intro_conclusion;
    }
    auto result = filter_corpus(corpus, opts);

    io::JsonlWriter out(kept_out, io::make_header("corpus", cfg.seed));
    for (const auto& p : result.kept) out.write(presentation_to_json(p));
    out.close();
    json report = filter_report_to_json(result.report);
    report["malformed"] = malformed;
    report["header"] = io::make_header("filter_report", cfg.seed)["header"];
    io::write_new_file(report_out, report.dump(2) + "\n");

    r.summary["kept"] = result.kept.size();
    r.summary["total"] = records.size();
    r.summary["outputs"] = {kept_out.string(), report_out.string()};
    if (!r.errors.empty()) r.exit_code = kExitPartial;
    return r;
  });
}

}  // namespace deckeval
