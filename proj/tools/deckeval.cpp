// deckeval command line: ingest, perturb, score, evaluate, filter.
#include <iostream>

#include "CLI11.hpp"
#include "deckeval/app.hpp"
#include "deckeval/errors.hpp"

using namespace deckeval;

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string cassette;
  std::string cassette_mode;
  bool replay = false;
  std::string out_dir;
  std::optional<int> geval_iterations;
  std::optional<int> workers;

  std::string decks, sections, corpus, documents, topics;
  std::vector<std::string> samples, scores;
  std::string metric;
  std::string scorer;
};

RunConfig build_config(const Flags& f) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (!f.cassette.empty()) cfg.cassette_path = f.cassette;
  if (!f.cassette_mode.empty()) cfg.cassette_mode = parse_cassette_mode(f.cassette_mode);
  if (f.replay) cfg.cassette_mode = CassetteMode::Replay;
  if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
  if (f.geval_iterations) cfg.geval_iterations = *f.geval_iterations;
  if (f.workers) cfg.max_parallel = *f.workers;
  if (!f.decks.empty()) cfg.decks = f.decks;
  if (!f.sections.empty()) cfg.sections = f.sections;
  if (!f.corpus.empty()) cfg.corpus = f.corpus;
  if (!f.documents.empty()) cfg.documents = f.documents;
  if (!f.topics.empty()) cfg.topics = f.topics;
  if (!f.samples.empty()) cfg.samples.assign(f.samples.begin(), f.samples.end());
  if (!f.scores.empty()) cfg.scores.assign(f.scores.begin(), f.scores.end());
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deck evaluation toolkit"};
  app.require_subcommand(1);
  Flags f;

  app.add_option("--config", f.config, "JSON run configuration");
  app.add_option("--seed", f.seed, "RNG seed (overrides config)");
  app.add_option("--cassette", f.cassette, "Cassette file for recorded model traffic");
  app.add_option("--cassette-mode", f.cassette_mode, "record | replay | passthrough")
      ->check(CLI::IsMember({"record", "replay", "passthrough"}));
  app.add_flag("--replay", f.replay, "Shorthand for --cassette-mode replay");
  app.add_option("--out-dir", f.out_dir, "Directory for this run's outputs");
  app.add_option("--geval-iterations", f.geval_iterations, "Sampled scoring requests per deck");
  app.add_option("--workers", f.workers, "Items processed concurrently");

  auto* ingest = app.add_subcommand("ingest", "Build the corpus and summarized documents");
  ingest->add_option("--decks", f.decks, "Deck records (slide text or extraction responses)");
  ingest->add_option("--sections", f.sections, "Document section records");

  auto* perturb = app.add_subcommand("perturb", "Expand a corpus into labeled samples for one metric");
  perturb->add_option("--metric", f.metric, "coverage | redundancy | text_image_alignment | flow")->required();
  perturb->add_option("--corpus", f.corpus, "Corpus file");
  perturb->add_option("--documents", f.documents, "Summarized documents (coverage)");
  perturb->add_option("--topics", f.topics, "Precomputed topic models (coverage)");

  auto* score = app.add_subcommand("score", "Score labeled samples");
  score->add_option("--scorer", f.scorer, "heuristic | geval | phi3eval | remote")->required();
  score->add_option("--metric", f.metric, "Metric to score")->required();
  score->add_option("--samples", f.samples, "Labeled-sample files");

  auto* evaluate = app.add_subcommand("evaluate", "Correlate scores with pseudo ground truth");
  evaluate->add_option("--samples", f.samples, "Labeled-sample files");
  evaluate->add_option("--scores", f.scores, "Score files");

  auto* filter = app.add_subcommand("filter", "Apply corpus quality rules");
  filter->add_option("--corpus", f.corpus, "Corpus file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  auto result = run_guarded([&]() -> CommandResult {
    const RunConfig cfg = build_config(f);
    if (*ingest) return cmd_ingest(cfg);
    if (*perturb) return cmd_perturb(cfg, parse_metric(f.metric));
    if (*score) return cmd_score(cfg, f.scorer, parse_metric(f.metric));
    if (*evaluate) return cmd_evaluate(cfg);
    return cmd_filter(cfg);
  });

  if (!result.summary.empty()) std::cout << result.summary.dump() << "\n";
  for (const auto& err : result.errors) std::cerr << err.dump() << "\n";
  return result.exit_code;
}
