// Re-records tests/fixtures/pipeline/cassette.jsonl against the fake model.
// Usage: record_fixture [fixture-dir]
#include <iostream>

#include "pipeline.hpp"

using namespace deckeval;

int main(int argc, char** argv) {
  const fs::path dir = argc > 1 ? fs::path(argv[1]) : testsupport::pipeline_fixture_dir();
  try {
    RunConfig cfg = load_config(dir / "config.json");
    fs::remove(*cfg.cassette_path);
    cfg.cassette_mode = CassetteMode::Record;
    cfg.transport_override = std::make_shared<testsupport::ScriptedTransport>(testsupport::fake_model);
    const auto work = testsupport::temp_dir("record");
    std::cout << testsupport::run_fixture_pipeline(cfg, work);
    fs::remove_all(work);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
