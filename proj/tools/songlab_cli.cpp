// songlab: batch scenario runner. Links only the C API.
//
// Exit codes: 0 expectations met, 1 expectations violated, 2 config/IO error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "songlab/songlab.h"

namespace {

constexpr int kExitConfig = 2;

struct ConfigDeleter {
  void operator()(songlab_config* c) const { songlab_config_destroy(c); }
};
struct ReportDeleter {
  void operator()(songlab_report* r) const { songlab_report_destroy(r); }
};

int report_error(songlab_status s) {
  std::cerr << "songlab: " << songlab_status_string(s);
  if (const char* msg = songlab_last_error(); msg != nullptr && *msg != '\0') std::cerr << ": " << msg;
  std::cerr << '\n';
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smart-card password protocol lab: honest runs and attack scenarios"};

  std::string config_path;
  std::optional<std::string> seed, attack, dictionary, hash_variant, epsilon, sessions,
      prime_bits, delta_t, victim, expect, transcript_log;
  std::string report_path;
  bool no_header = false;

  app.add_option("--config", config_path, "Scenario config (JSON)");
  app.add_option("--seed", seed, "PRNG seed (default from $SONGLAB_SEED, else 1)");
  app.add_option("--attack", attack, "none | guess | clone | pfs | forge");
  app.add_option("--dictionary", dictionary, "Dictionary file, one candidate per line");
  app.add_option("--hash-variant", hash_variant, "raw | finalized");
  app.add_option("--epsilon", epsilon, "Timestamp shift for the forge attack (seconds)");
  app.add_option("--sessions", sessions, "Number of honest sessions");
  app.add_option("--prime-bits", prime_bits, "Bit length of the safe prime p");
  app.add_option("--delta-t", delta_t, "Freshness window in seconds");
  app.add_option("--victim", victim, "Target user id (default: first user)");
  app.add_option("--expect", expect, "auto | success | failure for the attack outcome");
  app.add_option("--transcript-log", transcript_log,
                 "Write the session log here; attacks read it back from disk");
  app.add_option("--report", report_path, "Write the report to a file instead of stdout");
  app.add_flag("--no-header", no_header, "Omit the timestamped header line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  songlab_config* raw_cfg = nullptr;
  songlab_status s = config_path.empty() ? songlab_config_create(&raw_cfg)
                                         : songlab_config_load(config_path.c_str(), &raw_cfg);
  if (s != SONGLAB_OK) return report_error(s);
  std::unique_ptr<songlab_config, ConfigDeleter> cfg(raw_cfg);

  const std::vector<std::pair<const char*, const std::optional<std::string>*>> overrides = {
      {"seed", &seed},           {"attack", &attack},         {"dictionary", &dictionary},
      {"hash-variant", &hash_variant}, {"epsilon", &epsilon}, {"sessions", &sessions},
      {"prime-bits", &prime_bits}, {"delta-t", &delta_t},     {"victim", &victim},
      {"expect", &expect},       {"transcript-log", &transcript_log},
  };
  for (const auto& [key, value] : overrides) {
    if (!value->has_value()) continue;
    if (s = songlab_config_set(cfg.get(), key, (*value)->c_str()); s != SONGLAB_OK) {
      return report_error(s);
    }
  }

  songlab_report* raw_report = nullptr;
  if (s = songlab_scenario_run(cfg.get(), no_header ? 0 : 1, &raw_report); s != SONGLAB_OK) {
    return report_error(s);
  }
  std::unique_ptr<songlab_report, ReportDeleter> report(raw_report);

  if (report_path.empty()) {
    std::cout << songlab_report_text(report.get());
  } else {
    std::ofstream out(report_path, std::ios::binary | std::ios::trunc);
    out << songlab_report_text(report.get());
    if (!out) {
      std::cerr << "songlab: cannot write report to " << report_path << '\n';
      return kExitConfig;
    }
  }
  return songlab_report_exit_code(report.get());
}
