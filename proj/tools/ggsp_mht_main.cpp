// Command-line runner: config-driven Monte Carlo experiments over the
// graph-time multiple-testing pipeline.
#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>

#include "ggsp/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "ggsp-mht: multiple hypothesis testing with FDR control over a joint "
      "graph-time domain"};

  std::string config_path;
  std::string output_dir;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool validate_only = false;
  bool quiet = false;
  bool emit_rejections = false;

  app.add_option("--config", config_path, "Path to the JSON run configuration")->required();
  auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
  auto* out_opt = app.add_option("--output-dir", output_dir, "Override the output directory");
  app.add_option("--jobs", jobs, "Repetition-level concurrency")->check(CLI::PositiveNumber);
  app.add_flag("--validate-only", validate_only, "Only validate the config, no side effects");
  app.add_flag("--emit-rejections", emit_rejections,
               "Write per-repetition rejection maps under rejections/");
  app.add_flag("--quiet", quiet, "Suppress the result summary");

  CLI11_PARSE(app, argc, argv);

  try {
    const nlohmann::json doc = ggsp::load_config_document(config_path);
    const std::vector<std::string> issues = ggsp::validate_config_json(doc);
    if (validate_only) {
      for (const std::string& issue : issues) std::cout << issue << "\n";
      if (issues.empty() && !quiet) std::cout << "config ok\n";
      return issues.empty() ? 0 : 1;
    }
    if (!issues.empty()) {
      for (const std::string& issue : issues) std::cerr << "config error: " << issue << "\n";
      return 1;
    }

    ggsp::RunConfig cfg = ggsp::config_from_json(doc);
    if (seed_opt->count() > 0) cfg.seed = seed;
    if (out_opt->count() > 0) cfg.output_dir = output_dir;

    ggsp::RunFlags flags;
    flags.jobs = jobs;
    flags.emit_rejections = emit_rejections;
    flags.quiet = quiet;

    const ggsp::RunStatus status = ggsp::run(cfg, flags);
    if (!quiet) {
      std::cout << "wrote " << cfg.output_dir << "/results.csv\n";
      if (status == ggsp::RunStatus::partial_failure)
        std::cout << "warning: some repetitions failed (see metadata.json)\n";
      if (status == ggsp::RunStatus::all_failed)
        std::cout << "error: every repetition failed (see metadata.json)\n";
    }
    return static_cast<int>(status);
  } catch (const ggsp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const ggsp::IOError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
