// Batch experiment runner: executes a RunConfig and writes results.csv,
// results_per_rep.csv, fit.json, metadata.json and optional per-repetition
// rejection maps. All output is deterministic for a fixed config and seed.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ggsp/monte_carlo.hpp"
#include "ggsp/run_config.hpp"
#include "ggsp/version.hpp"

namespace ggsp {

struct RunFlags {
  int jobs = 1;
  bool emit_rejections = false;
  bool quiet = false;
};

namespace detail {

inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot write '" + path.string() + "'");
  out << content;
}

}  // namespace detail

/// Exit status of a run; mirrors the CLI exit codes.
enum class RunStatus : int { ok = 0, config_error = 1, all_failed = 2, partial_failure = 3 };

/**
 * Execute the configured Monte Carlo experiment and write the output files
 * under `cfg.output_dir`. Per-repetition failures are recorded in
 * metadata.json; the run keeps going unless every repetition fails.
 */
inline RunStatus run(const RunConfig& cfg, const RunFlags& flags = {}) {
  const std::filesystem::path out_dir(cfg.output_dir);
  std::filesystem::create_directories(out_dir);

  const MonteCarloResult mc =
      monte_carlo(cfg.scenario, cfg.fit, cfg.methods, cfg.alphas, cfg.reps, cfg.seed,
                  flags.jobs, flags.emit_rejections);

  const std::size_t n_alphas = cfg.alphas.size();

  // results.csv: aggregate rows only, one per (method, alpha).
  {
    std::string csv = "method,alpha,rep,fdr,power,se_fdr,se_power\n";
    for (const AggregateRow& row : mc.table) {
      csv += method_name(row.method);
      csv += ',';
      csv += detail::fmt_double(row.alpha);
      csv += ",,";
      csv += detail::fmt_double(row.fdr);
      csv += ',';
      csv += detail::fmt_double(row.power);
      csv += ',';
      csv += detail::fmt_double(row.se_fdr);
      csv += ',';
      csv += detail::fmt_double(row.se_power);
      csv += '\n';
    }
    detail::write_file(out_dir / "results.csv", csv);
  }

  // results_per_rep.csv: one row per (method, alpha, repetition).
  {
    std::string csv = "method,alpha,rep,fdr,power,se_fdr,se_power\n";
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
      for (std::size_t ai = 0; ai < n_alphas; ++ai) {
        for (const RepResult& rep : mc.reps) {
          if (rep.failed) continue;
          const EvalRecord& rec = rep.evals[mi * n_alphas + ai];
          csv += method_name(cfg.methods[mi]);
          csv += ',';
          csv += detail::fmt_double(cfg.alphas[ai]);
          csv += ',';
          csv += std::to_string(rep.rep);
          csv += ',';
          csv += detail::fmt_double(rec.fdp);
          csv += ',';
          csv += detail::fmt_double(rec.tpp);
          csv += ",,\n";
        }
      }
    }
    detail::write_file(out_dir / "results_per_rep.csv", csv);
  }

  // fit.json: per-repetition fit results and BIC tables (when fitted).
  {
    nlohmann::json reps = nlohmann::json::array();
    for (const RepResult& rep : mc.reps) {
      nlohmann::json entry{{"rep", rep.rep}, {"failed", rep.failed}};
      if (rep.failed) entry["error"] = rep.error;
      if (rep.fit) entry["fit"] = fit_result_to_json(*rep.fit);
      if (!rep.bic_table.empty()) entry["bic_table"] = bic_table_to_json(rep.bic_table);
      reps.push_back(std::move(entry));
    }
    detail::write_file(out_dir / "fit.json", nlohmann::json{{"reps", reps}}.dump(2) + "\n");
  }

  if (flags.emit_rejections) {
    const std::filesystem::path rej_dir = out_dir / "rejections";
    std::filesystem::create_directories(rej_dir);
    for (const RepResult& rep : mc.reps) {
      if (rep.failed || rep.map.empty()) continue;
      std::string csv = "vertex,time_index,p,lfdr,rejected,theta\n";
      for (const MapRow& row : rep.map) {
        csv += std::to_string(row.vertex);
        csv += ',';
        csv += std::to_string(row.time_index);
        csv += ',';
        csv += detail::fmt_double(row.p);
        csv += ',';
        csv += detail::fmt_double(row.lfdr_value);
        csv += ',';
        csv += std::to_string(static_cast<int>(row.rejected));
        csv += ',';
        csv += std::to_string(static_cast<int>(row.theta));
        csv += '\n';
      }
      detail::write_file(rej_dir / ("rep_" + std::to_string(rep.rep) + ".csv"), csv);
    }

    const std::filesystem::path samples_dir = out_dir / "samples";
    std::filesystem::create_directories(samples_dir);
    for (const RepResult& rep : mc.reps) {
      if (rep.failed || !rep.data) continue;
      const std::string stem = "rep_" + std::to_string(rep.rep);
      std::ofstream csv(samples_dir / (stem + ".csv"), std::ios::binary);
      if (!csv) throw IOError("cannot write sample export for rep " + std::to_string(rep.rep));
      write_samples_csv(*rep.data, csv);
      detail::write_file(samples_dir / (stem + "_meta.json"),
                         generated_metadata_json(*rep.data, cfg.echo).dump(2) + "\n");
    }
  }

  // metadata.json: config echo, effective settings, measured null
  // proportion, failures.
  {
    double null_prop_sum = 0.0;
    int n_ok = 0;
    nlohmann::json failures = nlohmann::json::array();
    for (const RepResult& rep : mc.reps) {
      if (rep.failed) {
        failures.push_back({{"rep", rep.rep}, {"error", rep.error}});
      } else {
        null_prop_sum += rep.measured_null_proportion;
        ++n_ok;
      }
    }
    nlohmann::json meta{
        {"config", cfg.echo},
        {"seed", cfg.seed},
        {"version", version_string},
        {"reps", cfg.reps},
        {"n_failed_reps", mc.n_failed},
        {"failures", failures},
        {"measured_null_proportion", n_ok > 0 ? null_prop_sum / n_ok : 0.0},
    };
    detail::write_file(out_dir / "metadata.json", meta.dump(2) + "\n");
  }

  if (mc.n_failed == cfg.reps) return RunStatus::all_failed;
  if (mc.n_failed > 0) return RunStatus::partial_failure;
  return RunStatus::ok;
}

}  // namespace ggsp
