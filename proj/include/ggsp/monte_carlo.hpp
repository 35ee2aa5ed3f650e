// Repetition harness: generate -> fit -> detect -> evaluate, with
// deterministic per-repetition random streams and order-independent
// aggregation.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ggsp/detector.hpp"
#include "ggsp/estimator.hpp"
#include "ggsp/scenario.hpp"

namespace ggsp {

enum class Method { mht_ggsp, oracle, bh };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::mht_ggsp: return "mht-ggsp";
    case Method::oracle: return "oracle";
    case Method::bh: return "bh";
  }
  return "?";
}

inline Method method_from_name(const std::string& name) {
  if (name == "mht-ggsp") return Method::mht_ggsp;
  if (name == "oracle") return Method::oracle;
  if (name == "bh") return Method::bh;
  throw ConfigError("unknown method '" + name + "' (expected mht-ggsp, oracle or bh)");
}

struct ScenarioConfig {
  enum class Kind { model_matched, transmitter };
  Kind kind = Kind::model_matched;
  ModelMatchedConfig model_matched;
  TransmitterConfig transmitter;

  void validate() const {
    if (kind == Kind::model_matched)
      model_matched.validate();
    else
      transmitter.validate();
  }
  int n_sensors() const {
    return kind == Kind::model_matched ? model_matched.n_sensors : transmitter.n_sensors;
  }
  bool grid_sampled() const {
    return kind == Kind::transmitter ||
           model_matched.sampling.kind == SamplingDesign::Kind::grid;
  }
};

struct FitConfig {
  enum class Mode { fixed, bic };
  Mode mode = Mode::bic;
  int K1 = 2;  // fixed mode
  int K2 = 3;
  std::vector<std::pair<int, int>> grid;  // bic mode; empty -> default_grid()
  FitOptions options;

  // K2 odd so each frequency's sin/cos pair stays together after the constant.
  static std::vector<std::pair<int, int>> default_grid() {
    std::vector<std::pair<int, int>> g;
    for (int k1 : {1, 2, 3, 4})
      for (int k2 : {1, 3, 5, 7}) g.emplace_back(k1, k2);
    return g;
  }
};

/// Detection map row for one sample (Fig.-2-style export).
struct MapRow {
  int vertex = 0;
  int time_index = -1;
  double p = 0.0;
  double lfdr_value = 0.0;  // NaN for methods without an lfdr
  std::uint8_t rejected = 0;
  std::uint8_t theta = 0;
};

struct RepResult {
  int rep = 0;
  bool failed = false;
  std::string error;
  double measured_null_proportion = 0.0;
  std::optional<FitResult> fit;
  std::vector<BicCandidate> bic_table;
  std::vector<EvalRecord> evals;  // [method_index * n_alphas + alpha_index]
  std::vector<MapRow> map;        // first method at first alpha, when requested
  std::optional<GeneratedData> data;  // retained when maps are requested
};

struct AggregateRow {
  Method method = Method::bh;
  double alpha = 0.0;
  double fdr = 0.0;
  double power = 0.0;
  double se_fdr = 0.0;
  double se_power = 0.0;
};

struct MonteCarloResult {
  std::vector<AggregateRow> table;  // method-major, alpha-minor, config order
  std::vector<RepResult> reps;
  int n_failed = 0;
};

namespace detail {

inline Eigen::VectorXd oracle_zeta(const ScenarioConfig& scenario, const GeneratedData& data) {
  if (scenario.kind == ScenarioConfig::Kind::model_matched) return data.gamma_true;
  // The transmitter generator is not in the sigmoid-beta family and has no
  // true Xi; the exact conditional null probability given its latent fields
  // is the indicator 1{theta=0}. Plug its (clamped) log-odds into the family.
  const double z = logit(1.0 - 1e-6);
  Eigen::VectorXd zeta(static_cast<Eigen::Index>(data.samples.size()));
  for (std::size_t m = 0; m < data.samples.size(); ++m)
    zeta(static_cast<Eigen::Index>(m)) = data.samples.truth[m] == 0 ? z : -z;
  return zeta;
}

inline GeneratedData generate(const ScenarioConfig& scenario, std::uint64_t rep_seed) {
  if (scenario.kind == ScenarioConfig::Kind::model_matched) {
    ModelMatchedConfig cfg = scenario.model_matched;
    cfg.seed = rep_seed;
    return gen_model_matched(cfg);
  }
  TransmitterConfig cfg = scenario.transmitter;
  cfg.seed = rep_seed;
  return gen_transmitter_scenario(cfg);
}

}  // namespace detail

/**
 * Run `reps` independent repetitions of generate/fit/detect/evaluate for
 * every (method, alpha) pair and aggregate mean FDP and TPP with standard
 * errors. Repetition r uses the random stream derived from (seed, r), so
 * results are identical for any `jobs` value. Failures are recorded per
 * repetition and skipped in the aggregate.
 */
inline MonteCarloResult monte_carlo(const ScenarioConfig& scenario, const FitConfig& fit_cfg,
                                    const std::vector<Method>& methods,
                                    const std::vector<double>& alphas, int reps,
                                    std::uint64_t seed, int jobs = 1, bool emit_maps = false) {
  scenario.validate();
  if (methods.empty()) throw ConfigError("monte_carlo: methods must be nonempty");
  if (alphas.empty()) throw ConfigError("monte_carlo: alphas must be nonempty");
  for (double a : alphas)
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("monte_carlo: alpha outside (0,1)");
  if (reps < 1) throw ConfigError("monte_carlo: reps must be >= 1");

  const std::size_t n_alphas = alphas.size();
  const bool need_fit =
      std::find(methods.begin(), methods.end(), Method::mht_ggsp) != methods.end();
  const MixtureFamily fam = MixtureFamily::sigmoid_beta();
  const NullDensity null_density = NullDensity::uniform();
  const Rng seed_stream(seed);

  MonteCarloResult result;
  result.reps.resize(static_cast<std::size_t>(reps));

  const auto run_rep = [&](int r) {
    RepResult& out = result.reps[static_cast<std::size_t>(r)];
    out.rep = r;
    try {
      const std::uint64_t rep_seed = seed_stream.derive(static_cast<std::uint64_t>(r)).seed();
      GeneratedData data = detail::generate(scenario, rep_seed);
      out.measured_null_proportion = data.measured_null_proportion;

      std::optional<FitResult> fit;
      if (need_fit) {
        auto basis = std::make_shared<SpectralBasis>(eigendecompose(laplacian(data.graph)));
        if (fit_cfg.mode == FitConfig::Mode::fixed) {
          fit = fit_mle(data.samples, basis, fit_cfg.K1, fit_cfg.K2, fit_cfg.options);
        } else {
          auto grid = fit_cfg.grid.empty() ? FitConfig::default_grid() : fit_cfg.grid;
          BicSelection sel = bic_select(data.samples, basis, grid, fit_cfg.options);
          out.bic_table = std::move(sel.table);
          fit = std::move(sel.best);
        }
      }

      std::optional<Eigen::VectorXd> plugin_lfdrs;
      std::optional<Eigen::VectorXd> oracle_lfdrs;
      std::vector<double> bh_pvals;
      for (Method method : methods) {
        if (method == Method::mht_ggsp && !plugin_lfdrs)
          plugin_lfdrs = lfdr_vector(data.samples, fit->signal, fam, null_density);
        if (method == Method::oracle && !oracle_lfdrs)
          oracle_lfdrs =
              lfdr_vector(data.samples, detail::oracle_zeta(scenario, data), fam, null_density);
        if (method == Method::bh && bh_pvals.empty()) bh_pvals = data.samples.pvalue;
      }

      out.evals.resize(methods.size() * n_alphas);
      for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        for (std::size_t ai = 0; ai < n_alphas; ++ai) {
          const double alpha = alphas[ai];
          std::vector<std::uint8_t> mask;
          Eigen::VectorXd lfdrs;
          switch (methods[mi]) {
            case Method::mht_ggsp:
              lfdrs = *plugin_lfdrs;
              mask = step_up_threshold(lfdrs, alpha).second;
              break;
            case Method::oracle:
              lfdrs = *oracle_lfdrs;
              mask = step_up_threshold(lfdrs, alpha).second;
              break;
            case Method::bh:
              mask = bh_procedure(bh_pvals, alpha);
              break;
          }
          out.evals[mi * n_alphas + ai] = evaluate(mask, data.samples.truth);

          if (emit_maps && mi == 0 && ai == 0) {
            const int n_sensors = scenario.n_sensors();
            out.map.resize(data.samples.size());
            for (std::size_t m = 0; m < data.samples.size(); ++m) {
              MapRow& row = out.map[m];
              row.vertex = data.samples.vertex[m];
              row.time_index =
                  scenario.grid_sampled() ? static_cast<int>(m) / n_sensors : -1;
              row.p = data.samples.pvalue[m];
              row.lfdr_value = lfdrs.size() > 0
                                   ? lfdrs(static_cast<Eigen::Index>(m))
                                   : std::numeric_limits<double>::quiet_NaN();
              row.rejected = mask[m];
              row.theta = data.samples.truth[m];
            }
          }
        }
      }
      out.fit = std::move(fit);
      if (emit_maps) out.data = std::move(data);
    } catch (const std::exception& e) {
      out.failed = true;
      out.error = "rep " + std::to_string(r) + ": " + e.what();
    }
  };

  const int workers = std::max(1, std::min(jobs, reps));
  if (workers == 1) {
    for (int r = 0; r < reps; ++r) run_rep(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int r = next.fetch_add(1); r < reps; r = next.fetch_add(1)) run_rep(r);
      });
    for (auto& th : pool) th.join();
  }

  // Aggregate in fixed (method, alpha, rep) order so output is independent
  // of scheduling.
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    for (std::size_t ai = 0; ai < n_alphas; ++ai) {
      AggregateRow row;
      row.method = methods[mi];
      row.alpha = alphas[ai];
      double sum_fdp = 0.0, sum_tpp = 0.0;
      int n_ok = 0;
      for (const RepResult& rep : result.reps) {
        if (rep.failed) continue;
        const EvalRecord& rec = rep.evals[mi * n_alphas + ai];
        sum_fdp += rec.fdp;
        sum_tpp += rec.tpp;
        ++n_ok;
      }
      if (n_ok > 0) {
        row.fdr = sum_fdp / n_ok;
        row.power = sum_tpp / n_ok;
        double ss_fdp = 0.0, ss_tpp = 0.0;
        for (const RepResult& rep : result.reps) {
          if (rep.failed) continue;
          const EvalRecord& rec = rep.evals[mi * n_alphas + ai];
          ss_fdp += (rec.fdp - row.fdr) * (rec.fdp - row.fdr);
          ss_tpp += (rec.tpp - row.power) * (rec.tpp - row.power);
        }
        if (n_ok > 1) {
          row.se_fdr = std::sqrt(ss_fdp / (n_ok - 1) / n_ok);
          row.se_power = std::sqrt(ss_tpp / (n_ok - 1) / n_ok);
        }
      } else {
        row.fdr = row.power = row.se_fdr = row.se_power =
            std::numeric_limits<double>::quiet_NaN();
      }
      result.table.push_back(row);
    }
  }
  result.n_failed = static_cast<int>(
      std::count_if(result.reps.begin(), result.reps.end(),
                    [](const RepResult& r) { return r.failed; }));
  return result;
}

}  // namespace ggsp
