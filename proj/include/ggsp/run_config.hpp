// Experiment configuration: JSON schema, parsing, and validation with
// field-path diagnostics.
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "ggsp/monte_carlo.hpp"

namespace ggsp {

struct RunConfig {
  ScenarioConfig scenario;
  FitConfig fit;
  std::vector<Method> methods;
  std::vector<double> alphas;
  int reps = 1;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  nlohmann::json echo;  // parsed document, re-emitted into metadata.json
};

namespace detail {

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

inline void require_object(const nlohmann::json& j, const std::string& path,
                           std::vector<std::string>& issues) {
  if (!j.is_object()) issues.push_back(path + ": expected an object");
}

}  // namespace detail

/**
 * Validate a parsed config document. Returns every violation found, each
 * prefixed with the offending field path; empty means valid.
 */
inline std::vector<std::string> validate_config_json(const nlohmann::json& doc) {
  std::vector<std::string> issues;
  if (!doc.is_object()) {
    issues.push_back(": top-level document must be an object");
    return issues;
  }

  int n_sensors = 0;

  if (!doc.contains("scenario")) {
    issues.push_back("scenario: required section missing");
  } else {
    const auto& sc = doc.at("scenario");
    detail::require_object(sc, "scenario", issues);
    if (sc.is_object()) {
      const std::string type = detail::get_or<std::string>(sc, "type", "");
      if (type != "model-matched" && type != "transmitter")
        issues.push_back("scenario.type: must be 'model-matched' or 'transmitter'");
      n_sensors = detail::get_or<int>(sc, "n_sensors", type == "transmitter" ? 300 : 100);
      if (n_sensors < 2) issues.push_back("scenario.n_sensors: must be >= 2");
      if (detail::get_or<int>(sc, "knn_k", 10) < 1)
        issues.push_back("scenario.knn_k: must be >= 1");
      if (type == "model-matched") {
        const int K1 = detail::get_or<int>(sc, "K1", 2);
        const int K2 = detail::get_or<int>(sc, "K2", 3);
        if (K1 < 1 || K2 < 1) issues.push_back("scenario.K1/K2: must be >= 1");
        if (K1 > n_sensors) issues.push_back("scenario.K1: exceeds n_sensors");
        if (sc.contains("xi_true")) {
          const auto& xi = sc.at("xi_true");
          const double bound = detail::get_or<double>(sc, "box_bound", 10.0);
          if (!xi.is_array() || static_cast<int>(xi.size()) != K1) {
            issues.push_back("scenario.xi_true: expected K1 rows");
          } else {
            for (int r = 0; r < K1; ++r) {
              if (!xi.at(r).is_array() || static_cast<int>(xi.at(r).size()) != K2) {
                issues.push_back("scenario.xi_true[" + std::to_string(r) +
                                 "]: expected K2 entries");
              } else {
                for (int c = 0; c < K2; ++c)
                  if (std::abs(xi.at(r).at(c).get<double>()) > bound)
                    issues.push_back("scenario.xi_true[" + std::to_string(r) + "][" +
                                     std::to_string(c) + "]: outside the box bound");
              }
            }
          }
        }
        if (sc.contains("sampling")) {
          const auto& sm = sc.at("sampling");
          const std::string skind = detail::get_or<std::string>(sm, "type", "grid");
          if (skind != "grid" && skind != "iid")
            issues.push_back("scenario.sampling.type: must be 'grid' or 'iid'");
          if (skind == "grid" && detail::get_or<int>(sm, "T", 9) < 1)
            issues.push_back("scenario.sampling.T: must be >= 1");
          if (skind == "iid" && detail::get_or<int>(sm, "M", 1000) < 1)
            issues.push_back("scenario.sampling.M: must be >= 1");
        }
      } else if (type == "transmitter") {
        const int grid_side = detail::get_or<int>(sc, "grid_side", 100);
        if (grid_side < 2) issues.push_back("scenario.grid_side: must be >= 2");
        if (n_sensors > grid_side * grid_side)
          issues.push_back("scenario.n_sensors: exceeds grid_side^2");
        if (detail::get_or<int>(sc, "n_transmitters", 2) < 1)
          issues.push_back("scenario.n_transmitters: must be >= 1");
        if (detail::get_or<int>(sc, "T", 9) < 1) issues.push_back("scenario.T: must be >= 1");
        if (detail::get_or<double>(sc, "x0", 3e6) < 0.0)
          issues.push_back("scenario.x0: must be >= 0");
        for (const char* key : {"wavelength", "gp_variance", "gp_length_scale", "noise_var", "tau0"})
          if (sc.contains(key) && !(sc.at(key).is_number() && sc.at(key).get<double>() > 0.0))
            issues.push_back(std::string("scenario.") + key + ": must be a positive number");
        if (detail::get_or<double>(sc, "walk_step", 5.0) < 0.0)
          issues.push_back("scenario.walk_step: must be >= 0");
      }
    }
  }

  if (doc.contains("fit")) {
    const auto& ft = doc.at("fit");
    detail::require_object(ft, "fit", issues);
    if (ft.is_object()) {
      const std::string mode = detail::get_or<std::string>(ft, "mode", "bic");
      if (mode != "bic" && mode != "fixed")
        issues.push_back("fit.mode: must be 'bic' or 'fixed'");
      if (mode == "fixed") {
        const int K1 = detail::get_or<int>(ft, "K1", 2);
        if (K1 < 1) issues.push_back("fit.K1: must be >= 1");
        if (n_sensors > 0 && K1 > n_sensors) issues.push_back("fit.K1: exceeds n_sensors");
        if (detail::get_or<int>(ft, "K2", 3) < 1) issues.push_back("fit.K2: must be >= 1");
      }
      if (ft.contains("grid")) {
        const auto& grid = ft.at("grid");
        if (!grid.is_array() || grid.empty())
          issues.push_back("fit.grid: must be a nonempty array of [K1,K2] pairs");
        else
          for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto& cell = grid.at(i);
            if (!cell.is_array() || cell.size() != 2 || cell.at(0).get<int>() < 1 ||
                cell.at(1).get<int>() < 1)
              issues.push_back("fit.grid[" + std::to_string(i) + "]: expected [K1>=1,K2>=1]");
            else if (n_sensors > 0 && cell.at(0).get<int>() > n_sensors)
              issues.push_back("fit.grid[" + std::to_string(i) + "]: K1 exceeds n_sensors");
          }
      }
      if (detail::get_or<double>(ft, "box_bound", 10.0) <= 0.0)
        issues.push_back("fit.box_bound: must be positive");
      if (detail::get_or<double>(ft, "tol", 1e-6) <= 0.0)
        issues.push_back("fit.tol: must be positive");
      if (detail::get_or<int>(ft, "max_iters", 5000) < 1)
        issues.push_back("fit.max_iters: must be >= 1");
    }
  }

  if (!doc.contains("detect")) {
    issues.push_back("detect: required section missing");
  } else {
    const auto& dt = doc.at("detect");
    detail::require_object(dt, "detect", issues);
    if (dt.is_object()) {
      if (!dt.contains("methods") || !dt.at("methods").is_array() || dt.at("methods").empty()) {
        issues.push_back("detect.methods: must be a nonempty array");
      } else {
        for (std::size_t i = 0; i < dt.at("methods").size(); ++i) {
          const std::string name = dt.at("methods").at(i).get<std::string>();
          if (name != "mht-ggsp" && name != "oracle" && name != "bh")
            issues.push_back("detect.methods[" + std::to_string(i) + "]: unknown method '" +
                             name + "'");
        }
      }
      if (!dt.contains("alphas") || !dt.at("alphas").is_array() || dt.at("alphas").empty()) {
        issues.push_back("detect.alphas: must be a nonempty array");
      } else {
        for (std::size_t i = 0; i < dt.at("alphas").size(); ++i) {
          const auto& a = dt.at("alphas").at(i);
          if (!a.is_number() || !(a.get<double>() > 0.0 && a.get<double>() < 1.0))
            issues.push_back("detect.alphas[" + std::to_string(i) + "]: must lie in (0,1)");
        }
      }
      if (detail::get_or<int>(dt, "reps", 1) < 1) issues.push_back("detect.reps: must be >= 1");
    }
  }

  if (doc.contains("seed") && !doc.at("seed").is_number_unsigned())
    issues.push_back("seed: must be a nonnegative integer");
  if (doc.contains("output_dir") && !doc.at("output_dir").is_string())
    issues.push_back("output_dir: must be a string");

  return issues;
}

/// Parse a validated document into a RunConfig. Call validate_config_json
/// first; this assumes a clean document and applies defaults.
inline RunConfig config_from_json(const nlohmann::json& doc) {
  RunConfig cfg;
  cfg.echo = doc;

  const auto& sc = doc.at("scenario");
  const std::string type = sc.at("type").get<std::string>();
  if (type == "model-matched") {
    cfg.scenario.kind = ScenarioConfig::Kind::model_matched;
    ModelMatchedConfig& mm = cfg.scenario.model_matched;
    mm.n_sensors = detail::get_or<int>(sc, "n_sensors", 100);
    mm.knn_k = detail::get_or<int>(sc, "knn_k", 10);
    mm.extent = detail::get_or<double>(sc, "extent", 100.0);
    mm.K1 = detail::get_or<int>(sc, "K1", 2);
    mm.K2 = detail::get_or<int>(sc, "K2", 3);
    mm.box_bound = detail::get_or<double>(sc, "box_bound", 10.0);
    if (sc.contains("xi_true")) {
      mm.Xi_true.resize(mm.K1, mm.K2);
      for (int r = 0; r < mm.K1; ++r)
        for (int c = 0; c < mm.K2; ++c)
          mm.Xi_true(r, c) = sc.at("xi_true").at(r).at(c).get<double>();
    }
    if (sc.contains("sampling")) {
      const auto& sm = sc.at("sampling");
      if (detail::get_or<std::string>(sm, "type", "grid") == "iid") {
        mm.sampling.kind = SamplingDesign::Kind::iid_uniform;
        mm.sampling.iid_count = detail::get_or<int>(sm, "M", 1000);
      } else {
        mm.sampling.kind = SamplingDesign::Kind::grid;
        mm.sampling.grid_T = detail::get_or<int>(sm, "T", 9);
      }
    }
  } else {
    cfg.scenario.kind = ScenarioConfig::Kind::transmitter;
    TransmitterConfig& tx = cfg.scenario.transmitter;
    tx.grid_side = detail::get_or<int>(sc, "grid_side", 100);
    tx.n_sensors = detail::get_or<int>(sc, "n_sensors", 300);
    tx.knn_k = detail::get_or<int>(sc, "knn_k", 10);
    tx.n_transmitters = detail::get_or<int>(sc, "n_transmitters", 2);
    tx.T = detail::get_or<int>(sc, "T", 9);
    tx.x0 = detail::get_or<double>(sc, "x0", 3e6);
    tx.wavelength = detail::get_or<double>(sc, "wavelength", 0.125);
    tx.const_C = detail::get_or<double>(sc, "const_C", 0.0);
    tx.gp_variance = detail::get_or<double>(sc, "gp_variance", 4.0);
    tx.gp_length_scale = detail::get_or<double>(sc, "gp_length_scale", 10.0);
    tx.noise_var = detail::get_or<double>(sc, "noise_var", 1.5);
    tx.tau0 = detail::get_or<double>(sc, "tau0", 0.1);
    tx.walk_step = detail::get_or<double>(sc, "walk_step", 5.0);
  }

  if (doc.contains("fit")) {
    const auto& ft = doc.at("fit");
    cfg.fit.mode = detail::get_or<std::string>(ft, "mode", "bic") == "fixed"
                       ? FitConfig::Mode::fixed
                       : FitConfig::Mode::bic;
    cfg.fit.K1 = detail::get_or<int>(ft, "K1", 2);
    cfg.fit.K2 = detail::get_or<int>(ft, "K2", 3);
    if (ft.contains("grid"))
      for (const auto& cell : ft.at("grid"))
        cfg.fit.grid.emplace_back(cell.at(0).get<int>(), cell.at(1).get<int>());
    cfg.fit.options.box_bound = detail::get_or<double>(ft, "box_bound", 10.0);
    cfg.fit.options.tol = detail::get_or<double>(ft, "tol", 1e-6);
    cfg.fit.options.max_iters = detail::get_or<int>(ft, "max_iters", 5000);
  }

  const auto& dt = doc.at("detect");
  for (const auto& name : dt.at("methods"))
    cfg.methods.push_back(method_from_name(name.get<std::string>()));
  for (const auto& a : dt.at("alphas")) cfg.alphas.push_back(a.get<double>());
  cfg.reps = detail::get_or<int>(dt, "reps", 1);

  cfg.seed = detail::get_or<std::uint64_t>(doc, "seed", 0);
  cfg.output_dir = detail::get_or<std::string>(doc, "output_dir", "out");
  return cfg;
}

inline nlohmann::json load_config_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open config file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error in '" + path + "': " + e.what());
  }
  return doc;
}

}  // namespace ggsp
