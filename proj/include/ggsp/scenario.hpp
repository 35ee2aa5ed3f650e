// Synthetic scenario generation: a model-matched two-group sampler and the
// moving-transmitter communication scenario (path loss, lognormal shadowing
// via a Gaussian process, AWGN, chi-squared p-values).
#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <limits>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "ggsp/errors.hpp"
#include "ggsp/graph.hpp"
#include "ggsp/joint_basis.hpp"
#include "ggsp/pvalue_model.hpp"
#include "ggsp/rng.hpp"
#include "ggsp/sample_set.hpp"

namespace ggsp {

/// Equally spaced instances {-pi + 2*pi*j/T : j = 0..T}; T+1 points, both
/// endpoints included.
inline std::vector<double> grid_times(int T) {
  if (T < 1) throw DegenerateInput("grid_times: T must be >= 1");
  std::vector<double> times(static_cast<std::size_t>(T) + 1);
  for (int j = 0; j <= T; ++j)
    times[static_cast<std::size_t>(j)] = (j == T) ? pi : -pi + (2.0 * pi * j) / T;
  return times;
}

struct SamplingDesign {
  enum class Kind { iid_uniform, grid };
  Kind kind = Kind::grid;
  int iid_count = 0;   // M, for iid_uniform
  int grid_T = 9;      // T, for grid
};

struct ModelMatchedConfig {
  int n_sensors = 100;
  int knn_k = 10;
  double extent = 100.0;  // coordinates uniform on [0, extent]^2
  int K1 = 2;
  int K2 = 3;
  Eigen::MatrixXd Xi_true;  // K1 x K2; empty -> zeros
  double box_bound = 10.0;
  SamplingDesign sampling;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_sensors < 2) throw ConfigError("model-matched: n_sensors must be >= 2");
    if (knn_k < 1) throw ConfigError("model-matched: knn_k must be >= 1");
    if (extent <= 0.0) throw ConfigError("model-matched: extent must be positive");
    if (K1 < 1 || K2 < 1) throw ConfigError("model-matched: K1,K2 must be >= 1");
    if (K1 > n_sensors) throw ConfigError("model-matched: K1 exceeds n_sensors");
    if (Xi_true.size() != 0 && (Xi_true.rows() != K1 || Xi_true.cols() != K2))
      throw ConfigError("model-matched: Xi_true shape mismatch");
    if (Xi_true.size() != 0 && Xi_true.cwiseAbs().maxCoeff() > box_bound)
      throw ConfigError("model-matched: Xi_true outside the box");
    if (sampling.kind == SamplingDesign::Kind::iid_uniform && sampling.iid_count < 1)
      throw ConfigError("model-matched: iid sample count must be >= 1");
    if (sampling.kind == SamplingDesign::Kind::grid && sampling.grid_T < 1)
      throw ConfigError("model-matched: grid T must be >= 1");
  }
};

struct TransmitterConfig {
  int grid_side = 100;
  int n_sensors = 300;
  int knn_k = 10;
  int n_transmitters = 2;
  int T = 9;
  double x0 = 3e6;             // transmit power (linear); default measures ~10% nulls
  double wavelength = 0.125;   // in grid units
  double const_C = 0.0;        // additive dB constant
  double gp_variance = 4.0;
  double gp_length_scale = 10.0;
  double noise_var = 1.5;      // sigma_e^2
  double tau0 = 0.1;           // noise-floor threshold on |x|
  double walk_step = 5.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (grid_side < 2) throw ConfigError("transmitter: grid_side must be >= 2");
    if (n_sensors < 2) throw ConfigError("transmitter: n_sensors must be >= 2");
    if (n_sensors > grid_side * grid_side)
      throw ConfigError("transmitter: more sensors than grid points");
    if (knn_k < 1) throw ConfigError("transmitter: knn_k must be >= 1");
    if (n_transmitters < 1) throw ConfigError("transmitter: need >= 1 transmitter");
    if (T < 1) throw ConfigError("transmitter: T must be >= 1");
    if (x0 < 0.0) throw ConfigError("transmitter: x0 must be >= 0");
    if (wavelength <= 0.0 || gp_variance <= 0.0 || gp_length_scale <= 0.0 ||
        noise_var <= 0.0 || tau0 <= 0.0 || walk_step < 0.0)
      throw ConfigError("transmitter: scalar parameters must be positive");
  }
};

struct GeneratedData {
  SampleSet samples;               // with truth indicators
  SpatialGraph graph;
  Eigen::VectorXd gamma_true;      // model-matched: gamma(v,t;Xi*); empty otherwise
  Eigen::VectorXd distance_true;   // transmitter: nearest-transmitter distance; empty otherwise
  std::vector<std::vector<Point2>> transmitter_paths;  // [transmitter][instance]
  double measured_null_proportion = 0.0;
};

/// p-value of the noise-floor test: P(y^2 >= y_obs^2 | H0) with
/// y^2/sigma^2 chi-squared(1) under x ~ 0, i.e. the two-sided normal tail
/// 2(1 - Phi(|y_obs|/sigma)).
inline double noise_floor_pvalue(double y_obs, double sigma) {
  if (sigma <= 0.0) throw DomainError("noise_floor_pvalue: sigma must be positive");
  return std::erfc(std::abs(y_obs) / (sigma * std::sqrt(2.0)));
}

/// One draw from a zero-mean Gaussian vector with squared-exponential
/// covariance variance*exp(-|xi-xj|^2/(2 ls^2)) + 1e-8 I.
inline Eigen::VectorXd gp_sample(const std::vector<Point2>& coords, double variance,
                                 double length_scale, Rng& rng) {
  if (variance <= 0.0 || length_scale <= 0.0)
    throw DomainError("gp_sample: variance and length_scale must be positive");
  const Eigen::Index n = static_cast<Eigen::Index>(coords.size());
  Eigen::MatrixXd cov(n, n);
  const double inv_2ls2 = 1.0 / (2.0 * length_scale * length_scale);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double dx = coords[static_cast<std::size_t>(i)][0] - coords[static_cast<std::size_t>(j)][0];
      const double dy = coords[static_cast<std::size_t>(i)][1] - coords[static_cast<std::size_t>(j)][1];
      const double c = variance * std::exp(-(dx * dx + dy * dy) * inv_2ls2);
      cov(i, j) = c;
      cov(j, i) = c;
    }
    cov(i, i) += 1e-8;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw NumericalError("gp_sample: covariance factorization failed");
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
  return llt.matrixL() * z;
}

/// Reusable sampler: factor the covariance once, draw many fields.
class GpSampler {
 public:
  GpSampler(const std::vector<Point2>& coords, double variance, double length_scale) {
    if (variance <= 0.0 || length_scale <= 0.0)
      throw DomainError("gp sampler: variance and length_scale must be positive");
    const Eigen::Index n = static_cast<Eigen::Index>(coords.size());
    Eigen::MatrixXd cov(n, n);
    const double inv_2ls2 = 1.0 / (2.0 * length_scale * length_scale);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        const double dx = coords[static_cast<std::size_t>(i)][0] - coords[static_cast<std::size_t>(j)][0];
        const double dy = coords[static_cast<std::size_t>(i)][1] - coords[static_cast<std::size_t>(j)][1];
        const double c = variance * std::exp(-(dx * dx + dy * dy) * inv_2ls2);
        cov(i, j) = c;
        cov(j, i) = c;
      }
      cov(i, i) += 1e-8;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
      throw NumericalError("gp sampler: covariance factorization failed");
    chol_lower_ = llt.matrixL();
  }

  Eigen::VectorXd draw(Rng& rng) const {
    Eigen::VectorXd z(chol_lower_.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    return chol_lower_ * z;
  }

 private:
  Eigen::MatrixXd chol_lower_;
};

/**
 * Model-matched two-group sampler. For each sample point:
 *   gamma = gamma(v,t;Xi_true), a = sigmoid(gamma),
 *   p = u^(1/a) with u ~ Unif(0,1]   (inverse CDF of the Beta(a,1) marginal),
 *   theta = 1 with probability 1 - lfdr(p;gamma) = 1 - p^(1-a).
 * The (p, theta|p) factorization matches the (theta, p|theta) hierarchy by
 * Bayes' rule.
 */
inline GeneratedData gen_model_matched(const ModelMatchedConfig& cfg) {
  cfg.validate();
  Rng root(cfg.seed);
  Rng coord_rng = root.derive(1);
  Rng sample_rng = root.derive(2);

  std::vector<Point2> coords(static_cast<std::size_t>(cfg.n_sensors));
  for (auto& pt : coords) pt = {coord_rng.uniform() * cfg.extent, coord_rng.uniform() * cfg.extent};

  GeneratedData data;
  data.graph = build_knn_graph(coords, cfg.knn_k);
  auto basis = std::make_shared<SpectralBasis>(eigendecompose(laplacian(data.graph)));

  BandlimitedSignal sig;
  sig.K1 = cfg.K1;
  sig.K2 = cfg.K2;
  sig.box_bound = cfg.box_bound;
  sig.Xi = cfg.Xi_true.size() == 0 ? Eigen::MatrixXd::Zero(cfg.K1, cfg.K2).eval() : cfg.Xi_true;
  sig.graph_basis = basis;
  sig.validate();

  std::vector<int> vertex;
  std::vector<double> time;
  if (cfg.sampling.kind == SamplingDesign::Kind::iid_uniform) {
    const int m_count = cfg.sampling.iid_count;
    vertex.reserve(static_cast<std::size_t>(m_count));
    time.reserve(static_cast<std::size_t>(m_count));
    for (int m = 0; m < m_count; ++m) {
      vertex.push_back(static_cast<int>(sample_rng.uniform_int(static_cast<std::uint64_t>(cfg.n_sensors))));
      time.push_back(-pi + 2.0 * pi * sample_rng.uniform());
    }
  } else {
    const auto times = grid_times(cfg.sampling.grid_T);
    for (double t : times)
      for (int v = 0; v < cfg.n_sensors; ++v) {
        vertex.push_back(v);
        time.push_back(t);
      }
  }

  const std::size_t m_count = vertex.size();
  std::vector<double> pvals(m_count);
  std::vector<std::uint8_t> truth(m_count);
  data.gamma_true.resize(static_cast<Eigen::Index>(m_count));
  int nulls = 0;
  for (std::size_t m = 0; m < m_count; ++m) {
    const double gamma = sig.evaluate(vertex[m], time[m]);
    data.gamma_true(static_cast<Eigen::Index>(m)) = gamma;
    const double a = sigmoid(gamma);
    const double u = sample_rng.uniform_pos();
    const double p = std::pow(u, 1.0 / a);
    const double local_fdr = std::pow(p, 1.0 - a);
    const std::uint8_t theta = sample_rng.uniform() < 1.0 - local_fdr ? 1 : 0;
    pvals[m] = p;
    truth[m] = theta;
    if (theta == 0) ++nulls;
  }
  data.samples = SampleSet::create(std::move(vertex), std::move(time), std::move(pvals),
                                   std::move(truth));
  data.measured_null_proportion = static_cast<double>(nulls) / static_cast<double>(m_count);
  return data;
}

/**
 * Moving-transmitter communication scenario. Sensors sit on distinct lattice
 * points of a grid_side x grid_side grid; transmitters random-walk on the
 * lattice with steps in {-walk_step, 0, +walk_step}^2, clamped. Received
 * power per sensor sums the per-transmitter path-loss/shadowing terms
 *   L_i = 20 log10(lambda / (4 pi d_i)) + s(v) + C     (dB),
 * with a fresh Gaussian-process field s per instance, x = sum_i x0 10^(L_i/10),
 * theta = 1{|x| > tau0}, y = x + e with e ~ N(0, noise_var), and the
 * chi-squared(1) two-sided p-value p = 2(1 - Phi(|y|/sigma_e)).
 */
inline GeneratedData gen_transmitter_scenario(const TransmitterConfig& cfg) {
  cfg.validate();
  Rng root(cfg.seed);
  Rng place_rng = root.derive(1);
  Rng walk_rng = root.derive(2);
  Rng field_rng = root.derive(3);
  Rng noise_rng = root.derive(4);

  // Sensors: sample n distinct lattice points by partial Fisher-Yates.
  const std::uint64_t n_cells =
      static_cast<std::uint64_t>(cfg.grid_side) * static_cast<std::uint64_t>(cfg.grid_side);
  std::vector<std::uint32_t> cells(n_cells);
  for (std::uint64_t i = 0; i < n_cells; ++i) cells[i] = static_cast<std::uint32_t>(i);
  std::vector<Point2> coords(static_cast<std::size_t>(cfg.n_sensors));
  for (int i = 0; i < cfg.n_sensors; ++i) {
    const std::uint64_t j = i + place_rng.uniform_int(n_cells - static_cast<std::uint64_t>(i));
    std::swap(cells[static_cast<std::size_t>(i)], cells[static_cast<std::size_t>(j)]);
    const std::uint32_t cell = cells[static_cast<std::size_t>(i)];
    coords[static_cast<std::size_t>(i)] = {static_cast<double>(cell % cfg.grid_side),
                                           static_cast<double>(cell / cfg.grid_side)};
  }

  GeneratedData data;
  data.graph = build_knn_graph(coords, cfg.knn_k);

  // Transmitter paths over the T+1 instances.
  const auto times = grid_times(cfg.T);
  const int n_inst = static_cast<int>(times.size());
  const double hi = static_cast<double>(cfg.grid_side - 1);
  data.transmitter_paths.assign(static_cast<std::size_t>(cfg.n_transmitters), {});
  for (int tr = 0; tr < cfg.n_transmitters; ++tr) {
    auto& path = data.transmitter_paths[static_cast<std::size_t>(tr)];
    path.resize(static_cast<std::size_t>(n_inst));
    Point2 pos = {static_cast<double>(walk_rng.uniform_int(static_cast<std::uint64_t>(cfg.grid_side))),
                  static_cast<double>(walk_rng.uniform_int(static_cast<std::uint64_t>(cfg.grid_side)))};
    path[0] = pos;
    for (int j = 1; j < n_inst; ++j) {
      const double sx = (static_cast<double>(walk_rng.uniform_int(3)) - 1.0) * cfg.walk_step;
      const double sy = (static_cast<double>(walk_rng.uniform_int(3)) - 1.0) * cfg.walk_step;
      pos[0] = std::clamp(pos[0] + sx, 0.0, hi);
      pos[1] = std::clamp(pos[1] + sy, 0.0, hi);
      path[static_cast<std::size_t>(j)] = pos;
    }
  }

  const GpSampler shadow(coords, cfg.gp_variance, cfg.gp_length_scale);
  const double sigma_e = std::sqrt(cfg.noise_var);

  const std::size_t m_count = static_cast<std::size_t>(cfg.n_sensors) * static_cast<std::size_t>(n_inst);
  std::vector<int> vertex;
  std::vector<double> time;
  std::vector<double> pvals;
  std::vector<std::uint8_t> truth;
  vertex.reserve(m_count);
  time.reserve(m_count);
  pvals.reserve(m_count);
  truth.reserve(m_count);
  data.distance_true.resize(static_cast<Eigen::Index>(m_count));

  int nulls = 0;
  std::size_t m = 0;
  for (int j = 0; j < n_inst; ++j) {
    const Eigen::VectorXd field = shadow.draw(field_rng);
    for (int v = 0; v < cfg.n_sensors; ++v, ++m) {
      const Point2& sensor = coords[static_cast<std::size_t>(v)];
      double power = 0.0;
      double nearest = std::numeric_limits<double>::infinity();
      for (int tr = 0; tr < cfg.n_transmitters; ++tr) {
        const Point2& c = data.transmitter_paths[static_cast<std::size_t>(tr)][static_cast<std::size_t>(j)];
        const double dx = sensor[0] - c[0];
        const double dy = sensor[1] - c[1];
        // Near-field clamp: a transmitter can land exactly on a sensor cell.
        const double dist = std::max(std::sqrt(dx * dx + dy * dy), 0.5);
        nearest = std::min(nearest, dist);
        const double loss_db = 20.0 * std::log10(cfg.wavelength / (4.0 * pi * dist)) +
                               field(v) + cfg.const_C;
        power += cfg.x0 * std::pow(10.0, loss_db / 10.0);
      }
      data.distance_true(static_cast<Eigen::Index>(m)) = nearest;
      const std::uint8_t theta = std::abs(power) > cfg.tau0 ? 1 : 0;
      const double y = power + sigma_e * noise_rng.normal();
      const double p = noise_floor_pvalue(y, sigma_e);
      vertex.push_back(v);
      time.push_back(times[static_cast<std::size_t>(j)]);
      pvals.push_back(p);
      truth.push_back(theta);
      if (theta == 0) ++nulls;
    }
  }
  data.samples = SampleSet::create(std::move(vertex), std::move(time), std::move(pvals),
                                   std::move(truth));
  data.measured_null_proportion = static_cast<double>(nulls) / static_cast<double>(m_count);
  return data;
}

/// Sample export: one row per record, columns vertex,time,p,theta.
inline void write_samples_csv(const GeneratedData& data, std::ostream& out) {
  out << "vertex,time,p,theta\n";
  char buf[96];
  for (std::size_t m = 0; m < data.samples.size(); ++m) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%d\n", data.samples.vertex[m],
                  data.samples.time[m], data.samples.pvalue[m],
                  static_cast<int>(data.samples.truth.empty() ? 0 : data.samples.truth[m]));
    out << buf;
  }
}

/// Companion metadata for an exported sample set: config echo, measured null
/// proportion, transmitter paths (empty for model-matched data).
inline nlohmann::json generated_metadata_json(const GeneratedData& data,
                                              const nlohmann::json& config_echo) {
  nlohmann::json paths = nlohmann::json::array();
  for (const auto& path : data.transmitter_paths) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& pos : path) points.push_back({pos[0], pos[1]});
    paths.push_back(std::move(points));
  }
  return nlohmann::json{{"config", config_echo},
                        {"measured_null_proportion", data.measured_null_proportion},
                        {"transmitter_paths", paths}};
}

}  // namespace ggsp
