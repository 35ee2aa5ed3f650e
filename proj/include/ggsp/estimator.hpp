// Box-constrained maximum-likelihood fitting of the coefficient matrix Xi
// and BIC model-order selection over (K1,K2).
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <memory>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ggsp/errors.hpp"
#include "ggsp/joint_basis.hpp"
#include "ggsp/pvalue_model.hpp"
#include "ggsp/sample_set.hpp"

namespace ggsp {

struct FitOptions {
  double box_bound = 10.0;
  double tol = 1e-6;               // projected-gradient inf-norm
  double rel_obj_tol = 1e-10;      // relative objective change
  int max_iters = 5000;
  Eigen::MatrixXd init;            // empty -> Xi = 0
};

struct FitResult {
  BandlimitedSignal signal;  // carries Xi_hat, K1, K2, box bound, basis
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  double bic = 0.0;
  int clamp_count = 0;
};

/// One row of the BIC model-selection table.
struct BicCandidate {
  int K1 = 0;
  int K2 = 0;
  double loglik = std::numeric_limits<double>::quiet_NaN();
  double bic = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  bool converged = false;
  bool skipped = false;
  std::string error;
};

struct BicSelection {
  FitResult best;
  std::vector<BicCandidate> table;
};

/// Design matrix: row m holds phi_{k1}(v_m) psi_{k2}(t_m), row-major in (k1,k2).
inline Eigen::MatrixXd build_design_matrix(const SampleSet& samples, const SpectralBasis& basis,
                                           int K1, int K2) {
  const Eigen::Index m_count = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd design(m_count, static_cast<Eigen::Index>(K1) * K2);
  for (Eigen::Index m = 0; m < m_count; ++m)
    design.row(m) = design_row(basis, samples.vertex[static_cast<std::size_t>(m)],
                               samples.time[static_cast<std::size_t>(m)], K1, K2)
                        .transpose();
  return design;
}

inline double log_likelihood(const Eigen::MatrixXd& Xi, const SampleSet& samples,
                             const SpectralBasis& basis, const MixtureFamily& fam) {
  if (samples.size() == 0) throw EmptySample("log_likelihood: empty sample set");
  const int K1 = static_cast<int>(Xi.rows());
  const int K2 = static_cast<int>(Xi.cols());
  double total = 0.0;
  for (std::size_t m = 0; m < samples.size(); ++m) {
    double gamma = 0.0;
    for (int k2 = 1; k2 <= K2; ++k2) {
      const double psi = TimeBasis::eval(k2, samples.time[m]);
      for (int k1 = 1; k1 <= K1; ++k1)
        gamma += Xi(k1 - 1, k2 - 1) * basis.eigenvectors(samples.vertex[m], k1 - 1) * psi;
    }
    const double term = std::log(fam.density(samples.pvalue[m], gamma));
    if (!std::isfinite(term))
      throw NumericalError("log_likelihood: non-finite term at sample " + std::to_string(m));
    total += term;
  }
  return total;
}

/// Analytic gradient of the log-likelihood in Xi; entry (k1,k2) is
/// sum_m dlog_dzeta(p_m, gamma_m) phi_{k1}(v_m) psi_{k2}(t_m).
inline Eigen::MatrixXd gradient(const Eigen::MatrixXd& Xi, const SampleSet& samples,
                                const SpectralBasis& basis, const MixtureFamily& fam) {
  if (samples.size() == 0) throw EmptySample("gradient: empty sample set");
  const int K1 = static_cast<int>(Xi.rows());
  const int K2 = static_cast<int>(Xi.cols());
  const Eigen::MatrixXd design = build_design_matrix(samples, basis, K1, K2);
  Eigen::VectorXd flat(static_cast<Eigen::Index>(K1) * K2);
  for (int k1 = 0; k1 < K1; ++k1)
    for (int k2 = 0; k2 < K2; ++k2) flat(k1 * K2 + k2) = Xi(k1, k2);
  const Eigen::VectorXd gamma = design * flat;
  Eigen::VectorXd weights(gamma.size());
  for (Eigen::Index m = 0; m < gamma.size(); ++m) {
    weights(m) = fam.dlog_dzeta(samples.pvalue[static_cast<std::size_t>(m)], gamma(m));
    if (!std::isfinite(weights(m)))
      throw NumericalError("gradient: non-finite term at sample " + std::to_string(m));
  }
  const Eigen::VectorXd grad_flat = design.transpose() * weights;
  Eigen::MatrixXd grad(K1, K2);
  for (int k1 = 0; k1 < K1; ++k1)
    for (int k2 = 0; k2 < K2; ++k2) grad(k1, k2) = grad_flat(k1 * K2 + k2);
  return grad;
}

namespace detail {

inline Eigen::VectorXd flatten_row_major(const Eigen::MatrixXd& m) {
  Eigen::VectorXd flat(m.size());
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) flat(r * m.cols() + c) = m(r, c);
  return flat;
}

inline Eigen::MatrixXd unflatten_row_major(const Eigen::VectorXd& flat, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = flat(r * cols + c);
  return m;
}

}  // namespace detail

/**
 * Maximum-likelihood fit of Xi over the box [-B,B]^(K1 x K2) by projected
 * gradient ascent with Armijo backtracking (start step 1, shrink 0.5,
 * slope 1e-4). The objective sequence is monotone by construction; a
 * violation raises NumericalError.
 *
 * Terminates when the projected-gradient inf-norm falls below `tol`, the
 * relative objective change falls below `rel_obj_tol`, or `max_iters` is
 * reached (converged=false only in the last case). Deterministic: identical
 * inputs and options give bitwise-identical results.
 */
inline FitResult fit_mle(const SampleSet& samples, std::shared_ptr<const SpectralBasis> basis,
                         int K1, int K2, const FitOptions& opts = {}) {
  if (samples.size() == 0) throw EmptySample("fit_mle: empty sample set");
  if (!basis) throw DomainError("fit_mle: missing basis");
  if (K1 < 1 || K2 < 1) throw ModelOrderError("fit_mle: orders must be >= 1");
  if (K1 > basis->size()) throw ModelOrderError("fit_mle: K1 exceeds N");

  const double bound = opts.box_bound;
  const MixtureFamily fam = MixtureFamily::sigmoid_beta();
  const Eigen::MatrixXd design = build_design_matrix(samples, *basis, K1, K2);
  const Eigen::Index m_count = design.rows();

  Eigen::VectorXd log_p(m_count);
  for (Eigen::Index m = 0; m < m_count; ++m)
    log_p(m) = std::log(samples.pvalue[static_cast<std::size_t>(m)]);

  const auto objective = [&](const Eigen::VectorXd& xi_flat) {
    const Eigen::VectorXd gamma = design * xi_flat;
    double total = 0.0;
    for (Eigen::Index m = 0; m < m_count; ++m) {
      const double a = sigmoid(gamma(m));
      total += std::log(a) + (a - 1.0) * log_p(m);
    }
    if (!std::isfinite(total)) throw NumericalError("fit_mle: non-finite objective");
    return total;
  };
  const auto grad_flat = [&](const Eigen::VectorXd& xi_flat) -> Eigen::VectorXd {
    const Eigen::VectorXd gamma = design * xi_flat;
    Eigen::VectorXd weights(m_count);
    for (Eigen::Index m = 0; m < m_count; ++m) {
      const double a = sigmoid(gamma(m));
      weights(m) = (1.0 - a) * (1.0 + a * log_p(m));
    }
    return design.transpose() * weights;
  };
  const auto project = [bound](Eigen::VectorXd x) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = std::clamp(x(i), -bound, bound);
    return x;
  };

  Eigen::VectorXd x;
  if (opts.init.size() == 0) {
    x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K1) * K2);
  } else {
    if (opts.init.rows() != K1 || opts.init.cols() != K2)
      throw ShapeError("fit_mle: init has wrong shape");
    x = project(detail::flatten_row_major(opts.init));
  }

  double obj = objective(x);
  bool converged = false;
  int iter = 0;
  constexpr double armijo_slope = 1e-4;
  constexpr double min_step = 1e-18;

  for (; iter < opts.max_iters; ++iter) {
    const Eigen::VectorXd g = grad_flat(x);

    // Projected gradient: zero out components pushing through an active bound.
    Eigen::VectorXd pg = g;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if ((x(i) >= bound && g(i) > 0.0) || (x(i) <= -bound && g(i) < 0.0)) pg(i) = 0.0;
    }
    if (pg.cwiseAbs().maxCoeff() <= opts.tol) {
      converged = true;
      break;
    }

    double step = 1.0;
    bool moved = false;
    while (step >= min_step) {
      const Eigen::VectorXd cand = project(x + step * g);
      const Eigen::VectorXd delta = cand - x;
      const double cand_obj = objective(cand);
      if (cand_obj >= obj + armijo_slope * g.dot(delta) && delta.cwiseAbs().maxCoeff() > 0.0) {
        if (cand_obj < obj)
          throw NumericalError("fit_mle: ascent property violated");
        const double rel_change = std::abs(cand_obj - obj) / (std::abs(obj) + 1.0);
        x = cand;
        obj = cand_obj;
        moved = true;
        if (rel_change <= opts.rel_obj_tol) converged = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved || converged) {
      converged = converged || !moved;
      if (moved) ++iter;
      break;
    }
  }

  FitResult result;
  result.signal.K1 = K1;
  result.signal.K2 = K2;
  result.signal.box_bound = bound;
  result.signal.Xi = detail::unflatten_row_major(x, K1, K2);
  result.signal.graph_basis = std::move(basis);
  result.loglik = obj;
  result.iterations = iter;
  result.converged = converged;
  result.bic = static_cast<double>(K1) * K2 * std::log(static_cast<double>(samples.size())) -
               2.0 * obj;
  result.clamp_count = samples.clamp_count;
  return result;
}

/**
 * Fit every (K1,K2) candidate and keep the BIC minimizer; ties break toward
 * smaller K1*K2, then smaller K1. Candidates whose fit throws are recorded
 * in the table and skipped.
 */
inline BicSelection bic_select(const SampleSet& samples,
                               std::shared_ptr<const SpectralBasis> basis,
                               const std::vector<std::pair<int, int>>& grid,
                               const FitOptions& opts = {}) {
  if (grid.empty()) throw DomainError("bic_select: empty candidate grid");
  BicSelection sel;
  bool have_best = false;
  FitResult best;
  auto better = [](const FitResult& a, const FitResult& b) {
    const auto key = [](const FitResult& f) {
      return std::make_tuple(f.bic, f.signal.K1 * f.signal.K2, f.signal.K1);
    };
    return key(a) < key(b);
  };
  for (const auto& [K1, K2] : grid) {
    BicCandidate row;
    row.K1 = K1;
    row.K2 = K2;
    FitOptions cand_opts = opts;
    if (cand_opts.init.size() != 0 &&
        (cand_opts.init.rows() != K1 || cand_opts.init.cols() != K2))
      cand_opts.init.resize(0, 0);
    try {
      FitResult fit = fit_mle(samples, basis, K1, K2, cand_opts);
      row.loglik = fit.loglik;
      row.bic = fit.bic;
      row.iterations = fit.iterations;
      row.converged = fit.converged;
      if (!have_best || better(fit, best)) {
        best = std::move(fit);
        have_best = true;
      }
    } catch (const Error& e) {
      row.skipped = true;
      row.error = e.what();
    }
    sel.table.push_back(std::move(row));
  }
  if (!have_best) throw NumericalError("bic_select: every candidate failed");
  sel.best = std::move(best);
  return sel;
}

inline nlohmann::json fit_result_to_json(const FitResult& fit) {
  nlohmann::json j = signal_to_json(fit.signal);
  j["loglik"] = fit.loglik;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["bic"] = fit.bic;
  j["clamp_count"] = fit.clamp_count;
  return j;
}

inline nlohmann::json bic_table_to_json(const std::vector<BicCandidate>& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& c : table) {
    nlohmann::json row{{"K1", c.K1},
                       {"K2", c.K2},
                       {"converged", c.converged},
                       {"iterations", c.iterations},
                       {"skipped", c.skipped}};
    if (!c.skipped) {
      row["loglik"] = c.loglik;
      row["bic"] = c.bic;
    } else {
      row["error"] = c.error;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ggsp
