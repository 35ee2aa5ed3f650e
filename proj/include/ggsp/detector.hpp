// lfdr step-up rejection (plug-in and oracle), the Benjamini-Hochberg
// baseline, and FDP/power evaluation against ground truth.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "ggsp/errors.hpp"
#include "ggsp/joint_basis.hpp"
#include "ggsp/pvalue_model.hpp"
#include "ggsp/sample_set.hpp"

namespace ggsp {

struct DetectionResult {
  Eigen::VectorXd lfdr_values;
  std::optional<double> eta_hat;
  std::vector<std::uint8_t> reject;
  int n_reject = 0;
  std::string method;
};

/// Single-realization FDP/TPP with the max(.,1) conventions.
struct EvalRecord {
  double fdp = 0.0;
  double tpp = 0.0;
  int n_reject = 0;
  int n_false_reject = 0;
  int n_alternatives = 0;
};

/// Per-sample lfdr from explicit signal values zeta_m (oracle use).
inline Eigen::VectorXd lfdr_vector(const SampleSet& samples, const Eigen::VectorXd& zeta,
                                   const MixtureFamily& fam, const NullDensity& null_density) {
  if (static_cast<std::size_t>(zeta.size()) != samples.size())
    throw ShapeError("lfdr_vector: zeta length mismatch");
  Eigen::VectorXd values(zeta.size());
  for (Eigen::Index m = 0; m < zeta.size(); ++m) {
    const std::size_t i = static_cast<std::size_t>(m);
    values(m) = lfdr(fam, null_density, samples.pvalue[i], zeta(m), samples.vertex[i],
                     samples.time[i]);
  }
  return values;
}

/// Per-sample lfdr with the signal evaluated at each (v_m, t_m) (plug-in use).
inline Eigen::VectorXd lfdr_vector(const SampleSet& samples, const BandlimitedSignal& sig,
                                   const MixtureFamily& fam, const NullDensity& null_density) {
  Eigen::VectorXd zeta(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t m = 0; m < samples.size(); ++m)
    zeta(static_cast<Eigen::Index>(m)) = sig.evaluate(samples.vertex[m], samples.time[m]);
  return lfdr_vector(samples, zeta, fam, null_density);
}

/**
 * Step-up threshold on lfdr values: the largest observed value eta such that
 * the mean of all lfdrs <= eta stays at or below alpha; rejects everything
 * at or below it (ties included). Returns no threshold and an all-false mask
 * when even the smallest lfdr exceeds alpha.
 *
 * Cumulative means are taken at the right edge of each tie group, so the
 * rejected set is exactly {m : lfdr_m <= eta_hat} and its mean lfdr is
 * guaranteed <= alpha.
 */
inline std::pair<std::optional<double>, std::vector<std::uint8_t>> step_up_threshold(
    const Eigen::VectorXd& lfdrs, double alpha) {
  const Eigen::Index m_count = lfdrs.size();
  if (m_count == 0) throw EmptySample("step_up_threshold: no lfdr values");
  for (Eigen::Index i = 0; i < m_count; ++i)
    if (!(lfdrs(i) >= 0.0 && lfdrs(i) <= 1.0))
      throw DomainError("step_up_threshold: lfdr outside [0,1]");

  std::vector<double> sorted(lfdrs.data(), lfdrs.data() + m_count);
  std::sort(sorted.begin(), sorted.end());

  // Running mean <= alpha is evaluated as sum(lfdr - alpha) <= 0, which is
  // exact when every value equals alpha.
  std::optional<double> eta;
  double excess = 0.0;
  for (Eigen::Index k = 0; k < m_count; ++k) {
    excess += sorted[static_cast<std::size_t>(k)] - alpha;
    const bool tie_edge =
        (k + 1 == m_count) ||
        sorted[static_cast<std::size_t>(k)] < sorted[static_cast<std::size_t>(k) + 1];
    if (tie_edge && excess <= 0.0) eta = sorted[static_cast<std::size_t>(k)];
  }

  std::vector<std::uint8_t> mask(static_cast<std::size_t>(m_count), 0);
  if (eta) {
    for (Eigen::Index i = 0; i < m_count; ++i)
      mask[static_cast<std::size_t>(i)] = lfdrs(i) <= *eta ? 1 : 0;
  }
  return {eta, std::move(mask)};
}

inline DetectionResult detect_step_up(const Eigen::VectorXd& lfdrs, double alpha,
                                      std::string method) {
  auto [eta, mask] = step_up_threshold(lfdrs, alpha);
  DetectionResult result;
  result.lfdr_values = lfdrs;
  result.eta_hat = eta;
  result.n_reject = static_cast<int>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
  result.reject = std::move(mask);
  result.method = std::move(method);
  return result;
}

/// Benjamini-Hochberg step-up on raw p-values.
inline std::vector<std::uint8_t> bh_procedure(const std::vector<double>& pvals, double alpha) {
  if (pvals.empty()) throw EmptySample("bh_procedure: no p-values");
  const std::size_t m_count = pvals.size();
  for (double p : pvals)
    if (!(p > 0.0 && p <= 1.0)) throw DomainError("bh_procedure: p outside (0,1]");

  std::vector<double> sorted(pvals);
  std::sort(sorted.begin(), sorted.end());
  double threshold = 0.0;
  for (std::size_t i = 0; i < m_count; ++i) {
    const double rung = alpha * static_cast<double>(i + 1) / static_cast<double>(m_count);
    if (sorted[i] <= rung) threshold = sorted[i];
  }
  std::vector<std::uint8_t> mask(m_count, 0);
  if (threshold > 0.0)
    for (std::size_t i = 0; i < m_count; ++i) mask[i] = pvals[i] <= threshold ? 1 : 0;
  return mask;
}

inline EvalRecord evaluate(const std::vector<std::uint8_t>& reject,
                           const std::vector<std::uint8_t>& truth) {
  if (reject.size() != truth.size()) throw ShapeError("evaluate: mask/truth length mismatch");
  EvalRecord rec;
  int true_rejects = 0;
  for (std::size_t i = 0; i < reject.size(); ++i) {
    if (truth[i] > 1) throw DomainError("evaluate: truth values must be 0/1");
    if (truth[i] == 1) ++rec.n_alternatives;
    if (reject[i]) {
      ++rec.n_reject;
      if (truth[i] == 0)
        ++rec.n_false_reject;
      else
        ++true_rejects;
    }
  }
  rec.fdp = static_cast<double>(rec.n_false_reject) / std::max(rec.n_reject, 1);
  rec.tpp = static_cast<double>(true_rejects) / std::max(rec.n_alternatives, 1);
  return rec;
}

}  // namespace ggsp
