// Orthonormal time basis on [-pi,pi], joint vertex-time design rows, and
// bandlimited signal evaluation gamma(v,t;Xi).
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <json.hpp>
#include <memory>

#include "ggsp/errors.hpp"
#include "ggsp/graph.hpp"

namespace ggsp {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double inv_sqrt_2pi = 0.39894228040143267794;  // 1/sqrt(2*pi)
inline constexpr double inv_sqrt_pi = 0.56418958354775628695;   // 1/sqrt(pi)

/**
 * Trigonometric orthonormal basis of L2[-pi,pi], listed smoothest first:
 *   k=1      -> 1/sqrt(2*pi)
 *   k=2j     -> sin(j t)/sqrt(pi)
 *   k=2j+1   -> cos(j t)/sqrt(pi)      for j >= 1
 * The sin-before-cos order at each frequency is a fixed convention so that
 * coefficient indexing is reproducible.
 */
struct TimeBasis {
  static double eval(int k, double t) {
    if (k < 1) throw DomainError("time basis: index must be >= 1");
    if (t < -pi || t > pi) throw DomainError("time basis: t outside [-pi,pi]");
    if (k == 1) return inv_sqrt_2pi;
    const int freq = k / 2;
    return (k % 2 == 0) ? std::sin(freq * t) * inv_sqrt_pi
                        : std::cos(freq * t) * inv_sqrt_pi;
  }
};

inline double time_basis_eval(int k, double t) { return TimeBasis::eval(k, t); }

/**
 * Flattened products phi_{k1}(v) * psi_{k2}(t), row-major in (k1,k2):
 * entry (k1-1)*K2 + (k2-1) for 1-based (k1,k2).
 */
inline Eigen::VectorXd design_row(const SpectralBasis& basis, int v, double t, int K1, int K2) {
  const int n = basis.size();
  if (K1 < 1 || K2 < 1) throw ModelOrderError("design_row: orders must be >= 1");
  if (K1 > n) throw ModelOrderError("design_row: K1 exceeds number of vertices");
  if (v < 0 || v >= n) throw DomainError("design_row: vertex index out of range");

  Eigen::VectorXd row(static_cast<Eigen::Index>(K1) * K2);
  for (int k2 = 1; k2 <= K2; ++k2) {
    const double psi = TimeBasis::eval(k2, t);
    for (int k1 = 1; k1 <= K1; ++k1)
      row((k1 - 1) * K2 + (k2 - 1)) = basis.eigenvectors(v, k1 - 1) * psi;
  }
  return row;
}

/// Bandlimited generalized graph signal: K1 x K2 coefficients over the joint
/// basis, entries confined to the box [-B, B].
struct BandlimitedSignal {
  int K1 = 1;
  int K2 = 1;
  double box_bound = 10.0;
  Eigen::MatrixXd Xi;  // K1 x K2
  std::shared_ptr<const SpectralBasis> graph_basis;

  void validate() const {
    if (!graph_basis) throw DomainError("signal: missing graph basis");
    if (K1 < 1 || K2 < 1) throw ModelOrderError("signal: orders must be >= 1");
    if (K1 > graph_basis->size()) throw ModelOrderError("signal: K1 exceeds N");
    if (Xi.rows() != K1 || Xi.cols() != K2) throw ShapeError("signal: Xi has wrong shape");
    if (Xi.size() > 0 && Xi.cwiseAbs().maxCoeff() > box_bound)
      throw DomainError("signal: coefficient outside the box");
  }

  double evaluate(int v, double t) const {
    const SpectralBasis& basis = *graph_basis;
    if (v < 0 || v >= basis.size()) throw DomainError("signal: vertex index out of range");
    double acc = 0.0;
    for (int k2 = 1; k2 <= K2; ++k2) {
      const double psi = TimeBasis::eval(k2, t);
      for (int k1 = 1; k1 <= K1; ++k1)
        acc += Xi(k1 - 1, k2 - 1) * basis.eigenvectors(v, k1 - 1) * psi;
    }
    return acc;
  }
};

inline double evaluate_signal(const BandlimitedSignal& sig, int v, double t) {
  return sig.evaluate(v, t);
}

inline nlohmann::json signal_to_json(const BandlimitedSignal& sig) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(sig.Xi.size()));
  for (int r = 0; r < sig.Xi.rows(); ++r)
    for (int c = 0; c < sig.Xi.cols(); ++c) flat.push_back(sig.Xi(r, c));
  return nlohmann::json{{"K1", sig.K1}, {"K2", sig.K2}, {"B", sig.box_bound}, {"Xi", flat}};
}

/// Inverse of signal_to_json; the graph basis is attached by the caller
/// (it travels separately, via the edge-list/coords files).
inline BandlimitedSignal signal_from_json(const nlohmann::json& j,
                                          std::shared_ptr<const SpectralBasis> basis) {
  BandlimitedSignal sig;
  sig.K1 = j.at("K1").get<int>();
  sig.K2 = j.at("K2").get<int>();
  sig.box_bound = j.at("B").get<double>();
  const auto flat = j.at("Xi").get<std::vector<double>>();
  if (static_cast<int>(flat.size()) != sig.K1 * sig.K2)
    throw IOError("signal json: Xi length does not match K1*K2");
  sig.Xi.resize(sig.K1, sig.K2);
  for (int r = 0; r < sig.K1; ++r)
    for (int c = 0; c < sig.K2; ++c)
      sig.Xi(r, c) = flat[static_cast<std::size_t>(r * sig.K2 + c)];
  sig.graph_basis = std::move(basis);
  sig.validate();
  return sig;
}

}  // namespace ggsp
