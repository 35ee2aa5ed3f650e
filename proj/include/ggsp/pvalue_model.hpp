// Two-group mixture machinery: the marginal p-value family f_mix(p|zeta),
// the known null density f0, and the derived pi0, f1 and lfdr.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "ggsp/errors.hpp"

namespace ggsp {

/// Numerically stable logistic function; saturates smoothly for |x| >= 50.
inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

/**
 * Parametric family of marginal p-value densities f_mix(p|zeta), p in (0,1].
 * `dlog_dzeta` is d/dzeta of ln density, used by the likelihood gradient.
 *
 * The shipped family is sigmoid-beta: a * p^(a-1) with a = sigmoid(zeta).
 * Under a uniform null this makes pi0 = sigmoid(zeta) and
 * lfdr(p) = p^(1-sigmoid(zeta)).
 */
struct MixtureFamily {
  std::string name;
  std::function<double(double p, double zeta)> density;
  std::function<double(double p, double zeta)> dlog_dzeta;

  static MixtureFamily sigmoid_beta() {
    MixtureFamily fam;
    fam.name = "sigmoid-beta";
    fam.density = [](double p, double zeta) {
      const double a = sigmoid(zeta);
      return a * std::pow(p, a - 1.0);
    };
    // ln f = ln a + (a-1) ln p,  da/dzeta = a(1-a)
    fam.dlog_dzeta = [](double p, double zeta) {
      const double a = sigmoid(zeta);
      return (1.0 - a) * (1.0 + a * std::log(p));
    };
    return fam;
  }
};

/// Null p-value density f0(p;(v,t)); the default is Unif[0,1].
struct NullDensity {
  std::function<double(double p, int v, double t)> density;

  static NullDensity uniform() {
    NullDensity nd;
    nd.density = [](double, int, double) { return 1.0; };
    return nd;
  }
};

inline double mixture_density(const MixtureFamily& fam, double p, double zeta) {
  if (p <= 0.0 || p > 1.0) throw DomainError("mixture_density: p outside (0,1]");
  return fam.density(p, zeta);
}

/// pi0 recovered from the marginal: f_mix(1|zeta) / f0(1;(v,t)).
inline double pi0_of(const MixtureFamily& fam, const NullDensity& null_density, double zeta,
                     int v, double t) {
  const double f0_at_1 = null_density.density(1.0, v, t);
  if (!(f0_at_1 > 0.0)) throw ModelViolation("pi0_of: f0(1) must be positive");
  const double pi0 = fam.density(1.0, zeta) / f0_at_1;
  if (!(pi0 > 0.0) || !(pi0 < 1.0))
    throw ModelViolation("pi0_of: recovered pi0 outside (0,1)");
  return pi0;
}

/// Alternative density recovered from the marginal:
/// (f_mix - pi0*f0) / (1 - pi0). Small negative values (above -1e-12) are
/// floating-point noise and clamp to zero; anything below is a genuine
/// model violation.
inline double f1_of(const MixtureFamily& fam, const NullDensity& null_density, double p,
                    double zeta, int v, double t) {
  if (p <= 0.0 || p > 1.0) throw DomainError("f1_of: p outside (0,1]");
  const double pi0 = pi0_of(fam, null_density, zeta, v, t);
  const double val =
      (fam.density(p, zeta) - pi0 * null_density.density(p, v, t)) / (1.0 - pi0);
  if (val < -1e-12) throw ModelViolation("f1_of: negative alternative density");
  return std::max(val, 0.0);
}

/// Local false discovery rate pi0*f0(p) / f_mix(p|zeta), clamped into [0,1].
inline double lfdr(const MixtureFamily& fam, const NullDensity& null_density, double p,
                   double zeta, int v, double t) {
  if (p <= 0.0 || p > 1.0) throw DomainError("lfdr: p outside (0,1]");
  const double pi0 = pi0_of(fam, null_density, zeta, v, t);
  const double ratio = pi0 * null_density.density(p, v, t) / fam.density(p, zeta);
  return std::clamp(ratio, 0.0, 1.0);
}

}  // namespace ggsp
