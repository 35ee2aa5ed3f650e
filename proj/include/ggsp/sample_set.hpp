// Observed records (v_m, t_m, p_m), optionally with ground-truth indicators.
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ggsp/errors.hpp"

namespace ggsp {

inline constexpr double pvalue_floor = 1e-15;

/**
 * Sample set S: one record per hypothesis test. p-values are clamped into
 * [1e-15, 1] on ingestion so ln p stays finite; `clamp_count` records how
 * often that happened (surfaced in fit diagnostics).
 *
 * `truth` is empty, or one indicator per record: theta_m = 1 for a true
 * alternative.
 */
struct SampleSet {
  std::vector<int> vertex;
  std::vector<double> time;
  std::vector<double> pvalue;
  std::vector<std::uint8_t> truth;
  int clamp_count = 0;

  std::size_t size() const { return pvalue.size(); }
  bool has_truth() const { return !truth.empty(); }

  static SampleSet create(std::vector<int> vertex, std::vector<double> time,
                          std::vector<double> pvalue,
                          std::vector<std::uint8_t> truth = {}) {
    if (pvalue.empty()) throw EmptySample("sample set: no records");
    if (vertex.size() != pvalue.size() || time.size() != pvalue.size())
      throw ShapeError("sample set: field lengths differ");
    if (!truth.empty() && truth.size() != pvalue.size())
      throw ShapeError("sample set: truth length differs");

    SampleSet s;
    s.vertex = std::move(vertex);
    s.time = std::move(time);
    s.truth = std::move(truth);
    s.pvalue = std::move(pvalue);
    for (double& p : s.pvalue) {
      if (p < pvalue_floor) {
        p = pvalue_floor;
        ++s.clamp_count;
      } else if (p > 1.0) {
        p = 1.0;
        ++s.clamp_count;
      }
    }
    for (int v : s.vertex)
      if (v < 0) throw DomainError("sample set: negative vertex index");
    for (std::uint8_t th : s.truth)
      if (th > 1) throw DomainError("sample set: truth values must be 0/1");
    return s;
  }

  /// Concatenation; log-likelihoods over the result sum.
  SampleSet& append(const SampleSet& other) {
    vertex.insert(vertex.end(), other.vertex.begin(), other.vertex.end());
    time.insert(time.end(), other.time.begin(), other.time.end());
    pvalue.insert(pvalue.end(), other.pvalue.begin(), other.pvalue.end());
    if (has_truth() != other.has_truth())
      throw ShapeError("sample set: cannot append mixed truth availability");
    truth.insert(truth.end(), other.truth.begin(), other.truth.end());
    clamp_count += other.clamp_count;
    return *this;
  }
};

}  // namespace ggsp
