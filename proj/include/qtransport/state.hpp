#pragma once

#include <cmath>

#include "qtransport/core.hpp"

namespace qtransport {

/// Wavefunction stored as a unit-scale vector plus the natural log of its true
/// norm factor: psi_true = exp(log_scale) * amplitudes.
struct StateVector {
  ComplexVector amplitudes;
  double log_scale = 0.0;
  double time = 0.0;

  [[nodiscard]] Eigen::Index size() const { return amplitudes.size(); }

  /// Natural log of the true Euclidean norm.
  [[nodiscard]] double log_norm() const { return log_scale + std::log(amplitudes.norm()); }

  /// |<site|psi>|^2 including the scale factor. Overflows for huge log_scale.
  [[nodiscard]] double probability(Eigen::Index site) const {
    return std::norm(amplitudes[site]) * std::exp(2.0 * log_scale);
  }

  /// Moves the stored norm into log_scale so that |amplitudes| == 1.
  void renormalize() {
    const double n = amplitudes.norm();
    if (n > 0.0) {
      amplitudes /= n;
      log_scale += std::log(n);
    }
  }
};

}  // namespace qtransport
