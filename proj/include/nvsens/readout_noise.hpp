#pragma once

#include <cmath>

#include "errors.hpp"

namespace nvsens {

// Mean photons a (from m_s = 0) and b (from m_s = +-1) per readout.
struct ReadoutModel {
  double a = 0.0;
  double b = 0.0;

  void validate() const {
    if (!(std::isfinite(a) && std::isfinite(b)) || b < 0.0 || a < b)
      throw ValidationError("readout", "need a >= b >= 0");
  }
  double contrast() const { return (a - b) / (a + b); }
  double n_avg() const { return 0.5 * (a + b); }

  static ReadoutModel from_contrast(double c, double n_avg) {
    return {n_avg * (1.0 + c), n_avg * (1.0 - c)};
  }
};

inline double sigma_r(double a, double b) {
  ReadoutModel{a, b}.validate();
  if (a == b) throw DegenerateContrastError("a == b: readout carries no spin information");
  const double d = a - b;
  return std::sqrt(1.0 + 2.0 * (a + b) / (d * d));
}

inline double sigma_r_from_contrast(double c, double n_avg) {
  if (!(c > 0.0 && c <= 1.0)) throw ValidationError("contrast", "must lie in (0, 1]");
  if (!(n_avg > 0.0)) throw ValidationError("n_avg", "must be positive");
  return std::sqrt(1.0 + 1.0 / (c * c * n_avg));
}

inline double readout_fidelity(double a, double b) { return 1.0 / sigma_r(a, b); }

// Photon-number noise over fringe slope at fringe position phase = phi - vartheta.
inline double noise_quotient(double a, double b, double phase) {
  ReadoutModel{a, b}.validate();
  if (a == b) throw DegenerateContrastError("a == b: readout carries no spin information");
  const double s = std::sin(phase);
  if (std::abs(s) < 1e-15) throw ZeroSlopeError("fringe slope vanishes at this phase");
  const double half = std::sin(0.5 * phase), halfc = std::cos(0.5 * phase);
  const double proj = 0.25 * (a - b) * (a - b) * s * s;
  return std::sqrt((proj + b * halfc * halfc + a * half * half) / proj);
}

// Spin-projection noise over fringe slope: identically 1 wherever defined.
inline double spin_projection_quotient(double phi, double vartheta = 0.0) {
  const double s = std::sin(phi - vartheta);
  if (std::abs(s) < 1e-15) throw IndeterminateError("projection noise and slope both vanish");
  return std::abs(s) / std::abs(s);
}

}  // namespace nvsens
