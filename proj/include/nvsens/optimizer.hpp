#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "constants.hpp"
#include "dephasing.hpp"
#include "errors.hpp"
#include "sample.hpp"
#include "sensitivity.hpp"

namespace nvsens {

struct MinimumResult {
  double x;
  double fx;
  int iterations;
};

// Golden-section search for a unimodal f on [lo, hi]. Stops once the
// bracket is narrower than rtol * |x|.
template <class F>
MinimumResult golden_section_minimize(F&& f, double lo, double hi, double rtol = 1e-8, int max_iter = 500) {
  if (!(lo < hi)) throw ValidationError("bracket", "need lo < hi");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  int it = 0;
  while (b - a > rtol * 0.5 * (std::abs(c) + std::abs(d)) && it < max_iter) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    ++it;
  }
  return fc < fd ? MinimumResult{c, fc, it} : MinimumResult{d, fd, it};
}

// tau-dependent part of the Ramsey sensitivity: exp((tau/T)^p) sqrt(tau + t_o) / tau.
inline double ramsey_tau_objective(double tau, double t2star, double p, double t_o) {
  return std::exp(std::pow(tau / t2star, p)) * std::sqrt(tau + t_o) / tau;
}

inline double optimal_tau(double t2star, double p, double t_o) {
  if (!(t2star > 0.0) || !std::isfinite(t2star)) throw ValidationError("t2star", "must be positive and finite");
  if (!(p > 0.0)) throw ValidationError("p", "must be positive");
  if (!(t_o >= 0.0) || !std::isfinite(t_o)) throw ValidationError("t_o", "must be finite and >= 0");
  // Minimize the logarithm; it has the same argmin and better conditioning.
  auto f = [&](double tau) {
    return std::pow(tau / t2star, p) + 0.5 * std::log(tau + t_o) - std::log(tau);
  };
  return golden_section_minimize(f, 1e-3 * t2star, 3.0 * t2star, 1e-8).x;
}

// Sensitivity gain from T2*_ref to T2*_new with tau re-optimized for each.
inline double enhancement(double t2star_new, double t2star_ref, double t_o, double p) {
  const double tn = optimal_tau(t2star_new, p, t_o);
  const double tr = optimal_tau(t2star_ref, p, t_o);
  return ramsey_tau_objective(tr, t2star_ref, p, t_o) / ramsey_tau_objective(tn, t2star_new, p, t_o);
}

struct NitrogenSweepOptions {
  double a_nv_minus = kScaling.a_nv_perp_group;  // s^-1/ppm
  double a_nv0 = 0.0;                            // s^-1/ppm
  double volume_mm3 = 1.0;
};

struct NitrogenSweepRow {
  double n_total_ppm;
  double t2star_s;
  double tau_s;
  double n_sensors;
  double photons;  // collected photons per measurement
  double eta_T_per_sqrtHz;
  bool above_knee;
};

struct NitrogenSweep {
  double kappa;     // s^-1/ppm
  double knee_ppm;  // 1 / (kappa T2*{other}); +inf without residual dephasing
  std::vector<NitrogenSweepRow> rows;
};

inline double nitrogen_kappa(const DiamondSample& s, double a_nv_minus, double a_nv0) {
  if (!(s.n_total_ppm() > 0.0)) throw ValidationError("n_total_ppm", "sweep template needs nitrogen");
  const double n = s.n_total_ppm();
  const double e = s.nv_minus_ppm() / n, e0 = s.nv0_ppm() / n;
  const double e_plus = std::max(0.0, 1.0 - (s.n_s0_ppm() + s.nv_minus_ppm() + s.nv0_ppm()) / n);
  return kScaling.a_n * (1.0 - e - e0 - e_plus) + a_nv_minus * e + a_nv0 * e0;
}

// Ramsey sensitivity versus total nitrogen at fixed conversion efficiencies.
// tau is re-optimized at each point.
inline NitrogenSweep nitrogen_sweep(const DiamondSample& tmpl, const std::vector<double>& n_range,
                                    ProtocolParams protocol, const NitrogenSweepOptions& opt = {}) {
  protocol.protocol = Protocol::Ramsey;
  if (!(opt.volume_mm3 > 0.0)) throw ValidationError("volume_mm3", "must be positive");
  NitrogenSweep out;
  out.kappa = nitrogen_kappa(tmpl, opt.a_nv_minus, opt.a_nv0);
  const double other = tmpl.t2star_other_s();
  out.knee_ppm = std::isinf(other) ? std::numeric_limits<double>::infinity() : 1.0 / (out.kappa * other);
  const double e_conv = tmpl.nv_minus_ppm() / tmpl.n_total_ppm();
  for (double n : n_range) {
    if (!(n > 0.0)) throw ValidationError("n_total_ppm", "sweep values must be positive");
    NitrogenSweepRow r{};
    r.n_total_ppm = n;
    r.t2star_s = 1.0 / (out.kappa * n + (std::isinf(other) ? 0.0 : 1.0 / other));
    r.tau_s = optimal_tau(r.t2star_s, protocol.p_exponent, protocol.overhead_s());
    r.n_sensors = n * e_conv * kPpmToPerMm3 * opt.volume_mm3;
    r.photons = r.n_sensors * protocol.n_avg;
    ProtocolParams p = protocol;
    p.tau_s = r.tau_s;
    p.n_sensors = r.n_sensors;
    r.eta_T_per_sqrtHz = eta_ramsey_exact(p, r.t2star_s).eta_T_per_sqrtHz;
    r.above_knee = n > out.knee_ppm;
    out.rows.push_back(r);
  }
  return out;
}

struct InitPower {
  double energy_J;
  double power_W;
};

// Optical energy to initialize n_sensors with m photons each, delivered
// once per T2*.
inline InitPower init_power(double n_sensors, double m_photons_per_nv, double t2star, double wavelength_m) {
  if (!(n_sensors > 0.0 && m_photons_per_nv > 0.0 && t2star > 0.0 && wavelength_m > 0.0))
    throw ValidationError("init_power", "all inputs must be positive");
  const auto& k = constants();
  const double e = n_sensors * m_photons_per_nv * k.h * k.c / wavelength_m;
  return {e, e / t2star};
}

}  // namespace nvsens
