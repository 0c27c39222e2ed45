#pragma once

#include <cmath>
#include <numbers>

#include "constants.hpp"
#include "errors.hpp"
#include "readout_noise.hpp"
#include "sample.hpp"

namespace nvsens {

struct SensitivityFactors {
  double projection_limit = 0.0;  // T/sqrt(Hz)
  double dephasing_factor = 1.0;
  double readout_factor = 1.0;
  double overhead_factor = 1.0;

  double product() const { return projection_limit * dephasing_factor * readout_factor * overhead_factor; }
};

struct SensitivityReport {
  double eta_T_per_sqrtHz = 0.0;
  SensitivityFactors factors;
  Protocol protocol = Protocol::Ramsey;
  ProtocolParams inputs;
  double coherence_time_s = 0.0;  // T2* or T2 used for the dephasing factor
  // Set when the C^2 n_avg << 1 approximation behind the shot-noise form is
  // poor (C^2 n_avg > 0.1).
  bool approximation_flag = false;
  // CW-ODMR only: detuning of maximum slope, Hz.
  double optimum_detuning_hz = 0.0;
};

// hbar / (g_e mu_B) in T s.
inline double hbar_over_ge_muB() { return 1.0 / constants().gamma_e(); }

inline double overhead_factor(double t_i, double tau, double t_r) {
  if (!(tau > 0.0)) throw ValidationError("tau_s", "must be positive");
  return std::sqrt((t_i + tau + t_r) / tau);
}

inline double eta_spin_projection(double n, double tau, int delta_ms) {
  if (!(n >= 1.0)) throw ValidationError("n_sensors", "must be >= 1");
  if (!(tau > 0.0)) throw ValidationError("tau_s", "must be positive");
  if (delta_ms != 1 && delta_ms != 2) throw ValidationError("delta_ms", "must be 1 or 2");
  return hbar_over_ge_muB() / delta_ms / std::sqrt(n * tau);
}

inline double dephasing_factor(double tau, double t_coh, double p) {
  if (!(t_coh > 0.0)) throw ValidationError("coherence_time", "must be positive");
  return std::exp(std::pow(tau / t_coh, p));
}

namespace detail {

inline SensitivityReport finish(SensitivityReport r) {
  r.eta_T_per_sqrtHz = r.factors.product();
  return r;
}

inline void require_protocol(const ProtocolParams& p, Protocol want) {
  p.validate();
  if (p.protocol != want)
    throw ValidationError("protocol", std::string("expected ") + to_string(want) + ", got " + to_string(p.protocol));
}

}  // namespace detail

inline SensitivityReport eta_ramsey_exact(const ProtocolParams& p, double t2star) {
  detail::require_protocol(p, Protocol::Ramsey);
  SensitivityReport r;
  r.protocol = p.protocol;
  r.inputs = p;
  r.coherence_time_s = t2star;
  r.factors.projection_limit = eta_spin_projection(p.n_sensors, p.tau_s, p.delta_ms);
  r.factors.dephasing_factor = dephasing_factor(p.tau_s, t2star, p.p_exponent);
  r.factors.readout_factor = sigma_r_from_contrast(p.contrast, p.n_avg);
  r.factors.overhead_factor = overhead_factor(p.t_i_s, p.tau_s, p.t_r_s);
  return detail::finish(r);
}

// Shot-noise form, valid for C^2 n_avg << 1.
inline SensitivityReport eta_ramsey_shot(const ProtocolParams& p, double t2star) {
  detail::require_protocol(p, Protocol::Ramsey);
  if (!(p.contrast > 0.0)) throw ValidationError("contrast", "must be positive");
  if (!(p.n_avg > 0.0)) throw ValidationError("n_avg", "must be positive");
  SensitivityReport r;
  r.protocol = p.protocol;
  r.inputs = p;
  r.coherence_time_s = t2star;
  r.factors.projection_limit = eta_spin_projection(p.n_sensors, p.tau_s, p.delta_ms);
  r.factors.dephasing_factor = dephasing_factor(p.tau_s, t2star, p.p_exponent);
  r.factors.readout_factor = 1.0 / (p.contrast * std::sqrt(p.n_avg));
  r.factors.overhead_factor = overhead_factor(p.t_i_s, p.tau_s, p.t_r_s);
  r.approximation_flag = p.contrast * p.contrast * p.n_avg > 0.1;
  return detail::finish(r);
}

// Lorentzian CW-ODMR line probed at its steepest point.
inline SensitivityReport eta_cw_odmr(double linewidth_hz, double contrast, double rate_hz) {
  if (!(linewidth_hz > 0.0)) throw ValidationError("linewidth_hz", "must be positive");
  if (!(contrast > 0.0 && contrast <= 1.0)) throw ValidationError("contrast", "must lie in (0, 1]");
  if (!(rate_hz > 0.0)) throw ValidationError("rate_r_hz", "must be positive");
  const double h_over = constants().h / (constants().g_e * constants().mu_B);
  SensitivityReport r;
  r.protocol = Protocol::CWODMR;
  r.inputs.protocol = Protocol::CWODMR;
  r.inputs.contrast = contrast;
  r.inputs.rate_r_hz = rate_hz;
  r.inputs.linewidth_hz = linewidth_hz;
  r.factors.projection_limit = 4.0 / (3.0 * std::sqrt(3.0)) * h_over * linewidth_hz / std::sqrt(rate_hz);
  r.factors.readout_factor = 1.0 / contrast;
  r.optimum_detuning_hz = linewidth_hz / (2.0 * std::sqrt(3.0));
  return detail::finish(r);
}

// Pulsed ODMR with pi-pulse duration T2*; n_photons is photons per readout.
inline SensitivityReport eta_pulsed_odmr(double t2star, double contrast, double n_photons, double t_i, double t_r) {
  if (!(t2star > 0.0)) throw ValidationError("t2star", "must be positive");
  if (!(contrast > 0.0 && contrast <= 1.0)) throw ValidationError("contrast", "must lie in (0, 1]");
  if (!(n_photons > 0.0)) throw ValidationError("n_photons", "must be positive");
  if (!(t_i >= 0.0 && t_r >= 0.0)) throw ValidationError("overhead", "t_i and t_r must be >= 0");
  SensitivityReport r;
  r.protocol = Protocol::PulsedODMR;
  r.inputs.protocol = Protocol::PulsedODMR;
  r.inputs.tau_s = t2star;
  r.inputs.t_i_s = t_i;
  r.inputs.t_r_s = t_r;
  r.inputs.contrast = contrast;
  r.coherence_time_s = t2star;
  r.factors.projection_limit = 8.0 / (3.0 * std::sqrt(3.0)) * hbar_over_ge_muB() / std::sqrt(n_photons * t2star);
  r.factors.readout_factor = 1.0 / contrast;
  r.factors.overhead_factor = overhead_factor(t_i, t2star, t_r);
  return detail::finish(r);
}

namespace detail {

inline SensitivityReport echo_like(const ProtocolParams& p, double t_coh_eff, bool phase_locked) {
  SensitivityReport r;
  r.protocol = p.protocol;
  r.inputs = p;
  r.coherence_time_s = t_coh_eff;
  r.factors.projection_limit = 0.5 * std::numbers::pi * eta_spin_projection(p.n_sensors, p.tau_s, p.delta_ms) *
                               (phase_locked ? 1.0 : std::sqrt(2.0));
  r.factors.dephasing_factor = dephasing_factor(p.tau_s, t_coh_eff, p.p_exponent);
  r.factors.readout_factor = sigma_r_from_contrast(p.contrast, p.n_avg);
  r.factors.overhead_factor = overhead_factor(p.t_i_s, p.tau_s, p.t_r_s);
  return finish(r);
}

}  // namespace detail

// AC sensitivity of a Hahn echo; tau is the full interrogation time. An
// unknown AC phase costs sqrt(2), booked on the projection factor.
inline SensitivityReport eta_hahn_echo(const ProtocolParams& p, double t2, bool phase_locked = true) {
  detail::require_protocol(p, Protocol::HahnEcho);
  return detail::echo_like(p, t2, phase_locked);
}

// CPMG-k sensitivity with tau = k T_B / 2 and coherence time k^s T2.
// p.tau_s is replaced by k T_B / 2 when p.t_b_s is set.
inline SensitivityReport eta_multipulse(ProtocolParams p, double t2, int k, double s, bool phase_locked = true) {
  if (k < 1) throw ValidationError("k_pulses", "must be >= 1");
  if (!(s >= 0.0 && s < 1.0)) throw ValidationError("s_scaling", "must lie in [0, 1)");
  if (!(t2 > 0.0)) throw ValidationError("t2", "must be positive");
  p.k_pulses = k;
  p.s_scaling = s;
  if (p.t_b_s > 0.0) p.tau_s = 0.5 * k * p.t_b_s;
  detail::require_protocol(p, Protocol::CPMG);
  return detail::echo_like(p, std::pow(static_cast<double>(k), s) * t2, phase_locked);
}

// Real-valued stationary point of the multipulse sensitivity (zero overhead).
inline double k_opt_continuous(double t2, double t_b, double p, double s) {
  if (!(t2 > 0.0 && t_b > 0.0 && p > 0.0)) throw ValidationError("k_opt", "t2, t_b and p must be positive");
  if (!(s >= 0.0 && s < 1.0)) throw ValidationError("s_scaling", "must lie in [0, 1)");
  const double e = p * (1.0 - s);
  return std::pow(std::pow(2.0 * t2 / t_b, p) / (2.0 * e), 1.0 / e);
}

namespace detail {

// ln of the zero-overhead multipulse sensitivity up to k-independent terms.
inline double log_eta_multi(double k, double t2, double t_b, double p, double s) {
  const double tau = 0.5 * k * t_b;
  return -0.5 * std::log(tau) + std::pow(tau / (std::pow(k, s) * t2), p);
}

}  // namespace detail

// Integer pulse count: the better of floor/ceil of the stationary point,
// never below 1.
inline int k_opt(double t2, double t_b, double p, double s) {
  const double kc = k_opt_continuous(t2, t_b, p, s);
  if (!(kc > 1.0)) return 1;
  if (kc > 1e9) throw DomainError("k_opt exceeds 1e9 pulses");
  const double lo = std::floor(kc), hi = std::ceil(kc);
  return detail::log_eta_multi(hi, t2, t_b, p, s) < detail::log_eta_multi(lo, t2, t_b, p, s)
             ? static_cast<int>(hi)
             : static_cast<int>(lo);
}

}  // namespace nvsens
