#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "readout_noise.hpp"

namespace nvsens {

// Pseudo-spin-1/2 state. |up> = |m_s = 0>, |down> = |m_s = +1>.
// Matrices act on the (down, up) column vector and sigma_z = diag(1, -1).
struct SpinState {
  std::complex<double> c_up{1.0, 0.0};
  std::complex<double> c_down{0.0, 0.0};

  double norm() const { return std::norm(c_up) + std::norm(c_down); }
  double p_up() const { return std::norm(c_up); }
  // <S_z> in units of hbar/2.
  double sz() const { return std::norm(c_down) - std::norm(c_up); }
};

inline double ramsey_expectation(double phi, double vartheta) { return std::cos(phi - vartheta); }

// Closed-form final state of the Ramsey sequence, up to global phase.
inline SpinState ramsey_state(double phi, double vartheta) {
  const double h = 0.5 * (phi - vartheta);
  const std::complex<double> i{0.0, 1.0};
  return {-i * std::exp(i * vartheta) * std::sin(h), std::cos(h)};
}

struct RamseyResult {
  SpinState state;
  double phi;                  // accumulated phase, rad
  bool weak_drive_warning;     // gamma_e |B_sense| not << Rabi rate
};

inline RamseyResult propagate_ramsey(double b_sense, double tau, double b1_rabi, double vartheta) {
  using C = std::complex<double>;
  const C i{0.0, 1.0};
  const double r = 1.0 / std::sqrt(2.0);
  const double phi = constants().gamma_e() * b_sense * tau;

  // (down, up) components; start in |up>.
  C d = 0.0, u = 1.0;
  // exp(-i pi sigma_y / 4)
  C d1 = r * (d - u), u1 = r * (d + u);
  // exp(-i phi sigma_z / 2)
  d1 *= std::exp(-i * (0.5 * phi));
  u1 *= std::exp(i * (0.5 * phi));
  // second pi/2 pulse about an axis rotated by vartheta from y
  const C e = std::exp(i * vartheta);
  const C d2 = r * (d1 - std::conj(e) * u1);
  const C u2 = r * (e * d1 + u1);

  const bool warn = !(std::abs(constants().gamma_e() * b_sense) < 1e-2 * std::abs(b1_rabi));
  return {SpinState{u2, d2}, phi, warn};
}

struct HyperfineLines {
  double splitting_hz;
  std::vector<double> weights;  // line k sits at (k - (n-1)/2) * splitting
};

inline std::vector<double> fid_signal(const std::vector<double>& tau_grid, double t2star, double p,
                                      double fringe_freq_hz,
                                      const std::optional<HyperfineLines>& hf = std::nullopt) {
  if (!(t2star > 0.0)) throw ValidationError("t2star", "must be positive");
  if (!(p > 0.0)) throw ValidationError("p", "must be positive");
  const std::vector<double> unit{1.0};
  const auto& w = hf ? hf->weights : unit;
  const double split = hf ? hf->splitting_hz : 0.0;
  const double mid = 0.5 * (static_cast<double>(w.size()) - 1.0);
  std::vector<double> out;
  out.reserve(tau_grid.size());
  for (double t : tau_grid) {
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k)
      s += w[k] * std::cos(2.0 * std::numbers::pi * (fringe_freq_hz + (k - mid) * split) * t);
    out.push_back(s * std::exp(-std::pow(std::abs(t) / t2star, p)));
  }
  return out;
}

// Echo phase for an AC field B sin(2 pi t / T_B + alpha) with pi pulse at tau/2.
// Phase-locked means alpha = 0; otherwise the RMS over uniform alpha.
inline double hahn_echo_phase(double b_ac_amplitude, double t_b, double tau, bool phase_locked) {
  if (!(tau > 0.0)) throw ValidationError("tau", "must be positive");
  if (!(t_b > 0.0)) throw ValidationError("t_b", "must be positive");
  if (std::isinf(t_b) || b_ac_amplitude == 0.0) return 0.0;
  const double w = 2.0 * std::numbers::pi / t_b;
  const double scale = constants().gamma_e() * b_ac_amplitude / w;
  if (phase_locked) return scale * (1.0 + std::cos(w * tau) - 2.0 * std::cos(0.5 * w * tau));
  const std::complex<double> i{0.0, 1.0};
  const double amp = std::abs(1.0 + std::exp(i * (w * tau)) - 2.0 * std::exp(i * (0.5 * w * tau)));
  return scale * amp / std::sqrt(2.0);
}

namespace detail {

// One readout: branch by Born probability, then Poisson counts.
inline std::uint64_t draw_counts(double p_up, const ReadoutModel& m, Philox4x32& g) {
  const double mean = g.uniform() < p_up ? m.a : m.b;
  if (mean <= 0.0) return 0;
  std::poisson_distribution<std::uint64_t> pois(mean);
  return pois(g);
}

}  // namespace detail

inline std::vector<std::uint64_t> monte_carlo_readout(const SpinState& state, const ReadoutModel& model,
                                                      std::size_t shots, std::uint64_t seed) {
  model.validate();
  if (shots < 1) throw ValidationError("shots", "must be at least 1");
  std::vector<std::uint64_t> out(shots);
  const double p_up = state.p_up() / state.norm();
  parallel_for(shots, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t s = lo; s < hi; ++s) {
      Philox4x32 g(seed, s);
      out[s] = detail::draw_counts(p_up, model, g);
    }
  });
  return out;
}

struct FieldCalibration {
  double a;
  double b;
  double tau;
  double vartheta;
  // Fringe amplitude at tau, e.g. exp(-(tau/T2*)^p); 1 for no dephasing.
  double visibility = 1.0;
};

// Linearized inversion of the Ramsey fringe from mean photon counts.
inline double estimate_field(const std::vector<std::uint64_t>& counts, const FieldCalibration& cal) {
  if (counts.empty()) throw ValidationError("counts", "must be non-empty");
  ReadoutModel{cal.a, cal.b}.validate();
  if (cal.a == cal.b) throw DegenerateContrastError("a == b: readout carries no spin information");
  const double sv = std::sin(cal.vartheta);
  if (std::abs(sv) < 1e-12) throw LinearizationError("vartheta = 0: linear term of the fringe vanishes");
  if (!(cal.tau > 0.0) || !(cal.visibility > 0.0)) throw ValidationError("calibration", "tau and visibility must be positive");
  long double sum = 0.0L;
  for (auto c : counts) sum += static_cast<long double>(c);
  const double mean = static_cast<double>(sum / counts.size());
  // <N> = (a+b)/2 - (a-b)/2 * v cos(phi - vartheta), and <S_z> = v cos(phi - vartheta).
  const double sz = -(mean - 0.5 * (cal.a + cal.b)) / (0.5 * (cal.a - cal.b));
  return (sz - cal.visibility * std::cos(cal.vartheta)) / (cal.visibility * sv * constants().gamma_e() * cal.tau);
}

// Symmetric alpha-stable draw (Chambers-Mallows-Stuck) with unit scale:
// E[cos(c X)] = exp(-|c|^alpha). alpha = 1 is Cauchy, alpha = 2 is N(0, 2).
inline double symmetric_stable(double alpha, Philox4x32& g) {
  const double pi = std::numbers::pi;
  const double v = pi * (g.uniform() - 0.5);
  if (alpha == 1.0) return std::tan(v);
  double w;
  do w = -std::log1p(-g.uniform()); while (w == 0.0);
  return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
         std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
}

struct RamseySimulation {
  ReadoutModel readout;
  double tau_s = 1e-6;
  double t2star_s = std::numeric_limits<double>::infinity();
  double p = 1.0;  // (0, 2]
  double vartheta = std::numbers::pi / 2.0;
  double b_sense_T = 0.0;
  std::size_t measurements = 1;
  std::uint64_t seed = 0;
};

// One single-shot Ramsey measurement per entry. Each measurement draws a
// random precession phase whose characteristic function is the FID envelope
// exp(-(tau/T2*)^p), then reads out with branch-then-Poisson sampling.
inline std::vector<std::uint64_t> simulate_ramsey(const RamseySimulation& sim) {
  sim.readout.validate();
  if (sim.measurements < 1) throw ValidationError("measurements", "must be at least 1");
  if (!(sim.tau_s > 0.0)) throw ValidationError("tau", "must be positive");
  if (!(sim.t2star_s > 0.0)) throw ValidationError("t2star", "must be positive");
  if (!(sim.p > 0.0 && sim.p <= 2.0))
    throw DomainError("dephasing phase distribution exists only for 0 < p <= 2");
  const double phi0 = constants().gamma_e() * sim.b_sense_T * sim.tau_s;
  const double scale = sim.tau_s / sim.t2star_s;
  std::vector<std::uint64_t> out(sim.measurements);
  parallel_for(sim.measurements, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t m = lo; m < hi; ++m) {
      Philox4x32 g(sim.seed, m);
      const double dphi = scale > 0.0 ? scale * symmetric_stable(sim.p, g) : 0.0;
      const auto st = ramsey_state(phi0 + dphi, sim.vartheta);
      out[m] = detail::draw_counts(st.p_up(), sim.readout, g);
    }
  });
  return out;
}

}  // namespace nvsens
