#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "hamiltonian.hpp"
#include "sample.hpp"

namespace nvsens {

// Dipolar dephasing/decoherence rates per ppm of each spin species, s^-1/ppm.
struct ScalingConstants {
  double a_n = 101.0e3;              // N_S0, T2*
  double b_n = 6.25e3;               // N_S0, T2 (Hahn echo)
  double a_c13 = 0.100e3;            // 13C, T2*
  double a_nv_perp_group = 165.0e3;  // NV- in other orientation groups
  double a_nv_same_group = 1.5 * 165.0e3;
  double a_n_epr = 130.0e3;          // from EPR linewidths, cross-check only
};

inline constexpr ScalingConstants kScaling{};

namespace detail {
inline double rate_to_time(double rate) {
  return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}
inline void require_nonneg(const char* field, double v) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(field, "must be finite and >= 0");
}
}  // namespace detail

inline double t2star_nitrogen(double n_s0_ppm) {
  detail::require_nonneg("n_s0_ppm", n_s0_ppm);
  return detail::rate_to_time(kScaling.a_n * n_s0_ppm);
}

inline double t2_nitrogen(double n_s0_ppm, double t2_other_s = std::numeric_limits<double>::infinity()) {
  detail::require_nonneg("n_s0_ppm", n_s0_ppm);
  if (!(t2_other_s > 0.0)) throw ValidationError("t2_other_s", "must be positive");
  return detail::rate_to_time(kScaling.b_n * n_s0_ppm + 1.0 / t2_other_s);
}

inline double t2star_c13(double c13_ppm) {
  detail::require_nonneg("c13_ppm", c13_ppm);
  return detail::rate_to_time(kScaling.a_c13 * c13_ppm);
}

// The linear 13C law assumes a dilute spin bath (at most 5% 13C).
inline bool c13_dilute_limit(double c13_ppm) { return c13_ppm / 1e6 <= 0.05; }

inline double t2star_nvnv(double nv_parallel_ppm, double nv_nonparallel_ppm, double varsigma_par,
                          double varsigma_nonpar) {
  detail::require_nonneg("nv_parallel_ppm", nv_parallel_ppm);
  detail::require_nonneg("nv_nonparallel_ppm", nv_nonparallel_ppm);
  detail::require_unit_interval("varsigma_par", varsigma_par);
  detail::require_unit_interval("varsigma_nonpar", varsigma_nonpar);
  return detail::rate_to_time(varsigma_par * kScaling.a_nv_same_group * nv_parallel_ppm +
                              varsigma_nonpar * kScaling.a_nv_perp_group * nv_nonparallel_ppm);
}

// Dephasing rate from an ensemble spread of transverse strain/electric
// coupling, suppressed by the axial Zeeman term.
inline double strain_electric_rate(double xi_spread_hz, double xi_perp_hz, double beta_z_hz) {
  detail::require_nonneg("xi_perp_spread_hz", xi_spread_hz);
  detail::require_nonneg("xi_perp_hz", xi_perp_hz);
  if (!std::isfinite(beta_z_hz)) throw ValidationError("beta_z_hz", "must be finite");
  if (xi_spread_hz == 0.0) return 0.0;
  const auto sz = stark_zeeman_analysis(xi_perp_hz, 0.0, beta_z_hz);
  return std::numbers::pi * xi_spread_hz * std::abs(sz.dnu_dxi);
}

struct DephasingEnvironment {
  double beta_z_hz = 0.0;
  double gradients_rate = 0.0;      // s^-1
  double temp_rate = 0.0;           // s^-1
  double axial_strain_rate = 0.0;   // s^-1, common-mode in the DQ basis
  double nv_group_fraction = 0.25;  // share of NV- in the sensing orientation
  double varsigma_par = 1.0;
  double varsigma_nonpar = 0.0;
  // NV0 coupling, s^-1/ppm. Zero unless set (e.g. to kScaling.a_n).
  double a_nv0 = 0.0;
  double drive_suppression = 1.0;   // fraction of bath dephasing removed by the drive

  void validate() const {
    for (auto [n, v] : {std::pair{"beta_z_hz", beta_z_hz}})
      if (!std::isfinite(v)) throw ValidationError(n, "must be finite");
    detail::require_nonneg("gradients_rate", gradients_rate);
    detail::require_nonneg("temp_rate", temp_rate);
    detail::require_nonneg("axial_strain_rate", axial_strain_rate);
    detail::require_nonneg("a_nv0", a_nv0);
    detail::require_unit_interval("nv_group_fraction", nv_group_fraction);
    detail::require_unit_interval("varsigma_par", varsigma_par);
    detail::require_unit_interval("varsigma_nonpar", varsigma_nonpar);
    detail::require_unit_interval("drive_suppression", drive_suppression);
  }
};

enum class BudgetKind { T2star, T2 };

struct DephasingBudget {
  std::vector<std::pair<std::string, double>> entries;  // mechanism, rate s^-1
  BudgetKind kind = BudgetKind::T2star;
  Basis basis = Basis::SQ;
  bool bath_drive = false;
  double drive_suppression = 1.0;

  double total_rate() const {
    double s = 0.0;
    for (const auto& e : entries) s += e.second;
    return s;
  }
  double total_time_s() const { return detail::rate_to_time(total_rate()); }
  double total_t2star_s() const { return total_time_s(); }
  double rate(const std::string& name) const {
    for (const auto& e : entries)
      if (e.first == name) return e.second;
    throw ValidationError(name, "no such budget entry");
  }
  std::string dominant() const {
    if (entries.empty()) return {};
    return std::max_element(entries.begin(), entries.end(),
                            [](const auto& a, const auto& b) { return a.second < b.second; })
        ->first;
  }
  DephasingBudget without(const std::string& name) const {
    DephasingBudget b = *this;
    std::erase_if(b.entries, [&](const auto& e) { return e.first == name; });
    return b;
  }
};

// Itemized T2* budget. In the DQ basis magnetic rates double (including the
// T1 floor) while temperature and axial strain cancel as common mode. The
// bath drive removes a fraction of the N_S0 and off-axis NV- rates.
inline DephasingBudget total_budget(const DiamondSample& s, const DephasingEnvironment& env = {},
                                    Basis basis = Basis::SQ, bool bath_drive = false) {
  env.validate();
  const bool dq = basis == Basis::DQ;
  const double mag = dq ? 2.0 : 1.0;
  const double drive = bath_drive ? 1.0 - env.drive_suppression : 1.0;
  const double nv_par = env.nv_group_fraction * s.nv_minus_ppm();
  const double nv_nonpar = s.nv_minus_ppm() - nv_par;

  DephasingBudget b;
  b.basis = basis;
  b.bath_drive = bath_drive;
  b.drive_suppression = env.drive_suppression;
  b.entries = {
      {"N_S0", mag * drive * kScaling.a_n * s.n_s0_ppm()},
      {"C13", mag * kScaling.a_c13 * s.c13_ppm()},
      {"NV_par", mag * env.varsigma_par * kScaling.a_nv_same_group * nv_par},
      {"NV_nonpar", mag * drive * env.varsigma_nonpar * kScaling.a_nv_perp_group * nv_nonpar},
      {"NV0", mag * env.a_nv0 * s.nv0_ppm()},
      {"strain_axial", dq ? 0.0 : env.axial_strain_rate},
      {"strain_transverse", strain_electric_rate(s.xi_perp_spread_hz(), s.xi_perp_hz(), env.beta_z_hz)},
      {"gradients", mag * env.gradients_rate},
      {"temperature", dq ? 0.0 : env.temp_rate},
      {"other", std::isinf(s.t2star_other_s()) ? 0.0 : 1.0 / s.t2star_other_s()},
      {"T1", mag / (2.0 * s.t1_s())},
  };
  return b;
}

// Hahn-echo T2 budget: nitrogen bath, residual mechanisms, T1 floor.
inline DephasingBudget t2_budget(const DiamondSample& s, double t2_other_s = std::numeric_limits<double>::infinity()) {
  if (!(t2_other_s > 0.0)) throw ValidationError("t2_other_s", "must be positive");
  DephasingBudget b;
  b.kind = BudgetKind::T2;
  b.entries = {
      {"N_S0", kScaling.b_n * s.n_s0_ppm()},
      {"other", std::isinf(t2_other_s) ? 0.0 : 1.0 / t2_other_s},
      {"T1", 1.0 / (2.0 * s.t1_s())},
  };
  return b;
}

inline double lorentzian_fwhm(double t2star) {
  if (!(t2star > 0.0)) throw ValidationError("t2star", "must be positive");
  return 1.0 / (std::numbers::pi * t2star);
}

inline double gaussian_sigma(double t2star) {
  if (!(t2star > 0.0)) throw ValidationError("t2star", "must be positive");
  return 1.0 / (std::sqrt(2.0) * std::numbers::pi * t2star);
}

enum class LineShape { Lorentzian, Gaussian };

// T2* from the peak-to-peak width delta of a derivative EPR line.
inline double t2star_from_epr_delta(double delta_hz, LineShape shape) {
  if (!(delta_hz > 0.0)) throw ValidationError("delta_hz", "must be positive");
  if (shape == LineShape::Lorentzian) return 1.0 / (std::sqrt(3.0) * std::numbers::pi * delta_hz);
  return std::sqrt(2.0) / (std::numbers::pi * delta_hz);
}

}  // namespace nvsens
