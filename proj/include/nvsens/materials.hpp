#pragma once

#include <cmath>

#include "constants.hpp"
#include "errors.hpp"

namespace nvsens {

struct Diffusion {
  double D_m2s;
  double r_rms_m;
  // D and r_rms at E_a + 0.3 eV (low) and E_a - 0.3 eV (high).
  double D_low_m2s, D_high_m2s;
  double r_rms_low_m, r_rms_high_m;
};

inline constexpr double kVacancyD0 = 1.6e-7;  // m^2/s
inline constexpr double kVacancyEa = 2.3;     // eV
inline constexpr double kEaUncertainty = 0.3; // eV

// Arrhenius vacancy diffusion with r_rms = sqrt(6 D t).
inline Diffusion vacancy_diffusion(double temp_K, double duration_s, double d0_m2s = kVacancyD0,
                                   double ea_eV = kVacancyEa) {
  if (!(temp_K > 0.0)) throw ValidationError("temp_K", "must be positive");
  if (!(duration_s >= 0.0)) throw ValidationError("duration_s", "must be >= 0");
  if (!(d0_m2s > 0.0)) throw ValidationError("d0_m2s", "must be positive");
  const auto& k = constants();
  auto d_of = [&](double ea) { return d0_m2s * std::exp(-ea * k.e_charge / (k.k_B * temp_K)); };
  auto r_of = [&](double d) { return std::sqrt(6.0 * d * duration_s); };
  Diffusion out{};
  out.D_m2s = d_of(ea_eV);
  out.r_rms_m = r_of(out.D_m2s);
  out.D_low_m2s = d_of(ea_eV + kEaUncertainty);
  out.D_high_m2s = d_of(ea_eV - kEaUncertainty);
  out.r_rms_low_m = r_of(out.D_low_m2s);
  out.r_rms_high_m = r_of(out.D_high_m2s);
  return out;
}

// Electron dose (cm^-2) that leaves one surviving vacancy per
// nitrogens_per_nv nitrogen atoms.
inline double irradiation_dose(double n_total_ppm, double vacancy_yield_per_e_per_um = 2e-4,
                               double recombination_frac = 0.4, double nitrogens_per_nv = 2.0) {
  if (!(n_total_ppm > 0.0)) throw ValidationError("n_total_ppm", "must be positive");
  if (!(vacancy_yield_per_e_per_um > 0.0)) throw ValidationError("vacancy_yield", "must be positive");
  if (!(recombination_frac >= 0.0 && recombination_frac < 1.0))
    throw ValidationError("recombination_frac", "must lie in [0, 1)");
  if (!(nitrogens_per_nv > 0.0)) throw ValidationError("nitrogens_per_nv", "must be positive");
  const double vacancies_needed = n_total_ppm * kPpmToPerCm3 / nitrogens_per_nv;  // cm^-3
  const double per_e_per_cm = vacancy_yield_per_e_per_um * 1e4 * (1.0 - recombination_frac);
  return vacancies_needed / per_e_per_cm;
}

}  // namespace nvsens
