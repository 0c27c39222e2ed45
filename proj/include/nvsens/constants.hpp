#pragma once

#include <numbers>

namespace nvsens {

// Physical constants (SI, CODATA 2018 exact/recommended values) and the
// NV- ground-state parameters. Hamiltonian couplings are in Hz (H/h).
struct PhysicalConstants {
  double g_e;      // electronic g-factor
  double mu_B;     // J/T
  double mu_N;     // J/T
  double h;        // J s
  double hbar;     // J s
  double k_B;      // J/K
  double c;        // m/s
  double e_charge; // C
  double D;        // zero-field splitting, Hz
  double dD_dT;    // Hz/K
  double A_par_14N;
  double A_perp_14N;
  double P_14N;
  double A_par_15N;
  double A_perp_15N;
  double gamma_14N; // nuclear gyromagnetic ratio / 2pi, Hz/T
  double gamma_15N;
  double d_par;  // Hz per V/m
  double d_perp; // Hz per V/m

  // g_e mu_B / h in Hz/T.
  constexpr double gyromagnetic_hz_per_T() const { return g_e * mu_B / h; }
  // gamma_e = g_e mu_B / hbar in rad/(s T).
  constexpr double gamma_e() const { return g_e * mu_B / hbar; }
};

inline constexpr PhysicalConstants kConstants{
    .g_e = 2.003,
    .mu_B = 9.2740100783e-24,
    .mu_N = 5.0507837461e-27,
    .h = 6.62607015e-34,
    .hbar = 6.62607015e-34 / (2.0 * std::numbers::pi),
    .k_B = 1.380649e-23,
    .c = 299792458.0,
    .e_charge = 1.602176634e-19,
    .D = 2.870e9,
    .dD_dT = -74.0e3,
    .A_par_14N = -2.14e6,
    .A_perp_14N = -2.70e6,
    .P_14N = -4.945e6,
    .A_par_15N = 3.03e6,
    .A_perp_15N = 3.65e6,
    .gamma_14N = 3.0766e6,
    .gamma_15N = -4.3156e6,
    .d_par = 3.5e-3,
    .d_perp = 0.17,
};

constexpr const PhysicalConstants& constants() { return kConstants; }

// Concentration conversions for diamond (1.76e23 carbon atoms per cm^3).
inline constexpr double kPpmToPerCm3 = 1.76e17;
inline constexpr double kPpmToPerMm3 = 1.76e14;

// Natural 13C abundance in ppm of lattice sites.
inline constexpr double kNaturalC13Ppm = 10700.0;

}  // namespace nvsens
