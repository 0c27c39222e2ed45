#pragma once

#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"
#include "linalg.hpp"

namespace nvsens {

struct StrainCouplings {
  double M_z = 0.0, M_x = 0.0, M_y = 0.0, N_x = 0.0, N_y = 0.0;  // Hz
};

struct FieldEnvironment {
  std::array<double, 3> b_vec_T{0.0, 0.0, 0.0};
  std::array<double, 3> e_vec_Vpm{0.0, 0.0, 0.0};
  StrainCouplings strain{};

  void validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    for (double v : b_vec_T)
      if (!finite(v)) throw ValidationError("b_vec_T", "field component not finite");
    for (double v : e_vec_Vpm)
      if (!finite(v)) throw ValidationError("e_vec_Vpm", "field component not finite");
    for (double v : {strain.M_z, strain.M_x, strain.M_y, strain.N_x, strain.N_y})
      if (!finite(v)) throw ValidationError("strain", "coupling not finite");
    const double b = std::hypot(b_vec_T[0], b_vec_T[1], b_vec_T[2]);
    if (b > 1.0) throw ValidationError("b_vec_T", "|B| exceeds 1 T; check units");
  }
};

enum class Nucleus { None, N14, N15 };

struct BasisLabel {
  int two_ms;  // 2 m_s
  int two_mi;  // 2 m_I (0 when no nucleus)
};

struct SpinHamiltonian {
  CMatrix matrix;  // H/h in Hz
  std::vector<BasisLabel> basis;
  Nucleus nucleus = Nucleus::None;
};

namespace detail {

// Spin operators for spin j (given as 2j) in the descending m basis.
struct SpinOps {
  CMatrix x, y, z;
};

inline SpinOps spin_ops(int two_j) {
  const std::size_t n = static_cast<std::size_t>(two_j) + 1;
  const double j = two_j / 2.0;
  SpinOps s{CMatrix(n), CMatrix(n), CMatrix(n)};
  for (std::size_t k = 0; k < n; ++k) s.z(k, k) = j - static_cast<double>(k);
  // <m+1| J+ |m> with m = j - (k+1), row k.
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double m = j - static_cast<double>(k + 1);
    const double jp = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
    s.x(k, k + 1) = s.x(k + 1, k) = 0.5 * jp;
    s.y(k, k + 1) = cplx(0.0, -0.5 * jp);
    s.y(k + 1, k) = cplx(0.0, 0.5 * jp);
  }
  return s;
}

}  // namespace detail

// NV- ground-state Hamiltonian in Hz. Basis is m_s in (+1, 0, -1), with the
// nuclear m_I (descending) as the inner index when a nucleus is included.
inline SpinHamiltonian build_hamiltonian(const FieldEnvironment& env, Nucleus nucleus = Nucleus::None) {
  env.validate();
  const auto& k = constants();
  const auto S = detail::spin_ops(2);
  const double gam = k.gyromagnetic_hz_per_T();
  const auto& B = env.b_vec_T;
  const auto& E = env.e_vec_Vpm;
  const auto& st = env.strain;

  CMatrix szsz = S.z * S.z;
  CMatrix he = k.D * szsz;
  he += gam * B[0] * S.x + gam * B[1] * S.y + gam * B[2] * S.z;
  he += (k.d_par * E[2] + st.M_z) * szsz;
  he += (k.d_perp * E[0] + st.M_x) * (S.y * S.y - S.x * S.x);
  he += (k.d_perp * E[1] + st.M_y) * (S.x * S.y + S.y * S.x);
  he += st.N_x * (S.x * S.z + S.z * S.x);
  he += st.N_y * (S.y * S.z + S.z * S.y);

  SpinHamiltonian out;
  out.nucleus = nucleus;
  if (nucleus == Nucleus::None) {
    out.matrix = std::move(he);
    out.basis = {{2, 0}, {0, 0}, {-2, 0}};
    return out;
  }

  const bool n14 = nucleus == Nucleus::N14;
  const int two_i = n14 ? 2 : 1;
  const double a_par = n14 ? k.A_par_14N : k.A_par_15N;
  const double a_perp = n14 ? k.A_perp_14N : k.A_perp_15N;
  const double gam_n = n14 ? k.gamma_14N : k.gamma_15N;
  const auto I = detail::spin_ops(two_i);
  const std::size_t ni = static_cast<std::size_t>(two_i) + 1;
  const CMatrix id3 = CMatrix::identity(3), idn = CMatrix::identity(ni);

  CMatrix h = kron(he, idn);
  h += a_par * kron(S.z, I.z);
  h += a_perp * (kron(S.x, I.x) + kron(S.y, I.y));
  if (n14) {
    const double ii = (two_i / 2.0) * (two_i / 2.0 + 1.0);
    h += k.P_14N * kron(id3, I.z * I.z - (ii / 3.0) * idn);
  }
  h += -gam_n * kron(id3, B[0] * I.x + B[1] * I.y + B[2] * I.z);

  out.matrix = std::move(h);
  for (int ms : {2, 0, -2})
    for (std::size_t m = 0; m < ni; ++m) out.basis.push_back({ms, two_i - 2 * static_cast<int>(m)});
  return out;
}

struct Transition {
  std::string label;
  double frequency_hz;
};

namespace detail {

inline std::size_t dominant_component(const CMatrix& v, std::size_t col) {
  std::size_t best = 0;
  double w = -1.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double p = std::norm(v(i, col));
    if (p > w) {
      w = p;
      best = i;
    }
  }
  return best;
}

inline std::string ms_label(int two_ms) {
  return two_ms > 0 ? "+1" : (two_ms < 0 ? "-1" : "0");
}

inline std::string mi_label(int two_mi, Nucleus n) {
  if (n == Nucleus::N15) return two_mi > 0 ? "+1/2" : "-1/2";
  return two_mi > 0 ? "+" + std::to_string(two_mi / 2) : std::to_string(two_mi / 2);
}

}  // namespace detail

// ESR-allowed transitions (Delta m_s = +-1 out of m_s = 0, m_I conserved),
// sorted by frequency. Each eigenstate is labelled by its largest basis
// component.
inline std::vector<Transition> transition_frequencies_exact(const SpinHamiltonian& h) {
  const auto es = eigh_jacobi(h.matrix, 1e-12);
  const std::size_t n = h.matrix.size();
  std::vector<BasisLabel> lab(n);
  for (std::size_t c = 0; c < n; ++c) lab[c] = h.basis[detail::dominant_component(es.vectors, c)];

  std::vector<Transition> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (lab[i].two_ms != 0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (lab[j].two_ms == 0 || lab[j].two_mi != lab[i].two_mi) continue;
      std::string label = "0<->" + detail::ms_label(lab[j].two_ms);
      if (h.nucleus != Nucleus::None) label += " mI=" + detail::mi_label(lab[i].two_mi, h.nucleus);
      out.push_back({std::move(label), std::abs(es.values[j] - es.values[i])});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Transition& a, const Transition& b) { return a.frequency_hz < b.frequency_hz; });
  return out;
}

struct TransitionPair {
  double nu_plus;
  double nu_minus;
};

// Third-order expansion of the m_s = 0 -> +-1 frequencies in x = gamma B / D.
inline TransitionPair transition_frequencies_perturbative(double b_T, double theta_B) {
  const auto& k = constants();
  const double x = k.gyromagnetic_hz_per_T() * b_T / k.D;
  if (!std::isfinite(x) || !std::isfinite(theta_B))
    throw DomainError("perturbative transitions need finite B and theta_B");
  if (std::abs(x) >= 0.3) throw DomainError("gamma B / D >= 0.3: series not valid, use the exact solver");
  const double c = std::cos(theta_B), s = std::sin(theta_B);
  if (std::abs(c) < 1e-12) throw DomainError("theta_B = pi/2: tan(theta_B) diverges, use the exact solver");
  const double t = s / c;
  const double lin = x * c;
  const double quad = 1.5 * x * x * s * s;
  const double cub = x * x * x * (s * s * s * t / 8.0 - 0.5 * s * s * c);
  return {k.D * (1.0 + lin + quad + cub), k.D * (1.0 - lin + quad - cub)};
}

enum class Branch { Plus, Minus };

// Two-level reduction of the axial 3x3 Hamiltonian. Basis order is
// (|+-1>, |0>) for the chosen branch; the mean energy is removed.
inline CMatrix reduce_to_pseudo_spin_half(const SpinHamiltonian& h, Branch branch) {
  if (h.matrix.size() != 3) throw NotDiagonalError("pseudo-spin reduction needs the electronic 3x3 Hamiltonian");
  const double limit = 1e-6 * constants().D;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (i != j && std::abs(h.matrix(i, j)) > limit)
        throw NotDiagonalError("transverse terms too large for the two-level reduction");
  const double e_ms = h.matrix(branch == Branch::Plus ? 0 : 2, branch == Branch::Plus ? 0 : 2).real();
  const double e0 = h.matrix(1, 1).real();
  const double half = 0.5 * (e_ms - e0);
  return CMatrix::diagonal({half, -half});
}

struct StarkZeeman {
  double theta;      // mixing angle, tan(theta) = xi_perp / beta_z
  double phi;        // azimuth of the transverse coupling
  double nu_plus;    // offset from D + M_z + d_par E_z, Hz
  double nu_minus;
  double dnu_dxi;    // d nu_+ / d xi_perp (nu_- has the opposite sign)
  double dnu_dbeta;  // d nu_+ / d beta_z
};

inline StarkZeeman stark_zeeman_analysis(double xi_x, double xi_y, double beta_z) {
  if (!std::isfinite(xi_x) || !std::isfinite(xi_y) || !std::isfinite(beta_z))
    throw ValidationError("stark_zeeman", "inputs must be finite");
  const double xi = std::hypot(xi_x, xi_y);
  const double root = std::hypot(xi, beta_z);
  StarkZeeman r{};
  r.theta = std::atan2(xi, beta_z);
  r.phi = std::atan2(xi_y, xi_x);
  r.nu_plus = root;
  r.nu_minus = -root;
  if (root == 0.0) {
    // Limit along beta_z -> 0 first: pure Stark regime.
    r.dnu_dxi = 1.0;
    r.dnu_dbeta = 0.0;
  } else {
    r.dnu_dxi = xi / root;
    r.dnu_dbeta = beta_z / root;
  }
  return r;
}

// Axial Zeeman coupling beta_z in Hz for a field along the NV axis.
inline double beta_z_hz(double b_z_T) { return constants().gyromagnetic_hz_per_T() * b_z_T; }

}  // namespace nvsens
