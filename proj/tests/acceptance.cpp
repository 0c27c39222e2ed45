// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
#include <fftw3.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "nvsens/nvsens.hpp"

using namespace nvsens;

namespace {

constexpr double kPi = std::numbers::pi;

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void near_rel(double got, double want, double rtol, const std::string& what) {
    expect(std::abs(got - want) <= rtol * std::abs(want),
           what + " got " + format_double(got) + " want " + format_double(want) + " rtol " + format_double(rtol));
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

DiamondSample make_sample(double n_s0, double c13, double nv_minus) {
  SampleInputs in;
  in.n_s0_ppm = n_s0;
  in.c13_ppm = c13;
  in.nv_minus_ppm = nv_minus;
  in.nv0_ppm = 0.0;
  return DiamondSample::build(in);
}

Check nitrogen_t2star() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  c.near_rel(total_budget(make_sample(1.0, 0.0, 0.0)).total_t2star_s(), 9.9e-6, 0.02, "T2*(1 ppm)");
  for (double n = 0.75; n <= 60.0; n += 0.25) {
    const double r = total_budget(make_sample(n, 0.0, 0.0)).rate("N_S0");
    c.expect(r == 101e3 * n, "N_S0 rate at " + format_double(n) + " ppm is " + format_double(r));
  }
  c.expect(seconds_since(t0) < 1.0, "runtime over 1 s");
  return c;
}

Check nitrogen_t2() {
  Check c;
  const auto s = make_sample(1.0, 0.0, 0.0);
  c.near_rel(t2_budget(s).total_time_s(), 160e-6, 0.02, "T2 nitrogen-only");
  c.near_rel(t2_budget(s, 694e-6).total_time_s(), 130e-6, 0.02, "T2 with T2{other}");
  c.near_rel(t2_nitrogen(1.0), 160e-6, 0.02, "t2_nitrogen");
  c.near_rel(t2_nitrogen(1.0, 694e-6), 130e-6, 0.02, "t2_nitrogen with other");
  return c;
}

Check carbon13() {
  Check c;
  const double nat = t2star_c13(kNaturalC13Ppm);
  c.near_rel(nat, 0.935e-6, 0.001, "natural abundance");
  c.expect(std::abs(nat - 1e-6) <= 0.1e-6, "natural abundance not within 10% of 1 us");
  c.near_rel(t2star_c13(10.0), 1e-3, 0.05, "10 ppm");
  const double n_eq = kScaling.a_c13 * kNaturalC13Ppm / kScaling.a_n;
  c.expect(std::abs(n_eq - 10.6) <= 0.1, "equality point " + format_double(n_eq));
  c.near_rel(t2star_nitrogen(n_eq), nat, 1e-12, "rates equal at equality point");
  return c;
}

Check optimal_precession() {
  Check c;
  for (double p : {1.0, 2.0}) c.near_rel(optimal_tau(1e-6, p, 0.0), 0.5e-6, 1e-6, "tau_opt p=" + format_double(p));
  const double t2 = 1e-6, to = 100 * t2;
  const double tau = optimal_tau(t2, 1.0, to);
  c.near_rel(tau, t2, 0.02, "tau_opt at t_O = 100 T2*");
  double best = std::numeric_limits<double>::infinity(), arg = 0.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const double x = 1e-3 * t2 + (3 * t2 - 1e-3 * t2) * i / (n - 1.0);
    const double f = ramsey_tau_objective(x, t2, 1.0, to);
    if (f < best) best = f, arg = x;
  }
  c.expect(std::abs(tau - arg) <= 3 * t2 / n, "brute-force argmin " + format_double(arg) + " vs " + format_double(tau));
  return c;
}

Check enhancement_bounds() {
  Check c;
  std::mt19937_64 rng(20240501);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double ref = 1e-6;
  // Relative slack for the golden-section tolerance at the sqrt(r) equality.
  const double slack = 1e-9;
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const double r = 1 + 99 * u(rng), to = 100 * ref * u(rng);
    const double e = enhancement(r * ref, ref, to, 1.0);
    if (e < std::sqrt(r) * (1 - slack) || e > r * (1 + slack)) ++bad;
  }
  c.expect(bad == 0, std::to_string(bad) + " samples outside [sqrt(r), r]");
  for (double r : {2.0, 10.0, 100.0}) {
    c.near_rel(enhancement(r * ref, ref, 0.0, 1.0), std::sqrt(r), 0.01, "t_O = 0 limit r=" + format_double(r));
    c.near_rel(enhancement(r * ref, ref, 1e6 * r * ref, 1.0), r, 0.01, "t_O -> inf limit r=" + format_double(r));
  }
  return c;
}

Check monte_carlo_cross_validation() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  const double a = 0.3, b = 0.2, tau = 0.5e-6, t2 = 1e-6, p = 1.0, t_o = 1e-6;
  const std::size_t m = 200'000;

  RamseySimulation sim;
  sim.readout = {a, b};
  sim.tau_s = tau;
  sim.t2star_s = t2;
  sim.p = p;
  sim.vartheta = kPi / 2;
  sim.b_sense_T = 0.0;
  sim.measurements = m;
  sim.seed = 7;
  const auto counts = simulate_ramsey(sim);

  FieldCalibration cal{a, b, tau, kPi / 2, std::exp(-std::pow(tau / t2, p))};
  std::vector<double> est(m);
  std::vector<std::uint64_t> one(1);
  for (std::size_t i = 0; i < m; ++i) {
    one[0] = counts[i];
    est[i] = estimate_field(one, cal);
  }
  long double s = 0, s2 = 0;
  for (double x : est) s += x, s2 += static_cast<long double>(x) * x;
  const double mean = static_cast<double>(s / m);
  const double var = static_cast<double>((s2 - s * s / m) / (m - 1));
  const double empirical = std::sqrt(var / m);

  ProtocolParams pp;
  pp.tau_s = tau;
  pp.t_i_s = t_o;
  pp.contrast = sim.readout.contrast();
  pp.n_avg = sim.readout.n_avg();
  const double eta = eta_ramsey_exact(pp, t2).eta_T_per_sqrtHz;
  const double predicted = eta / std::sqrt(m * (tau + t_o));
  c.near_rel(empirical, predicted, 0.05, "std of mean field estimate");
  c.expect(std::abs(mean) <= 3 * predicted, "estimator bias " + format_double(mean));
  c.expect(seconds_since(t0) < 30.0, "runtime over 30 s");
  return c;
}

Check hamiltonian_checks() {
  Check c;
  const auto& k = constants();
  const double gam = k.gyromagnetic_hz_per_T();
  double worst = 0.0;
  for (double b = 0.5e-3; b <= 5e-3 + 1e-12; b += 0.5e-3) {
    for (int deg = 0; deg <= 80; deg += 5) {
      const double th = deg * kPi / 180;
      FieldEnvironment env;
      env.b_vec_T = {b * std::sin(th), 0.0, b * std::cos(th)};
      const auto ex = transition_frequencies_exact(build_hamiltonian(env));
      const auto pt = transition_frequencies_perturbative(b, th);
      const double bound = 5 * std::pow(gam * b / k.D, 4);
      const double ep = std::abs(pt.nu_plus - ex[1].frequency_hz) / ex[1].frequency_hz;
      const double em = std::abs(pt.nu_minus - ex[0].frequency_hz) / ex[0].frequency_hz;
      worst = std::max(worst, std::max(ep, em) / bound);
    }
  }
  c.expect(worst <= 1.0, "series error reaches " + format_double(worst) + " of the bound");

  // Stark/Zeeman derivatives against central differences of the exact
  // transition, and the Pythagorean identity.
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto nu_plus = [](double xi, double beta) {
    FieldEnvironment env;
    env.b_vec_T = {0.0, 0.0, beta / constants().gyromagnetic_hz_per_T()};
    env.strain.M_x = xi;
    return transition_frequencies_exact(build_hamiltonian(env)).back().frequency_hz;
  };
  double worst_fd = 0.0, worst_py = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double xi = std::pow(10.0, 5 + 2 * u(rng)), beta = std::pow(10.0, 5 + 2 * u(rng)) * (u(rng) < 0.5 ? -1 : 1);
    const auto r = stark_zeeman_analysis(xi, 0.0, beta);
    const double h = 1e-4 * std::hypot(xi, beta);
    const double fx = (nu_plus(xi + h, beta) - nu_plus(xi - h, beta)) / (2 * h);
    const double fb = (nu_plus(xi, beta + h) - nu_plus(xi, beta - h)) / (2 * h);
    worst_fd = std::max({worst_fd, std::abs(r.dnu_dxi - fx) / std::abs(fx), std::abs(r.dnu_dbeta - fb) / std::abs(fb)});
    worst_py = std::max(worst_py, std::abs(r.dnu_dxi * r.dnu_dxi + r.dnu_dbeta * r.dnu_dbeta - 1.0));
  }
  c.expect(worst_fd <= 1e-6, "finite-difference mismatch " + format_double(worst_fd));
  c.expect(worst_py <= 1e-10, "Pythagorean identity off by " + format_double(worst_py));
  return c;
}

Check noise_algebra() {
  Check c;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double b = std::pow(10.0, -3 + 6 * u(rng));
    const double a = b * (1.0 + std::pow(10.0, -3 + 5 * u(rng)));
    const ReadoutModel m{a, b};
    worst = std::max(worst, std::abs(sigma_r(a, b) / sigma_r_from_contrast(m.contrast(), m.n_avg()) - 1.0));
  }
  c.expect(worst <= 1e-12, "sigma_R identity off by " + format_double(worst));

  const std::vector<std::pair<double, double>> pairs = {{2.0, 1.0}, {0.0203, 0.0197}, {1e3, 10.0}};
  for (auto [a, b] : pairs) {
    c.near_rel(noise_quotient(a, b, kPi / 2), sigma_r(a, b), 1e-14, "quotient at pi/2");
    double best = std::numeric_limits<double>::infinity(), arg = 0.0;
    for (int i = 1; i < 1000; ++i) {
      const double ph = kPi * i / 1000.0;
      const double q = noise_quotient(a, b, ph);
      if (q < best) best = q, arg = ph;
    }
    c.expect(std::abs(arg - kPi / 2) < 1e-12,
             "grid argmin for (a,b)=(" + format_double(a) + "," + format_double(b) + ") at " + format_double(arg) +
                 " rad, not pi/2");
  }
  return c;
}

Check lineshape_round_trip() {
  Check c;
  const double t2 = 1e-6, dt = 10e-9;
  const int n = 1 << 16;
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = i * dt;
  auto x = fid_signal(t, t2, 1.0, 0.0);
  x[0] *= 0.5;
  std::vector<fftw_complex> out(n / 2 + 1);
  fftw_plan plan = fftw_plan_dft_r2c_1d(n, x.data(), out.data(), FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  const double df = 1.0 / (n * dt), half = 0.5 * out[0][0];
  std::size_t k = 0;
  while (out[k + 1][0] > half) ++k;
  const double fwhm = 2 * (k + (out[k][0] - half) / (out[k][0] - out[k + 1][0])) * df;
  c.near_rel(fwhm, 318.3e3, 0.02, "FFT FWHM");
  const double ratio = t2star_from_epr_delta(1e5, LineShape::Gaussian) / t2star_from_epr_delta(1e5, LineShape::Lorentzian);
  c.near_rel(ratio, std::sqrt(6.0), 1e-15, "EPR Gaussian/Lorentzian ratio");
  return c;
}

Check materials() {
  Check c;
  const auto d = vacancy_diffusion(1073.15, 12 * 3600.0);
  c.near_rel(d.D_m2s, 2.5e-18, 0.05, "D(800 C)");
  c.near_rel(d.r_rms_m, 0.8e-6, 0.05, "r_rms(12 h)");
  c.near_rel(irradiation_dose(1.0), 7.3e16, 0.02, "dose(1 ppm)");
  const auto ip = init_power(1.76e14, 3, 1e-6, 532e-9);
  c.near_rel(ip.energy_J, 200e-6, 0.05, "init energy");
  c.near_rel(ip.power_W, 200.0, 0.05, "init power");
  return c;
}

Check pulse_count() {
  Check c;
  int bad = 0, cases = 0;
  for (double p : {1.0, 2.0})
    for (double s : {0.5, 2.0 / 3})
      for (double t2 : {10e-6, 100e-6, 1e-3})
        for (double ratio : {0.05, 0.1, 0.3, 0.6, 1.0, 2.0}) {
          const double tb = ratio * 2 * t2;
          ProtocolParams pp;
          pp.protocol = Protocol::CPMG;
          pp.t_b_s = tb;
          pp.p_exponent = p;
          const int k = k_opt(t2, tb, p, s);
          int arg = 1;
          double best = std::numeric_limits<double>::infinity();
          for (int j = 1; j <= 10 * k + 10; ++j) {
            const double e = eta_multipulse(pp, t2, j, s).eta_T_per_sqrtHz;
            if (e < best) best = e, arg = j;
          }
          ++cases;
          if (std::abs(arg - k) > 1) ++bad;
        }
  c.expect(bad == 0, std::to_string(bad) + " of " + std::to_string(cases) + " grid points off by more than one pulse");
  return c;
}

Check dq_drive_attainability() {
  Check c;
  const auto s = make_sample(0.75, 100.0, 0.003);
  DephasingEnvironment env;
  env.axial_strain_rate = 1.0 / 1.8e-6 - total_budget(s, env).total_rate();
  const auto sq = total_budget(s, env, Basis::SQ, false);
  c.near_rel(sq.total_t2star_s(), 1.8e-6, 1e-9, "SQ T2*");
  c.expect(sq.dominant() == "strain_axial", "SQ budget not strain-dominated");
  const auto dq = total_budget(s, env, Basis::DQ, true);
  c.expect(dq.total_t2star_s() >= 18e-6, "DQ + drive T2* " + format_double(dq.total_t2star_s()));
  return c;
}

}  // namespace

int main() {
  struct Item {
    const char* name;
    std::function<Check()> run;
  };
  const std::vector<Item> items = {
      {"1 nitrogen T2* law", nitrogen_t2star},
      {"2 nitrogen T2 law", nitrogen_t2},
      {"3 13C limit and equality point", carbon13},
      {"4 optimal precession time", optimal_precession},
      {"5 enhancement bounds", enhancement_bounds},
      {"6 Monte Carlo vs analytic sensitivity", monte_carlo_cross_validation},
      {"7 Hamiltonian series and Stark/Zeeman derivatives", hamiltonian_checks},
      {"8 readout noise algebra", noise_algebra},
      {"9 lineshape round trip", lineshape_round_trip},
      {"10 materials and init power", materials},
      {"11 optimal pulse count", pulse_count},
      {"12 DQ + bath drive attainability", dq_drive_attainability},
  };
  int failures = 0;
  for (const auto& it : items) {
    Check c;
    try {
      c = it.run();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    if (!c.ok) ++failures;
    std::printf("%s %s%s%s\n", c.ok ? "PASS" : "FAIL", it.name, c.ok ? "" : " : ", c.detail.c_str());
  }
  return failures == 0 ? 0 : 1;
}
