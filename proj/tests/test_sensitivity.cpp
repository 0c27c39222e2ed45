#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <limits>
#include <random>

#include "nvsens/optimizer.hpp"
#include "nvsens/sensitivity.hpp"

using namespace nvsens;
constexpr double kPi = std::numbers::pi;

namespace {

ProtocolParams ramsey(double tau) {
  ProtocolParams p;
  p.tau_s = tau;
  return p;
}

void expect_factorized(const SensitivityReport& r) {
  EXPECT_NEAR(r.eta_T_per_sqrtHz / r.factors.product(), 1.0, 1e-12);
  EXPECT_GE(r.factors.dephasing_factor, 1.0);
  EXPECT_GE(r.factors.overhead_factor, 1.0);
}

}  // namespace

TEST(SpinProjection, Examples) {
  EXPECT_NEAR(eta_spin_projection(1, 1.0, 1) / 5.68e-12, 1.0, 1e-3);
  EXPECT_DOUBLE_EQ(eta_spin_projection(1, 1.0, 2), 0.5 * eta_spin_projection(1, 1.0, 1));
  EXPECT_NEAR(eta_spin_projection(100, 1.0, 1), 0.1 * eta_spin_projection(1, 1.0, 1), 1e-25);
  EXPECT_THROW(eta_spin_projection(0.5, 1.0, 1), ValidationError);
}

TEST(OverheadFactor, Examples) {
  EXPECT_DOUBLE_EQ(overhead_factor(0, 1e-6, 0), 1.0);
  EXPECT_DOUBLE_EQ(overhead_factor(2e-6, 1e-6, 1e-6), 2.0);
  EXPECT_NEAR(overhead_factor(1e-6, 0.5e-6, 0.3e-6), std::sqrt(3.6), 1e-12);
  EXPECT_NEAR(overhead_factor(1e-6, 0.5e-6, 0.3e-6), 1.897, 1e-3);
  EXPECT_THROW(overhead_factor(0, 0, 0), ValidationError);
}

TEST(RamseyExact, FloorsExceptDephasing) {
  auto p = ramsey(1e-6);
  p.contrast = 1.0;
  p.n_avg = 1e300;
  const auto r = eta_ramsey_exact(p, 1e-6);
  expect_factorized(r);
  EXPECT_NEAR(r.eta_T_per_sqrtHz / eta_spin_projection(1, 1e-6, 1), std::exp(1.0), 1e-12);
}

TEST(RamseyExact, DivergesAsTauShrinks) {
  auto p = ramsey(1e-6);
  p.t_i_s = 1e-6;
  double last = 0.0;
  for (double tau : {1e-7, 1e-9, 1e-11, 1e-13}) {
    p.tau_s = tau;
    const double e = eta_ramsey_exact(p, 1e-6).eta_T_per_sqrtHz;
    EXPECT_GT(e, last);
    last = e;
  }
  EXPECT_GT(last, 1e-3);
}

TEST(RamseyExact, AgreesWithShotNoiseForm) {
  auto p = ramsey(1e-6);
  p.n_sensors = 1.76e14;
  p.contrast = 0.01;
  p.n_avg = 0.01;
  p.t_i_s = 1e-6;
  p.t_r_s = 0.3e-6;
  const auto ex = eta_ramsey_exact(p, 1e-6), sh = eta_ramsey_shot(p, 1e-6);
  expect_factorized(ex);
  expect_factorized(sh);
  EXPECT_TRUE(std::isfinite(ex.eta_T_per_sqrtHz));
  const double bound = std::sqrt(1 + p.contrast * p.contrast * p.n_avg) - 1;
  EXPECT_LT(bound, 1e-6);
  EXPECT_NEAR(ex.eta_T_per_sqrtHz / sh.eta_T_per_sqrtHz, 1.0, bound * 1.0001);
  EXPECT_FALSE(sh.approximation_flag);
}

TEST(RamseyShot, DoublingPhotonsAndFlag) {
  auto p = ramsey(1e-6);
  p.n_sensors = 1e10;
  const double e1 = eta_ramsey_shot(p, 2e-6).eta_T_per_sqrtHz;
  p.n_sensors = 2e10;
  EXPECT_NEAR(eta_ramsey_shot(p, 2e-6).eta_T_per_sqrtHz, e1 / std::sqrt(2.0), 1e-14 * e1);
  p.contrast = 0.5;
  p.n_avg = 1.0;
  EXPECT_TRUE(eta_ramsey_shot(p, 2e-6).approximation_flag);
}

TEST(RamseyShot, DoubleQuantumGainsSqrtTwo) {
  const double t2_sq = 4e-6, t2_dq = t2_sq / 2;
  auto sq = ramsey(optimal_tau(t2_sq, 1.0, 0.0));
  auto dq = ramsey(optimal_tau(t2_dq, 1.0, 0.0));
  dq.basis = Basis::DQ;
  dq.delta_ms = 2;
  const double r = eta_ramsey_shot(sq, t2_sq).eta_T_per_sqrtHz / eta_ramsey_shot(dq, t2_dq).eta_T_per_sqrtHz;
  EXPECT_NEAR(r, std::sqrt(2.0), 1e-9);
}

TEST(RamseyExact, WrongProtocolRejected) {
  auto p = ramsey(1e-6);
  p.protocol = Protocol::HahnEcho;
  EXPECT_THROW(eta_ramsey_exact(p, 1e-6), ValidationError);
}

TEST(CwOdmr, WorkedNumber) {
  const auto r = eta_cw_odmr(1e6, 0.01, 1e12);
  const double h_over = constants().h / (constants().g_e * constants().mu_B);
  EXPECT_NEAR(h_over, 3.567e-11, 0.002e-11);
  EXPECT_NEAR(r.eta_T_per_sqrtHz, 4 / (3 * std::sqrt(3.0)) * h_over * 1e8 / 1e6, 1e-22);
  EXPECT_NEAR(r.eta_T_per_sqrtHz, 2.75e-9, 0.01e-9);
  EXPECT_NEAR(eta_cw_odmr(1e6, 0.01, 2e12).eta_T_per_sqrtHz, r.eta_T_per_sqrtHz / std::sqrt(2.0), 1e-22);
  EXPECT_DOUBLE_EQ(r.optimum_detuning_hz, 1e6 / (2 * std::sqrt(3.0)));
  expect_factorized(r);
}

TEST(PulsedOdmr, WorseThanRamseyAtEqualInputs) {
  const double t2 = 3e-6, c = 0.01, nph = 1e6;
  const auto pulsed = eta_pulsed_odmr(t2, c, nph, 0, 0);
  auto p = ramsey(t2);
  p.contrast = c;
  p.n_avg = 1.0;
  p.n_sensors = nph;
  const auto ram = eta_ramsey_shot(p, t2);
  // Closed-form ratio: (8/(3 sqrt 3)) / e.
  EXPECT_NEAR(pulsed.eta_T_per_sqrtHz / ram.eta_T_per_sqrtHz, 8 / (3 * std::sqrt(3.0)) / std::exp(1.0), 1e-12);
  EXPECT_LT(ram.eta_T_per_sqrtHz, pulsed.eta_T_per_sqrtHz * 2);
  expect_factorized(pulsed);
}

TEST(PulsedOdmr, ScalingAndRegressionPin) {
  const double e = eta_pulsed_odmr(3e-6, 0.01, 1e6, 0, 0).eta_T_per_sqrtHz;
  EXPECT_NEAR(eta_pulsed_odmr(3e-6, 0.01, 2e6, 0, 0).eta_T_per_sqrtHz, e / std::sqrt(2.0), 1e-14 * e);
  // 8/(3 sqrt 3) * hbar/(g mu_B) / (C sqrt(N)) / sqrt(T2*).
  EXPECT_NEAR(e, 5.04632e-10, 0.00002e-10);
}

TEST(HahnEcho, RatioToRamseyAndUnlockedPenalty) {
  auto r = ramsey(10e-6);
  auto h = r;
  h.protocol = Protocol::HahnEcho;
  const double t = 20e-6;
  const double er = eta_ramsey_exact(r, t).eta_T_per_sqrtHz;
  const auto locked = eta_hahn_echo(h, t, true);
  EXPECT_NEAR(locked.eta_T_per_sqrtHz / er, kPi / 2, 1e-12);
  EXPECT_NEAR(eta_hahn_echo(h, t, false).eta_T_per_sqrtHz / locked.eta_T_per_sqrtHz, std::sqrt(2.0), 1e-12);
  expect_factorized(locked);
}

TEST(HahnEcho, LongT2GainAfterReoptimization) {
  const double t2s = 1e-6, t2 = 100e-6;
  auto r = ramsey(optimal_tau(t2s, 1.0, 0.0));
  auto h = ramsey(optimal_tau(t2, 1.0, 0.0));
  h.protocol = Protocol::HahnEcho;
  const double gain = eta_ramsey_exact(r, t2s).eta_T_per_sqrtHz / eta_hahn_echo(h, t2).eta_T_per_sqrtHz;
  EXPECT_NEAR(gain, std::sqrt(100.0) / (kPi / 2), 1e-6);
}

namespace {
ProtocolParams cpmg(double t_b, double p_exp = 1.0) {
  ProtocolParams p;
  p.protocol = Protocol::CPMG;
  p.t_b_s = t_b;
  p.p_exponent = p_exp;
  return p;
}
}  // namespace

TEST(Multipulse, SinglePulseIsHahnEchoAtHalfPeriod) {
  const double tb = 20e-6, t2 = 50e-6;
  auto h = ramsey(tb / 2);
  h.protocol = Protocol::HahnEcho;
  EXPECT_NEAR(eta_multipulse(cpmg(tb), t2, 1, 2.0 / 3).eta_T_per_sqrtHz / eta_hahn_echo(h, t2).eta_T_per_sqrtHz,
              1.0, 1e-12);
}

TEST(Multipulse, OptimalCountBeatsNeighbours) {
  const double t2 = 100e-6, tb = 5e-6;
  const int k = k_opt(t2, tb, 1.0, 2.0 / 3);
  const double best = eta_multipulse(cpmg(tb), t2, k, 2.0 / 3).eta_T_per_sqrtHz;
  EXPECT_LE(best, eta_multipulse(cpmg(tb), t2, std::max(1, k / 2), 2.0 / 3).eta_T_per_sqrtHz);
  EXPECT_LE(best, eta_multipulse(cpmg(tb), t2, 2 * k, 2.0 / 3).eta_T_per_sqrtHz);
}

TEST(KOpt, ClosedFormAtTwiceT2) {
  EXPECT_NEAR(k_opt_continuous(1e-5, 2e-5, 1.0, 2.0 / 3), 3.375, 1e-12);
  const int k = k_opt(1e-5, 2e-5, 1.0, 2.0 / 3);
  EXPECT_TRUE(k == 3 || k == 4);
  double e3 = eta_multipulse(cpmg(2e-5), 1e-5, 3, 2.0 / 3).eta_T_per_sqrtHz;
  double e4 = eta_multipulse(cpmg(2e-5), 1e-5, 4, 2.0 / 3).eta_T_per_sqrtHz;
  EXPECT_EQ(k, e3 <= e4 ? 3 : 4);
}

TEST(KOpt, LongPeriodClampsToOne) { EXPECT_EQ(k_opt(1e-6, 1e-3, 1.0, 0.5), 1); }

TEST(KOpt, MatchesBruteForceScan) {
  for (double p : {1.0, 2.0})
    for (double s : {0.5, 2.0 / 3})
      for (double ratio : {0.05, 0.2, 0.7}) {
        const double t2 = 1e-4, tb = ratio * 2 * t2;
        const int k = k_opt(t2, tb, p, s);
        int arg = 1;
        double best = std::numeric_limits<double>::infinity();
        for (int j = 1; j <= 10 * std::max(k, 1); ++j) {
          const double e = eta_multipulse(cpmg(tb, p), t2, j, s).eta_T_per_sqrtHz;
          if (e < best) best = e, arg = j;
        }
        EXPECT_LE(std::abs(arg - k), 1) << p << " " << s << " " << ratio;
      }
}

TEST(SensitivityProperties, Monotonicity) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    auto p = ramsey(1e-7 + 1e-5 * u(rng));
    p.n_sensors = 1 + 1e12 * u(rng);
    p.contrast = 0.001 + 0.5 * u(rng);
    p.n_avg = 1e-3 + u(rng);
    p.t_i_s = 1e-6 * u(rng);
    p.t_r_s = 1e-6 * u(rng);
    const double t2 = 1e-7 + 1e-5 * u(rng);
    const double base = eta_ramsey_exact(p, t2).eta_T_per_sqrtHz;

    auto q = p;
    q.n_sensors *= 1.5;
    EXPECT_LT(eta_ramsey_exact(q, t2).eta_T_per_sqrtHz, base);
    q = p;
    q.n_avg *= 1.5;
    EXPECT_LT(eta_ramsey_exact(q, t2).eta_T_per_sqrtHz, base);
    EXPECT_LT(eta_ramsey_shot(q, t2).eta_T_per_sqrtHz, eta_ramsey_shot(p, t2).eta_T_per_sqrtHz);
    q = p;
    q.contrast = std::min(1.0, q.contrast * 1.5);
    EXPECT_LT(eta_ramsey_exact(q, t2).eta_T_per_sqrtHz, base);
    q = p;
    q.t_r_s += 1e-7;
    EXPECT_GT(eta_ramsey_exact(q, t2).eta_T_per_sqrtHz, base);

    // Longer T2* with tau re-optimized.
    auto a = p, b = p;
    a.tau_s = optimal_tau(t2, 1.0, p.overhead_s());
    b.tau_s = optimal_tau(1.5 * t2, 1.0, p.overhead_s());
    EXPECT_LT(eta_ramsey_exact(b, 1.5 * t2).eta_T_per_sqrtHz, eta_ramsey_exact(a, t2).eta_T_per_sqrtHz);

    // Shot-noise form never beats the projection limit times the overhead
    // when the readout factor is at least one.
    const auto sh = eta_ramsey_shot(p, t2);
    if (sh.factors.readout_factor >= 1.0) {
      EXPECT_GE(sh.eta_T_per_sqrtHz, sh.factors.projection_limit * sh.factors.overhead_factor);
    }
    const auto ex = eta_ramsey_exact(p, t2);
    EXPECT_GE(ex.eta_T_per_sqrtHz, ex.factors.projection_limit * ex.factors.overhead_factor);
    EXPECT_GE(ex.factors.readout_factor, 1.0);
    expect_factorized(ex);
  }
}
