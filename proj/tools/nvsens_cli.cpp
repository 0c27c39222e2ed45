#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "nvsens/nvsens.hpp"

using namespace nvsens;

namespace {

// Bad invocation (as opposed to bad physics inputs): exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumParam {
  std::string name;
  double* value;
  CLI::Option* opt;
};

struct StrParam {
  std::string name;
  std::string* value;
  CLI::Option* opt;
};

// One subcommand: its registered parameters and a function producing the
// table for the current parameter values.
struct Command {
  CLI::App* app = nullptr;
  std::vector<NumParam> nums;
  std::vector<StrParam> strs;
  std::function<CsvTable()> run;
  bool sweepable = true;

  CLI::Option* num(const std::string& name, double& v, const std::string& help) {
    auto* o = app->add_option("--" + name, v, help);
    nums.push_back({name, &v, o});
    return o;
  }
  CLI::Option* str(const std::string& name, std::string& v, const std::string& help) {
    auto* o = app->add_option("--" + name, v, help);
    strs.push_back({name, &v, o});
    return o;
  }
  double* find(const std::string& name) {
    for (auto& p : nums)
      if (p.name == name) return p.value;
    return nullptr;
  }
};

struct Globals {
  std::string sample_path;
  std::string out_path;
  std::uint64_t seed = 0;
  std::string format = "csv";
  std::vector<std::string> sweep;
  std::string grid;
  bool log_grid = false;
};

std::vector<double> parse_grid(const std::string& text, bool log_spaced) {
  const auto a = text.find(':'), b = text.rfind(':');
  if (a == std::string::npos || a == b) throw UsageError("--grid must be start:stop:steps");
  double start, stop;
  long steps;
  try {
    start = parse_double(text.substr(0, a));
    stop = parse_double(text.substr(a + 1, b - a - 1));
    std::size_t used = 0;
    steps = std::stol(text.substr(b + 1), &used);
    if (used != text.size() - b - 1) throw UsageError("bad step count");
  } catch (const std::exception&) {
    throw UsageError("--grid must be start:stop:steps, got '" + text + "'");
  }
  if (steps < 1) throw UsageError("--grid needs at least one step");
  if (log_spaced && !(start > 0.0 && stop > 0.0)) throw UsageError("--log-grid needs positive endpoints");
  std::vector<double> g;
  for (long i = 0; i < steps; ++i) {
    const double f = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
    g.push_back(log_spaced ? start * std::pow(stop / start, f) : start + (stop - start) * f);
  }
  return g;
}

Basis parse_basis(const std::string& s) { return s == "dq" ? Basis::DQ : Basis::SQ; }

Protocol parse_protocol(const std::string& s) {
  for (auto p : {Protocol::Ramsey, Protocol::CWODMR, Protocol::PulsedODMR, Protocol::HahnEcho, Protocol::CPMG})
    if (s == to_string(p)) return p;
  throw UsageError("unknown protocol '" + s + "'");
}

std::vector<std::string> defaults_metadata(const Command& c, const std::string& swept) {
  std::vector<std::string> md;
  for (const auto& p : c.nums)
    if (p.opt->count() == 0 && p.name != swept) md.push_back("default " + p.name + "=" + format_double(*p.value));
  for (const auto& p : c.strs)
    if (p.opt->count() == 0) md.push_back("default " + p.name + "=" + *p.value);
  return md;
}

void emit(const CsvTable& t, const std::string& out) {
  if (out.empty()) {
    write_csv(std::cout, t);
    std::cout.flush();
  } else {
    write_csv_file(t, out);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NV-ensemble magnetometry sensitivity budgets", "nvsens"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kToolVersion);

  Globals g;
  app.add_option("--sample", g.sample_path, "diamond sample JSON descriptor");
  app.add_option("--out", g.out_path, "write CSV here instead of stdout");
  app.add_option("--seed", g.seed, "RNG seed for Monte Carlo commands");
  app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"csv"}));
  app.add_option("--sweep", g.sweep, "parameter to sweep (one only)");
  app.add_option("--grid", g.grid, "sweep grid start:stop:steps");
  app.add_flag("--log-grid", g.log_grid, "log-spaced sweep grid");

  std::optional<DiamondSample> sample;
  auto need_sample = [&]() -> const DiamondSample& {
    if (!sample) {
      if (g.sample_path.empty()) throw UsageError("this command needs --sample");
      sample = load_sample(g.sample_path);
    }
    return *sample;
  };
  auto sample_metadata = [&](std::vector<std::string>& md) {
    const auto& s = need_sample();
    md.push_back("sample: " + std::filesystem::path(g.sample_path).filename().string());
    std::string d;
    for (const auto& f : s.defaults_used()) d += (d.empty() ? "" : " ") + f;
    md.push_back("sample defaults: " + (d.empty() ? std::string("none") : d));
  };

  std::map<std::string, Command> cmds;

  // levels
  FieldEnvironment fenv;
  std::string nucleus = "none";
  {
    auto& c = cmds["levels"];
    c.app = app.add_subcommand("levels", "transition frequencies of the ground-state Hamiltonian");
    c.num("bx", fenv.b_vec_T[0], "field x component, T");
    c.num("by", fenv.b_vec_T[1], "field y component, T");
    c.num("bz", fenv.b_vec_T[2], "field z component (NV axis), T");
    c.num("ex", fenv.e_vec_Vpm[0], "electric field x, V/m");
    c.num("ey", fenv.e_vec_Vpm[1], "electric field y, V/m");
    c.num("ez", fenv.e_vec_Vpm[2], "electric field z, V/m");
    c.num("mz", fenv.strain.M_z, "axial strain coupling, Hz");
    c.num("mx", fenv.strain.M_x, "transverse strain coupling M_x, Hz");
    c.num("my", fenv.strain.M_y, "transverse strain coupling M_y, Hz");
    c.str("nucleus", nucleus, "none | n14 | n15")->check(CLI::IsMember({"none", "n14", "n15"}));
    c.run = [&] {
      const Nucleus n = nucleus == "n14" ? Nucleus::N14 : nucleus == "n15" ? Nucleus::N15 : Nucleus::None;
      const auto tr = transition_frequencies_exact(build_hamiltonian(fenv, n));
      CsvTable t;
      t.header = {"transition", "frequency_hz"};
      for (const auto& x : tr) t.add_row({x.label, format_double(x.frequency_hz)});
      return t;
    };
  }

  // budget
  DephasingEnvironment denv;
  std::string basis_s = "sq", kind_s = "t2star";
  bool bath_drive = false;
  double b_axial = 0.0, t2_other = std::numeric_limits<double>::infinity();
  {
    auto& c = cmds["budget"];
    c.app = app.add_subcommand("budget", "itemized T2* or T2 dephasing budget");
    c.str("basis", basis_s, "sq | dq")->check(CLI::IsMember({"sq", "dq"}));
    c.str("kind", kind_s, "t2star | t2")->check(CLI::IsMember({"t2star", "t2"}));
    c.app->add_flag("--bath-drive", bath_drive, "drive the nitrogen spin bath");
    c.num("drive-suppression", denv.drive_suppression, "fraction of bath dephasing removed by the drive");
    c.num("b-axial", b_axial, "axial bias field, T (suppresses transverse strain dephasing)");
    c.num("gradients-rate", denv.gradients_rate, "field-gradient dephasing rate, 1/s");
    c.num("temp-rate", denv.temp_rate, "temperature-drift dephasing rate, 1/s");
    c.num("axial-strain-rate", denv.axial_strain_rate, "axial strain dephasing rate, 1/s");
    c.num("nv-group-fraction", denv.nv_group_fraction, "share of NV- aligned with the sensing axis");
    c.num("varsigma-par", denv.varsigma_par, "dephasing weight of aligned NV-");
    c.num("varsigma-nonpar", denv.varsigma_nonpar, "dephasing weight of other NV- groups");
    c.num("a-nv0", denv.a_nv0, "NV0 coupling, 1/s/ppm (0 disables the NV0 entry)");
    c.num("t2-other", t2_other, "residual Hahn-echo T2, s (t2 budgets only)");
    c.run = [&] {
      denv.beta_z_hz = beta_z_hz(b_axial);
      const auto& s = need_sample();
      const auto b = kind_s == "t2" ? t2_budget(s, t2_other) : total_budget(s, denv, parse_basis(basis_s), bath_drive);
      std::vector<std::string> md;
      sample_metadata(md);
      if (kind_s != "t2")
        md.push_back(std::string("nv0 coupling: ") + (denv.a_nv0 > 0.0 ? format_double(denv.a_nv0) : "off"));
      return budget_table(b, md);
    };
  }

  // sensitivity
  ProtocolParams pp;
  std::string protocol_s = "ramsey", pbasis_s = "sq";
  double coh = 1e-6, k_d = 0.0, n_photons = 1.0;
  bool shot_form = false, unlocked = false, opt_tau = false;
  {
    auto& c = cmds["sensitivity"];
    c.app = app.add_subcommand("sensitivity", "sensitivity of one protocol, factor by factor");
    c.str("protocol", protocol_s, "ramsey | cw-odmr | pulsed-odmr | hahn-echo | cpmg")
        ->check(CLI::IsMember({"ramsey", "cw-odmr", "pulsed-odmr", "hahn-echo", "cpmg"}));
    c.str("basis", pbasis_s, "sq | dq")->check(CLI::IsMember({"sq", "dq"}));
    c.num("tau", pp.tau_s, "interrogation time, s");
    c.num("t-i", pp.t_i_s, "initialization time, s");
    c.num("t-r", pp.t_r_s, "readout time, s");
    c.num("contrast", pp.contrast, "measurement contrast");
    c.num("n-avg", pp.n_avg, "photons per sensor per readout");
    c.num("n-sensors", pp.n_sensors, "number of NV- sensors");
    c.num("p", pp.p_exponent, "stretched-exponential decay parameter");
    c.num("coherence", coh, "T2* (ramsey, pulsed-odmr) or T2 (echo, cpmg), s");
    c.num("k", k_d, "CPMG pulse count (0 picks the optimum)");
    c.num("s", pp.s_scaling, "CPMG coherence scaling exponent");
    c.num("t-b", pp.t_b_s, "AC field period, s (cpmg)");
    c.num("rate", pp.rate_r_hz, "photon detection rate, 1/s (cw-odmr)");
    c.num("linewidth", pp.linewidth_hz, "resonance FWHM, Hz (cw-odmr)");
    c.num("n-photons", n_photons, "photons per readout (pulsed-odmr)");
    c.app->add_flag("--shot-form", shot_form, "Ramsey: use the C^2 n_avg << 1 form");
    c.app->add_flag("--unlocked", unlocked, "AC protocols: field phase not locked to the sequence");
    c.app->add_flag("--optimize-tau", opt_tau, "Ramsey: replace tau by the optimum");
    c.run = [&] {
      ProtocolParams p = pp;
      p.protocol = parse_protocol(protocol_s);
      p.basis = parse_basis(pbasis_s);
      p.delta_ms = p.basis == Basis::DQ ? 2 : 1;
      SensitivityReport r;
      switch (p.protocol) {
        case Protocol::Ramsey:
          if (opt_tau) p.tau_s = optimal_tau(coh, p.p_exponent, p.overhead_s());
          r = shot_form ? eta_ramsey_shot(p, coh) : eta_ramsey_exact(p, coh);
          break;
        case Protocol::CWODMR:
          r = eta_cw_odmr(p.linewidth_hz, p.contrast, p.rate_r_hz);
          break;
        case Protocol::PulsedODMR:
          r = eta_pulsed_odmr(coh, p.contrast, n_photons, p.t_i_s, p.t_r_s);
          break;
        case Protocol::HahnEcho:
          r = eta_hahn_echo(p, coh, !unlocked);
          break;
        case Protocol::CPMG: {
          // Grid points can land a few ulps off an integer.
          if (std::abs(k_d - std::round(k_d)) < 1e-9) k_d = std::round(k_d);
          if (k_d < 0.0 || std::round(k_d) != k_d) throw ValidationError("k", "must be a non-negative integer");
          if (!(p.t_b_s > 0.0)) throw ValidationError("t-b", "cpmg needs the AC period");
          const int k = k_d == 0.0 ? k_opt(coh, p.t_b_s, p.p_exponent, p.s_scaling) : static_cast<int>(k_d);
          r = eta_multipulse(p, coh, k, p.s_scaling, !unlocked);
          break;
        }
      }
      return report_table({r});
    };
  }

  // optimize-tau
  double ot_t2 = 1e-6, ot_p = 1.0, ot_to = 0.0, ot_ref = 0.0;
  {
    auto& c = cmds["optimize-tau"];
    c.app = app.add_subcommand("optimize-tau", "optimal Ramsey precession time");
    c.num("t2star", ot_t2, "T2*, s");
    c.num("p", ot_p, "stretched-exponential decay parameter");
    c.num("overhead", ot_to, "overhead time t_I + t_R, s");
    c.num("t2star-ref", ot_ref, "reference T2* for the enhancement column, s (0 omits it)");
    c.run = [&] {
      const double tau = optimal_tau(ot_t2, ot_p, ot_to);
      CsvTable t;
      t.header = {"t2star_s", "tau_opt_s", "tau_over_t2star", "objective"};
      std::vector<std::string> row = {format_double(ot_t2), format_double(tau), format_double(tau / ot_t2),
                                      format_double(ramsey_tau_objective(tau, ot_t2, ot_p, ot_to))};
      if (ot_ref > 0.0) {
        t.header.push_back("enhancement");
        row.push_back(format_double(enhancement(ot_t2, ot_ref, ot_to, ot_p)));
      }
      t.add_row(row);
      return t;
    };
  }

  // optimize-pulses
  double op_t2 = 100e-6, op_tb = 10e-6, op_p = 1.0, op_s = 2.0 / 3.0;
  {
    auto& c = cmds["optimize-pulses"];
    c.app = app.add_subcommand("optimize-pulses", "optimal CPMG pulse count");
    c.num("t2", op_t2, "Hahn-echo T2, s");
    c.num("t-b", op_tb, "AC field period, s");
    c.num("p", op_p, "stretched-exponential decay parameter");
    c.num("s", op_s, "coherence scaling exponent");
    c.run = [&] {
      ProtocolParams p;
      p.protocol = Protocol::CPMG;
      p.t_b_s = op_tb;
      p.p_exponent = op_p;
      const int k = k_opt(op_t2, op_tb, op_p, op_s);
      CsvTable t;
      t.header = {"k_continuous", "k_opt", "tau_s", "eta_T_per_sqrtHz_single_nv"};
      const auto r = eta_multipulse(p, op_t2, k, op_s);
      t.add_row({format_double(k_opt_continuous(op_t2, op_tb, op_p, op_s)), std::to_string(k),
                 format_double(r.inputs.tau_s), format_double(r.eta_T_per_sqrtHz)});
      return t;
    };
  }

  // sweep-nitrogen
  std::string n_grid = "0.01:100:41";
  NitrogenSweepOptions nso;
  ProtocolParams np;
  {
    auto& c = cmds["sweep-nitrogen"];
    c.sweepable = false;
    c.app = app.add_subcommand("sweep-nitrogen", "Ramsey sensitivity versus total nitrogen (log grid)");
    c.str("n-grid", n_grid, "nitrogen grid start:stop:steps, ppm, log-spaced");
    c.num("volume-mm3", nso.volume_mm3, "sensing volume, mm^3");
    c.num("a-nv-minus", nso.a_nv_minus, "NV- coupling in kappa, 1/s/ppm");
    c.num("a-nv0", nso.a_nv0, "NV0 coupling in kappa, 1/s/ppm");
    c.num("p", np.p_exponent, "stretched-exponential decay parameter");
    c.num("t-i", np.t_i_s, "initialization time, s");
    c.num("t-r", np.t_r_s, "readout time, s");
    c.num("contrast", np.contrast, "measurement contrast");
    c.num("n-avg", np.n_avg, "photons per sensor per readout");
    c.run = [&] {
      const auto sw = nitrogen_sweep(need_sample(), parse_grid(n_grid, true), np, nso);
      CsvTable t;
      sample_metadata(t.metadata);
      t.metadata.push_back("kappa_per_s_ppm: " + format_double(sw.kappa));
      t.metadata.push_back("knee_ppm: " + format_double(sw.knee_ppm));
      t.header = {"n_total_ppm", "t2star_s", "tau_s", "n_sensors", "photons", "eta_T_per_sqrtHz", "above_knee"};
      for (const auto& r : sw.rows)
        t.add_row({format_double(r.n_total_ppm), format_double(r.t2star_s), format_double(r.tau_s),
                   format_double(r.n_sensors), format_double(r.photons), format_double(r.eta_T_per_sqrtHz),
                   r.above_knee ? "true" : "false"});
      return t;
    };
  }

  // simulate
  RamseySimulation sim;
  sim.readout = {0.3, 0.2};
  double meas_d = 10000, t_o_sim = 0.0;
  bool emit_counts = false;
  {
    auto& c = cmds["simulate"];
    c.app = app.add_subcommand("simulate", "Monte Carlo Ramsey measurements with photon shot noise");
    c.num("a", sim.readout.a, "mean photons from m_s = 0");
    c.num("b", sim.readout.b, "mean photons from m_s = +1");
    c.num("tau", sim.tau_s, "precession time, s");
    c.num("t2star", sim.t2star_s, "T2*, s");
    c.num("p", sim.p, "stretched-exponential decay parameter, (0, 2]");
    c.num("vartheta", sim.vartheta, "final pulse phase, rad");
    c.num("b-sense", sim.b_sense_T, "sensed field, T");
    c.num("measurements", meas_d, "number of measurements");
    c.num("overhead", t_o_sim, "overhead time per measurement, s (for the predicted column)");
    c.app->add_flag("--emit-counts", emit_counts, "one row per measurement instead of a summary");
    c.run = [&] {
      if (!(meas_d >= 1.0) || std::round(meas_d) != meas_d)
        throw ValidationError("measurements", "must be a positive integer");
      sim.measurements = static_cast<std::size_t>(meas_d);
      sim.seed = g.seed;
      const auto counts = simulate_ramsey(sim);
      CsvTable t;
      t.metadata.push_back("seed: " + std::to_string(g.seed));
      if (emit_counts) {
        t.header = {"measurement", "photons"};
        for (std::size_t i = 0; i < counts.size(); ++i) t.add_row({std::to_string(i), std::to_string(counts[i])});
        return t;
      }
      long double s = 0.0L, s2 = 0.0L;
      for (auto x : counts) s += x, s2 += static_cast<long double>(x) * x;
      const double n = static_cast<double>(counts.size());
      const double mean = static_cast<double>(s / n);
      const double var = n > 1 ? static_cast<double>((s2 - s * s / n) / (n - 1)) : 0.0;
      const double vis = std::isinf(sim.t2star_s) ? 1.0 : std::exp(-std::pow(sim.tau_s / sim.t2star_s, sim.p));
      const FieldCalibration cal{sim.readout.a, sim.readout.b, sim.tau_s, sim.vartheta, vis};
      const double b_hat = estimate_field(counts, cal);
      // Per-shot slope of the mean count with respect to the field.
      const double slope = 0.5 * (sim.readout.a - sim.readout.b) * vis * std::sin(sim.vartheta) *
                           constants().gamma_e() * sim.tau_s;
      t.header = {"measurements", "mean_photons", "var_photons", "b_estimate_T", "b_stderr_T"};
      std::vector<std::string> row = {std::to_string(counts.size()), format_double(mean), format_double(var),
                                      format_double(b_hat), format_double(std::sqrt(var / n) / slope)};
      if (std::isfinite(sim.t2star_s)) {
        ProtocolParams p;
        p.tau_s = sim.tau_s;
        p.t_i_s = t_o_sim;
        p.contrast = sim.readout.contrast();
        p.n_avg = sim.readout.n_avg();
        p.p_exponent = sim.p;
        const double eta = eta_ramsey_exact(p, sim.t2star_s).eta_T_per_sqrtHz;
        t.header.push_back("b_stderr_predicted_T");
        row.push_back(format_double(eta / std::sqrt(n * (sim.tau_s + t_o_sim))));
      }
      t.add_row(row);
      return t;
    };
  }

  // anneal
  double temp_c = 800.0, hours = 12.0, d0 = kVacancyD0, ea = kVacancyEa;
  {
    auto& c = cmds["anneal"];
    c.app = app.add_subcommand("anneal", "vacancy diffusion during an anneal");
    c.num("temp-c", temp_c, "anneal temperature, Celsius");
    c.num("hours", hours, "anneal duration, h");
    c.num("d0", d0, "diffusion prefactor, m^2/s");
    c.num("ea", ea, "activation energy, eV");
    c.run = [&] {
      const auto d = vacancy_diffusion(temp_c + 273.15, hours * 3600.0, d0, ea);
      CsvTable t;
      t.header = {"temp_K", "duration_s", "D_m2s", "r_rms_m", "D_low_m2s", "D_high_m2s", "r_rms_low_m", "r_rms_high_m"};
      t.add_row({format_double(temp_c + 273.15), format_double(hours * 3600.0), format_double(d.D_m2s),
                 format_double(d.r_rms_m), format_double(d.D_low_m2s), format_double(d.D_high_m2s),
                 format_double(d.r_rms_low_m), format_double(d.r_rms_high_m)});
      return t;
    };
  }

  // irradiate
  double irr_n = 0.0, irr_yield = 2e-4, irr_rec = 0.4, irr_npn = 2.0;
  {
    auto& c = cmds["irradiate"];
    c.app = app.add_subcommand("irradiate", "electron dose to create vacancies for NV formation");
    c.num("n-total", irr_n, "total nitrogen, ppm (defaults to the sample's)");
    c.num("yield", irr_yield, "vacancies per electron per micron");
    c.num("recombination", irr_rec, "fraction of vacancies recombining immediately");
    c.num("nitrogens-per-nv", irr_npn, "nitrogen atoms consumed per NV");
    c.run = [&] {
      const double n = irr_n > 0.0 ? irr_n : need_sample().n_total_ppm();
      CsvTable t;
      t.header = {"n_total_ppm", "dose_per_cm2"};
      t.add_row({format_double(n), format_double(irradiation_dose(n, irr_yield, irr_rec, irr_npn))});
      return t;
    };
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Command* cmd = nullptr;
    std::string name;
    for (auto& [n, c] : cmds)
      if (c.app->parsed()) cmd = &c, name = n;

    if (g.sweep.size() > 1) throw UsageError("only one --sweep parameter is allowed");
    if (g.sweep.empty() != g.grid.empty()) throw UsageError("--sweep and --grid go together");

    CsvTable out;
    if (g.sweep.empty()) {
      out = cmd->run();
    } else {
      if (!cmd->sweepable) throw UsageError(name + " does not take --sweep");
      const std::string param = g.sweep.front();
      double* target = cmd->find(param);
      if (!target) throw UsageError("cannot sweep '" + param + "' in " + name);
      for (double v : parse_grid(g.grid, g.log_grid)) {
        *target = v;
        CsvTable t = cmd->run();
        if (out.header.empty()) {
          out.metadata = t.metadata;
          out.header = t.header;
          out.header.insert(out.header.begin(), param);
        }
        for (auto& r : t.rows) {
          r.insert(r.begin(), format_double(v));
          out.add_row(std::move(r));
        }
      }
      out.metadata.push_back("sweep: " + param + " over " + g.grid + (g.log_grid ? " (log)" : ""));
    }

    std::vector<std::string> md = {std::string("tool: nvsens ") + kToolVersion, "command: " + name};
    for (auto& m : out.metadata)
      if (m.rfind("tool: ", 0) != 0) md.push_back(m);
    for (auto& m : defaults_metadata(*cmd, g.sweep.empty() ? "" : g.sweep.front())) md.push_back(m);
    out.metadata = std::move(md);
    emit(out, g.out_path);
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
