#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "constants.hpp"
#include "errors.hpp"

namespace nvsens {

inline constexpr double kDefaultZeta = 0.7;
inline constexpr double kDefaultXiPerpHz = 10.0e3;
inline constexpr double kDefaultXiSpreadHz = 0.0;
inline constexpr double kDefaultT1 = 6.0e-3;

// Raw, possibly incomplete sample description. Every field is optional; the
// builder fills documented defaults and derives dependent quantities.
struct SampleInputs {
  std::optional<double> n_total_ppm, n_s0_ppm, nv_minus_ppm, nv0_ppm, c13_ppm;
  std::optional<double> e_conv, chi, zeta;
  std::optional<double> xi_perp_hz, xi_perp_spread_hz;
  std::optional<double> t2star_other_s, t1_s;
};

// Validated diamond material descriptor. Only obtainable through build(), so
// every instance satisfies the concentration and efficiency invariants.
class DiamondSample {
public:
  static DiamondSample build(const SampleInputs& in);

  double n_total_ppm() const { return n_total_; }
  double n_s0_ppm() const { return n_s0_; }
  double nv_minus_ppm() const { return nv_minus_; }
  double nv0_ppm() const { return nv0_; }
  double c13_ppm() const { return c13_; }
  double e_conv() const { return e_conv_; }
  double chi() const { return chi_; }
  double zeta() const { return zeta_; }
  double xi_perp_hz() const { return xi_perp_; }
  double xi_perp_spread_hz() const { return xi_spread_; }
  // +infinity when no residual mechanism is specified.
  double t2star_other_s() const { return t2_other_; }
  double t1_s() const { return t1_; }

  // Names of fields that were filled from defaults or derived.
  const std::vector<std::string>& defaults_used() const { return defaults_; }

  // Copy with a different total nitrogen content, efficiencies held fixed.
  DiamondSample with_total_nitrogen(double n_total_ppm) const;

private:
  DiamondSample() = default;

  double n_total_ = 0, n_s0_ = 0, nv_minus_ = 0, nv0_ = 0, c13_ = 0;
  double e_conv_ = 0, chi_ = 0, zeta_ = kDefaultZeta;
  double xi_perp_ = kDefaultXiPerpHz, xi_spread_ = kDefaultXiSpreadHz;
  double t2_other_ = std::numeric_limits<double>::infinity();
  double t1_ = kDefaultT1;
  std::vector<std::string> defaults_;
};

namespace detail {

inline void require_finite_nonneg(const char* field, double v) {
  if (!std::isfinite(v)) throw ValidationError(field, "must be finite");
  if (v < 0.0) throw ValidationError(field, "must be non-negative");
}

inline void require_unit_interval(const char* field, double v) {
  require_finite_nonneg(field, v);
  if (v > 1.0) throw ValidationError(field, "must lie in [0, 1]");
}

inline bool rel_close(double a, double b, double rtol) {
  return std::abs(a - b) <= rtol * std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace detail

inline DiamondSample DiamondSample::build(const SampleInputs& in) {
  using detail::rel_close;
  using detail::require_finite_nonneg;
  using detail::require_unit_interval;
  constexpr double kTol = 1e-9;

  DiamondSample s;
  auto note = [&s](const char* f) { s.defaults_.emplace_back(f); };

  for (auto [name, v] : {std::pair{"n_total_ppm", in.n_total_ppm}, {"n_s0_ppm", in.n_s0_ppm},
                         {"nv_minus_ppm", in.nv_minus_ppm}, {"nv0_ppm", in.nv0_ppm},
                         {"c13_ppm", in.c13_ppm}, {"xi_perp_hz", in.xi_perp_hz},
                         {"xi_perp_spread_hz", in.xi_perp_spread_hz}}) {
    if (v) require_finite_nonneg(name, *v);
  }
  for (auto [name, v] :
       {std::pair{"e_conv", in.e_conv}, {"chi", in.chi}, {"zeta", in.zeta}}) {
    if (v) require_unit_interval(name, *v);
  }

  s.zeta_ = in.zeta.value_or(kDefaultZeta);
  if (!in.zeta) note("zeta");
  if (in.zeta && s.zeta_ == 0.0 && in.nv_minus_ppm.value_or(0.0) > 0.0)
    throw ValidationError("zeta", "zero charge-state fraction with non-zero NV- content");

  // Total nitrogen: explicit, or the sum of the listed nitrogen species.
  if (in.n_total_ppm) {
    s.n_total_ = *in.n_total_ppm;
  } else {
    // An unlisted NV0 content follows from NV- and the charge-state fraction.
    double nv0 = in.nv0_ppm.value_or(0.0);
    if (!in.nv0_ppm && in.nv_minus_ppm && s.zeta_ > 0.0) nv0 = *in.nv_minus_ppm * (1.0 - s.zeta_) / s.zeta_;
    s.n_total_ = in.n_s0_ppm.value_or(0.0) + in.nv_minus_ppm.value_or(0.0) + nv0;
    note("n_total_ppm");
  }

  // NV- and conversion efficiency.
  if (in.nv_minus_ppm && in.e_conv) {
    s.nv_minus_ = *in.nv_minus_ppm;
    s.e_conv_ = *in.e_conv;
    if (s.n_total_ > 0.0 && !rel_close(s.e_conv_, s.nv_minus_ / s.n_total_, kTol))
      throw ValidationError("e_conv", "inconsistent with nv_minus_ppm / n_total_ppm");
  } else if (in.e_conv) {
    s.e_conv_ = *in.e_conv;
    s.nv_minus_ = s.e_conv_ * s.n_total_;
    note("nv_minus_ppm");
  } else {
    s.nv_minus_ = in.nv_minus_ppm.value_or(0.0);
    s.e_conv_ = s.n_total_ > 0.0 ? s.nv_minus_ / s.n_total_ : 0.0;
    note("e_conv");
    if (!in.nv_minus_ppm) note("nv_minus_ppm");
  }

  // NV0 from the charge-state fraction unless given.
  if (in.nv0_ppm) {
    s.nv0_ = *in.nv0_ppm;
    const double nvt = s.nv_minus_ + s.nv0_;
    if (nvt > 0.0) {
      const double z = s.nv_minus_ / nvt;
      if (in.zeta) {
        if (!rel_close(z, s.zeta_, kTol))
          throw ValidationError("zeta", "inconsistent with nv_minus_ppm / (nv_minus_ppm + nv0_ppm)");
      } else {
        s.zeta_ = z;
      }
    }
  } else {
    s.nv0_ = s.zeta_ > 0.0 ? s.nv_minus_ * (1.0 - s.zeta_) / s.zeta_ : 0.0;
    note("nv0_ppm");
  }

  if (s.nv_minus_ + s.nv0_ > s.n_total_ * (1.0 + kTol))
    throw ValidationError("nv_minus_ppm", "nv_minus_ppm + nv0_ppm exceeds n_total_ppm");

  const double chi_derived = s.n_total_ > 0.0 ? (s.nv_minus_ + s.nv0_) / s.n_total_ : 0.0;
  if (in.chi) {
    s.chi_ = *in.chi;
    if (s.n_total_ > 0.0 && !rel_close(s.chi_, chi_derived, kTol))
      throw ValidationError("chi", "inconsistent with (nv_minus_ppm + nv0_ppm) / n_total_ppm");
  } else {
    s.chi_ = chi_derived;
    note("chi");
  }

  if (in.n_s0_ppm) {
    s.n_s0_ = *in.n_s0_ppm;
    if (s.n_s0_ + s.nv_minus_ + s.nv0_ > s.n_total_ * (1.0 + kTol))
      throw ValidationError("n_s0_ppm", "N_S0 + NV- + NV0 exceeds n_total_ppm");
  } else {
    s.n_s0_ = std::max(0.0, s.n_total_ - s.nv_minus_ - s.nv0_);
    note("n_s0_ppm");
  }

  s.c13_ = in.c13_ppm.value_or(kNaturalC13Ppm);
  if (!in.c13_ppm) note("c13_ppm");
  if (s.c13_ > 1e6) throw ValidationError("c13_ppm", "cannot exceed 1e6 ppm");

  if (s.n_total_ == 0.0 && s.n_s0_ == 0.0 && s.nv_minus_ == 0.0 && s.nv0_ == 0.0 &&
      s.c13_ == 0.0)
    throw ValidationError("concentrations_ppm", "all concentrations are zero");

  s.xi_perp_ = in.xi_perp_hz.value_or(kDefaultXiPerpHz);
  if (!in.xi_perp_hz) note("xi_perp_hz");
  s.xi_spread_ = in.xi_perp_spread_hz.value_or(kDefaultXiSpreadHz);
  if (!in.xi_perp_spread_hz) note("xi_perp_spread_hz");

  if (in.t2star_other_s) {
    if (!(*in.t2star_other_s > 0.0) || std::isnan(*in.t2star_other_s))
      throw ValidationError("t2star_other_s", "must be positive");
    s.t2_other_ = *in.t2star_other_s;
  } else {
    note("t2star_other_s");
  }
  if (in.t1_s) {
    if (!(*in.t1_s > 0.0) || !std::isfinite(*in.t1_s))
      throw ValidationError("t1_s", "must be positive and finite");
    s.t1_ = *in.t1_s;
  } else {
    note("t1_s");
  }
  return s;
}

inline DiamondSample DiamondSample::with_total_nitrogen(double n_total_ppm) const {
  detail::require_finite_nonneg("n_total_ppm", n_total_ppm);
  DiamondSample s = *this;
  const double scale = n_total_ > 0.0 ? n_total_ppm / n_total_ : 0.0;
  s.n_total_ = n_total_ppm;
  s.nv_minus_ = e_conv_ * n_total_ppm;
  s.nv0_ = nv0_ * scale;
  s.n_s0_ = n_s0_ * scale;
  return s;
}

// ---------------------------------------------------------------------------
// Descriptor I/O

inline SampleInputs sample_inputs_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("sample descriptor must be a JSON object");
  SampleInputs in;
  auto read = [&doc](const char* section, const char* key) -> std::optional<double> {
    if (!doc.contains(section)) return std::nullopt;
    const auto& sec = doc.at(section);
    if (!sec.is_object()) throw ParseError(std::string(section) + " must be an object");
    if (!sec.contains(key) || sec.at(key).is_null()) return std::nullopt;
    const auto& v = sec.at(key);
    if (!v.is_number())
      throw ParseError(std::string(section) + "." + key + " must be a number");
    return v.get<double>();
  };
  for (const auto& [key, _] : doc.items()) {
    if (key != "concentrations_ppm" && key != "efficiencies" && key != "strain" &&
        key != "relaxation" && key != "metadata")
      throw ParseError("unknown top-level key '" + key + "'");
  }
  in.n_total_ppm = read("concentrations_ppm", "n_total");
  in.n_s0_ppm = read("concentrations_ppm", "n_s0");
  in.nv_minus_ppm = read("concentrations_ppm", "nv_minus");
  in.nv0_ppm = read("concentrations_ppm", "nv0");
  in.c13_ppm = read("concentrations_ppm", "c13");
  in.e_conv = read("efficiencies", "e_conv");
  in.chi = read("efficiencies", "chi");
  in.zeta = read("efficiencies", "zeta");
  in.xi_perp_hz = read("strain", "xi_perp_hz");
  in.xi_perp_spread_hz = read("strain", "xi_perp_spread_hz");
  in.t2star_other_s = read("relaxation", "t2star_other_s");
  in.t1_s = read("relaxation", "t1_s");
  return in;
}

inline DiamondSample sample_from_json(const nlohmann::json& doc) {
  return DiamondSample::build(sample_inputs_from_json(doc));
}

inline DiamondSample load_sample(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open sample descriptor " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return sample_from_json(doc);
}

// Full descriptor with every field explicit, so that reloading reproduces the
// sample exactly.
inline nlohmann::json sample_to_json(const DiamondSample& s) {
  nlohmann::json doc;
  doc["concentrations_ppm"] = {{"n_total", s.n_total_ppm()}, {"n_s0", s.n_s0_ppm()},
                               {"nv_minus", s.nv_minus_ppm()}, {"nv0", s.nv0_ppm()},
                               {"c13", s.c13_ppm()}};
  doc["efficiencies"] = {{"e_conv", s.e_conv()}, {"chi", s.chi()}, {"zeta", s.zeta()}};
  doc["strain"] = {{"xi_perp_hz", s.xi_perp_hz()}, {"xi_perp_spread_hz", s.xi_perp_spread_hz()}};
  doc["relaxation"] = {{"t1_s", s.t1_s()}};
  if (std::isfinite(s.t2star_other_s())) doc["relaxation"]["t2star_other_s"] = s.t2star_other_s();
  return doc;
}

inline void save_sample(const DiamondSample& s, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << sample_to_json(s).dump(2) << '\n';
  if (!os) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Measurement protocol

enum class Protocol { Ramsey, CWODMR, PulsedODMR, HahnEcho, CPMG };
enum class Basis { SQ, DQ };

inline const char* to_string(Protocol p) {
  switch (p) {
    case Protocol::Ramsey: return "ramsey";
    case Protocol::CWODMR: return "cw-odmr";
    case Protocol::PulsedODMR: return "pulsed-odmr";
    case Protocol::HahnEcho: return "hahn-echo";
    case Protocol::CPMG: return "cpmg";
  }
  return "?";
}

inline const char* to_string(Basis b) { return b == Basis::SQ ? "sq" : "dq"; }

struct ProtocolParams {
  Protocol protocol = Protocol::Ramsey;
  double tau_s = 1e-6;
  double t_i_s = 0.0;
  double t_r_s = 0.0;
  double contrast = 0.01;
  double n_avg = 0.01;
  double n_sensors = 1.0;
  int delta_ms = 1;
  double p_exponent = 1.0;
  Basis basis = Basis::SQ;
  int k_pulses = 1;
  double s_scaling = 2.0 / 3.0;
  double t_b_s = 0.0;
  double rate_r_hz = 0.0;
  double linewidth_hz = 0.0;

  double overhead_s() const { return t_i_s + t_r_s; }
  // Collected photons per measurement from the whole ensemble.
  double photons_per_measurement() const { return n_sensors * n_avg; }

  void validate() const {
    if ((basis == Basis::DQ) != (delta_ms == 2) || (delta_ms != 1 && delta_ms != 2))
      throw ValidationError("delta_ms", "must be 1 for the SQ basis and 2 for the DQ basis");
    for (auto [name, v] : {std::pair{"tau_s", tau_s}, {"t_i_s", t_i_s}, {"t_r_s", t_r_s},
                           {"n_avg", n_avg}, {"t_b_s", t_b_s}, {"rate_r_hz", rate_r_hz},
                           {"linewidth_hz", linewidth_hz}})
      detail::require_finite_nonneg(name, v);
    if (tau_s == 0.0 && t_i_s == 0.0 && t_r_s == 0.0)
      throw ValidationError("tau_s", "tau_s, t_i_s and t_r_s are all zero");
    detail::require_unit_interval("contrast", contrast);
    if (!(n_sensors >= 1.0) || !std::isfinite(n_sensors))
      throw ValidationError("n_sensors", "must be >= 1");
    if (!(p_exponent > 0.0) || !std::isfinite(p_exponent))
      throw ValidationError("p_exponent", "must be positive");
    if (k_pulses < 1) throw ValidationError("k_pulses", "must be >= 1");
    if (!(s_scaling >= 0.0 && s_scaling < 1.0))
      throw ValidationError("s_scaling", "must lie in [0, 1)");
  }
};

// Default stretch exponent: Lorentzian ensembles (p = 1), Gaussian single
// centres (p = 2).
inline double default_stretch_exponent(bool single_nv) { return single_nv ? 2.0 : 1.0; }

}  // namespace nvsens
