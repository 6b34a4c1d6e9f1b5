#pragma once

#include <optional>
#include <string>
#include <vector>

#include "homdip/analysis.hpp"
#include "homdip/config.hpp"
#include "homdip/engine.hpp"
#include "homdip/inversion.hpp"

namespace homdip {

// Fully resolved run description: every default made explicit so a manifest
// alone reproduces the outputs byte for byte.
struct Scenario {
  JsaParams jsa;

  // sample chain
  std::string sample_kind = "identity";  // identity | waveplate_pbs | linear_phase_pbs | lorentz | tabulated
  double sample_alpha = 0.0;             // eV^-1
  double sample_beta = M_PI;             // rad
  double theta_deg = 0.0;
  bool reanchor_beta = false;
  double reanchor_omega_ev = 1.5344578999876238;  // 808 nm
  LorentzParams lorentz{0.05, EnergyEv{1.5344578999876238}, 33.4};
  std::string tabulated_file;

  bool filter_enabled = false;
  FilterParams filter;

  std::string background_mode = "none";  // none | calibrated | explicit
  double bg_target_visibility = 0.967;
  double bg_singles_ratio = 1.0 / 3.0;
  double bg_window = 1.0;
  double bg_singles_signal = 0.0;
  double bg_singles_idler = 0.0;
  double bg_mean_transmission = 1.0;

  double tau_min_fs = -197.46358707;  // -300 eV^-1
  double tau_max_fs = 197.46358707;
  int tau_points = 201;
  bool pad_baseline = true;

  int n_plus = 129;
  int n_minus = 513;
  bool cw_limit = false;

  std::vector<double> thetas_deg;

  // Lorentz-fit settings; band defaults to the filter FWHM interval.
  double fit_band_lo_ev = 0.0;
  double fit_band_hi_ev = 0.0;
  int fit_samples = 51;
  double fit_omega_res_ev = 1.5344578999876238;
  bool fit_omega_free = false;

  std::string basename = "run";
  bool svg_output = true;

  static Scenario from_config(const ConfigFile& cfg);

  // manifest (JSON) round trip
  std::string to_manifest_json(const std::string& command) const;
  static Scenario from_manifest_json(const std::string& json_text);

  // derived builders
  double effective_beta() const;
  TransmissionFn build_sample(double theta_rad) const;
  EngineConfig engine_config() const;
  std::vector<double> tau_list_ev_inv() const;  // wings appended when needed
  std::vector<double> sweep_thetas_deg() const; // thetas or the single sample theta
  std::optional<BackgroundModel> resolve_background(double baseline_a0) const;

  void validate() const;
};

struct RunResult {
  std::vector<std::string> files;
  int rows_total = 0;
  int rows_converged = 0;
};

RunResult run_dip(const Scenario& s, const std::string& out_dir);
RunResult run_sweep(const Scenario& s, const std::string& out_dir);
RunResult run_fit_t2(const Scenario& s, const std::string& out_dir);

}  // namespace homdip
