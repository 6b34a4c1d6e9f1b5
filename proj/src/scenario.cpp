#include "homdip/scenario.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <set>

#include "homdip/errors.hpp"
#include "homdip/io_util.hpp"
#include "homdip/svg.hpp"
#include "homdip/version.hpp"

namespace homdip {

namespace {

using nlohmann::json;

const std::set<std::string> kSampleKinds = {"identity", "waveplate_pbs", "linear_phase_pbs",
                                            "lorentz", "tabulated"};

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace

Scenario Scenario::from_config(const ConfigFile& cfg) {
  Scenario s;
  s.jsa.omega_p = {cfg.number_or("jsa.omega_p_ev", s.jsa.omega_p.value)};
  s.jsa.sigma_p = {cfg.number_or("jsa.sigma_p_ev", s.jsa.sigma_p.value)};
  s.jsa.sigma_minus = {cfg.number_or("jsa.sigma_minus_ev", s.jsa.sigma_minus.value)};

  s.sample_kind = cfg.string_or("sample.kind", s.sample_kind);
  s.sample_alpha = cfg.number_or("sample.alpha_ev_inv", s.sample_alpha);
  s.sample_beta = cfg.number_or("sample.beta_rad", s.sample_beta);
  s.theta_deg = cfg.number_or("sample.theta_deg", s.theta_deg);
  s.reanchor_beta = cfg.boolean_or("sample.reanchor_beta", s.reanchor_beta);
  s.reanchor_omega_ev = cfg.number_or("sample.reanchor_omega_ev", s.reanchor_omega_ev);
  s.lorentz.strength = cfg.number_or("sample.strength_ev", s.lorentz.strength);
  s.lorentz.omega_res = {cfg.number_or("sample.omega_res_ev", s.lorentz.omega_res.value)};
  if (cfg.has("sample.t2_fs")) {
    s.lorentz.t2 = cfg.number("sample.t2_fs") / kHbarEvFs;
  }
  s.tabulated_file = cfg.string_or("sample.file", s.tabulated_file);

  s.filter_enabled = cfg.boolean_or("filter.enabled", s.filter_enabled);
  s.filter.a = cfg.number_or("filter.a", s.filter.a);
  s.filter.b = {cfg.number_or("filter.b_ev", s.filter.b.value)};
  s.filter.c = {cfg.number_or("filter.c_ev", s.filter.c.value)};
  s.filter.d = cfg.number_or("filter.d", s.filter.d);

  s.background_mode = cfg.string_or("background.mode", s.background_mode);
  s.bg_target_visibility = cfg.number_or("background.visibility", s.bg_target_visibility);
  s.bg_singles_ratio = cfg.number_or("background.singles_ratio", s.bg_singles_ratio);
  s.bg_window = cfg.number_or("background.window", s.bg_window);
  s.bg_singles_signal = cfg.number_or("background.singles_signal", s.bg_singles_signal);
  s.bg_singles_idler = cfg.number_or("background.singles_idler_nosample", s.bg_singles_idler);
  s.bg_mean_transmission = cfg.number_or("background.mean_transmission", s.bg_mean_transmission);

  s.tau_min_fs = cfg.number_or("scan.tau_min_fs", s.tau_min_fs);
  s.tau_max_fs = cfg.number_or("scan.tau_max_fs", s.tau_max_fs);
  s.tau_points = static_cast<int>(cfg.number_or("scan.points", s.tau_points));
  s.pad_baseline = cfg.boolean_or("scan.pad_baseline", s.pad_baseline);

  s.n_plus = static_cast<int>(cfg.number_or("grid.n_plus", s.n_plus));
  s.n_minus = static_cast<int>(cfg.number_or("grid.n_minus", s.n_minus));
  s.cw_limit = cfg.boolean_or("grid.cw_limit", s.cw_limit);

  if (const auto thetas = cfg.array("thetas")) s.thetas_deg = *thetas;

  const double default_hw = s.filter.fwhm_half_width();
  s.fit_band_lo_ev = cfg.number_or("fit.band_lo_ev", s.filter.b.value - default_hw);
  s.fit_band_hi_ev = cfg.number_or("fit.band_hi_ev", s.filter.b.value + default_hw);
  s.fit_samples = static_cast<int>(cfg.number_or("fit.n_samples", s.fit_samples));
  s.fit_omega_res_ev = cfg.number_or("fit.omega_res_ev", s.fit_omega_res_ev);
  s.fit_omega_free = cfg.boolean_or("fit.omega_free", s.fit_omega_free);

  s.basename = cfg.string_or("output.basename", s.basename);
  s.svg_output = cfg.boolean_or("output.svg", s.svg_output);

  s.validate();
  return s;
}

void Scenario::validate() const {
  jsa.validate();
  if (!kSampleKinds.count(sample_kind)) {
    throw ConfigError("scenario: unknown sample.kind '" + sample_kind + "'");
  }
  if (sample_kind == "tabulated" && tabulated_file.empty()) {
    throw ConfigError("scenario: sample.kind = tabulated needs sample.file");
  }
  filter.validate();
  if (background_mode != "none" && background_mode != "calibrated" &&
      background_mode != "explicit") {
    throw ConfigError("scenario: background.mode must be none|calibrated|explicit");
  }
  if (tau_points < 5) {
    throw ConfigError("scenario: scan.points must be >= 5");
  }
  if (!(tau_max_fs > tau_min_fs)) {
    throw ConfigError("scenario: scan.tau_max_fs must exceed scan.tau_min_fs");
  }
  if (basename.empty()) {
    throw ConfigError("scenario: output.basename must be non-empty");
  }
  for (double t : thetas_deg) {
    if (!(t >= 0.0 && t <= 90.0)) {
      throw ConfigError("scenario: thetas must lie in [0, 90] degrees");
    }
  }
}

double Scenario::effective_beta() const {
  return reanchor_beta ? M_PI - sample_alpha * reanchor_omega_ev : sample_beta;
}

TransmissionFn Scenario::build_sample(double theta_rad) const {
  if (sample_kind == "identity") return identity_transmission();
  if (sample_kind == "waveplate_pbs") {
    return waveplate_pbs_fn({sample_alpha, effective_beta(), theta_rad});
  }
  if (sample_kind == "linear_phase_pbs") {
    return linear_phase_fn(sample_alpha, effective_beta());
  }
  if (sample_kind == "lorentz") return lorentz_fn(lorentz);
  if (sample_kind == "tabulated") return load_tabulated_csv(tabulated_file);
  throw ConfigError("scenario: unknown sample.kind '" + sample_kind + "'");
}

EngineConfig Scenario::engine_config() const {
  EngineConfig cfg;
  cfg.grid = default_grid(jsa, n_plus, n_minus);
  if (filter_enabled) cfg.filter = supergaussian_fn(filter);
  cfg.cw_limit = cw_limit;
  cfg.normalization = Normalization::unit_baseline;
  return cfg;
}

std::vector<double> Scenario::tau_list_ev_inv() const {
  std::vector<double> taus(tau_points);
  const double lo = fs_to_ev_inv(tau_min_fs).value;
  const double hi = fs_to_ev_inv(tau_max_fs).value;
  for (int i = 0; i < tau_points; ++i) {
    taus[i] = lo + (hi - lo) * i / (tau_points - 1);
  }
  if (pad_baseline) taus = with_baseline_wings(std::move(taus), jsa);
  return taus;
}

std::vector<double> Scenario::sweep_thetas_deg() const {
  return thetas_deg.empty() ? std::vector<double>{theta_deg} : thetas_deg;
}

std::optional<BackgroundModel> Scenario::resolve_background(double baseline_a0) const {
  if (background_mode == "none") return std::nullopt;
  if (background_mode == "calibrated") {
    return calibrate_background(bg_target_visibility, baseline_a0, bg_window,
                                bg_singles_ratio);
  }
  BackgroundModel bg;
  bg.singles_signal = bg_singles_signal;
  bg.singles_idler_nosample = bg_singles_idler;
  bg.window = bg_window;
  bg.mean_transmission = bg_mean_transmission;
  bg.validate();
  return bg;
}

std::string Scenario::to_manifest_json(const std::string& command) const {
  json j;
  j["tool"] = "homdip";
  j["version"] = kVersion;
  j["command"] = command;
  j["created_utc"] = utc_timestamp();
  json sc;
  sc["jsa"] = {{"omega_p_ev", jsa.omega_p.value},
               {"sigma_p_ev", jsa.sigma_p.value},
               {"sigma_minus_ev", jsa.sigma_minus.value}};
  sc["sample"] = {{"kind", sample_kind},
                  {"alpha_ev_inv", sample_alpha},
                  {"beta_rad", sample_beta},
                  {"beta_effective_rad", effective_beta()},
                  {"theta_deg", theta_deg},
                  {"reanchor_beta", reanchor_beta},
                  {"reanchor_omega_ev", reanchor_omega_ev},
                  {"strength_ev", lorentz.strength},
                  {"omega_res_ev", lorentz.omega_res.value},
                  {"t2_fs", lorentz.t2 * kHbarEvFs},
                  {"file", tabulated_file}};
  sc["filter"] = {{"enabled", filter_enabled},
                  {"a", filter.a},
                  {"b_ev", filter.b.value},
                  {"c_ev", filter.c.value},
                  {"d", filter.d}};
  sc["background"] = {{"mode", background_mode},
                      {"visibility", bg_target_visibility},
                      {"singles_ratio", bg_singles_ratio},
                      {"window", bg_window},
                      {"singles_signal", bg_singles_signal},
                      {"singles_idler_nosample", bg_singles_idler},
                      {"mean_transmission", bg_mean_transmission}};
  sc["scan"] = {{"tau_min_fs", tau_min_fs},
                {"tau_max_fs", tau_max_fs},
                {"points", tau_points},
                {"pad_baseline", pad_baseline}};
  sc["grid"] = {{"n_plus", n_plus}, {"n_minus", n_minus}, {"cw_limit", cw_limit}};
  sc["thetas"] = thetas_deg;
  sc["fit"] = {{"band_lo_ev", fit_band_lo_ev},
               {"band_hi_ev", fit_band_hi_ev},
               {"n_samples", fit_samples},
               {"omega_res_ev", fit_omega_res_ev},
               {"omega_free", fit_omega_free}};
  sc["output"] = {{"basename", basename}, {"svg", svg_output}};
  j["scenario"] = sc;
  return j.dump(2) + "\n";
}

Scenario Scenario::from_manifest_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest: JSON parse failure: ") + e.what());
  }
  if (!j.contains("scenario")) {
    throw ConfigError("manifest: missing 'scenario' object");
  }
  const json& sc = j["scenario"];
  Scenario s;
  try {
    const json& sj = sc.at("jsa");
    s.jsa.omega_p = {sj.at("omega_p_ev").get<double>()};
    s.jsa.sigma_p = {sj.at("sigma_p_ev").get<double>()};
    s.jsa.sigma_minus = {sj.at("sigma_minus_ev").get<double>()};
    const json& sa = sc.at("sample");
    s.sample_kind = sa.at("kind").get<std::string>();
    s.sample_alpha = sa.at("alpha_ev_inv").get<double>();
    s.sample_beta = sa.at("beta_rad").get<double>();
    s.theta_deg = sa.at("theta_deg").get<double>();
    s.reanchor_beta = sa.at("reanchor_beta").get<bool>();
    s.reanchor_omega_ev = sa.at("reanchor_omega_ev").get<double>();
    s.lorentz.strength = sa.at("strength_ev").get<double>();
    s.lorentz.omega_res = {sa.at("omega_res_ev").get<double>()};
    s.lorentz.t2 = sa.at("t2_fs").get<double>() / kHbarEvFs;
    s.tabulated_file = sa.at("file").get<std::string>();
    const json& f = sc.at("filter");
    s.filter_enabled = f.at("enabled").get<bool>();
    s.filter.a = f.at("a").get<double>();
    s.filter.b = {f.at("b_ev").get<double>()};
    s.filter.c = {f.at("c_ev").get<double>()};
    s.filter.d = f.at("d").get<double>();
    const json& b = sc.at("background");
    s.background_mode = b.at("mode").get<std::string>();
    s.bg_target_visibility = b.at("visibility").get<double>();
    s.bg_singles_ratio = b.at("singles_ratio").get<double>();
    s.bg_window = b.at("window").get<double>();
    s.bg_singles_signal = b.at("singles_signal").get<double>();
    s.bg_singles_idler = b.at("singles_idler_nosample").get<double>();
    s.bg_mean_transmission = b.at("mean_transmission").get<double>();
    const json& scan = sc.at("scan");
    s.tau_min_fs = scan.at("tau_min_fs").get<double>();
    s.tau_max_fs = scan.at("tau_max_fs").get<double>();
    s.tau_points = scan.at("points").get<int>();
    s.pad_baseline = scan.at("pad_baseline").get<bool>();
    const json& g = sc.at("grid");
    s.n_plus = g.at("n_plus").get<int>();
    s.n_minus = g.at("n_minus").get<int>();
    s.cw_limit = g.at("cw_limit").get<bool>();
    s.thetas_deg = sc.at("thetas").get<std::vector<double>>();
    const json& fit = sc.at("fit");
    s.fit_band_lo_ev = fit.at("band_lo_ev").get<double>();
    s.fit_band_hi_ev = fit.at("band_hi_ev").get<double>();
    s.fit_samples = fit.at("n_samples").get<int>();
    s.fit_omega_res_ev = fit.at("omega_res_ev").get<double>();
    s.fit_omega_free = fit.at("omega_free").get<bool>();
    const json& o = sc.at("output");
    s.basename = o.at("basename").get<std::string>();
    s.svg_output = o.at("svg").get<bool>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest: missing or mistyped field: ") + e.what());
  }
  s.validate();
  return s;
}

namespace {

void ensure_dir(const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw ConfigError("cannot create output directory " + out_dir + ": " + ec.message());
  }
}

std::string theta_tag(double theta_deg) { return format_g9(theta_deg); }

// theta = 0 baseline of the chain; anchors the calibrated background floor
double reference_baseline(const Scenario& s) {
  const CoincidenceKernel kernel(s.jsa, s.build_sample(0.0), s.engine_config());
  return kernel.baseline();
}

}  // namespace

RunResult run_dip(const Scenario& s, const std::string& out_dir) {
  s.validate();
  ensure_dir(out_dir);
  RunResult result;

  const auto taus = s.tau_list_ev_inv();
  const auto cfg = s.engine_config();
  const double ref_a = reference_baseline(s);
  const auto bg_base = s.resolve_background(ref_a);

  std::vector<double> taus_fs(taus.size());
  for (std::size_t i = 0; i < taus.size(); ++i) taus_fs[i] = ev_inv_to_fs(taus[i]);

  SvgPlotSpec plot;
  plot.title = s.basename + ": coincidence dips";
  plot.x_label = "delay tau (fs)";
  plot.y_label = "normalized coincidence rate";
  plot.clip_x = true;
  plot.x_min = s.tau_min_fs;
  plot.x_max = s.tau_max_fs;

  for (const double theta_deg : s.sweep_thetas_deg()) {
    const double theta = deg_to_rad(theta_deg);
    const CoincidenceKernel kernel(s.jsa, s.build_sample(theta), cfg);
    double floor = 0.0;
    if (bg_base) {
      BackgroundModel bg = *bg_base;
      if (s.background_mode == "calibrated") {
        bg.mean_transmission = std::clamp(kernel.baseline() / ref_a, 0.0, 1.0);
      }
      floor = accidental_rate(bg);
    }
    const auto tr = trace_from_kernel(kernel, s.jsa, taus, floor, cfg.normalization);
    const std::string path =
        join_path(out_dir, s.basename + "_theta" + theta_tag(theta_deg) + ".csv");
    write_csv(path, {{"tau_fs", taus_fs}, {"rate_norm", tr.rates}});
    result.files.push_back(path);
    ++result.rows_total;
    ++result.rows_converged;
    plot.series.push_back({"theta=" + theta_tag(theta_deg) + " deg", taus_fs, tr.rates, false});
  }

  if (s.svg_output) {
    const std::string path = join_path(out_dir, s.basename + ".svg");
    write_svg_plot(path, plot);
    result.files.push_back(path);
  }
  const std::string manifest = join_path(out_dir, s.basename + "_manifest.json");
  write_text_file(manifest, s.to_manifest_json("dip"));
  result.files.push_back(manifest);
  return result;
}

RunResult run_sweep(const Scenario& s, const std::string& out_dir) {
  s.validate();
  ensure_dir(out_dir);
  if (s.thetas_deg.empty()) {
    throw ConfigError("sweep: config must provide a thetas list");
  }
  RunResult result;

  ThetaSweepConfig sweep;
  sweep.jsa = s.jsa;
  sweep.sample_for_theta = [&s](double theta) { return s.build_sample(theta); };
  sweep.engine = s.engine_config();
  sweep.taus = s.tau_list_ev_inv();
  sweep.background = s.resolve_background(reference_baseline(s));
  sweep.tbar_policy = s.background_mode == "explicit" ? TransmissionPolicy::fixed
                                                      : TransmissionPolicy::actual_transmission;

  std::vector<double> thetas_rad;
  thetas_rad.reserve(s.thetas_deg.size());
  for (double t : s.thetas_deg) thetas_rad.push_back(deg_to_rad(t));
  const auto rows = sweep_theta(thetas_rad, sweep);

  std::vector<double> col_theta, col_loss, col_vis, col_shift, col_rate;
  for (const auto& row : rows) {
    col_theta.push_back(rad_to_deg(row.theta));
    col_loss.push_back(row.loss);
    col_vis.push_back(row.visibility);
    col_shift.push_back(ev_inv_to_fs(row.dip_shift));
    col_rate.push_back(row.mean_rate);
  }
  const std::string path = join_path(out_dir, s.basename + ".csv");
  write_csv(path, {{"theta_deg", col_theta},
                   {"loss", col_loss},
                   {"visibility", col_vis},
                   {"dip_shift_fs", col_shift},
                   {"mean_rate_norm", col_rate}});
  result.files.push_back(path);
  result.rows_total = static_cast<int>(rows.size());
  result.rows_converged = result.rows_total;

  if (s.svg_output) {
    SvgPlotSpec plot;
    plot.title = s.basename + ": visibility and dip shift vs loss";
    plot.x_label = "optical loss (perfect HWP)";
    plot.y_label = "visibility / mean rate";
    plot.y_right_label = "dip shift (fs)";
    plot.series.push_back({"visibility", col_loss, col_vis, false});
    plot.series.push_back({"mean rate", col_loss, col_rate, false});
    plot.series.push_back({"dip shift", col_loss, col_shift, true});
    const std::string svg_path = join_path(out_dir, s.basename + ".svg");
    write_svg_plot(svg_path, plot);
    result.files.push_back(svg_path);
  }
  const std::string manifest = join_path(out_dir, s.basename + "_manifest.json");
  write_text_file(manifest, s.to_manifest_json("sweep"));
  result.files.push_back(manifest);
  return result;
}

RunResult run_fit_t2(const Scenario& s, const std::string& out_dir) {
  s.validate();
  ensure_dir(out_dir);
  if (s.thetas_deg.empty()) {
    throw ConfigError("fit-t2: config must provide a thetas list");
  }
  RunResult result;

  if (s.sample_kind == "identity" || s.sample_kind == "linear_phase_pbs") {
    throw ConfigError("fit-t2: sample kind '" + s.sample_kind +
                      "' has a flat |T|^2 spectrum; nothing to fit");
  }

  const std::pair<EnergyEv, EnergyEv> band{{s.fit_band_lo_ev}, {s.fit_band_hi_ev}};
  const EnergyEv omega_res{s.fit_omega_res_ev};

  std::vector<double> col_theta, col_loss, col_a, col_t2, col_res, col_conv;
  std::vector<T2LossRow> rows;

  if (s.sample_kind == "waveplate_pbs") {
    WaveplateParams wp{s.sample_alpha, s.effective_beta(), 0.0};
    std::vector<double> thetas_rad;
    for (double t : s.thetas_deg) thetas_rad.push_back(deg_to_rad(t));
    rows = t2_vs_loss(thetas_rad, wp, band, s.fit_samples, omega_res);
  } else {
    // theta-independent samples (synthetic Lorentz, tabulated): fit the same
    // spectrum once per row so the CSV shape matches the sweep form
    for (const double theta_deg : s.thetas_deg) {
      const auto sample = s.build_sample(deg_to_rad(theta_deg));
      std::vector<std::pair<double, double>> data;
      data.reserve(s.fit_samples);
      const double step = (band.second.value - band.first.value) / (s.fit_samples - 1);
      for (int k = 0; k < s.fit_samples; ++k) {
        const double w = band.first.value + k * step;
        data.emplace_back(w, std::norm(sample(w)));
      }
      T2LossRow row;
      row.theta = deg_to_rad(theta_deg);
      row.loss = loss_perfect_hwp(row.theta);
      try {
        const auto fit = s.fit_omega_free ? fit_lorentz(data, std::nullopt)
                                          : fit_lorentz(data, omega_res);
        row.strength = fit.params.strength;
        row.t2 = fit.params.t2;
        row.residual = fit.residual;
        row.converged = fit.converged;
      } catch (const ConfigError&) {
        row.converged = false;
      }
      rows.push_back(row);
    }
  }

  for (const auto& row : rows) {
    col_theta.push_back(rad_to_deg(row.theta));
    col_loss.push_back(row.loss);
    col_a.push_back(row.strength);
    col_t2.push_back(row.t2 * kHbarEvFs);
    col_res.push_back(row.residual);
    col_conv.push_back(row.converged ? 1.0 : 0.0);
    ++result.rows_total;
    if (row.converged) ++result.rows_converged;
  }

  const std::string path = join_path(out_dir, s.basename + ".csv");
  write_csv(path, {{"theta_deg", col_theta},
                   {"loss", col_loss},
                   {"A_ev", col_a},
                   {"t2_fs", col_t2},
                   {"residual", col_res},
                   {"converged", col_conv}});
  result.files.push_back(path);

  if (s.svg_output && !rows.empty()) {
    // spectrum vs fit overlay at up to three representative thetas
    SvgPlotSpec plot;
    plot.title = s.basename + ": |T|^2 system vs Lorentz fit";
    plot.x_label = "omega (eV)";
    plot.y_label = "|T|^2";
    std::vector<std::size_t> picks{0};
    if (rows.size() > 2) picks.push_back(rows.size() / 2);
    if (rows.size() > 1) picks.push_back(rows.size() - 1);
    for (const std::size_t idx : picks) {
      const auto& row = rows[idx];
      const auto sample = s.build_sample(row.theta);
      std::vector<double> xs, ys, yfit;
      const int n = 101;
      const double step = (band.second.value - band.first.value) / (n - 1);
      LorentzParams fitted{row.strength, omega_res, std::max(row.t2, 1e-9)};
      for (int k = 0; k < n; ++k) {
        const double w = band.first.value + k * step;
        xs.push_back(w);
        ys.push_back(std::norm(sample(w)));
        yfit.push_back(std::norm(lorentz_transmission({w}, fitted)));
      }
      const std::string tag = theta_tag(rad_to_deg(row.theta));
      plot.series.push_back({"system theta=" + tag, xs, ys, false});
      plot.series.push_back({"fit theta=" + tag, xs, yfit, false});
    }
    const std::string svg_path = join_path(out_dir, s.basename + ".svg");
    write_svg_plot(svg_path, plot);
    result.files.push_back(svg_path);
  }

  const std::string manifest = join_path(out_dir, s.basename + "_manifest.json");
  write_text_file(manifest, s.to_manifest_json("fit-t2"));
  result.files.push_back(manifest);
  return result;
}

}  // namespace homdip
