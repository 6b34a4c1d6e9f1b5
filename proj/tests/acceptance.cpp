// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Criteria marked EXPECTED-FAIL document model-level gaps analyzed in the
// test body; they still count as failures in the exit code.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "homdip/analysis.hpp"
#include "homdip/engine.hpp"
#include "homdip/errors.hpp"
#include "homdip/inversion.hpp"
#include "homdip/io_util.hpp"
#include "homdip/scenario.hpp"

using namespace homdip;
namespace fs = std::filesystem;

namespace {

const JsaParams kJsa{};
constexpr double kAlphaMo = 40.30;
constexpr double kBetaMo = -60.23;
constexpr double kOmega808 = 1.5344578999876238;

// Golden regression number for the high-loss MO dip shift (theta = 43 deg,
// printed retardance fit, zero background, default grids/scan), frozen from
// the first converged run of this implementation.
constexpr double kGoldenHighLossShiftEvInv = -17.180497267;

struct Check {
  std::string label;
  std::function<bool(std::ostream&)> body;
};

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

const std::vector<double> kScan = with_baseline_wings(linspace(-300.0, 300.0, 201), kJsa);

DipTrace run_trace(double theta_deg, double alpha, double beta,
                   const std::optional<BackgroundModel>& bg = std::nullopt) {
  const auto cfg = EngineConfig::defaults(kJsa);
  const WaveplateParams wp{alpha, beta, theta_deg * M_PI / 180.0};
  return trace(kJsa, waveplate_pbs_fn(wp), cfg, kScan, bg);
}

// printed coincidence formula, kept for criterion 3 only
double printed_closed_form(double tau, double theta, double alpha, double beta) {
  const double sp = kJsa.sigma_p.value;
  const double sm = kJsa.sigma_minus.value;
  const double c2 = std::cos(2.0 * theta);
  const double s2sq = std::sin(2.0 * theta) * std::sin(2.0 * theta);
  const double env = std::exp(-sm * sm * (alpha * alpha + 4.0 * tau * tau) / 8.0);
  const double arg = sm * sm * alpha * tau;
  return 1.0 + (c2 / 2.0) * env * (std::sinh(arg) - std::cosh(arg) * c2) -
         (s2sq / 2.0) *
             (std::exp(-0.5 * sp * sp * alpha * alpha) *
                  (1.0 - std::exp(-sm * sm * alpha * alpha / 8.0)) *
                  std::cos(beta + alpha * kJsa.omega_p.value / 2.0) +
              1.0);
}

int run_cli(const std::string& args) {
  const char* bin = std::getenv("HOMDIP_BIN");
  if (!bin) return -1;
  const int status = std::system((std::string(bin) + " " + args + " >/dev/null").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool criterion_oracle_equivalence(std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = EngineConfig::defaults(kJsa);
  const std::vector<double> thetas_deg{0.0, 10.0, 22.5, 30.0, 40.0, 43.0, 45.0};
  const std::vector<double> alphas{0.0, 2.18, -2.18, 20.0, kAlphaMo, -kAlphaMo, 60.0};
  const auto taus = linspace(-300.0, 300.0, 11);
  double worst = 0.0;
  for (const double theta_deg : thetas_deg) {
    for (const double alpha : alphas) {
      const WaveplateParams wp{alpha, kBetaMo, theta_deg * M_PI / 180.0};
      const CoincidenceKernel kernel(kJsa, waveplate_pbs_fn(wp), cfg);
      const double a = closed_form_baseline(kJsa, wp);
      for (const double tau : taus) {
        worst = std::max(worst,
                         std::abs(kernel.rate(tau) - coincidence_closed_form({tau}, kJsa, wp)) / a);
      }
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  log << "worst rel err " << worst << ", " << secs << " s";
  return worst <= 1e-9 && secs < 10.0;
}

bool criterion_ideal_dip(std::ostream& log) {
  const auto cfg = EngineConfig::defaults(kJsa);
  const auto tr = trace(kJsa, identity_transmission(), cfg, kScan);
  double min_rate = 1e300;
  std::size_t imin = 0;
  for (std::size_t i = 0; i < tr.rates.size(); ++i) {
    if (tr.rates[i] < min_rate) {
      min_rate = tr.rates[i];
      imin = i;
    }
  }
  log << "min " << min_rate << " at tau " << tr.taus[imin] << ", raw baseline " << tr.baseline;
  return min_rate <= 1e-9 && std::abs(tr.taus[imin]) < 1e-12 &&
         std::abs(tr.baseline - 1.0) <= 1e-6;
}

bool criterion_erratum(std::ostream& log) {
  const double printed = printed_closed_form(0.0, 0.0, 0.0, M_PI);
  const double integral = coincidence_closed_form({0.0}, kJsa, {0.0, M_PI, 0.0});
  const auto cfg = EngineConfig::defaults(kJsa);
  const double numeric = coincidence_numeric({0.0}, kJsa, waveplate_pbs_fn({0.0, M_PI, 0.0}), cfg);
  log << "printed " << printed << " vs integral " << numeric;
  return std::abs(printed - 0.5) < 1e-12 && integral <= 1e-12 && numeric <= 1e-9;
}

bool criterion_zo_invariance(std::ostream& log) {
  std::vector<DipTrace> traces;
  for (const double theta : {0.0, 8.0, 16.0, 24.0, 32.0, 40.0}) {
    traces.push_back(run_trace(theta, 0.0, M_PI));
  }
  double worst = 0.0;
  for (std::size_t k = 1; k < traces.size(); ++k) {
    for (std::size_t i = 0; i < traces[k].rates.size(); ++i) {
      worst = std::max(worst, std::abs(traces[k].rates[i] - traces[0].rates[i]));
    }
  }
  double worst_shift_fs = 0.0;
  for (std::size_t k = 1; k < traces.size(); ++k) {
    worst_shift_fs =
        std::max(worst_shift_fs, std::abs(ev_inv_to_fs(dip_shift(traces[k], traces[0]))));
  }
  log << "max pointwise dev " << worst << ", max |shift| " << worst_shift_fs << " fs";
  return worst < 1e-6 && worst_shift_fs < 0.5;
}

bool criterion_mo_shift(std::ostream& log) {
  const auto ref = run_trace(0.0, kAlphaMo, kBetaMo);
  const double ref_pos = dip_position(ref).tau;
  double prev_shift = 0.0;
  bool monotone = true;
  bool low_loss_ok = true;
  double shift43 = 0.0;
  const std::vector<double> thetas{0.0, 4.0,  8.0,  12.0, 16.0, 20.0, 24.0,
                                   28.0, 32.0, 36.0, 40.0, 41.0, 42.0, 43.0};
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    const auto tr = run_trace(thetas[k], kAlphaMo, kBetaMo);
    const double shift = dip_position(tr).tau - ref_pos;
    // monotone toward -tau within the estimator wiggle (0.05 fs; the printed
    // intercept's residual cosine term lifts the -tau flank by ~0.01 fs at
    // low theta, far below the 0.2 fs stage resolution)
    if (k > 0 && shift > prev_shift + 0.076) monotone = false;
    prev_shift = shift;
    if (loss_perfect_hwp(thetas[k] * M_PI / 180.0) < 0.4 &&
        std::abs(ev_inv_to_fs(shift)) >= 5.0) {
      low_loss_ok = false;
    }
    if (thetas[k] == 43.0) shift43 = shift;
  }
  const bool golden_ok = std::abs(shift43 - kGoldenHighLossShiftEvInv) < 1e-3;
  log << "shift(43deg) " << shift43 << " eV^-1 (" << ev_inv_to_fs(shift43)
      << " fs), monotone(0.05fs) " << monotone << ", low-loss<5fs " << low_loss_ok
      << ", golden " << golden_ok;
  return monotone && low_loss_ok && golden_ok;
}

bool criterion_visibility_background(std::ostream& log) {
  const auto cfg = EngineConfig::defaults(kJsa);
  const double a0 = CoincidenceKernel(kJsa, waveplate_pbs_fn({0.0, M_PI, 0.0}), cfg).baseline();
  const auto bg0 = calibrate_background(0.967, a0);

  ThetaSweepConfig sweep;
  sweep.jsa = kJsa;
  sweep.engine = cfg;
  sweep.taus = kScan;
  sweep.background = bg0;
  const auto zo_sample = [](double theta) { return waveplate_pbs_fn({0.0, M_PI, theta}); };
  sweep.sample_for_theta = zo_sample;

  std::vector<double> thetas_rad;
  for (const double t : {0.0, 8.0, 16.0, 24.0, 32.0, 40.0}) thetas_rad.push_back(t * M_PI / 180.0);
  const auto zo = sweep_theta(thetas_rad, sweep);

  sweep.sample_for_theta = [](double theta) {
    auto wp = reanchored(mo_waveplate_defaults(), kOmega808);
    wp.theta = theta;
    return waveplate_pbs_fn(wp);
  };
  const auto mo = sweep_theta(thetas_rad, sweep);

  // MO compared against the perfect-HWP chain at the same actual
  // transmission: equal baseline and floor leave only MO's dip distortion
  sweep.sample_for_theta = zo_sample;
  bool mo_below = true;
  for (const auto& row : mo) {
    const double theta_matched =
        0.5 * std::acos(std::sqrt(std::clamp(row.mean_transmission, 0.0, 1.0)));
    const auto matched = sweep_theta({theta_matched}, sweep);
    if (row.visibility > matched[0].visibility + 1e-9) mo_below = false;
  }

  const double v0 = zo.front().visibility;
  const double v97 = zo.back().visibility;  // theta = 40 deg, loss 0.9698
  log << "V(0) " << v0 << ", V_zo(97% loss) " << v97 << ", MO<=matched ZO " << mo_below;
  return std::abs(v0 - 0.967) < 1e-3 && v97 >= 0.90 && v97 <= 0.95 && mo_below;
}

bool criterion_mean_rate_linearity(std::ostream& log) {
  ThetaSweepConfig sweep;
  sweep.jsa = kJsa;
  sweep.engine = EngineConfig::defaults(kJsa);
  sweep.taus = kScan;
  std::vector<double> thetas_rad;
  for (const double t : {0.0, 8.0, 16.0, 24.0, 32.0, 40.0}) thetas_rad.push_back(t * M_PI / 180.0);

  double worst = 0.0;
  for (const bool mo : {false, true}) {
    sweep.sample_for_theta = [mo](double theta) {
      return mo ? waveplate_pbs_fn({kAlphaMo, kBetaMo, theta})
                : waveplate_pbs_fn({0.0, M_PI, theta});
    };
    const auto rows = sweep_theta(thetas_rad, sweep);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& r : rows) {
      sx += r.loss;
      sy += r.mean_rate;
      sxx += r.loss * r.loss;
      sxy += r.loss * r.mean_rate;
    }
    const double n = static_cast<double>(rows.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icept = (sy - slope * sx) / n;
    for (const auto& r : rows) {
      worst = std::max(worst, std::abs(icept + slope * r.loss - r.mean_rate) / rows[0].mean_rate);
    }
  }
  log << "worst affine residual " << worst;
  return worst < 0.01;
}

bool criterion_t2_extraction(std::ostream& log) {
  // (a) synthetic round trip within 0.1 %
  bool round_trip = true;
  {
    std::vector<std::pair<double, double>> data;
    const LorentzParams truth{0.05, EnergyEv{kOmega808}, 33.4};
    for (int k = 0; k < 51; ++k) {
      const double w = kOmega808 - 0.02 + 0.04 * k / 50.0;
      data.emplace_back(w, std::norm(lorentz_transmission({w}, truth)));
    }
    const auto fit = fit_lorentz(data);
    round_trip = fit.converged && std::abs(fit.params.strength - 0.05) / 0.05 < 1e-3 &&
                 std::abs(fit.params.t2 - 33.4) / 33.4 < 1e-3;
  }

  // (b) system-spectrum fit at 43 deg over the filter FWHM band
  const FilterParams filt{};
  const double hw = filt.fwhm_half_width();
  auto wp = reanchored(mo_waveplate_defaults(), kOmega808);
  wp.theta = 43.0 * M_PI / 180.0;
  std::vector<std::pair<double, double>> sys;
  for (int k = 0; k < 51; ++k) {
    const double w = filt.b.value - hw + 2.0 * hw * k / 50.0;
    sys.emplace_back(w, std::norm(waveplate_pbs({w}, wp)));
  }
  const auto fit43 = fit_lorentz(sys);
  const double t2_fs = ev_inv_to_fs(fit43.params.t2);
  const bool in_band = t2_fs >= 15.0 && t2_fs <= 30.0;

  // (c) sweep convergence over [8, 44] deg
  std::vector<double> thetas;
  for (int d = 8; d <= 44; d += 2) thetas.push_back(d * M_PI / 180.0);
  const auto rows = t2_vs_loss(thetas, reanchored(mo_waveplate_defaults(), kOmega808),
                               {{filt.b.value - hw}, {filt.b.value + hw}}, 51);
  bool all_converged = true;
  for (const auto& r : rows) all_converged &= r.converged;

  log << "round-trip " << round_trip << ", T2(43deg) " << t2_fs << " fs in [15,30] " << in_band
      << ", sweep converged " << all_converged;
  if (!in_band) {
    log << "\n        KNOWN-FAIL: least squares on |T|^2 lands at T2 ~ 47 fs for "
           "this deep dip (bottom 0.005) on every band tried (FWHM band 53.2 fs, "
           "+-0.02 eV 39.0 fs, +-0.03 eV 35.9 fs minimum); the [15, 30] fs window "
           "follows the shallow-dip width law T2 ~ 2 alpha / pi, which the "
           "exponential model leaves once the dip saturates. The measured value "
           "is pinned as a regression in the unit suite instead.";
  }
  return round_trip && in_band && all_converged;
}

bool criterion_numerical_hygiene(std::ostream& log) {
  const WaveplateParams wp{kAlphaMo, kBetaMo, 43.0 * M_PI / 180.0};
  EngineConfig coarse = EngineConfig::defaults(kJsa);
  EngineConfig fine;
  fine.grid = default_grid(kJsa, 257, 1025);
  const CoincidenceKernel k1(kJsa, waveplate_pbs_fn(wp), coarse);
  const CoincidenceKernel k2(kJsa, waveplate_pbs_fn(wp), fine);
  double worst = 0.0;
  for (const double tau : linspace(-300.0, 300.0, 21)) {
    worst = std::max(worst, std::abs(k1.rate(tau) - k2.rate(tau)) / k1.baseline());
  }

  EngineConfig tiny;
  tiny.grid = default_grid(kJsa, 9, 9);
  const CoincidenceKernel coarse_kernel(kJsa, identity_transmission(), tiny);
  bool guard_fired = false;
  try {
    coarse_kernel.rate(300.0);
  } catch (const NumericError&) {
    guard_fired = true;
  }
  log << "grid-doubling dev " << worst << ", aliasing guard " << guard_fired;
  return worst < 1e-8 && guard_fired;
}

bool criterion_determinism(std::ostream& log) {
  const char* cfg_dir = std::getenv("HOMDIP_CONFIG_DIR");
  if (!cfg_dir || !std::getenv("HOMDIP_BIN")) {
    log << "HOMDIP_BIN/HOMDIP_CONFIG_DIR not set";
    return false;
  }
  const auto base = fs::temp_directory_path() / "homdip_acceptance";
  fs::remove_all(base);
  fs::create_directories(base);
  const std::string cfg = std::string(cfg_dir) + "/fig4_sweep.toml";
  std::string first;
  for (const int threads : {1, 3, 8}) {
    const auto dir = base / ("t" + std::to_string(threads));
    std::ostringstream cmd;
    cmd << "HOMDIP_THREADS=" << threads << " $HOMDIP_BIN sweep --config " << cfg
        << " --out-dir " << dir.string() << " >/dev/null";
    if (std::system(cmd.str().c_str()) != 0) {
      log << "sweep run failed";
      return false;
    }
    const std::string body = read_text_file((dir / "fig4_sweep.csv").string());
    if (first.empty()) {
      first = body;
    } else if (body != first) {
      log << "CSV bytes differ between thread counts";
      return false;
    }
  }
  log << "identical CSVs across HOMDIP_THREADS in {1,3,8}";
  return true;
}

bool criterion_runtime(std::ostream& log) {
  const char* cfg_dir = std::getenv("HOMDIP_CONFIG_DIR");
  if (!cfg_dir || !std::getenv("HOMDIP_BIN")) {
    log << "HOMDIP_BIN/HOMDIP_CONFIG_DIR not set";
    return false;
  }
  const auto dir = fs::temp_directory_path() / "homdip_acceptance" / "figures";
  fs::create_directories(dir);
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  ok &= run_cli("dip --config " + std::string(cfg_dir) + "/fig3_zo.toml --out-dir " +
                dir.string()) == 0;
  ok &= run_cli("dip --config " + std::string(cfg_dir) + "/fig3_mo.toml --out-dir " +
                dir.string()) == 0;
  ok &= run_cli("sweep --config " + std::string(cfg_dir) + "/fig4_sweep.toml --out-dir " +
                dir.string()) == 0;
  ok &= run_cli("fit-t2 --config " + std::string(cfg_dir) + "/fig6_t2.toml --out-dir " +
                dir.string()) == 0;
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  log << "fig3+fig4+fig6 in " << secs << " s, all exit 0: " << ok;
  return ok && secs < 300.0;
}

}  // namespace

int main() {
  std::cout.setf(std::ios::boolalpha);
  const std::vector<Check> checks{
      {"1. oracle equivalence (closed form vs integral, <10 s)", criterion_oracle_equivalence},
      {"2. ideal dip (min <= 1e-9 at tau = 0, baseline 1 +- 1e-6)", criterion_ideal_dip},
      {"3. erratum regression (printed form 0.5 vs integral 0)", criterion_erratum},
      {"4. ZO invariance (pairwise < 1e-6, shifts < 0.5 fs)", criterion_zo_invariance},
      {"5. MO shift: direction, low-loss bound, golden high-loss value", criterion_mo_shift},
      {"6. visibility with calibrated background", criterion_visibility_background},
      {"7. mean-rate affine in loss (< 1 %)", criterion_mean_rate_linearity},
      {"8. T2 extraction (round trip, 43-deg band, sweep convergence)", criterion_t2_extraction},
      {"9. numerical hygiene (grid doubling, aliasing guard)", criterion_numerical_hygiene},
      {"10. determinism across HOMDIP_THREADS", criterion_determinism},
      {"11. end-to-end figure reproduction < 5 min", criterion_runtime},
  };

  int failures = 0;
  for (const auto& check : checks) {
    std::ostringstream log;
    log.setf(std::ios::boolalpha);
    bool ok = false;
    try {
      ok = check.body(log);
    } catch (const std::exception& e) {
      log << "exception: " << e.what();
    }
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << check.label << " -- " << log.str() << "\n";
    if (!ok) ++failures;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion(s) failed")
            << "\n";
  return failures == 0 ? 0 : 1;
}
