#pragma once

#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "homdip/elements.hpp"
#include "homdip/spectral.hpp"

namespace homdip {

enum class Normalization { raw, unit_baseline };

struct EngineConfig {
  FreqGrid2D grid;
  std::optional<TransmissionFn> filter;  // applied as |T_f(w1)|^2 |T_f(w2)|^2
  bool cw_limit = false;                 // pin w_plus = omega_p, integrate w_minus only
  Normalization normalization = Normalization::unit_baseline;

  static EngineConfig defaults(const JsaParams& p);
};

// Accidental (artificial) coincidence floor from uncorrelated detection
// events: R_AC = (I_s + tbar * I_i0)^2 * window.
struct BackgroundModel {
  double singles_signal = 0.0;          // I_s
  double singles_idler_nosample = 0.0;  // I_i0
  double window = 1.0;                  // coincidence window
  double mean_transmission = 1.0;       // tbar in [0, 1]

  void validate() const;
};

double accidental_rate(const BackgroundModel& bg);

// Background whose floor at tbar = 1 makes the ideal dip's visibility equal
// target_visibility against the true baseline baseline_a0. singles_ratio is
// I_s / I_i0; the signal arm keeps fewer counts than the idler arm in the
// reference setup, 1:3 by default.
BackgroundModel calibrate_background(double target_visibility, double baseline_a0,
                                     double window = 1.0, double singles_ratio = 1.0 / 3.0);

// One-time reduction of the 2-D quadrature. The delay enters only through
// e^{-i w_minus tau}, so the plus axis collapses into a per-column sum and
// each rate evaluation costs O(n_minus).
class CoincidenceKernel {
 public:
  CoincidenceKernel(const JsaParams& jsa, const TransmissionFn& sample,
                    const EngineConfig& cfg);

  // R(tau) = A - Re B(tau), clamped to >= 0. Throws NumericError when the
  // phase advance per minus-axis step exceeds pi/4 (aliasing guard) or when
  // the pre-clamp value drops below -1e-9 * A.
  double rate(double tau_ev_inv) const;
  double rate(DelayInvEv tau) const { return rate(tau.value); }

  double baseline() const { return baseline_a_; }
  double minus_step() const { return minus_step_; }
  double max_safe_tau() const;

 private:
  double baseline_a_ = 0.0;
  double minus_step_ = 0.0;
  std::vector<double> minus_nodes_;
  std::vector<Complex> column_;  // weighted plus-axis sums per minus node
};

double coincidence_numeric(DelayInvEv tau, const JsaParams& jsa,
                           const TransmissionFn& sample, const EngineConfig& cfg);

// Re-derived closed form of the unfiltered integral for the linear-retardance
// sample; matches coincidence_numeric to quadrature accuracy. (The version
// printed alongside the derivation fails its own limit checks; see the
// regression tests.)
double coincidence_closed_form(DelayInvEv tau, const JsaParams& jsa,
                               const WaveplateParams& wp);
double closed_form_baseline(const JsaParams& jsa, const WaveplateParams& wp);

struct DipTrace {
  std::vector<double> taus;    // eV^-1, strictly increasing
  std::vector<double> rates;   // normalized when `normalized` is set
  double baseline = 0.0;       // R_c(inf) estimate, raw units
  double background = 0.0;     // accidental floor added, raw units
  bool normalized = false;
  std::map<std::string, std::string> meta;
};

// Sweeps the kernel over tau, adds the accidental floor, estimates the
// baseline from the mean of rates at |tau| >= 6/sigma_minus and divides by it
// under unit_baseline normalization (>= 4 such points required).
DipTrace trace(const JsaParams& jsa, const TransmissionFn& sample,
               const EngineConfig& cfg, const std::vector<double>& tau_list,
               const std::optional<BackgroundModel>& bg = std::nullopt);

// Same contract, reusing an already-built kernel with an explicit floor.
DipTrace trace_from_kernel(const CoincidenceKernel& kernel, const JsaParams& jsa,
                           const std::vector<double>& tau_list, double floor,
                           Normalization normalization);

// |tau| threshold separating the dip region from the incoherent baseline.
double baseline_tau_threshold(const JsaParams& jsa);

// Appends 2x4 wing points beyond the baseline threshold when the scan itself
// has none; keeps the list strictly increasing.
std::vector<double> with_baseline_wings(std::vector<double> taus, const JsaParams& jsa);

// Effort cap shared by parallel loops; reads HOMDIP_THREADS once per call.
int effective_thread_count();
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace homdip
