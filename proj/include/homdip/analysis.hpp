#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "homdip/engine.hpp"

namespace homdip {

struct DipMetrics {
  double visibility = 0.0;
  double dip_position = 0.0;  // eV^-1
  double dip_depth = 0.0;
  double asymmetry = 0.0;
  double baseline = 0.0;
};

struct DipPositionResult {
  double tau = 0.0;          // eV^-1
  double refined_min = 0.0;  // rate at the vertex, same units as the trace
  bool band_fit_used = true; // false when the estimator fell back to the grid minimum
};

// Two-stage estimator: a least-squares parabola over the level set
// rate <= R0 + band_fraction * (baseline - R0) locates the well, then a local
// quadratic through the three nodes around that vertex sharpens it. The local
// step is skipped where its curvature is non-positive.
DipPositionResult dip_position(const DipTrace& trace, double band_fraction = 0.2);

// V = (Rinf - R0) / (Rinf + R0) with R0 the refined minimum of dip_position.
double visibility(const DipTrace& trace);

double dip_shift(const DipTrace& sample_trace, const DipTrace& reference_trace);

// Skewness (third standardized central moment) of the dip deficit
// D(tau) = max(0, baseline - rate) treated as an unnormalized density.
double asymmetry(const DipTrace& trace);

DipMetrics dip_metrics(const DipTrace& trace);

struct SweepRow {
  double theta = 0.0;       // rad
  double loss = 0.0;        // loss_perfect_hwp(theta)
  double visibility = 0.0;
  double dip_shift = 0.0;   // eV^-1, relative to the theta = 0 reference
  double mean_rate = 0.0;   // baseline normalized to the theta = 0 baseline
  double mean_transmission = 1.0;  // tbar used for the accidental floor
};

// How the accidental floor's mean transmission follows theta.
enum class TransmissionPolicy {
  actual_transmission,  // tbar = A(theta) / A(0), the sample's own attenuation
  perfect_hwp,          // tbar = cos^2(2 theta), the loss-axis convention
  fixed,                // keep the configured mean_transmission
};

struct ThetaSweepConfig {
  JsaParams jsa;
  std::function<TransmissionFn(double theta_rad)> sample_for_theta;
  EngineConfig engine;
  std::vector<double> taus;  // eV^-1
  std::optional<BackgroundModel> background;
  TransmissionPolicy tbar_policy = TransmissionPolicy::actual_transmission;
};

std::vector<SweepRow> sweep_theta(const std::vector<double>& thetas_rad,
                                  const ThetaSweepConfig& scenario);

}  // namespace homdip
