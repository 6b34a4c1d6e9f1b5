#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "homdip/elements.hpp"

namespace homdip {

struct LorentzFitResult {
  LorentzParams params;
  double residual = 0.0;  // RMS misfit of |T|^2 over the fit band
  bool converged = false;
  int iterations = 0;
  std::vector<double> objective_trace;  // accepted objective values, non-increasing
};

// Damped least squares on y_k = |T_lorentz(w_k)|^2 with A and T2 carried in
// log space so both stay positive. Omega is fixed when omega_fixed is set,
// free otherwise. Initial values follow moment matching on the dip (depth ->
// A, half-width -> T2) unless an explicit init is supplied.
LorentzFitResult fit_lorentz(const std::vector<std::pair<double, double>>& samples,
                             std::optional<EnergyEv> omega_fixed = EnergyEv{1.5344578999876238},
                             std::optional<LorentzParams> init = std::nullopt);

struct T2LossRow {
  double theta = 0.0;      // rad
  double loss = 0.0;
  double strength = 0.0;   // eV
  double t2 = 0.0;         // eV^-1
  double residual = 0.0;
  bool converged = false;
};

// Samples |T_sys(w)|^2 for a waveplate+PBS chain at each theta over the band
// and fits the Lorentz model with Omega fixed.
std::vector<T2LossRow> t2_vs_loss(const std::vector<double>& thetas_rad,
                                  const WaveplateParams& wp_base,
                                  std::pair<EnergyEv, EnergyEv> band,
                                  int n_samples,
                                  EnergyEv omega_res = EnergyEv{1.5344578999876238});

}  // namespace homdip
