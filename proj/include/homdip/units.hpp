#pragma once

#include <cmath>

#include "homdip/errors.hpp"

namespace homdip {

// Natural units with hbar = 1: energies/angular frequencies in eV,
// delays in eV^-1. Femtoseconds and nanometres appear only at I/O boundaries.
inline constexpr double kHbarEvFs = 0.6582119569;     // eV*fs
inline constexpr double kNmToEv = 1239.841984;        // lambda[nm] * E[eV]

// Angular frequency expressed as photon energy in eV.
struct EnergyEv {
  double value = 0.0;
};

// Pair delay tau in eV^-1.
struct DelayInvEv {
  double value = 0.0;
};

inline double ev_inv_to_fs(DelayInvEv t) { return t.value * kHbarEvFs; }
inline double ev_inv_to_fs(double t_ev_inv) { return t_ev_inv * kHbarEvFs; }

inline DelayInvEv fs_to_ev_inv(double t_fs) { return {t_fs / kHbarEvFs}; }

inline EnergyEv wavelength_nm_to_ev(double lambda_nm) {
  if (!(lambda_nm > 0.0)) {
    throw ConfigError("wavelength_nm_to_ev: wavelength must be positive");
  }
  return {kNmToEv / lambda_nm};
}

inline double ev_to_wavelength_nm(double omega_ev) {
  if (!(omega_ev > 0.0)) {
    throw ConfigError("ev_to_wavelength_nm: energy must be positive");
  }
  return kNmToEv / omega_ev;
}

inline double deg_to_rad(double deg) { return deg * M_PI / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / M_PI; }

}  // namespace homdip
