#pragma once

#include <complex>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "homdip/units.hpp"

namespace homdip {

using Complex = std::complex<double>;

// Linear retardance model phi(w) = alpha*w + beta of a waveplate whose fast
// axis sits at angle theta to the incoming polarization, followed by a PBS
// projection back onto the input polarization.
struct WaveplateParams {
  double alpha = 0.0;   // eV^-1
  double beta = 0.0;    // rad
  double theta = 0.0;   // rad, fast-axis angle in [0, pi/2]

  void validate() const;
  double phase(double omega_ev) const { return alpha * omega_ev + beta; }
};

// Printed linear-retardance fits. The printed MO pair does not realize
// phi = pi at 808 nm (phi(1.5345 eV) = 1.61 rad); reanchored() fixes the
// intercept so that phi(omega_c) = pi without touching the slope.
WaveplateParams mo_waveplate_defaults(double theta_rad = 0.0);
WaveplateParams zo_waveplate_defaults(double theta_rad = 0.0);
WaveplateParams reanchored(WaveplateParams p, double omega_c_ev);

// Lorentz-oscillator transmission T(w) = exp(i A / (Omega - w - i/T2)),
// strength A = B*L/c in eV.
struct LorentzParams {
  double strength = 0.0;       // eV
  EnergyEv omega_res{0.0};     // resonance Omega
  double t2 = 0.0;             // dephasing time, eV^-1

  void validate() const;
};

// Super-Gaussian band-pass T_f(w) = a exp(-((w-b)/c)^6) + d.
struct FilterParams {
  double a = 0.95;
  EnergyEv b{1.5307};
  EnergyEv c{0.01007};
  double d = 0.001;

  void validate() const;
  // Half-maximum half-width of the a-term: c * (ln 2)^(1/6).
  double fwhm_half_width() const;
};

// Point evaluations.
Complex waveplate_pbs(EnergyEv omega, const WaveplateParams& p);
double loss_perfect_hwp(double theta_rad);
// Phase delay 2 pi L dn / lambda between the ordinary and extraordinary axes.
// L in micrometres, lambda in nanometres.
double birefringent_phase(double length_um, double delta_n, double lambda_nm);
Complex lorentz_transmission(EnergyEv omega, const LorentzParams& p);
double supergaussian(EnergyEv omega, const FilterParams& p);

// Evaluable complex transmission; immutable and freely shareable.
struct TransmissionFn {
  enum class Kind {
    identity,
    waveplate_pbs,
    linear_phase_pbs,
    lorentz,
    supergaussian_filter,
    tabulated,
    product,
  };

  Kind kind = Kind::identity;
  std::function<Complex(double)> eval;  // omega in eV -> amplitude

  Complex operator()(double omega_ev) const { return eval ? eval(omega_ev) : Complex{1.0, 0.0}; }
  Complex operator()(EnergyEv omega) const { return (*this)(omega.value); }
};

TransmissionFn identity_transmission();
TransmissionFn waveplate_pbs_fn(const WaveplateParams& p);
// Pure linear phase e^{-i (alpha w + beta)/2}: the theta = 0 waveplate branch.
TransmissionFn linear_phase_fn(double alpha, double beta);
TransmissionFn lorentz_fn(const LorentzParams& p);
TransmissionFn supergaussian_fn(const FilterParams& p);
TransmissionFn compose(const TransmissionFn& t1, const TransmissionFn& t2);

// Tabulated complex transmission with linear interpolation of magnitude and
// unwrapped phase (not of real/imaginary parts), clamped to the end values
// outside the hull. Abscissae must be strictly increasing.
TransmissionFn tabulated(std::vector<std::pair<double, Complex>> points);

// CSV ingestion, header `omega_ev,mag,phase_rad` or `wavelength_nm,mag,phase_rad`.
TransmissionFn load_tabulated_csv(const std::string& path);

}  // namespace homdip
