#pragma once

#include <cmath>

#include "homdip/units.hpp"

namespace homdip {

// Gaussian joint spectral amplitude of the entangled pair, written in the
// pump-sum / pair-difference frequencies. sigma_p is the pump bandwidth,
// sigma_minus the pair bandwidth.
struct JsaParams {
  EnergyEv omega_p{3.069};        // pump center
  EnergyEv sigma_p{0.149e-3};     // pump bandwidth sigma_P
  EnergyEv sigma_minus{6.8e-3};   // pair bandwidth sigma_-

  void validate() const;
};

// f(w1, w2) = (2 pi sP sm)^(-1/2) exp(-(w1+w2-wp)^2/(16 sP^2)) exp(-(w1-w2)^2/(4 sm^2))
// Real and positive; |f|^2 integrates to 1 over the plane.
double jsa(EnergyEv w1, EnergyEv w2, const JsaParams& p);

// Uniform symmetric axis: count odd so the center is a node.
struct GridAxis {
  double center = 0.0;
  double half_width = 0.0;
  int count = 0;

  void validate() const;
  double step() const { return 2.0 * half_width / (count - 1); }
  double node(int i) const { return center - half_width + i * step(); }
};

// Tensor grid in rotated coordinates w_plus = w1+w2, w_minus = w1-w2
// (Jacobian 1/2). The pump ridge is ~45x narrower than the pair band, so an
// axis-aligned grid in (w1, w2) would undersample it badly.
struct FreqGrid2D {
  GridAxis plus_axis;
  GridAxis minus_axis;

  void validate() const;
};

// plus axis: center omega_p, half-width 8 standard deviations of w_plus (= 16 sigma_p);
// minus axis: center 0, half-width 8 sigma_minus.
FreqGrid2D default_grid(const JsaParams& p, int n_plus = 129, int n_minus = 513);

}  // namespace homdip
