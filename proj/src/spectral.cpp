#include "homdip/spectral.hpp"

#include <cmath>
#include <string>

#include "homdip/errors.hpp"

namespace homdip {

void JsaParams::validate() const {
  if (!std::isfinite(omega_p.value) || omega_p.value <= 0.0) {
    throw ConfigError("JsaParams: omega_p must be finite and positive");
  }
  if (!std::isfinite(sigma_p.value) || sigma_p.value <= 0.0) {
    throw ConfigError("JsaParams: sigma_p must be finite and positive");
  }
  if (!std::isfinite(sigma_minus.value) || sigma_minus.value <= 0.0) {
    throw ConfigError("JsaParams: sigma_minus must be finite and positive");
  }
}

double jsa(EnergyEv w1, EnergyEv w2, const JsaParams& p) {
  const double sp = p.sigma_p.value;
  const double sm = p.sigma_minus.value;
  const double norm = 1.0 / std::sqrt(2.0 * M_PI * sp * sm);
  const double dplus = w1.value + w2.value - p.omega_p.value;
  const double dminus = w1.value - w2.value;
  return norm * std::exp(-dplus * dplus / (16.0 * sp * sp)) *
         std::exp(-dminus * dminus / (4.0 * sm * sm));
}

void GridAxis::validate() const {
  if (count < 3 || count % 2 == 0) {
    throw ConfigError("GridAxis: point count must be odd and >= 3, got " +
                      std::to_string(count));
  }
  if (!(half_width > 0.0) || !std::isfinite(half_width) || !std::isfinite(center)) {
    throw ConfigError("GridAxis: half-width must be positive and finite");
  }
}

void FreqGrid2D::validate() const {
  plus_axis.validate();
  minus_axis.validate();
}

FreqGrid2D default_grid(const JsaParams& p, int n_plus, int n_minus) {
  p.validate();
  FreqGrid2D g;
  g.plus_axis = {p.omega_p.value, 16.0 * p.sigma_p.value, n_plus};
  g.minus_axis = {0.0, 8.0 * p.sigma_minus.value, n_minus};
  g.validate();
  return g;
}

}  // namespace homdip
