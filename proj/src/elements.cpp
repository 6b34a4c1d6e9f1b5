#include "homdip/elements.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "homdip/errors.hpp"

namespace homdip {

namespace {
constexpr double kMagTol = 1e-9;  // passivity slack |T| <= 1 + 1e-9
}

void WaveplateParams::validate() const {
  if (!std::isfinite(alpha) || !std::isfinite(beta)) {
    throw ConfigError("WaveplateParams: alpha and beta must be finite");
  }
  if (!(theta >= 0.0 && theta <= M_PI / 2.0)) {
    throw ConfigError("WaveplateParams: theta must lie in [0, pi/2]");
  }
}

WaveplateParams mo_waveplate_defaults(double theta_rad) {
  return {40.30, -60.23, theta_rad};
}

WaveplateParams zo_waveplate_defaults(double theta_rad) {
  return {2.18, -0.21, theta_rad};
}

WaveplateParams reanchored(WaveplateParams p, double omega_c_ev) {
  p.beta = M_PI - p.alpha * omega_c_ev;
  return p;
}

void LorentzParams::validate() const {
  if (!(strength >= 0.0) || !std::isfinite(strength)) {
    throw ConfigError("LorentzParams: strength must be >= 0");
  }
  if (!(t2 > 0.0) || !std::isfinite(t2)) {
    throw ConfigError("LorentzParams: t2 must be positive");
  }
  if (!(omega_res.value > 0.0) || !std::isfinite(omega_res.value)) {
    throw ConfigError("LorentzParams: omega_res must be positive");
  }
}

void FilterParams::validate() const {
  if (!(a > 0.0 && a <= 1.0)) {
    throw ConfigError("FilterParams: a must lie in (0, 1]");
  }
  if (!(d >= 0.0 && d < 1.0)) {
    throw ConfigError("FilterParams: d must lie in [0, 1)");
  }
  if (a + d > 1.0 + kMagTol) {
    throw ConfigError("FilterParams: a + d must not exceed 1");
  }
  if (!(c.value > 0.0)) {
    throw ConfigError("FilterParams: width c must be positive");
  }
}

double FilterParams::fwhm_half_width() const {
  return c.value * std::pow(M_LN2, 1.0 / 6.0);
}

Complex waveplate_pbs(EnergyEv omega, const WaveplateParams& p) {
  const double half = 0.5 * p.phase(omega.value);
  return {std::cos(half), -std::sin(half) * std::cos(2.0 * p.theta)};
}

double loss_perfect_hwp(double theta_rad) {
  if (!(theta_rad >= 0.0 && theta_rad <= M_PI / 2.0)) {
    throw ConfigError("loss_perfect_hwp: theta must lie in [0, pi/2]");
  }
  const double c = std::cos(2.0 * theta_rad);
  return 1.0 - c * c;
}

double birefringent_phase(double length_um, double delta_n, double lambda_nm) {
  if (!(length_um > 0.0)) {
    throw ConfigError("birefringent_phase: length must be positive");
  }
  if (!(lambda_nm > 0.0)) {
    throw ConfigError("birefringent_phase: wavelength must be positive");
  }
  return 2.0 * M_PI * (length_um * 1000.0) * delta_n / lambda_nm;
}

Complex lorentz_transmission(EnergyEv omega, const LorentzParams& p) {
  const Complex i{0.0, 1.0};
  const Complex den = Complex{p.omega_res.value - omega.value, 0.0} - i / p.t2;
  return std::exp(i * p.strength / den);
}

double supergaussian(EnergyEv omega, const FilterParams& p) {
  const double x = (omega.value - p.b.value) / p.c.value;
  const double x2 = x * x;
  return p.a * std::exp(-x2 * x2 * x2) + p.d;
}

TransmissionFn identity_transmission() {
  return {TransmissionFn::Kind::identity, [](double) { return Complex{1.0, 0.0}; }};
}

TransmissionFn waveplate_pbs_fn(const WaveplateParams& p) {
  p.validate();
  return {TransmissionFn::Kind::waveplate_pbs,
          [p](double w) { return waveplate_pbs({w}, p); }};
}

TransmissionFn linear_phase_fn(double alpha, double beta) {
  if (!std::isfinite(alpha) || !std::isfinite(beta)) {
    throw ConfigError("linear_phase_fn: alpha and beta must be finite");
  }
  return {TransmissionFn::Kind::linear_phase_pbs, [alpha, beta](double w) {
            const double half = 0.5 * (alpha * w + beta);
            return Complex{std::cos(half), -std::sin(half)};
          }};
}

TransmissionFn lorentz_fn(const LorentzParams& p) {
  p.validate();
  return {TransmissionFn::Kind::lorentz,
          [p](double w) { return lorentz_transmission({w}, p); }};
}

TransmissionFn supergaussian_fn(const FilterParams& p) {
  p.validate();
  return {TransmissionFn::Kind::supergaussian_filter,
          [p](double w) { return Complex{supergaussian({w}, p), 0.0}; }};
}

TransmissionFn compose(const TransmissionFn& t1, const TransmissionFn& t2) {
  if (!t1.eval || !t2.eval) {
    throw ConfigError("compose: both transmission functions must be evaluable");
  }
  auto e1 = t1.eval;
  auto e2 = t2.eval;
  return {TransmissionFn::Kind::product,
          [e1, e2](double w) { return e1(w) * e2(w); }};
}

TransmissionFn tabulated(std::vector<std::pair<double, Complex>> points) {
  if (points.size() < 2) {
    throw ConfigError("tabulated: need at least 2 points");
  }
  const std::size_t n = points.size();
  std::vector<double> omegas(n), mags(n), phases(n);
  for (std::size_t k = 0; k < n; ++k) {
    omegas[k] = points[k].first;
    mags[k] = std::abs(points[k].second);
    phases[k] = std::arg(points[k].second);
    if (k > 0 && !(omegas[k] > omegas[k - 1])) {
      throw ConfigError("tabulated: abscissae must be strictly increasing");
    }
    if (mags[k] > 1.0 + kMagTol) {
      throw ConfigError("tabulated: magnitude exceeds 1 at omega = " +
                        std::to_string(omegas[k]));
    }
  }
  // unwrap the phase so interpolation never crosses a branch cut
  for (std::size_t k = 1; k < n; ++k) {
    double d = phases[k] - phases[k - 1];
    while (d > M_PI) {
      phases[k] -= 2.0 * M_PI;
      d = phases[k] - phases[k - 1];
    }
    while (d < -M_PI) {
      phases[k] += 2.0 * M_PI;
      d = phases[k] - phases[k - 1];
    }
  }
  return {TransmissionFn::Kind::tabulated,
          [omegas = std::move(omegas), mags = std::move(mags),
           phases = std::move(phases)](double w) {
            if (w <= omegas.front()) return std::polar(mags.front(), phases.front());
            if (w >= omegas.back()) return std::polar(mags.back(), phases.back());
            const auto it = std::upper_bound(omegas.begin(), omegas.end(), w);
            const std::size_t hi = static_cast<std::size_t>(it - omegas.begin());
            const std::size_t lo = hi - 1;
            const double t = (w - omegas[lo]) / (omegas[hi] - omegas[lo]);
            const double m = mags[lo] + t * (mags[hi] - mags[lo]);
            const double ph = phases[lo] + t * (phases[hi] - phases[lo]);
            return std::polar(m, ph);
          }};
}

TransmissionFn load_tabulated_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("load_tabulated_csv: cannot open " + path);
  }
  std::string header;
  if (!std::getline(in, header)) {
    throw ConfigError("load_tabulated_csv: empty file " + path);
  }
  if (!header.empty() && header.back() == '\r') header.pop_back();
  bool wavelength_input = false;
  if (header == "omega_ev,mag,phase_rad") {
    wavelength_input = false;
  } else if (header == "wavelength_nm,mag,phase_rad") {
    wavelength_input = true;
  } else {
    throw ConfigError("load_tabulated_csv: unrecognized header '" + header +
                      "' in " + path);
  }
  std::vector<std::pair<double, Complex>> pts;
  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    double x = 0.0, mag = 0.0, phase = 0.0;
    char c1 = 0, c2 = 0;
    if (!(ss >> x >> c1 >> mag >> c2 >> phase) || c1 != ',' || c2 != ',') {
      throw ConfigError("load_tabulated_csv: parse error at " + path + ":" +
                        std::to_string(lineno));
    }
    const double omega = wavelength_input ? wavelength_nm_to_ev(x).value : x;
    pts.emplace_back(omega, std::polar(mag, phase));
  }
  std::sort(pts.begin(), pts.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return tabulated(std::move(pts));
}

}  // namespace homdip
