#include "homdip/inversion.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "homdip/errors.hpp"

namespace homdip {

namespace {

constexpr int kMaxIterations = 500;
constexpr double kObjectiveTol = 1e-10;  // relative objective change
constexpr double kStepTol = 1e-12;       // parameter step norm

struct Design {
  const std::vector<double>& w;
  const std::vector<double>& y;
  bool fit_omega;
  double omega_fixed;
};

// Model and Jacobian in the (ln A, ln T2 [, Omega]) parameterization.
void evaluate(const Design& d, const std::array<double, 3>& p,
              std::vector<double>& model, std::vector<std::array<double, 3>>& jac) {
  const double amp = std::exp(p[0]);
  const double t2 = std::exp(p[1]);
  const double omega = d.fit_omega ? p[2] : d.omega_fixed;
  const std::size_t n = d.w.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double det = omega - d.w[k];
    const double den = det * det * t2 * t2 + 1.0;
    const double y = std::exp(-2.0 * amp * t2 / den);
    model[k] = y;
    jac[k][0] = y * (-2.0 * t2 / den) * amp;
    jac[k][1] = y * (-2.0 * amp) * (1.0 - det * det * t2 * t2) / (den * den) * t2;
    jac[k][2] = d.fit_omega ? y * 4.0 * amp * t2 * t2 * t2 * det / (den * den) : 0.0;
  }
}

double objective(const Design& d, const std::vector<double>& model) {
  double s = 0.0;
  for (std::size_t k = 0; k < d.y.size(); ++k) {
    const double r = model[k] - d.y[k];
    s += r * r;
  }
  return s;
}

bool solve3(std::array<std::array<double, 3>, 3> m, std::array<double, 3> rhs,
            std::array<double, 3>& out, int dim) {
  for (int col = 0; col < dim; ++col) {
    int pivot = col;
    for (int row = col + 1; row < dim; ++row) {
      if (std::abs(m[row][col]) > std::abs(m[pivot][col])) pivot = row;
    }
    if (m[pivot][col] == 0.0) return false;
    std::swap(m[col], m[pivot]);
    std::swap(rhs[col], rhs[pivot]);
    for (int row = col + 1; row < dim; ++row) {
      const double f = m[row][col] / m[col][col];
      for (int c = col; c < dim; ++c) m[row][c] -= f * m[col][c];
      rhs[row] -= f * rhs[col];
    }
  }
  out = {0.0, 0.0, 0.0};
  for (int row = dim - 1; row >= 0; --row) {
    double s = rhs[row];
    for (int c = row + 1; c < dim; ++c) s -= m[row][c] * out[c];
    out[row] = s / m[row][row];
  }
  return true;
}

// Dip half-width at half depth, taken against the in-sample extremes.
double init_t2(const std::vector<double>& w, const std::vector<double>& y) {
  std::size_t imin = 0;
  double ymax = y[0];
  for (std::size_t k = 1; k < y.size(); ++k) {
    if (y[k] < y[imin]) imin = k;
    ymax = std::max(ymax, y[k]);
  }
  const double half = 0.5 * (y[imin] + ymax);
  double left = 0.0, right = 0.0;
  for (std::size_t k = imin + 1; k-- > 0;) {
    if (y[k] >= half) {
      left = std::abs(w[k] - w[imin]);
      break;
    }
  }
  for (std::size_t k = imin; k < y.size(); ++k) {
    if (y[k] >= half) {
      right = std::abs(w[k] - w[imin]);
      break;
    }
  }
  double hw = 0.0;
  int c = 0;
  if (left > 0.0) {
    hw += left;
    ++c;
  }
  if (right > 0.0) {
    hw += right;
    ++c;
  }
  if (c > 0) {
    hw /= c;
  } else {
    hw = 0.25 * (w.back() - w.front());
  }
  return 1.0 / std::max(hw, 1e-12);
}

}  // namespace

LorentzFitResult fit_lorentz(const std::vector<std::pair<double, double>>& samples,
                             std::optional<EnergyEv> omega_fixed,
                             std::optional<LorentzParams> init) {
  if (samples.size() < 8) {
    throw ConfigError("fit_lorentz: need at least 8 samples");
  }
  std::vector<double> w, y;
  w.reserve(samples.size());
  y.reserve(samples.size());
  double ymin = samples.front().second, ymax = samples.front().second;
  for (const auto& [omega, value] : samples) {
    if (!(value >= 0.0 && value <= 1.0 + 1e-9)) {
      throw ConfigError("fit_lorentz: |T|^2 samples must lie in [0, 1]");
    }
    w.push_back(omega);
    y.push_back(value);
    ymin = std::min(ymin, value);
    ymax = std::max(ymax, value);
  }
  if (ymax - ymin < 1e-12) {
    throw ConfigError("fit_lorentz: degenerate data (constant |T|^2)");
  }

  const bool fit_omega = !omega_fixed.has_value();
  double omega0;
  if (fit_omega) {
    std::size_t imin = 0;
    for (std::size_t k = 1; k < y.size(); ++k) {
      if (y[k] < y[imin]) imin = k;
    }
    omega0 = w[imin];
  } else {
    omega0 = omega_fixed->value;
  }
  const Design design{w, y, fit_omega, omega0};
  const int dim = fit_omega ? 3 : 2;

  double t20, a0;
  if (init) {
    init->validate();
    t20 = init->t2;
    a0 = std::max(init->strength, 1e-12);
  } else {
    t20 = init_t2(w, y);
    a0 = std::max(-std::log(std::max(ymin, 1e-12)) / (2.0 * t20), 1e-10);
  }

  std::array<double, 3> p{std::log(a0), std::log(t20), omega0};
  const std::size_t n = w.size();
  std::vector<double> model(n);
  std::vector<std::array<double, 3>> jac(n);
  evaluate(design, p, model, jac);
  double obj = objective(design, model);

  LorentzFitResult result;
  result.objective_trace.push_back(obj);

  double lambda = 1e-3;
  int it = 0;
  bool converged = false;
  std::vector<double> model_try(n);
  std::vector<std::array<double, 3>> jac_try(n);
  while (it < kMaxIterations) {
    ++it;
    std::array<double, 3> grad{0.0, 0.0, 0.0};
    std::array<std::array<double, 3>, 3> hess{};
    for (std::size_t k = 0; k < n; ++k) {
      const double r = model[k] - y[k];
      for (int i = 0; i < dim; ++i) {
        grad[i] += jac[k][i] * r;
        for (int j2 = 0; j2 <= i; ++j2) hess[i][j2] += jac[k][i] * jac[k][j2];
      }
    }
    for (int i = 0; i < dim; ++i) {
      for (int j2 = i + 1; j2 < dim; ++j2) hess[i][j2] = hess[j2][i];
    }
    auto damped = hess;
    for (int i = 0; i < dim; ++i) {
      damped[i][i] += lambda * std::max(hess[i][i], 1e-30);
    }
    std::array<double, 3> step{};
    std::array<double, 3> rhs{-grad[0], -grad[1], -grad[2]};
    if (!solve3(damped, rhs, step, dim)) {
      lambda *= 10.0;
      if (lambda > 1e14) break;
      continue;
    }
    std::array<double, 3> p_try = p;
    for (int i = 0; i < dim; ++i) p_try[i] += step[i];
    evaluate(design, p_try, model_try, jac_try);
    const double obj_try = objective(design, model_try);
    if (obj_try <= obj) {
      const double rel = (obj - obj_try) / std::max(obj, 1e-300);
      double step_norm = 0.0;
      for (int i = 0; i < dim; ++i) step_norm += step[i] * step[i];
      step_norm = std::sqrt(step_norm);
      p = p_try;
      model.swap(model_try);
      jac.swap(jac_try);
      obj = obj_try;
      result.objective_trace.push_back(obj);
      lambda = std::max(lambda * 0.1, 1e-13);
      // near Gauss-Newton only: a damped micro-step must not end the fit
      if ((rel < kObjectiveTol && lambda <= 1e-7) || step_norm < kStepTol) {
        converged = true;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e14) {
        converged = true;  // no damping improves the fit any further
        break;
      }
    }
  }

  result.params.strength = std::exp(p[0]);
  result.params.t2 = std::exp(p[1]);
  result.params.omega_res = {fit_omega ? p[2] : omega0};
  result.residual = std::sqrt(obj / static_cast<double>(n));
  result.converged = converged;
  result.iterations = it;
  return result;
}

std::vector<T2LossRow> t2_vs_loss(const std::vector<double>& thetas_rad,
                                  const WaveplateParams& wp_base,
                                  std::pair<EnergyEv, EnergyEv> band,
                                  int n_samples, EnergyEv omega_res) {
  if (!(band.second.value > band.first.value)) {
    throw ConfigError("t2_vs_loss: band must be increasing");
  }
  if (n_samples < 8) {
    throw ConfigError("t2_vs_loss: need at least 8 samples per fit");
  }
  std::vector<T2LossRow> rows;
  rows.reserve(thetas_rad.size());
  for (const double theta : thetas_rad) {
    if (!(theta > 0.0 && theta < M_PI / 4.0)) {
      throw ConfigError(
          "t2_vs_loss: theta must lie strictly inside (0, 45) degrees; the "
          "exponential model cannot reach the hard zero at 45");
    }
    WaveplateParams wp = wp_base;
    wp.theta = theta;
    std::vector<std::pair<double, double>> samples;
    samples.reserve(n_samples);
    const double step = (band.second.value - band.first.value) / (n_samples - 1);
    for (int k = 0; k < n_samples; ++k) {
      const double omega = band.first.value + k * step;
      samples.emplace_back(omega, std::norm(waveplate_pbs({omega}, wp)));
    }
    T2LossRow row;
    row.theta = theta;
    row.loss = loss_perfect_hwp(theta);
    try {
      const auto fit = fit_lorentz(samples, omega_res);
      row.strength = fit.params.strength;
      row.t2 = fit.params.t2;
      row.residual = fit.residual;
      row.converged = fit.converged;
    } catch (const ConfigError&) {
      row.converged = false;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace homdip
