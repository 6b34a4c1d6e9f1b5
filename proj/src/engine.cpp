#include "homdip/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "homdip/errors.hpp"

namespace homdip {

namespace {

std::vector<double> trapezoid_weights(const GridAxis& axis) {
  std::vector<double> w(axis.count, axis.step());
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

}  // namespace

EngineConfig EngineConfig::defaults(const JsaParams& p) {
  EngineConfig cfg;
  cfg.grid = default_grid(p);
  return cfg;
}

void BackgroundModel::validate() const {
  if (!(singles_signal >= 0.0) || !(singles_idler_nosample >= 0.0)) {
    throw ConfigError("BackgroundModel: singles rates must be >= 0");
  }
  if (!(window > 0.0)) {
    throw ConfigError("BackgroundModel: window must be positive");
  }
  if (!(mean_transmission >= 0.0 && mean_transmission <= 1.0)) {
    throw ConfigError("BackgroundModel: mean_transmission must lie in [0, 1]");
  }
}

double accidental_rate(const BackgroundModel& bg) {
  bg.validate();
  const double s = bg.singles_signal + bg.mean_transmission * bg.singles_idler_nosample;
  return s * s * bg.window;
}

BackgroundModel calibrate_background(double target_visibility, double baseline_a0,
                                     double window, double singles_ratio) {
  if (!(target_visibility > 0.0 && target_visibility < 1.0)) {
    throw ConfigError("calibrate_background: target visibility must lie in (0, 1)");
  }
  if (!(baseline_a0 > 0.0) || !(window > 0.0) || !(singles_ratio >= 0.0)) {
    throw ConfigError("calibrate_background: invalid baseline, window or ratio");
  }
  // V = A0 / (A0 + 2 floor)  =>  floor = A0 (1 - V) / (2 V)
  const double floor = baseline_a0 * (1.0 - target_visibility) / (2.0 * target_visibility);
  const double idler = std::sqrt(floor / window) / (singles_ratio + 1.0);
  BackgroundModel bg;
  bg.singles_idler_nosample = idler;
  bg.singles_signal = singles_ratio * idler;
  bg.window = window;
  bg.mean_transmission = 1.0;
  return bg;
}

int effective_thread_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* cap = std::getenv("HOMDIP_THREADS")) {
    const int c = std::atoi(cap);
    if (c >= 1 && c < n) n = c;
  }
  return n;
}

void parallel_for(int n, const std::function<void(int)>& body) {
  const int threads = std::min(effective_thread_count(), n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::mutex mu;
  std::exception_ptr first_error;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([t, threads, n, &body, &mu, &first_error] {
      try {
        for (int i = t; i < n; i += threads) body(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(mu);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

CoincidenceKernel::CoincidenceKernel(const JsaParams& jsa_params,
                                     const TransmissionFn& sample,
                                     const EngineConfig& cfg) {
  jsa_params.validate();
  cfg.grid.validate();
  if (!sample.eval) {
    throw ConfigError("CoincidenceKernel: sample is not evaluable");
  }

  const GridAxis& minus = cfg.grid.minus_axis;
  const int nm = minus.count;
  minus_step_ = minus.step();
  minus_nodes_.resize(nm);
  for (int j = 0; j < nm; ++j) minus_nodes_[j] = minus.node(j);

  const auto wm = trapezoid_weights(minus);
  column_.assign(nm, Complex{0.0, 0.0});
  std::vector<double> col_a(nm, 0.0);

  const bool filtered = cfg.filter.has_value();
  const auto filter_w2 = [&](double w) {
    const double m = std::abs((*cfg.filter)(w));
    return m * m;
  };

  if (cfg.cw_limit) {
    // w_plus pinned at omega_p; the minus marginal keeps its continuum
    // normalization so the scale matches the sigma_p -> 0 closed form.
    const double sm = jsa_params.sigma_minus.value;
    const double wp = jsa_params.omega_p.value;
    const double norm = 1.0 / (std::sqrt(2.0 * M_PI) * sm);
    parallel_for(nm, [&](int j) {
      const double x = minus_nodes_[j];
      const double w1 = 0.5 * (wp + x);
      const double w2 = 0.5 * (wp - x);
      double weight = wm[j] * norm * std::exp(-x * x / (2.0 * sm * sm));
      if (filtered) weight *= filter_w2(w1) * filter_w2(w2);
      const Complex t1 = sample(w1);
      const Complex t2 = sample(w2);
      col_a[j] = weight * std::norm(t1);
      column_[j] = weight * std::conj(t1) * t2;
    });
  } else {
    const GridAxis& plus = cfg.grid.plus_axis;
    const auto wp_w = trapezoid_weights(plus);
    const int np = plus.count;
    parallel_for(nm, [&](int j) {
      const double x = minus_nodes_[j];
      double a = 0.0;
      Complex b{0.0, 0.0};
      for (int i = 0; i < np; ++i) {
        const double s = plus.node(i);
        const double w1 = 0.5 * (s + x);
        const double w2 = 0.5 * (s - x);
        const double f = jsa({w1}, {w2}, jsa_params);
        const double fswap = jsa({w2}, {w1}, jsa_params);
        double weight = wp_w[i] * f;
        if (filtered) weight *= filter_w2(w1) * filter_w2(w2);
        const Complex t1 = sample(w1);
        const Complex t2 = sample(w2);
        a += weight * f * std::norm(t1);
        b += weight * fswap * std::conj(t1) * t2;
      }
      // Jacobian 1/2 of the (w_plus, w_minus) rotation
      col_a[j] = 0.5 * wm[j] * a;
      column_[j] = 0.5 * wm[j] * b;
    });
  }

  baseline_a_ = 0.0;
  for (int j = 0; j < nm; ++j) baseline_a_ += col_a[j];
}

double CoincidenceKernel::max_safe_tau() const {
  return M_PI / (4.0 * minus_step_);
}

double CoincidenceKernel::rate(double tau) const {
  if (std::abs(tau) * minus_step_ > M_PI / 4.0 + 1e-12) {
    throw NumericError(
        "coincidence: minus-axis step too coarse for |tau| = " + std::to_string(std::abs(tau)) +
        " eV^-1 (limit " + std::to_string(max_safe_tau()) +
        "); refine the grid or shrink the delay scan");
  }
  Complex b{0.0, 0.0};
  const std::size_t n = column_.size();
  for (std::size_t j = 0; j < n; ++j) {
    const double ph = -minus_nodes_[j] * tau;
    b += column_[j] * Complex{std::cos(ph), std::sin(ph)};
  }
  const double r = baseline_a_ - b.real();
  if (r < -1e-9 * baseline_a_) {
    throw NumericError("coincidence: negative rate " + std::to_string(r) +
                       " indicates quadrature failure");
  }
  return std::max(r, 0.0);
}

double coincidence_numeric(DelayInvEv tau, const JsaParams& jsa_params,
                           const TransmissionFn& sample, const EngineConfig& cfg) {
  return CoincidenceKernel(jsa_params, sample, cfg).rate(tau);
}

double closed_form_baseline(const JsaParams& jsa_params, const WaveplateParams& wp) {
  jsa_params.validate();
  wp.validate();
  const double sp = jsa_params.sigma_p.value;
  const double sm = jsa_params.sigma_minus.value;
  const double c2 = std::cos(2.0 * wp.theta);
  const double s2 = std::sin(2.0 * wp.theta);
  const double psi = wp.alpha * jsa_params.omega_p.value / 2.0 + wp.beta;
  const double ka = std::exp(-wp.alpha * wp.alpha * (sp * sp + sm * sm / 4.0) / 2.0);
  return (1.0 + c2 * c2) / 2.0 + (s2 * s2 / 2.0) * ka * std::cos(psi);
}

double coincidence_closed_form(DelayInvEv tau, const JsaParams& jsa_params,
                               const WaveplateParams& wp) {
  jsa_params.validate();
  wp.validate();
  const double t = tau.value;
  const double sp = jsa_params.sigma_p.value;
  const double sm = jsa_params.sigma_minus.value;
  const double sm2 = sm * sm;
  const double c2 = std::cos(2.0 * wp.theta);
  const double s2 = std::sin(2.0 * wp.theta);
  const double psi = wp.alpha * jsa_params.omega_p.value / 2.0 + wp.beta;

  const double a = closed_form_baseline(jsa_params, wp);
  const double x = sm2 * wp.alpha * t / 2.0;
  const double envelope = std::exp(-sm2 * (wp.alpha * wp.alpha + 4.0 * t * t) / 8.0);
  const double b = envelope * ((1.0 + c2 * c2) / 2.0 * std::cosh(x) + c2 * std::sinh(x)) +
                   (s2 * s2 / 2.0) * std::exp(-wp.alpha * wp.alpha * sp * sp / 2.0) *
                       std::exp(-sm2 * t * t / 2.0) * std::cos(psi);
  return a - b;
}

double baseline_tau_threshold(const JsaParams& jsa_params) {
  return 6.0 / jsa_params.sigma_minus.value;
}

std::vector<double> with_baseline_wings(std::vector<double> taus, const JsaParams& jsa_params) {
  const double t0 = baseline_tau_threshold(jsa_params);
  int have = 0;
  for (double t : taus) {
    if (std::abs(t) >= t0) ++have;
  }
  if (have >= 4) return taus;
  const double pitch = 0.5 / jsa_params.sigma_minus.value;
  for (int k = 0; k < 4; ++k) {
    taus.push_back(t0 + k * pitch);
    taus.push_back(-(t0 + k * pitch));
  }
  std::sort(taus.begin(), taus.end());
  taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
  return taus;
}

DipTrace trace_from_kernel(const CoincidenceKernel& kernel, const JsaParams& jsa_params,
                           const std::vector<double>& tau_list, double floor,
                           Normalization normalization) {
  if (tau_list.size() < 2) {
    throw ConfigError("trace: need at least 2 delay points");
  }
  for (std::size_t i = 1; i < tau_list.size(); ++i) {
    if (!(tau_list[i] > tau_list[i - 1])) {
      throw ConfigError("trace: tau list must be strictly increasing");
    }
  }

  DipTrace out;
  out.taus = tau_list;
  out.rates.assign(tau_list.size(), 0.0);
  out.background = floor;

  parallel_for(static_cast<int>(tau_list.size()), [&](int i) {
    out.rates[static_cast<std::size_t>(i)] =
        kernel.rate(tau_list[static_cast<std::size_t>(i)]) + floor;
  });

  const double t0 = baseline_tau_threshold(jsa_params);
  double far_sum = 0.0;
  int far_count = 0;
  for (std::size_t i = 0; i < tau_list.size(); ++i) {
    if (std::abs(tau_list[i]) >= t0) {
      far_sum += out.rates[i];
      ++far_count;
    }
  }

  if (normalization == Normalization::unit_baseline) {
    if (far_count < 4) {
      throw ConfigError(
          "trace: unit-baseline normalization needs >= 4 points with |tau| >= " +
          std::to_string(t0) + " eV^-1; widen the scan or add baseline wings");
    }
    out.baseline = far_sum / far_count;
    if (!(out.baseline > 0.0)) {
      throw ConfigError("trace: baseline is zero (opaque sample?); cannot normalize");
    }
    for (double& r : out.rates) r /= out.baseline;
    out.normalized = true;
  } else {
    out.baseline = far_count > 0 ? far_sum / far_count : kernel.baseline() + floor;
    out.normalized = false;
  }
  out.meta["floor"] = std::to_string(floor);
  out.meta["baseline_threshold_ev_inv"] = std::to_string(t0);
  return out;
}

DipTrace trace(const JsaParams& jsa_params, const TransmissionFn& sample,
               const EngineConfig& cfg, const std::vector<double>& tau_list,
               const std::optional<BackgroundModel>& bg) {
  const CoincidenceKernel kernel(jsa_params, sample, cfg);
  const double floor = bg ? accidental_rate(*bg) : 0.0;
  DipTrace out = trace_from_kernel(kernel, jsa_params, tau_list, floor, cfg.normalization);
  out.meta["omega_p_ev"] = std::to_string(jsa_params.omega_p.value);
  out.meta["sigma_p_ev"] = std::to_string(jsa_params.sigma_p.value);
  out.meta["sigma_minus_ev"] = std::to_string(jsa_params.sigma_minus.value);
  out.meta["cw_limit"] = cfg.cw_limit ? "true" : "false";
  out.meta["filtered"] = cfg.filter ? "true" : "false";
  return out;
}

}  // namespace homdip
