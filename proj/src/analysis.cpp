#include "homdip/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "homdip/errors.hpp"

namespace homdip {

namespace {

double trace_baseline_level(const DipTrace& t) {
  return t.normalized ? 1.0 : t.baseline;
}

// Least-squares parabola y = a x^2 + b x + c on centered abscissae.
struct Parabola {
  double a = 0.0, b = 0.0, c = 0.0, x0 = 0.0;
  double vertex() const { return x0 - b / (2.0 * a); }
  double vertex_value() const { return c - b * b / (4.0 * a); }
};

std::optional<Parabola> fit_parabola(const std::vector<double>& xs,
                                     const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  if (n < 3) return std::nullopt;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  // normal equations for the centered Vandermonde basis {x^2, x, 1}
  double s0 = static_cast<double>(n), s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  double ty0 = 0, ty1 = 0, ty2 = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = xs[k] - mean;
    const double x2 = x * x;
    s1 += x;
    s2 += x2;
    s3 += x2 * x;
    s4 += x2 * x2;
    ty0 += ys[k];
    ty1 += x * ys[k];
    ty2 += x2 * ys[k];
  }
  const std::array<std::array<double, 3>, 3> m{{{s4, s3, s2}, {s3, s2, s1}, {s2, s1, s0}}};
  std::array<double, 3> rhs{ty2, ty1, ty0};
  // direct 3x3 solve by Cramer's rule
  const auto det3 = [](const std::array<std::array<double, 3>, 3>& a) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  };
  const double d = det3(m);
  if (d == 0.0 || !std::isfinite(d)) return std::nullopt;
  std::array<double, 3> sol{};
  for (int col = 0; col < 3; ++col) {
    auto mc = m;
    for (int row = 0; row < 3; ++row) mc[row][col] = rhs[row];
    sol[col] = det3(mc) / d;
  }
  Parabola p{sol[0], sol[1], sol[2], mean};
  if (!(p.a > 0.0) || !std::isfinite(p.a)) return std::nullopt;
  return p;
}

}  // namespace

DipPositionResult dip_position(const DipTrace& trace, double band_fraction) {
  const std::size_t n = trace.rates.size();
  if (n < 3) {
    throw ConfigError("dip_position: need at least 3 trace points");
  }
  std::size_t imin = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (trace.rates[i] < trace.rates[imin]) imin = i;
  }
  if (imin == 0 || imin == n - 1) {
    throw ConfigError("dip_position: minimum sits at the scan boundary; widen the scan");
  }

  const double r0 = trace.rates[imin];
  const double rinf = trace_baseline_level(trace);
  const double threshold = r0 + band_fraction * (rinf - r0);

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < n; ++i) {
    if (trace.rates[i] <= threshold) {
      xs.push_back(trace.taus[i]);
      ys.push_back(trace.rates[i]);
    }
  }

  DipPositionResult res;
  res.tau = trace.taus[imin];
  res.refined_min = r0;
  res.band_fit_used = false;
  if (xs.size() >= 3) {
    if (const auto band = fit_parabola(xs, ys)) {
      res.tau = band->vertex();
      res.refined_min = band->vertex_value();
      res.band_fit_used = true;
    }
  }

  // local quadratic through the three nodes nearest the band vertex
  std::size_t j = imin;
  double best = std::abs(trace.taus[imin] - res.tau);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::abs(trace.taus[i] - res.tau);
    if (d < best) {
      best = d;
      j = i;
    }
  }
  j = std::clamp<std::size_t>(j, 1, n - 2);
  const std::vector<double> lx{trace.taus[j - 1], trace.taus[j], trace.taus[j + 1]};
  const std::vector<double> ly{trace.rates[j - 1], trace.rates[j], trace.rates[j + 1]};
  if (const auto local = fit_parabola(lx, ly)) {
    const double v = local->vertex();
    if (v >= lx.front() && v <= lx.back()) {
      res.tau = v;
      res.refined_min = local->vertex_value();
    }
  }
  return res;
}

double visibility(const DipTrace& trace) {
  if (trace.rates.size() < 5) {
    throw ConfigError("visibility: need at least 5 trace points");
  }
  const double rinf = trace_baseline_level(trace);
  if (!(rinf > 0.0)) {
    throw ConfigError("visibility: baseline must be positive");
  }
  // refined minimum clamped into [0, Rinf]: on contrast-free traces the fit
  // residual can push the vertex a hair past the baseline
  const double r0 = std::clamp(dip_position(trace).refined_min, 0.0, rinf);
  return (rinf - r0) / (rinf + r0);
}

double dip_shift(const DipTrace& sample_trace, const DipTrace& reference_trace) {
  return dip_position(sample_trace).tau - dip_position(reference_trace).tau;
}

double asymmetry(const DipTrace& trace) {
  if (!trace.normalized) {
    throw ConfigError("asymmetry: requires a normalized trace");
  }
  dip_position(trace);  // enforces the interior-dip precondition
  const double level = trace_baseline_level(trace);
  double mass = 0.0, mean = 0.0;
  const std::size_t n = trace.rates.size();
  std::vector<double> deficit(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    deficit[i] = std::max(0.0, level - trace.rates[i]);
    mass += deficit[i];
    mean += deficit[i] * trace.taus[i];
  }
  if (!(mass > 0.0)) {
    throw ConfigError("asymmetry: dip deficit is identically zero");
  }
  mean /= mass;
  double m2 = 0.0, m3 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = trace.taus[i] - mean;
    m2 += deficit[i] * d * d;
    m3 += deficit[i] * d * d * d;
  }
  m2 /= mass;
  m3 /= mass;
  if (!(m2 > 0.0)) {
    throw ConfigError("asymmetry: degenerate deficit distribution");
  }
  return m3 / std::pow(m2, 1.5);
}

DipMetrics dip_metrics(const DipTrace& trace) {
  DipMetrics m;
  const auto pos = dip_position(trace);
  const double rinf = trace_baseline_level(trace);
  const double r0 = std::max(pos.refined_min, 0.0);
  m.visibility = (rinf - r0) / (rinf + r0);
  m.dip_position = pos.tau;
  m.dip_depth = rinf > 0.0 ? (rinf - r0) / rinf : 0.0;
  m.asymmetry = asymmetry(trace);
  m.baseline = trace.baseline;
  return m;
}

std::vector<SweepRow> sweep_theta(const std::vector<double>& thetas_rad,
                                  const ThetaSweepConfig& scenario) {
  if (!scenario.sample_for_theta) {
    throw ConfigError("sweep_theta: scenario lacks a sample factory");
  }
  if (thetas_rad.empty()) {
    throw ConfigError("sweep_theta: empty theta list");
  }

  const auto taus = with_baseline_wings(scenario.taus, scenario.jsa);
  const double ref_a =
      CoincidenceKernel(scenario.jsa, scenario.sample_for_theta(0.0), scenario.engine)
          .baseline();

  struct ThetaRun {
    DipTrace trace;
    double tbar = 1.0;
  };
  const auto run_theta = [&](double theta) {
    const CoincidenceKernel kernel(scenario.jsa, scenario.sample_for_theta(theta),
                                   scenario.engine);
    double tbar = 1.0;
    switch (scenario.tbar_policy) {
      case TransmissionPolicy::actual_transmission:
        tbar = std::clamp(kernel.baseline() / ref_a, 0.0, 1.0);
        break;
      case TransmissionPolicy::perfect_hwp: {
        const double c = std::cos(2.0 * theta);
        tbar = c * c;
        break;
      }
      case TransmissionPolicy::fixed:
        tbar = scenario.background ? scenario.background->mean_transmission : 1.0;
        break;
    }
    double floor = 0.0;
    if (scenario.background) {
      BackgroundModel bg = *scenario.background;
      bg.mean_transmission = tbar;
      floor = accidental_rate(bg);
    }
    return ThetaRun{trace_from_kernel(kernel, scenario.jsa, taus, floor,
                                      scenario.engine.normalization),
                    tbar};
  };

  const ThetaRun reference = run_theta(0.0);
  const double ref_pos = dip_position(reference.trace).tau;
  const double ref_baseline = reference.trace.baseline;

  std::vector<SweepRow> rows;
  rows.reserve(thetas_rad.size());
  for (const double theta : thetas_rad) {
    const ThetaRun run = run_theta(theta);
    SweepRow row;
    row.theta = theta;
    row.loss = loss_perfect_hwp(theta);
    row.visibility = visibility(run.trace);
    row.dip_shift = dip_position(run.trace).tau - ref_pos;
    row.mean_rate = run.trace.baseline / ref_baseline;
    row.mean_transmission = run.tbar;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace homdip
