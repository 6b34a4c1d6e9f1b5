#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "homdip/analysis.hpp"
#include "homdip/errors.hpp"

using namespace homdip;

namespace {

const JsaParams kJsa{};
constexpr double kAlphaMo = 40.30;
constexpr double kBetaMo = -60.23;

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

// synthetic normalized Gaussian dip, unit baseline
DipTrace gaussian_dip(const std::vector<double>& taus, double center, double depth,
                      double sigma_tau) {
  DipTrace t;
  t.taus = taus;
  t.normalized = true;
  t.baseline = 1.0;
  for (const double tau : taus) {
    const double d = (tau - center) / sigma_tau;
    t.rates.push_back(1.0 - depth * std::exp(-0.5 * d * d));
  }
  return t;
}

// closed-form normalized trace for the linear-retardance sample
DipTrace closed_form_trace(double theta_rad, double alpha, double beta,
                           const std::vector<double>& taus) {
  const WaveplateParams wp{alpha, beta, theta_rad};
  DipTrace t;
  t.taus = taus;
  t.normalized = true;
  const double a = closed_form_baseline(kJsa, wp);
  t.baseline = a;
  for (const double tau : taus) {
    t.rates.push_back(coincidence_closed_form({tau}, kJsa, wp) / a);
  }
  return t;
}

const std::vector<double> kScan = with_baseline_wings(linspace(-300.0, 300.0, 201), kJsa);

}  // namespace

TEST_CASE("dip position on synthetic Gaussians") {
  const double sigma_tau = 1.0 / kJsa.sigma_minus.value;
  SUBCASE("centered dip resolves to zero") {
    const auto t = gaussian_dip(kScan, 0.0, 1.0, sigma_tau);
    CHECK(std::abs(dip_position(t).tau) < 1e-6);
  }
  SUBCASE("off-grid center recovered within 0.01") {
    const auto t = gaussian_dip(kScan, 20.15, 1.0, sigma_tau);
    CHECK(dip_position(t).tau == doctest::Approx(20.15).epsilon(0.0005));
  }
  SUBCASE("boundary minimum is rejected") {
    auto t = gaussian_dip(linspace(-300.0, 300.0, 51), 400.0, 1.0, sigma_tau);
    CHECK_THROWS_AS(dip_position(t), ConfigError);
  }
  SUBCASE("needle dip falls back to the grid minimum with the flag cleared") {
    DipTrace t;
    t.taus = linspace(-50.0, 50.0, 101);
    t.rates.assign(101, 1.0);
    t.rates[60] = 0.0;  // single-point well: fewer than 3 band points
    t.normalized = true;
    t.baseline = 1.0;
    const auto pos = dip_position(t);
    CHECK_FALSE(pos.band_fit_used);
    CHECK(pos.tau == doctest::Approx(t.taus[60]).epsilon(1e-12));
  }
}

TEST_CASE("dip position is translation equivariant") {
  const double sigma_tau = 1.0 / kJsa.sigma_minus.value;
  const auto base = gaussian_dip(kScan, 35.0, 0.8, sigma_tau);
  const double p0 = dip_position(base).tau;
  for (const double shift : {13.75, -91.25, 0.5}) {
    DipTrace moved = base;
    for (double& tau : moved.taus) tau += shift;
    CHECK(dip_position(moved).tau - p0 == doctest::Approx(shift).epsilon(1e-9));
  }
}

TEST_CASE("dip position on the flattened two-branch trace near 45 degrees") {
  const auto t = closed_form_trace(44.0 * M_PI / 180.0, kAlphaMo, kBetaMo, kScan);
  const auto pos = dip_position(t);
  CHECK(pos.tau > -kAlphaMo / 2.0);
  CHECK(pos.tau < kAlphaMo / 2.0);
  CHECK(pos.band_fit_used);
}

TEST_CASE("visibility") {
  SUBCASE("full dip gives unit visibility") {
    const auto t = gaussian_dip(kScan, 0.0, 1.0, 1.0 / kJsa.sigma_minus.value);
    CHECK(visibility(t) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("flat trace gives zero visibility") {
    DipTrace t = gaussian_dip(kScan, 0.0, 0.0, 1.0 / kJsa.sigma_minus.value);
    // make an interior minimum without creating contrast
    t.rates[t.rates.size() / 2] -= 1e-15;
    CHECK(visibility(t) == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("positive baseline required") {
    DipTrace t = gaussian_dip(kScan, 0.0, 0.5, 1.0 / kJsa.sigma_minus.value);
    t.normalized = false;
    t.baseline = 0.0;
    CHECK_THROWS_AS(visibility(t), ConfigError);
  }
  SUBCASE("stays in [0, 1] for arbitrary non-negative traces") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> noise(0.0, 2.0);
    for (int rep = 0; rep < 50; ++rep) {
      DipTrace t;
      t.taus = linspace(-40.0, 40.0, 41);
      t.normalized = false;
      for (std::size_t i = 0; i < t.taus.size(); ++i) t.rates.push_back(noise(rng));
      t.rates.front() = 2.5;  // keep the minimum interior
      t.rates.back() = 2.5;
      t.baseline = 1.0;
      const double v = visibility(t);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("asymmetry") {
  const double sigma_tau = 1.0 / kJsa.sigma_minus.value;
  SUBCASE("symmetric Gaussian deficit has zero skew") {
    const auto t = gaussian_dip(kScan, 0.0, 0.9, sigma_tau);
    CHECK(std::abs(asymmetry(t)) < 1e-6);
  }
  SUBCASE("mirror-symmetric traces about any center have zero skew") {
    // grid symmetric about c = 12 so that rate(tau) = rate(2c - tau) exactly
    const auto taus = linspace(12.0 - 350.0, 12.0 + 350.0, 175);
    const auto t = gaussian_dip(taus, 12.0, 0.7, sigma_tau);
    CHECK(std::abs(asymmetry(t)) < 1e-6);
  }
  SUBCASE("all-zero deficit is rejected") {
    // interior minimum, but every rate sits above the baseline
    DipTrace t;
    t.taus = linspace(-10.0, 10.0, 11);
    t.rates.assign(11, 1.0 + 2e-12);
    t.rates[5] = 1.0 + 1e-12;
    t.normalized = true;
    t.baseline = 1.0;
    CHECK_THROWS_AS(asymmetry(t), ConfigError);
  }
  SUBCASE("MO trace at 43 degrees skews toward -tau (regression)") {
    const auto t = closed_form_trace(43.0 * M_PI / 180.0, kAlphaMo, kBetaMo, kScan);
    const double skew = asymmetry(t);
    CHECK(skew < 0.0);
    CHECK(skew == doctest::Approx(-0.011).epsilon(0.05));
  }
  SUBCASE("perfect-HWP traces stay symmetric at any angle") {
    for (const double theta_deg : {8.0, 24.0, 40.0}) {
      const auto t = closed_form_trace(theta_deg * M_PI / 180.0, 0.0, M_PI, kScan);
      CHECK(std::abs(asymmetry(t)) < 1e-3);
    }
  }
}

TEST_CASE("dip metrics bundle") {
  const auto t = closed_form_trace(43.0 * M_PI / 180.0, kAlphaMo, kBetaMo, kScan);
  const auto m = dip_metrics(t);
  CHECK(m.visibility == doctest::Approx(visibility(t)).epsilon(1e-12));
  CHECK(m.dip_position == doctest::Approx(dip_position(t).tau).epsilon(1e-12));
  CHECK(m.asymmetry == doctest::Approx(asymmetry(t)).epsilon(1e-12));
  CHECK(m.dip_depth == doctest::Approx(1.0 - (1.0 - m.visibility) / (1.0 + m.visibility))
                           .epsilon(1e-9));
  CHECK(m.baseline == t.baseline);
}

TEST_CASE("dip shift") {
  SUBCASE("identical traces shift by zero") {
    const auto t = closed_form_trace(0.2, kAlphaMo, kBetaMo, kScan);
    CHECK(dip_shift(t, t) == 0.0);
  }
  SUBCASE("perfect-HWP sweep pins the dip within 0.5 fs") {
    const auto ref = closed_form_trace(0.0, 0.0, M_PI, kScan);
    for (const double theta_deg : {8.0, 16.0, 24.0, 32.0, 40.0}) {
      const auto t = closed_form_trace(theta_deg * M_PI / 180.0, 0.0, M_PI, kScan);
      CHECK(std::abs(ev_inv_to_fs(dip_shift(t, ref))) < 0.5);
    }
  }
  SUBCASE("MO sweep drifts toward -tau, small below 40 percent loss") {
    const auto ref = closed_form_trace(0.0, kAlphaMo, kBetaMo, kScan);
    double prev = 0.0;
    for (const double theta_deg : {8.0, 16.0, 24.0, 32.0, 40.0, 43.0}) {
      const double theta = theta_deg * M_PI / 180.0;
      const auto t = closed_form_trace(theta, kAlphaMo, kBetaMo, kScan);
      const double shift = dip_shift(t, ref);
      if (loss_perfect_hwp(theta) < 0.4) {
        CHECK(std::abs(shift) < 7.6);  // 5 fs
      }
      // monotone toward -tau within the estimator wiggle (0.05 fs)
      CHECK(shift <= prev + 0.076);
      prev = shift;
    }
    CHECK(prev < -15.0);
  }
}

TEST_CASE("theta sweep rows") {
  ThetaSweepConfig scenario;
  scenario.jsa = kJsa;
  scenario.engine = EngineConfig::defaults(kJsa);
  scenario.taus = linspace(-300.0, 300.0, 201);

  const std::vector<double> thetas = {0.0, 8.0, 16.0, 24.0, 32.0, 40.0};
  std::vector<double> thetas_rad;
  for (const double t : thetas) thetas_rad.push_back(t * M_PI / 180.0);

  SUBCASE("loss column from the perfect-HWP law") {
    scenario.sample_for_theta = [](double theta) {
      return waveplate_pbs_fn({0.0, M_PI, theta});
    };
    const auto rows = sweep_theta(thetas_rad, scenario);
    const std::vector<double> expected{0.0,        0.0759757, 0.2808139,
                                       0.5522642, 0.8078307, 0.9698463};
    REQUIRE(rows.size() == expected.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].loss == doctest::Approx(expected[i]).epsilon(1e-6));
    }
  }

  SUBCASE("zero background keeps perfect-HWP visibility flat") {
    scenario.sample_for_theta = [](double theta) {
      return waveplate_pbs_fn({0.0, M_PI, theta});
    };
    const auto rows = sweep_theta(thetas_rad, scenario);
    for (const auto& row : rows) {
      CHECK(std::abs(row.visibility - rows[0].visibility) < 1e-9);
    }
  }

  SUBCASE("calibrated background: degradation, MO at or below matched ZO") {
    const auto bg = calibrate_background(0.967, 1.0);
    scenario.background = bg;
    scenario.sample_for_theta = [](double theta) {
      return waveplate_pbs_fn({0.0, M_PI, theta});
    };
    const auto zo_rows = sweep_theta(thetas_rad, scenario);
    CHECK(zo_rows.front().visibility == doctest::Approx(0.967).epsilon(1e-3));
    CHECK(zo_rows.back().visibility < zo_rows.front().visibility);

    const double omega_c = 1.5344578999876238;
    scenario.sample_for_theta = [omega_c](double theta) {
      auto wp = reanchored(mo_waveplate_defaults(), omega_c);
      wp.theta = theta;
      return waveplate_pbs_fn(wp);
    };
    const auto mo_rows = sweep_theta(thetas_rad, scenario);

    // compare each MO row against the perfect-HWP chain attenuated to the
    // same actual transmission (equal baseline + equal floor leaves only the
    // MO dip-distortion penalty, which can only lower the visibility)
    scenario.sample_for_theta = [](double theta) {
      return waveplate_pbs_fn({0.0, M_PI, theta});
    };
    for (const auto& mo : mo_rows) {
      const double theta_matched =
          0.5 * std::acos(std::sqrt(std::clamp(mo.mean_transmission, 0.0, 1.0)));
      const auto matched = sweep_theta({theta_matched}, scenario);
      CHECK(mo.visibility <= matched[0].visibility + 1e-9);
    }
  }

  SUBCASE("mean rate is affine in loss with zero background") {
    for (const bool mo : {false, true}) {
      scenario.sample_for_theta = [mo](double theta) {
        return mo ? waveplate_pbs_fn({kAlphaMo, kBetaMo, theta})
                  : waveplate_pbs_fn({0.0, M_PI, theta});
      };
      const auto rows = sweep_theta(thetas_rad, scenario);
      // least-squares affine fit of mean_rate against loss
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (const auto& r : rows) {
        sx += r.loss;
        sy += r.mean_rate;
        sxx += r.loss * r.loss;
        sxy += r.loss * r.mean_rate;
      }
      const double n = static_cast<double>(rows.size());
      const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      const double icept = (sy - slope * sx) / n;
      for (const auto& r : rows) {
        CHECK(std::abs(icept + slope * r.loss - r.mean_rate) < 0.01 * rows[0].mean_rate);
      }
    }
  }
}
