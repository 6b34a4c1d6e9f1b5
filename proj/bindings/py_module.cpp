#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "homdip/analysis.hpp"
#include "homdip/engine.hpp"
#include "homdip/inversion.hpp"
#include "homdip/version.hpp"

namespace py = pybind11;
using namespace homdip;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-photon coincidence dip simulation and sample-property inversion";
  m.attr("__version__") = kVersion;
  m.attr("HBAR_EV_FS") = kHbarEvFs;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def("ev_inv_to_fs", [](double t) { return ev_inv_to_fs(t); }, py::arg("tau_ev_inv"));
  m.def("fs_to_ev_inv", [](double t) { return fs_to_ev_inv(t).value; }, py::arg("tau_fs"));
  m.def("wavelength_nm_to_ev", [](double nm) { return wavelength_nm_to_ev(nm).value; },
        py::arg("lambda_nm"));

  py::class_<JsaParams>(m, "JsaParams")
      .def(py::init([](double omega_p, double sigma_p, double sigma_minus) {
             JsaParams p{{omega_p}, {sigma_p}, {sigma_minus}};
             p.validate();
             return p;
           }),
           py::arg("omega_p_ev") = 3.069, py::arg("sigma_p_ev") = 0.149e-3,
           py::arg("sigma_minus_ev") = 6.8e-3)
      .def_property_readonly("omega_p_ev", [](const JsaParams& p) { return p.omega_p.value; })
      .def_property_readonly("sigma_p_ev", [](const JsaParams& p) { return p.sigma_p.value; })
      .def_property_readonly("sigma_minus_ev",
                             [](const JsaParams& p) { return p.sigma_minus.value; });

  m.def("jsa", [](double w1, double w2, const JsaParams& p) { return jsa({w1}, {w2}, p); },
        py::arg("omega1_ev"), py::arg("omega2_ev"), py::arg("params"));

  py::class_<WaveplateParams>(m, "WaveplateParams")
      .def(py::init([](double alpha, double beta, double theta) {
             WaveplateParams p{alpha, beta, theta};
             p.validate();
             return p;
           }),
           py::arg("alpha_ev_inv"), py::arg("beta_rad"), py::arg("theta_rad") = 0.0)
      .def_readonly("alpha", &WaveplateParams::alpha)
      .def_readonly("beta", &WaveplateParams::beta)
      .def_readonly("theta", &WaveplateParams::theta)
      .def("phase", &WaveplateParams::phase, py::arg("omega_ev"));

  m.def("mo_waveplate_defaults", &mo_waveplate_defaults, py::arg("theta_rad") = 0.0);
  m.def("zo_waveplate_defaults", &zo_waveplate_defaults, py::arg("theta_rad") = 0.0);
  m.def("reanchored", &reanchored, py::arg("params"), py::arg("omega_c_ev"));

  py::class_<LorentzParams>(m, "LorentzParams")
      .def(py::init([](double strength, double omega_res, double t2) {
             LorentzParams p{strength, {omega_res}, t2};
             p.validate();
             return p;
           }),
           py::arg("strength_ev"), py::arg("omega_res_ev"), py::arg("t2_ev_inv"))
      .def_readonly("strength", &LorentzParams::strength)
      .def_property_readonly("omega_res_ev",
                             [](const LorentzParams& p) { return p.omega_res.value; })
      .def_readonly("t2", &LorentzParams::t2);

  py::class_<FilterParams>(m, "FilterParams")
      .def(py::init([](double a, double b, double c, double d) {
             FilterParams p{a, {b}, {c}, d};
             p.validate();
             return p;
           }),
           py::arg("a") = 0.95, py::arg("b_ev") = 1.5307, py::arg("c_ev") = 0.01007,
           py::arg("d") = 0.001)
      .def_readonly("a", &FilterParams::a)
      .def_readonly("d", &FilterParams::d)
      .def_property_readonly("b_ev", [](const FilterParams& p) { return p.b.value; })
      .def_property_readonly("c_ev", [](const FilterParams& p) { return p.c.value; })
      .def("fwhm_half_width", &FilterParams::fwhm_half_width);

  m.def("waveplate_pbs",
        [](double w, const WaveplateParams& p) { return waveplate_pbs({w}, p); },
        py::arg("omega_ev"), py::arg("params"));
  m.def("loss_perfect_hwp", &loss_perfect_hwp, py::arg("theta_rad"));
  m.def("birefringent_phase", &birefringent_phase, py::arg("length_um"), py::arg("delta_n"),
        py::arg("lambda_nm"));
  m.def("lorentz_transmission",
        [](double w, const LorentzParams& p) { return lorentz_transmission({w}, p); },
        py::arg("omega_ev"), py::arg("params"));
  m.def("supergaussian",
        [](double w, const FilterParams& p) { return supergaussian({w}, p); },
        py::arg("omega_ev"), py::arg("params"));

  py::class_<TransmissionFn>(m, "TransmissionFn")
      .def("__call__", [](const TransmissionFn& t, double w) { return t(w); },
           py::arg("omega_ev"));

  m.def("identity_transmission", &identity_transmission);
  m.def("waveplate_pbs_fn", &waveplate_pbs_fn, py::arg("params"));
  m.def("linear_phase_fn", &linear_phase_fn, py::arg("alpha_ev_inv"), py::arg("beta_rad"));
  m.def("lorentz_fn", &lorentz_fn, py::arg("params"));
  m.def("supergaussian_fn", &supergaussian_fn, py::arg("params"));
  m.def("compose", &compose, py::arg("t1"), py::arg("t2"));
  m.def("tabulated", &tabulated, py::arg("points"));
  m.def("load_tabulated_csv", &load_tabulated_csv, py::arg("path"));

  py::class_<GridAxis>(m, "GridAxis")
      .def_readonly("center", &GridAxis::center)
      .def_readonly("half_width", &GridAxis::half_width)
      .def_readonly("count", &GridAxis::count);
  py::class_<FreqGrid2D>(m, "FreqGrid2D")
      .def_readonly("plus_axis", &FreqGrid2D::plus_axis)
      .def_readonly("minus_axis", &FreqGrid2D::minus_axis);
  m.def("default_grid", &default_grid, py::arg("params"), py::arg("n_plus") = 129,
        py::arg("n_minus") = 513);

  py::enum_<Normalization>(m, "Normalization")
      .value("raw", Normalization::raw)
      .value("unit_baseline", Normalization::unit_baseline);

  py::class_<EngineConfig>(m, "EngineConfig")
      .def_static("defaults", &EngineConfig::defaults, py::arg("params"))
      .def_readwrite("grid", &EngineConfig::grid)
      .def_readwrite("cw_limit", &EngineConfig::cw_limit)
      .def_readwrite("normalization", &EngineConfig::normalization)
      .def("set_filter",
           [](EngineConfig& cfg, const TransmissionFn& f) { cfg.filter = f; })
      .def("clear_filter", [](EngineConfig& cfg) { cfg.filter.reset(); });

  py::class_<BackgroundModel>(m, "BackgroundModel")
      .def(py::init([](double s, double i0, double window, double tbar) {
             BackgroundModel bg{s, i0, window, tbar};
             bg.validate();
             return bg;
           }),
           py::arg("singles_signal"), py::arg("singles_idler_nosample"),
           py::arg("window") = 1.0, py::arg("mean_transmission") = 1.0)
      .def_readwrite("singles_signal", &BackgroundModel::singles_signal)
      .def_readwrite("singles_idler_nosample", &BackgroundModel::singles_idler_nosample)
      .def_readwrite("window", &BackgroundModel::window)
      .def_readwrite("mean_transmission", &BackgroundModel::mean_transmission);

  m.def("accidental_rate", &accidental_rate, py::arg("background"));
  m.def("calibrate_background", &calibrate_background, py::arg("target_visibility"),
        py::arg("baseline_a0"), py::arg("window") = 1.0,
        py::arg("singles_ratio") = 1.0 / 3.0);

  py::class_<CoincidenceKernel>(m, "CoincidenceKernel")
      .def(py::init<const JsaParams&, const TransmissionFn&, const EngineConfig&>(),
           py::arg("jsa"), py::arg("sample"), py::arg("config"))
      .def("rate", [](const CoincidenceKernel& k, double tau) { return k.rate(tau); },
           py::arg("tau_ev_inv"))
      .def("baseline", &CoincidenceKernel::baseline)
      .def("max_safe_tau", &CoincidenceKernel::max_safe_tau);

  m.def("coincidence_numeric",
        [](double tau, const JsaParams& p, const TransmissionFn& sample,
           const EngineConfig& cfg) { return coincidence_numeric({tau}, p, sample, cfg); },
        py::arg("tau_ev_inv"), py::arg("jsa"), py::arg("sample"), py::arg("config"));
  m.def("coincidence_closed_form",
        [](double tau, const JsaParams& p, const WaveplateParams& wp) {
          return coincidence_closed_form({tau}, p, wp);
        },
        py::arg("tau_ev_inv"), py::arg("jsa"), py::arg("waveplate"));
  m.def("closed_form_baseline", &closed_form_baseline, py::arg("jsa"), py::arg("waveplate"));

  py::class_<DipTrace>(m, "DipTrace")
      .def_readonly("taus", &DipTrace::taus)
      .def_readonly("rates", &DipTrace::rates)
      .def_readonly("baseline", &DipTrace::baseline)
      .def_readonly("background", &DipTrace::background)
      .def_readonly("normalized", &DipTrace::normalized);

  m.def("trace",
        [](const JsaParams& p, const TransmissionFn& sample, const EngineConfig& cfg,
           const std::vector<double>& taus, std::optional<BackgroundModel> bg) {
          return trace(p, sample, cfg, taus, bg);
        },
        py::arg("jsa"), py::arg("sample"), py::arg("config"), py::arg("taus_ev_inv"),
        py::arg("background") = std::nullopt);
  m.def("with_baseline_wings", &with_baseline_wings, py::arg("taus_ev_inv"), py::arg("jsa"));
  m.def("baseline_tau_threshold", &baseline_tau_threshold, py::arg("jsa"));

  py::class_<DipPositionResult>(m, "DipPositionResult")
      .def_readonly("tau", &DipPositionResult::tau)
      .def_readonly("refined_min", &DipPositionResult::refined_min)
      .def_readonly("band_fit_used", &DipPositionResult::band_fit_used);
  py::class_<DipMetrics>(m, "DipMetrics")
      .def_readonly("visibility", &DipMetrics::visibility)
      .def_readonly("dip_position", &DipMetrics::dip_position)
      .def_readonly("dip_depth", &DipMetrics::dip_depth)
      .def_readonly("asymmetry", &DipMetrics::asymmetry)
      .def_readonly("baseline", &DipMetrics::baseline);

  m.def("dip_position", &dip_position, py::arg("trace"), py::arg("band_fraction") = 0.2);
  m.def("visibility", &visibility, py::arg("trace"));
  m.def("dip_shift", &dip_shift, py::arg("sample_trace"), py::arg("reference_trace"));
  m.def("asymmetry", &asymmetry, py::arg("trace"));
  m.def("dip_metrics", &dip_metrics, py::arg("trace"));

  py::class_<LorentzFitResult>(m, "LorentzFitResult")
      .def_readonly("params", &LorentzFitResult::params)
      .def_readonly("residual", &LorentzFitResult::residual)
      .def_readonly("converged", &LorentzFitResult::converged)
      .def_readonly("iterations", &LorentzFitResult::iterations)
      .def_readonly("objective_trace", &LorentzFitResult::objective_trace);

  m.def("fit_lorentz",
        [](const std::vector<std::pair<double, double>>& samples,
           std::optional<double> omega_fixed, std::optional<LorentzParams> init) {
          std::optional<EnergyEv> fixed;
          if (omega_fixed) fixed = EnergyEv{*omega_fixed};
          return fit_lorentz(samples, fixed, init);
        },
        py::arg("samples"), py::arg("omega_fixed_ev") = 1.5344578999876238,
        py::arg("init") = std::nullopt);

  py::class_<T2LossRow>(m, "T2LossRow")
      .def_readonly("theta", &T2LossRow::theta)
      .def_readonly("loss", &T2LossRow::loss)
      .def_readonly("strength", &T2LossRow::strength)
      .def_readonly("t2", &T2LossRow::t2)
      .def_readonly("residual", &T2LossRow::residual)
      .def_readonly("converged", &T2LossRow::converged);

  m.def("t2_vs_loss",
        [](const std::vector<double>& thetas_rad, const WaveplateParams& wp,
           std::pair<double, double> band, int n_samples, double omega_res) {
          return t2_vs_loss(thetas_rad, wp, {{band.first}, {band.second}}, n_samples,
                            {omega_res});
        },
        py::arg("thetas_rad"), py::arg("waveplate"), py::arg("band_ev"),
        py::arg("n_samples") = 51, py::arg("omega_res_ev") = 1.5344578999876238);
}
