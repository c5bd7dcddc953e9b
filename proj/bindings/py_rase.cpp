#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rase/analysis.hpp"
#include "rase/cli_commands.hpp"
#include "rase/config.hpp"
#include "rase/errors.hpp"
#include "rase/estimators.hpp"
#include "rase/model.hpp"
#include "rase/record_io.hpp"
#include "rase/synth.hpp"
#include "rase/version.hpp"

namespace py = pybind11;
using namespace rase;

namespace {

py::array_t<std::complex<double>> trace_array(const ShotRecord& rec) {
  py::array_t<std::complex<double>> out(static_cast<py::ssize_t>(rec.trace.size()));
  std::copy(rec.trace.begin(), rec.trace.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gaussian-model simulator and estimators for rephased-ASE experiments";
  m.attr("__version__") = kToolVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataFormatError>(m, "DataFormatError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  // Gaussian core ------------------------------------------------------
  py::class_<GaussianState>(m, "GaussianState")
      .def_property_readonly("mean", &GaussianState::mean)
      .def_property_readonly("cov", &GaussianState::cov)
      .def_property_readonly("mode_labels", &GaussianState::mode_labels)
      .def_property_readonly("num_modes", &GaussianState::num_modes)
      .def("cov_entry", &GaussianState::cov_entry, py::arg("mode_i"), py::arg("comp_i"),
           py::arg("mode_j"), py::arg("comp_j"))
      .def("check_valid", &GaussianState::check_valid);

  m.def(
      "vacuum", [](int n) { return GaussianState::vacuum(n); }, py::arg("n_modes"));
  m.def(
      "two_mode_squeeze",
      [](const GaussianState& st, double r, int a, int b) {
        return two_mode_squeeze(st, SqueezeParams(r, a, b));
      },
      py::arg("state"), py::arg("r"), py::arg("mode_a") = 0, py::arg("mode_b") = 1);
  m.def(
      "apply_loss",
      [](const GaussianState& st, double t, int mode) {
        return apply_loss(st, LossChannel(t, mode));
      },
      py::arg("state"), py::arg("transmission"), py::arg("mode"));
  m.def(
      "quadrature_stats",
      [](const GaussianState& st, int mode) {
        const QuadratureStats s = quadrature_stats(st, mode);
        return py::make_tuple(s.var_x, s.var_p, s.cov_xp);
      },
      py::arg("state"), py::arg("mode"));
  m.def("symplectic_eigenvalues", &symplectic_eigenvalues, py::arg("state"));
  m.def("squeeze_for_gain", &squeeze_for_gain, py::arg("alpha_l"));

  // Analytic model -----------------------------------------------------
  py::class_<GainFeature>(m, "GainFeature")
      .def(py::init<double, double, double, double>(), py::arg("alpha_l"),
           py::arg("transmission_l"), py::arg("reph_transmission") = 1.0,
           py::arg("linewidth_hz") = 200e3)
      .def_readonly("alpha_l", &GainFeature::alpha_l)
      .def_readonly("transmission_l", &GainFeature::transmission_l)
      .def_readonly("reph_transmission", &GainFeature::reph_transmission)
      .def_readonly("linewidth_hz", &GainFeature::linewidth_hz);

  py::enum_<DecayScaling::Kind>(m, "DecayKind")
      .value("INTENSITY", DecayScaling::Kind::Intensity)
      .value("AMPLITUDE", DecayScaling::Kind::Amplitude);

  py::class_<DecayScaling>(m, "DecayScaling")
      .def(py::init<double, double, double, DecayScaling::Kind>(), py::arg("tau_us"),
           py::arg("t_ref_us"), py::arg("t_target_us"),
           py::arg("kind") = DecayScaling::Kind::Intensity)
      .def_readonly("tau_us", &DecayScaling::tau_us)
      .def_readonly("t_ref_us", &DecayScaling::t_ref_us)
      .def_readonly("t_target_us", &DecayScaling::t_target_us);

  m.def("ase_variance", &ase_variance, py::arg("gain"));
  m.def(
      "ase_variance",
      [](double alpha, double l) { return ase_variance(GainFeature(alpha, l)); },
      py::arg("alpha_l"), py::arg("transmission_l"));
  m.def("rase_efficiency", &rase_efficiency, py::arg("alpha_l"));
  m.def("rase_efficiency_defined", &rase_efficiency_defined, py::arg("alpha_l"));
  m.def("scale_efficiency", &scale_efficiency, py::arg("eta"), py::arg("decay"));
  m.def("lossy_tmsv_state", &lossy_tmsv_state, py::arg("gain"));
  m.def(
      "insep_curve",
      [](const GainFeature& g, const std::vector<double>& grid) {
        py::array_t<double> out({static_cast<py::ssize_t>(grid.size()), py::ssize_t{2}});
        auto view = out.mutable_unchecked<2>();
        const auto curve = insep_curve(g, grid);
        for (py::ssize_t i = 0; i < view.shape(0); ++i) {
          view(i, 0) = curve[static_cast<std::size_t>(i)].b;
          view(i, 1) = curve[static_cast<std::size_t>(i)].total_variance;
        }
        return out;
      },
      py::arg("gain"), py::arg("b_grid"));
  m.def(
      "find_min_b",
      [](const GainFeature& g) {
        const InsepPoint pt = find_min_b(g);
        return py::make_tuple(pt.b, pt.total_variance);
      },
      py::arg("gain"));
  m.def("fit_reph_to_minimum", &fit_reph_to_minimum, py::arg("alpha_l"),
        py::arg("transmission_l"), py::arg("target_min"));

  // Shot synthesis -----------------------------------------------------
  py::enum_<SequenceKind>(m, "SequenceKind")
      .value("RASE", SequenceKind::Rase)
      .value("I4LE", SequenceKind::I4le);

  py::enum_<FieldKind>(m, "FieldKind")
      .value("ASE", FieldKind::Ase)
      .value("RASE", FieldKind::Rase);

  py::enum_<WindowFn>(m, "WindowFn")
      .value("RECT", WindowFn::Rect)
      .value("HANN", WindowFn::Hann);

  py::class_<SequenceConfig>(m, "SequenceConfig")
      .def(py::init<>())
      .def_readwrite("kind", &SequenceConfig::kind)
      .def_readwrite("gain", &SequenceConfig::gain)
      .def_readwrite("ase_window_us", &SequenceConfig::ase_window_us)
      .def_readwrite("rase_window_us", &SequenceConfig::rase_window_us)
      .def_readwrite("tau_s_us", &SequenceConfig::tau_s_us)
      .def_readwrite("pi1_len_us", &SequenceConfig::pi1_len_us)
      .def_readwrite("pi2_len_us", &SequenceConfig::pi2_len_us)
      .def_readwrite("ase_if_hz", &SequenceConfig::ase_if_hz)
      .def_readwrite("rase_if_hz", &SequenceConfig::rase_if_hz)
      .def_readwrite("sample_rate_hz", &SequenceConfig::sample_rate_hz)
      .def_readwrite("n_shots", &SequenceConfig::n_shots)
      .def_readwrite("rng_seed", &SequenceConfig::rng_seed)
      .def("validate", &SequenceConfig::validate);

  py::class_<NoiseModel>(m, "NoiseModel")
      .def(py::init<>())
      .def_readwrite("vacuum_psd", &NoiseModel::vacuum_psd)
      .def_readwrite("excess_noise", &NoiseModel::excess_noise)
      .def_readwrite("visibility", &NoiseModel::visibility)
      .def_readwrite("visibility_separate", &NoiseModel::visibility_separate);

  py::class_<ShotTruth>(m, "ShotTruth")
      .def_readonly("interferometer_phase_rad", &ShotTruth::interferometer_phase_rad)
      .def_readonly("rng_stream_id", &ShotTruth::rng_stream_id);

  py::class_<ShotRecord>(m, "ShotRecord")
      .def_readonly("shot_id", &ShotRecord::shot_id)
      .def_readonly("truth", &ShotRecord::truth)
      .def_property_readonly("trace", &trace_array);

  m.def("synthesize_shot", &synthesize_shot, py::arg("cfg"), py::arg("noise"),
        py::arg("shot_id"));
  m.def("synthesize_shot_at_phase", &synthesize_shot_at_phase, py::arg("cfg"),
        py::arg("noise"), py::arg("shot_id"), py::arg("phase_rad"));
  m.def("synthesize_run", &synthesize_run, py::arg("cfg"), py::arg("noise"),
        py::arg("n_threads") = 1, py::call_guard<py::gil_scoped_release>());

  // Estimators ---------------------------------------------------------
  py::class_<SpectralWindow>(m, "SpectralWindow")
      .def(py::init<>())
      .def_readwrite("center_hz", &SpectralWindow::center_hz)
      .def_readwrite("span_hz", &SpectralWindow::span_hz)
      .def_readwrite("time_window_us", &SpectralWindow::time_window_us)
      .def_readwrite("start_offset_us", &SpectralWindow::start_offset_us)
      .def_readwrite("window_function", &SpectralWindow::window_function);

  py::class_<QuadraturePair>(m, "QuadraturePair")
      .def_readonly("field", &QuadraturePair::field)
      .def_readonly("x", &QuadraturePair::x)
      .def_readonly("p", &QuadraturePair::p)
      .def_readonly("shot_id", &QuadraturePair::shot_id);

  py::class_<PhaseEstimate>(m, "PhaseEstimate")
      .def_readonly("phase_rad", &PhaseEstimate::phase_rad)
      .def_readonly("ref_power", &PhaseEstimate::ref_power)
      .def_readonly("low_confidence", &PhaseEstimate::low_confidence);

  py::class_<VarianceEstimate>(m, "VarianceEstimate")
      .def_readonly("mean_var", &VarianceEstimate::mean_var)
      .def_readonly("se", &VarianceEstimate::se)
      .def_readonly("n_shots", &VarianceEstimate::n_shots);

  py::class_<EfficiencyEstimate>(m, "EfficiencyEstimate")
      .def_readonly("eta", &EfficiencyEstimate::eta)
      .def_readonly("se", &EfficiencyEstimate::se);

  py::class_<VacuumNormalization>(m, "VacuumNormalization")
      .def(py::init<>())
      .def_readwrite("ase_scale", &VacuumNormalization::ase_scale)
      .def_readwrite("rase_scale", &VacuumNormalization::rase_scale);

  m.def("estimate_phase", &estimate_phase, py::arg("record"), py::arg("cfg"),
        py::arg("noise"));
  m.def("extract_quadratures", &extract_quadratures, py::arg("record"), py::arg("cfg"),
        py::arg("noise"), py::arg("field"), py::arg("window"), py::arg("phase_rad"),
        py::arg("norm") = VacuumNormalization{});
  m.def("default_window", &default_window, py::arg("cfg"), py::arg("field"));
  m.def(
      "variance_of",
      [](const std::vector<QuadraturePair>& pairs) { return variance_of(pairs); },
      py::arg("pairs"));
  m.def("efficiency_from_runs", &efficiency_from_runs, py::arg("ase"), py::arg("rase"));

  // Analysis -----------------------------------------------------------
  py::class_<InsepEstimate>(m, "InsepEstimate")
      .def_readonly("b", &InsepEstimate::b)
      .def_readonly("total_variance", &InsepEstimate::total_variance)
      .def_readonly("se", &InsepEstimate::se)
      .def_readonly("sigma_violation", &InsepEstimate::sigma_violation);

  py::class_<AnalysisOptions>(m, "AnalysisOptions")
      .def(py::init<>())
      .def_readwrite("window_us", &AnalysisOptions::window_us)
      .def_readwrite("window_function", &AnalysisOptions::window_function)
      .def_readwrite("span_hz", &AnalysisOptions::span_hz)
      .def_readwrite("b_grid_step", &AnalysisOptions::b_grid_step)
      .def_readwrite("bootstrap", &AnalysisOptions::bootstrap)
      .def_readwrite("bootstrap_resamples", &AnalysisOptions::bootstrap_resamples)
      .def_readwrite("strict_phase", &AnalysisOptions::strict_phase);

  py::class_<RunAnalysis>(m, "RunAnalysis")
      .def_readonly("ase_pairs", &RunAnalysis::ase_pairs)
      .def_readonly("rase_pairs", &RunAnalysis::rase_pairs)
      .def_readonly("ase_var", &RunAnalysis::ase_var)
      .def_readonly("rase_var", &RunAnalysis::rase_var)
      .def_readonly("efficiency", &RunAnalysis::efficiency)
      .def_readonly("insep_curve", &RunAnalysis::insep_curve)
      .def_readonly("insep_min", &RunAnalysis::insep_min)
      .def_readonly("i4le_area_ratio", &RunAnalysis::i4le_area_ratio);

  m.def(
      "analyze_records",
      [](const std::vector<ShotRecord>& records, const SequenceConfig& cfg,
         const NoiseModel& noise, const AnalysisOptions& opts) {
        return analyze_records(records, cfg, noise, opts);
      },
      py::arg("records"), py::arg("cfg"), py::arg("noise"),
      py::arg("options") = AnalysisOptions{}, py::call_guard<py::gil_scoped_release>());

  m.def(
      "estimate_inseparability",
      [](const std::vector<QuadraturePair>& a, const std::vector<QuadraturePair>& r,
         const std::vector<double>& grid) { return estimate_inseparability(a, r, grid); },
      py::arg("pairs_ase"), py::arg("pairs_rase"), py::arg("b_grid"));

  m.def(
      "fit_loss",
      [](const std::vector<std::tuple<double, double, double>>& pts) {
        std::vector<VariancePoint> points;
        points.reserve(pts.size());
        for (const auto& [a, v, se] : pts) points.push_back(VariancePoint{a, v, se});
        const LossFit fit = fit_loss(points);
        return py::make_tuple(fit.transmission_l, fit.se);
      },
      py::arg("points"), "points: list of (alpha_l, variance, se); se = 0 for unweighted");
  m.def("invert_ase_for_alpha", &invert_ase_for_alpha, py::arg("ase_variance"),
        py::arg("transmission_l"));

  // Config and run dumps ------------------------------------------------
  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_static("paper_defaults", &ExperimentConfig::paper_defaults)
      .def_readwrite("sequence", &ExperimentConfig::sequence)
      .def_readwrite("noise", &ExperimentConfig::noise)
      .def_readwrite("decay", &ExperimentConfig::decay)
      .def_readwrite("analysis", &ExperimentConfig::analysis)
      .def_readwrite("background_shots", &ExperimentConfig::background_shots)
      .def_readwrite("out_dir", &ExperimentConfig::out_dir)
      .def("validate", &ExperimentConfig::validate);

  m.def("parse_config_text", &parse_config_text, py::arg("text"));
  m.def("config_to_text", &config_to_text, py::arg("cfg"));
  m.def("parse_config_json", &parse_config_json, py::arg("json_text"));
  m.def("config_to_json", &config_to_json, py::arg("cfg"));
  m.def("load_config_file", &load_config_file, py::arg("path"));
  m.def("config_hash", &config_hash, py::arg("cfg"));

  m.def(
      "write_dump",
      [](const std::string& path, const ExperimentConfig& cfg,
         const std::vector<ShotRecord>& records) {
        RunDump dump;
        dump.header_json = config_to_json(cfg);
        dump.records = records;
        write_dump_file(path, dump);
      },
      py::arg("path"), py::arg("cfg"), py::arg("records"));
  m.def(
      "read_dump",
      [](const std::string& path) {
        RunDump dump = read_dump_file(path);
        return py::make_tuple(parse_config_json(dump.header_json), dump.records);
      },
      py::arg("path"));
}
