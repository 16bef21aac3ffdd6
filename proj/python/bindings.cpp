#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mfwidth/audio.hpp"
#include "mfwidth/classify.hpp"
#include "mfwidth/error.hpp"
#include "mfwidth/mfdfa.hpp"
#include "mfwidth/synth.hpp"

namespace py = pybind11;
using namespace mfwidth;

namespace {

std::vector<double> to_vector(const Signal& s) {
  return {s.samples().begin(), s.samples().end()};
}

}  // namespace

PYBIND11_MODULE(_mfwidth, m) {
  m.doc() = "Multifractal detrended fluctuation analysis and spectral-width tools";

  py::register_exception<Error>(m, "MfwidthError", PyExc_ValueError);

  py::enum_<Segmentation>(m, "Segmentation")
      .value("FORWARD_ONLY", Segmentation::ForwardOnly)
      .value("BOTH_ENDS", Segmentation::BothEnds);

  py::class_<MfdfaConfig>(m, "MfdfaConfig")
      .def(py::init<>())
      .def_readwrite("scales", &MfdfaConfig::scales)
      .def_readwrite("q_grid", &MfdfaConfig::q_grid)
      .def_readwrite("detrend_order", &MfdfaConfig::detrend_order)
      .def_readwrite("segmentation", &MfdfaConfig::segmentation)
      .def_readwrite("variance_floor", &MfdfaConfig::variance_floor)
      .def_readwrite("fit_min_f", &MfdfaConfig::fit_min_f)
      .def_readwrite("workers", &MfdfaConfig::workers)
      .def_static("defaults_for", &MfdfaConfig::defaults_for, py::arg("n"))
      .def("validate", &MfdfaConfig::validate, py::arg("n"));

  py::class_<FluctuationSurface>(m, "FluctuationSurface")
      .def_readonly("scales", &FluctuationSurface::scales)
      .def_readonly("q_grid", &FluctuationSurface::q_grid)
      .def_readonly("values", &FluctuationSurface::values)
      .def_readonly("segment_counts", &FluctuationSurface::segment_counts)
      .def_readonly("floored_counts", &FluctuationSurface::floored_counts)
      .def("at", &FluctuationSurface::at, py::arg("qi"), py::arg("si"));

  py::class_<HurstCurve>(m, "HurstCurve")
      .def_readonly("q_grid", &HurstCurve::q_grid)
      .def_readonly("h", &HurstCurve::h)
      .def_readonly("intercepts", &HurstCurve::intercepts)
      .def_readonly("r_squared", &HurstCurve::r_squared);

  py::class_<SpectrumPoints>(m, "SpectrumPoints")
      .def(py::init<>())
      .def_readwrite("q", &SpectrumPoints::q)
      .def_readwrite("alpha", &SpectrumPoints::alpha)
      .def_readwrite("f_alpha", &SpectrumPoints::f_alpha);

  py::class_<SingularitySpectrum>(m, "SingularitySpectrum")
      .def_readonly("alpha", &SingularitySpectrum::alpha)
      .def_readonly("f_alpha", &SingularitySpectrum::f_alpha)
      .def_readonly("alpha0", &SingularitySpectrum::alpha0)
      .def_readonly("coeff_a", &SingularitySpectrum::coeff_a)
      .def_readonly("coeff_b", &SingularitySpectrum::coeff_b)
      .def_readonly("coeff_c", &SingularitySpectrum::coeff_c)
      .def_readonly("alpha1", &SingularitySpectrum::alpha1)
      .def_readonly("alpha2", &SingularitySpectrum::alpha2)
      .def_readonly("width", &SingularitySpectrum::width)
      .def_readonly("degenerate", &SingularitySpectrum::degenerate);

  py::class_<ScalingAnalysis>(m, "ScalingAnalysis")
      .def_readonly("surface", &ScalingAnalysis::surface)
      .def_readonly("hurst", &ScalingAnalysis::hurst)
      .def_property_readonly("tau", [](const ScalingAnalysis& a) { return a.tau.tau; })
      .def_readonly("points", &ScalingAnalysis::points)
      .def_readonly("warnings", &ScalingAnalysis::warnings);

  py::class_<MfdfaResult, ScalingAnalysis>(m, "MfdfaResult")
      .def_readonly("spectrum", &MfdfaResult::spectrum);

  m.def("compute_profile",
        [](std::vector<double> x) { return compute_profile(Signal(std::move(x))).values; },
        py::arg("samples"));
  m.def("segment_bounds",
        [](std::size_t n, std::size_t s, Segmentation mode) {
          std::vector<std::pair<std::size_t, std::size_t>> out;
          for (const auto& r : segment_bounds(n, s, mode)) out.emplace_back(r.begin, r.end);
          return out;
        },
        py::arg("n"), py::arg("scale"), py::arg("mode") = Segmentation::BothEnds);
  m.def("local_fluctuation",
        [](const std::vector<double>& seg, int order) { return local_fluctuation(seg, order); },
        py::arg("segment"), py::arg("order"));
  m.def("qth_order_fluctuation",
        [](const std::vector<double>& v, double q) { return qth_order_fluctuation(v, q); },
        py::arg("variances"), py::arg("q"));
  m.def("log_spaced_scales", &log_spaced_scales, py::arg("lo"), py::arg("hi"), py::arg("count"));
  m.def("linear_grid", &linear_grid, py::arg("lo"), py::arg("hi"), py::arg("count"));
  m.def("default_scales", &default_scales, py::arg("n"));
  m.def("default_q_grid", &default_q_grid);

  m.def("mfdfa_scaling",
        [](std::vector<double> x, const MfdfaConfig& c) { return mfdfa_scaling(Signal(std::move(x)), c); },
        py::arg("samples"), py::arg("config"), py::call_guard<py::gil_scoped_release>());
  m.def("mfdfa",
        [](std::vector<double> x, const MfdfaConfig& c) { return mfdfa(Signal(std::move(x)), c); },
        py::arg("samples"), py::arg("config"), py::call_guard<py::gil_scoped_release>());
  m.def("fit_quadratic_width", &fit_quadratic_width, py::arg("points"), py::arg("min_f") = py::none());
  m.def("shuffle_surrogate",
        [](std::vector<double> x, std::uint64_t seed) {
          return to_vector(shuffle_surrogate(Signal(std::move(x)), seed));
        },
        py::arg("samples"), py::arg("seed"));

  m.def("white_noise", [](std::size_t n, std::uint64_t seed) { return to_vector(synth::white_noise(n, seed)); },
        py::arg("n"), py::arg("seed") = 0);
  m.def("fractional_gaussian_noise",
        [](double hurst, std::size_t n, std::uint64_t seed) {
          return to_vector(synth::fractional_gaussian_noise({hurst, n, seed}));
        },
        py::arg("hurst"), py::arg("n"), py::arg("seed") = 0);
  m.def("binomial_cascade",
        [](int levels, double a, bool random, std::uint64_t seed) {
          synth::CascadeSpec spec;
          spec.levels = levels;
          spec.multiplier = a;
          spec.assignment =
              random ? synth::CascadeAssignment::SeededRandom : synth::CascadeAssignment::LeftHeavy;
          spec.seed = seed;
          return to_vector(synth::binomial_cascade(spec));
        },
        py::arg("levels") = 16, py::arg("a") = 0.75, py::arg("random") = false, py::arg("seed") = 0);
  m.def("cascade_tau", &synth::cascade_tau, py::arg("a"), py::arg("q"));
  m.def("cascade_hurst", &synth::cascade_hurst, py::arg("a"), py::arg("q"));
  m.def("cascade_alpha", &synth::cascade_alpha, py::arg("a"), py::arg("q"));
  m.def("cascade_f_alpha", &synth::cascade_f_alpha, py::arg("a"), py::arg("q"));
  m.def("cascade_asymptotic_width", &synth::cascade_asymptotic_width, py::arg("a"));

  m.def("load_wav",
        [](const std::string& path) {
          auto clip = audio::load_wav(path);
          return py::make_tuple(clip.channels, clip.sample_rate);
        },
        py::arg("path"), "Returns (channels, sample_rate).");
  m.def("prepare_clip",
        [](const std::string& path, double start_s, double duration_s, bool normalize) {
          auto clip = audio::mixdown_mono(audio::load_wav(path));
          if (normalize) clip = audio::normalize_peak(clip);
          return to_vector(audio::extract_segment(clip, start_s, duration_s));
        },
        py::arg("path"), py::arg("start_s") = 0.0, py::arg("duration_s") = 30.0,
        py::arg("normalize") = true, "Mixdown, peak-normalize and cut a mono segment.");

  m.def("cluster_widths",
        [](const std::vector<double>& widths, std::size_t k) {
          std::vector<classify::WidthRecord> records;
          for (double w : widths) records.push_back({"", classify::Mode::Unknown, w});
          const auto c = classify::cluster_widths(records, k);
          return py::make_tuple(c.assignments, c.centroids);
        },
        py::arg("widths"), py::arg("k"), "Returns (assignments, centroids).");
  m.def("assign_mode",
        [](double width) {
          const auto a = classify::assign_mode(width, classify::default_group_ranges());
          std::vector<py::tuple> out;
          for (const auto& c : a.candidates) {
            out.push_back(py::make_tuple(c.group, classify::to_string(c.mode), c.distance));
          }
          return py::make_tuple(out, a.out_of_range);
        },
        py::arg("width"), "Returns ([(group, mode, distance), ...], out_of_range).");
  m.def("confusion_matrix",
        [](const std::vector<std::pair<std::string, std::string>>& pairs) {
          std::vector<classify::Response> rs;
          for (const auto& [t, p] : pairs) {
            rs.push_back({"", "", classify::mode_from_string(t), classify::mode_from_string(p)});
          }
          const auto cm = classify::confusion_matrix(rs);
          return py::make_tuple(cm.counts, cm.percentages);
        },
        py::arg("responses"), "Takes (true_mode, perceived_mode) pairs; returns (counts, percentages).");
  m.def("render_confusion_table",
        [](const std::array<std::array<double, 3>, 3>& pct) {
          return classify::render_confusion_table(classify::ConfusionMatrix::from_percentages(pct));
        },
        py::arg("percentages"));
}
