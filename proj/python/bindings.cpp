#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "otfs/io.hpp"
#include "otfs/psd_estimate.hpp"
#include "otfs/scenario.hpp"

namespace py = pybind11;
using namespace otfs;

namespace {

using ComplexArray = py::array_t<cd, py::array::c_style | py::array::forcecast>;
using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Modulation parse_modulation(const std::string& s) {
    if (s == "otfs") return Modulation::OTFS;
    if (s == "ofdm") return Modulation::OFDM;
    throw ConfigError("unknown modulation '" + s + "' (expected otfs or ofdm)");
}

InterpolationFilterSpec make_filter(const std::string& kind, int order, double T_s) {
    InterpolationFilterSpec f{InterpolationFilterSpec::parse_kind(kind), order, T_s};
    if (f.kind != FilterKind::TruncatedSinc) f.order = 0;
    f.validate();
    return f;
}

CVector to_vector(const ComplexArray& a) {
    return CVector(a.data(), a.data() + a.size());
}

py::array_t<cd> to_array(const CVector& v) {
    return py::array_t<cd>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::array_t<double> to_array(const std::vector<double>& v) {
    return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::tuple curve_tuple(const PsdCurve& c) {
    return py::make_tuple(to_array(c.freqs), to_array(c.values));
}

PsdCurve curve_from(const RealArray& f, const RealArray& v) {
    PsdCurve c{std::vector<double>(f.data(), f.data() + f.size()), std::vector<double>(v.data(), v.data() + v.size())};
    c.validate();
    return c;
}

py::dict metrics_dict(const std::vector<io::MetricRecord>& m) {
    py::dict d;
    for (const auto& r : m) d[py::str(r.metric)] = r.value;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "OTFS/OFDM modulation, DAC reconstruction, PSD analysis and null-space precoding";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    auto input = py::register_exception<InputError>(m, "InputError", base.ptr());
    py::register_exception<IndexError>(m, "IndexError", input.ptr());
    py::register_exception<FeasibilityError>(m, "FeasibilityError", base.ptr());

    m.def("dft_matrix", &dft_matrix, py::arg("n"));

    m.def("modulate",
          [](const Eigen::MatrixXcd& x, const std::string& kind, double T_s) {
              return to_array(modulate(parse_modulation(kind), DelayDopplerGrid(x), T_s).samples);
          },
          py::arg("grid"), py::arg("kind") = "otfs", py::arg("T_s") = 1.0,
          "Baseband samples of one frame for an M x N symbol grid.");

    m.def("cep_component",
          [](const Eigen::MatrixXcd& x, int l, double T_s) {
              return to_array(cep_ofdm_component(DelayDopplerGrid(x), l, T_s).samples);
          },
          py::arg("grid"), py::arg("l"), py::arg("T_s") = 1.0);

    m.def("random_stream",
          [](const Eigen::MatrixXd& sigma2, std::size_t frames, std::uint64_t seed, const std::string& constellation,
             const std::string& kind) {
              const auto s = generate_random_stream(VarianceProfile(sigma2), Constellation::parse(constellation), frames,
                                                    seed, 1.0, parse_modulation(kind));
              return to_array(s.concatenated());
          },
          py::arg("sigma2"), py::arg("frames"), py::arg("seed"), py::arg("constellation") = "qpsk",
          py::arg("kind") = "otfs", "Frames of random symbols laid end to end.");

    m.def("reconstruct",
          [](const ComplexArray& x, const std::string& filter, int oversample, int order, double T_s) {
              const auto f = make_filter(filter, order, T_s);
              validate_reconstruction(f, oversample);
              const auto v = to_vector(x);
              const auto sig = reconstruct(std::span<const cd>(v), f, oversample);
              return py::make_tuple(to_array(sig.samples), sig.sample_rate, sig.origin_time);
          },
          py::arg("samples"), py::arg("filter"), py::arg("oversample") = 1, py::arg("order") = 50, py::arg("T_s") = 1.0,
          "Returns (dense samples, sample rate, time of first sample).");

    m.def("filter_response_sq",
          [](const std::string& filter, const RealArray& f, int order, double T_s) {
              const auto spec = make_filter(filter, order, T_s);
              std::vector<double> out(static_cast<std::size_t>(f.size()));
              for (std::size_t i = 0; i < out.size(); ++i) out[i] = filter_response_sq(spec, f.data()[i]);
              return to_array(out);
          },
          py::arg("filter"), py::arg("freqs"), py::arg("order") = 50, py::arg("T_s") = 1.0);

    m.def("analytic_psd",
          [](const Eigen::MatrixXd& sigma2, const RealArray& freqs, const std::string& kind, const std::string& filter,
             int order, double T_s) {
              const auto f = make_filter(filter, order, T_s);
              const std::span<const double> fr(freqs.data(), static_cast<std::size_t>(freqs.size()));
              return to_array(analytic_psd(parse_modulation(kind), VarianceProfile(sigma2), f, fr).values);
          },
          py::arg("sigma2"), py::arg("freqs"), py::arg("kind") = "otfs", py::arg("filter") = "dirac",
          py::arg("order") = 50, py::arg("T_s") = 1.0);

    m.def("cep_psd",
          [](const Eigen::MatrixXd& sigma2, int l, const RealArray& freqs, const std::string& filter, int order,
             double T_s) {
              const auto f = make_filter(filter, order, T_s);
              const std::span<const double> fr(freqs.data(), static_cast<std::size_t>(freqs.size()));
              return to_array(cep_ofdm_psd(VarianceProfile(sigma2), l, f, fr).values);
          },
          py::arg("sigma2"), py::arg("l"), py::arg("freqs"), py::arg("filter") = "dirac", py::arg("order") = 50,
          py::arg("T_s") = 1.0);

    m.def("periodogram",
          [](const ComplexArray& x, double rate, int segment_len) {
              const auto v = to_vector(x);
              return curve_tuple(periodogram(std::span<const cd>(v), rate, segment_len));
          },
          py::arg("samples"), py::arg("sample_rate"), py::arg("segment_len"),
          "Averaged periodogram; returns (freqs, psd).");

    m.def("compare",
          [](const RealArray& ef, const RealArray& ev, const RealArray& rf, const RealArray& rv, double lo, double hi) {
              const auto c = compare_normalized(curve_from(ef, ev), curve_from(rf, rv), lo, hi);
              return py::make_tuple(c.nmse_db, c.cosine);
          },
          py::arg("est_freqs"), py::arg("est_values"), py::arg("ref_freqs"), py::arg("ref_values"), py::arg("lo"),
          py::arg("hi"), "Peak-normalized (nmse_db, cosine) over lo <= f < hi.");

    m.def("discrete_spectrum",
          [](const Eigen::MatrixXcd& x) { return discrete_spectrum_from_grid(DelayDopplerGrid(x)); }, py::arg("grid"));

    m.def("mask_from_pass_bands",
          [](const std::vector<std::pair<double, double>>& bands, int M, int N, double T_s) {
              return mask_from_pass_bands(bands, M, N, T_s).null_bins();
          },
          py::arg("bands_hz"), py::arg("M"), py::arg("N"), py::arg("T_s"), "Null bins outside the pass bands.");

    m.def("precoders",
          [](const std::vector<int>& null_bins, int M, int N, const std::string& form) {
              PrecoderForm pf;
              if (form == "nslp") pf = PrecoderForm::NullSpace;
              else if (form == "systematic") pf = PrecoderForm::Systematic;
              else throw ConfigError("unknown precoder form '" + form + "'");
              return build_precoders(decompose_mask(null_bins, M, N), pf).per_subcarrier;
          },
          py::arg("null_bins"), py::arg("M"), py::arg("N"), py::arg("form") = "nslp",
          "Per-subcarrier precoder matrices P_k (M x |J_k|).");

    m.def("precode",
          [](const std::vector<Eigen::VectorXcd>& payload, const std::vector<int>& null_bins, int M, int N,
             const std::string& form) {
              const auto set = build_precoders(decompose_mask(null_bins, M, N),
                                               form == "systematic" ? PrecoderForm::Systematic : PrecoderForm::NullSpace);
              return precode_grid(payload, set).matrix();
          },
          py::arg("payload"), py::arg("null_bins"), py::arg("M"), py::arg("N"), py::arg("form") = "nslp");

    m.def("preset_names", &preset_names);
    m.def("preset_config", [](const std::string& name) { return preset_config(name).dump(); }, py::arg("name"),
          "Preset scenario as JSON text.");

    m.def("run_scenario",
          [](const std::string& config_json, const std::filesystem::path& out_dir) {
              nlohmann::json j;
              try {
                  j = nlohmann::json::parse(config_json);
              } catch (const nlohmann::json::exception& e) {
                  throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
              }
              ScenarioResult r;
              {
                  py::gil_scoped_release release;
                  r = run_scenario(parse_config(j), out_dir);
              }
              return metrics_dict(r.metrics);
          },
          py::arg("config_json"), py::arg("out_dir"), "Runs a scenario and returns its metrics.");
}
