#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "r2d2/consistency.hpp"
#include "r2d2/diffusion.hpp"
#include "r2d2/errors.hpp"
#include "r2d2/estimation.hpp"
#include "r2d2/image_io.hpp"
#include "r2d2/metrics.hpp"
#include "r2d2/pipeline.hpp"
#include "r2d2/remote_score.hpp"
#include "r2d2/schedule.hpp"
#include "r2d2/score.hpp"

namespace py = pybind11;
using namespace r2d2;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Image to_image(const Array& a) {
  if (a.ndim() != 2) throw DomainError("expected a 2-D array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return Image(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

Array to_array(const Image& x) {
  Array out({static_cast<py::ssize_t>(x.rows()), static_cast<py::ssize_t>(x.cols())});
  std::copy(x.values().begin(), x.values().end(), out.mutable_data());
  return out;
}

const char* clamp_name(InverseTime::Clamp c) {
  switch (c) {
    case InverseTime::Clamp::low: return "low";
    case InverseTime::Clamp::high: return "high";
    default: return "none";
  }
}

py::dict plan_dict(const StepPlan& p) {
  py::dict d;
  d["sigma_est"] = p.sigma_est;
  d["t_prime"] = p.t_prime;
  d["n_prime"] = p.n_prime;
  d["clamp"] = clamp_name(p.clamp);
  d["from_override"] = p.from_override;
  return d;
}

/// Lets Python objects with a `score(x, sigma)` method drive the samplers.
class PyScoreModel : public ScoreModel {
 public:
  ScoreField score(const Image& x, double sigma) const override {
    py::gil_scoped_acquire gil;
    const py::function fn = py::get_override(static_cast<const ScoreModel*>(this), "score");
    if (!fn) throw InternalError("ScoreModel subclass must implement score(x, sigma)");
    return to_image(fn(to_array(x), sigma).cast<Array>());
  }
  bool thread_safe() const noexcept override { return false; }
};

RoiSpec roi_from(py::tuple t) {
  if (t.size() != 3) throw DomainError("ROI must be (row, col, radius)");
  return {t[0].cast<double>(), t[1].cast<double>(), t[2].cast<double>()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Regularized reverse-diffusion denoising and super-resolution.";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<TransportError>(m, "TransportError", PyExc_ConnectionError);

  py::class_<NoiseSchedule>(m, "NoiseSchedule")
      .def(py::init<double, double, int, double>(), py::arg("sigma_min") = 0.01,
           py::arg("sigma_max") = 378.0, py::arg("n_steps") = 1000, py::arg("epsilon") = 1e-5)
      .def_property_readonly("sigma_min", &NoiseSchedule::sigma_min)
      .def_property_readonly("sigma_max", &NoiseSchedule::sigma_max)
      .def_property_readonly("n_steps", &NoiseSchedule::n_steps)
      .def_property_readonly("epsilon", &NoiseSchedule::epsilon)
      .def("sigma_continuous", &NoiseSchedule::sigma_continuous, py::arg("t"))
      .def("sigma_at", &NoiseSchedule::sigma_at, py::arg("i"))
      .def("level", &NoiseSchedule::level, py::arg("i"))
      .def("sigma_inverse", [](const NoiseSchedule& s, double sigma) {
        const InverseTime inv = s.sigma_inverse(sigma);
        return py::make_tuple(inv.t, clamp_name(inv.clamp));
      }, py::arg("sigma"));

  py::class_<ScoreModel, PyScoreModel>(m, "ScoreModel")
      .def(py::init<>())
      .def("score", [](const ScoreModel& s, const Array& x, double sigma) {
        return to_array(s.score(to_image(x), sigma));
      }, py::arg("x"), py::arg("sigma"));

  py::class_<GaussianPriorScore, ScoreModel>(m, "GaussianPriorScore")
      .def(py::init([](const Array& mean, double std) { return GaussianPriorScore(to_image(mean), std); }),
           py::arg("mean"), py::arg("std"));

  py::class_<GmmPriorScore, ScoreModel>(m, "GmmPriorScore")
      .def(py::init([](const std::vector<std::tuple<double, Array, double>>& comps) {
             std::vector<GmmPriorScore::Component> cs;
             for (const auto& [w, mean, std] : comps) cs.push_back({w, to_image(mean), std});
             return GmmPriorScore(std::move(cs));
           }),
           py::arg("components"), "components: list of (weight, mean image, std)");

  py::class_<RemoteScore, ScoreModel>(m, "RemoteScore")
      .def(py::init([](const std::string& address, std::size_t rows, std::size_t cols, double timeout) {
             return RemoteScore::connect(address, rows, cols,
                                         std::chrono::milliseconds(static_cast<long>(timeout * 1000)));
           }),
           py::arg("address"), py::arg("rows"), py::arg("cols"), py::arg("timeout") = 60.0)
      .def_property_readonly("sigma_min", &RemoteScore::advertised_sigma_min)
      .def_property_readonly("sigma_max", &RemoteScore::advertised_sigma_max)
      .def("covers", py::overload_cast<const NoiseSchedule&>(&RemoteScore::covers, py::const_));

  py::class_<DenoiseConfig>(m, "DenoiseConfig")
      .def(py::init<>())
      .def_readwrite("schedule", &DenoiseConfig::schedule)
      .def_readwrite("alpha", &DenoiseConfig::alpha)
      .def_readwrite("lambda_", &DenoiseConfig::lambda)
      .def_readwrite("omega_fraction", &DenoiseConfig::omega_fraction)
      .def_readwrite("sr_factor", &DenoiseConfig::sr_factor)
      .def_readwrite("sr_steps", &DenoiseConfig::sr_steps)
      .def_readwrite("seed", &DenoiseConfig::seed)
      .def_readwrite("sigma_override", &DenoiseConfig::sigma_override)
      .def_readwrite("strict_literal_dc", &DenoiseConfig::strict_literal_dc)
      .def_readwrite("corrector_in_denoise", &DenoiseConfig::corrector_in_denoise)
      .def_readwrite("corrector_in_sr", &DenoiseConfig::corrector_in_sr)
      .def_readwrite("patch_size", &DenoiseConfig::patch_size)
      .def_property("corrector_steps", [](const DenoiseConfig& c) { return c.sampler.corrector_steps; },
                    [](DenoiseConfig& c, int v) { c.sampler.corrector_steps = v; })
      .def_property("corrector_snr", [](const DenoiseConfig& c) { return c.sampler.corrector_snr; },
                    [](DenoiseConfig& c, double v) { c.sampler.corrector_snr = v; })
      .def("validate", &DenoiseConfig::validate);

  m.def("estimate_noise_std", [](const Array& x, int patch_size, int stride) {
    const NoiseEstimate e = estimate_noise_std(to_image(x), patch_size, stride);
    py::dict d;
    d["sigma_est"] = e.sigma_est;
    d["n_patches_used"] = e.n_patches_used;
    d["converged"] = e.converged;
    return d;
  }, py::arg("x"), py::arg("patch_size") = kDefaultPatchSize, py::arg("stride") = 0);

  m.def("plan_steps", [](const Array& x, const DenoiseConfig& cfg) {
    return plan_dict(plan_steps(to_image(x), cfg));
  }, py::arg("x"), py::arg("config"));

  m.def("tweedie_denoise", [](const Array& x, const ScoreModel& model, double sigma) {
    const Image in = to_image(x);
    Image out;
    {
      py::gil_scoped_release nogil;
      out = tweedie_denoise(in, model, sigma);
    }
    return to_array(out);
  }, py::arg("x"), py::arg("model"), py::arg("sigma"));

  m.def("r2d2_plus", [](const Array& x, const ScoreModel& model, const DenoiseConfig& cfg) {
    const Image in = to_image(x);
    R2d2Result res;
    {
      py::gil_scoped_release nogil;
      res = r2d2_plus(in, model, cfg);
    }
    py::dict d;
    d["image"] = to_array(res.image);
    d["plan"] = plan_dict(res.plan);
    d["sanity_exceeded"] = res.sanity_exceeded;
    return d;
  }, py::arg("x"), py::arg("model"), py::arg("config"));

  m.def("r2d2_denoise", [](const Array& x, const ScoreModel& model, const DenoiseConfig& cfg) {
    const Image in = to_image(x);
    Image out;
    {
      py::gil_scoped_release nogil;
      out = r2d2_denoise(in, model, cfg, NoiseSource(cfg.seed));
    }
    return to_array(out);
  }, py::arg("x"), py::arg("model"), py::arg("config"));

  m.def("sr_enhance", [](const Array& x, const ScoreModel& model, const DenoiseConfig& cfg) {
    const Image in = to_image(x);
    Image out;
    {
      py::gil_scoped_release nogil;
      out = sr_enhance(in, model, cfg, NoiseSource(cfg.seed));
    }
    return to_array(out);
  }, py::arg("x"), py::arg("model"), py::arg("config"));

  m.def("posterior_ensemble", [](const Array& x, const ScoreModel& model, const DenoiseConfig& cfg,
                                 int samples) {
    const Image in = to_image(x);
    PosteriorEnsemble ens;
    {
      py::gil_scoped_release nogil;
      ens = posterior_ensemble(in, model, cfg, samples);
    }
    py::dict d;
    py::list list;
    for (const auto& s : ens.samples) list.append(to_array(s));
    d["samples"] = list;
    d["sample_seeds"] = ens.sample_seeds;
    d["mean"] = to_array(ens.mean_map);
    d["std"] = to_array(ens.std_map);
    d["plan"] = plan_dict(ens.plan);
    return d;
  }, py::arg("x"), py::arg("model"), py::arg("config"),
     py::arg("samples") = PosteriorEnsemble::kDefaultSamples);

  m.def("sweep_alpha", [](const Array& x, const ScoreModel& model, const DenoiseConfig& cfg,
                          const std::vector<double>& alphas) {
    const Image in = to_image(x);
    std::vector<SweepEntry> entries;
    {
      py::gil_scoped_release nogil;
      entries = sweep_alpha(in, model, cfg, alphas);
    }
    py::list out;
    for (const auto& e : entries) {
      py::dict d;
      d["alpha"] = e.alpha;
      d["n_prime"] = e.plan.n_prime;
      d["seed"] = e.seed;
      d["image"] = to_array(e.image);
      d["rms_change"] = e.rms_change;
      out.append(d);
    }
    return out;
  }, py::arg("x"), py::arg("model"), py::arg("config"),
     py::arg("alphas") = default_alpha_grid());

  m.def("generate", [](std::size_t rows, std::size_t cols, const ScoreModel& model,
                       const NoiseSchedule& schedule, std::uint64_t seed, int corrector_steps) {
    SamplerSettings settings;
    settings.corrector_steps = corrector_steps;
    Image out;
    {
      py::gil_scoped_release nogil;
      out = generate(rows, cols, model, schedule, settings, NoiseSource(seed));
    }
    return to_array(out);
  }, py::arg("rows"), py::arg("cols"), py::arg("model"), py::arg("schedule") = NoiseSchedule(),
     py::arg("seed") = 0, py::arg("corrector_steps") = 1);

  m.def("lowpass", [](const Array& x, double fraction) {
    const Image in = to_image(x);
    return to_array(lowpass(in, LowFreqMask(in.rows(), in.cols(), fraction)));
  }, py::arg("x"), py::arg("fraction") = LowFreqMask::kDefaultFraction);

  m.def("downup_project", [](const Array& x, int factor) {
    return to_array(downup_project(to_image(x), SrOperator(factor)));
  }, py::arg("x"), py::arg("factor") = DenoiseConfig::kDefaultSrFactor);

  m.def("sr_data_consistency", [](const Array& xp, const Array& x0, int factor, bool strict) {
    return to_array(sr_data_consistency(to_image(xp), to_image(x0), SrOperator(factor), strict));
  }, py::arg("x_prime"), py::arg("x0"), py::arg("factor") = DenoiseConfig::kDefaultSrFactor,
     py::arg("strict_literal") = false);

  m.def("dsm_loss", [](const ScoreModel& model, const NoiseSchedule& schedule, const Array& x0,
                       double t, const Array& z) {
    return dsm_loss(model, schedule, to_image(x0), t, to_image(z));
  }, py::arg("model"), py::arg("schedule"), py::arg("x0"), py::arg("t"), py::arg("z"));

  m.def("snr", [](const Array& x, py::tuple roi) { return snr(to_image(x), roi_from(roi)); },
        py::arg("x"), py::arg("roi"), "roi: (row, col, radius)");
  m.def("cnr", [](const Array& x, py::tuple signal, py::tuple background, bool paired) {
    return cnr(to_image(x), roi_from(signal), roi_from(background),
               paired ? CnrMode::paired : CnrMode::mean_difference);
  }, py::arg("x"), py::arg("signal"), py::arg("background"), py::arg("paired") = false);

  m.def("load_image", [](const std::filesystem::path& p) { return to_array(load_image(p)); },
        py::arg("path"));
  m.def("save_image", [](const Array& x, const std::filesystem::path& p) { save_image(to_image(x), p); },
        py::arg("x"), py::arg("path"));
}
