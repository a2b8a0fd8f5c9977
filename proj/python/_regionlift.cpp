#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "regionlift/cascade.hpp"
#include "regionlift/config.hpp"
#include "regionlift/io.hpp"
#include "regionlift/model_io.hpp"
#include "regionlift/simulate.hpp"

namespace py = pybind11;
using namespace regionlift;

namespace {

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_python(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::list rects_of(const Region& r) {
  py::list out;
  for (const Rect& b : r.rects()) out.append(py::make_tuple(b.x1, b.y1, b.x2, b.y2));
  return out;
}

RunConfig config_of(const py::object& overrides, RunConfig base = {}) {
  if (overrides.is_none()) return base;
  RunConfig c = config_from_json(from_python(overrides), std::move(base));
  validate(c);
  return c;
}

// (x1, y1, x2, y2, score, category) tuples
py::dict support_set(const std::vector<std::tuple<int, int, int, int, double, int>>& boxes, int width, int height,
                     const std::string& orientation, bool include_background, double margin_frac) {
  std::vector<BoundingBox> input;
  for (const auto& [x1, y1, x2, y2, s, c] : boxes) input.push_back({{x1, y1, x2, y2}, s, c});
  const RankedDetections ranked = rank_detections(input, {width, height});
  const SupportSet set =
      build_support_set(ranked, {parse_orientation(orientation), include_background, margin_frac});
  py::list per_box;
  for (const SupportEntry& e : set.per_box) {
    py::dict d;
    d["rank"] = e.index;
    d["input_index"] = ranked.source_index[e.index];
    d["support"] = rects_of(e.support);
    d["support_area"] = e.support.area();
    d["local_background"] = rects_of(e.local_background);
    per_box.append(d);
  }
  py::dict out;
  out["background"] = rects_of(set.background);
  out["background_area"] = set.background.area();
  out["boxes"] = per_box;
  return out;
}

py::array_t<double> llc(const std::vector<double>& x, const RowMatrix& centers, int neighbors, double lambda) {
  Codebook cb;
  cb.centers = centers;
  const std::vector<double> dense = llc_encode(x, cb, {neighbors, lambda}).dense(cb.size());
  return py::array_t<double>(static_cast<py::ssize_t>(dense.size()), dense.data());
}

}  // namespace

PYBIND11_MODULE(_regionlift, m) {
  m.doc() = "Region-classifier rescoring of object detections";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const std::domain_error& e) {
      PyErr_SetString(PyExc_ArithmeticError, e.what());
    }
  });

  m.def("alpha", &alpha, py::arg("x"));
  m.def("rescore_feature_dim", &rescore_feature_dim, py::arg("categories"));
  m.def(
      "spm_dimension",
      [](std::size_t channels, std::size_t codebook_size) {
        return feature_dimension(channels, codebook_size, PyramidConfig{});
      },
      py::arg("channels"), py::arg("codebook_size"));
  m.def(
      "interpolated_ap",
      [](const std::vector<std::pair<double, double>>& curve) {
        std::vector<PrPoint> pts;
        for (const auto& [r, p] : curve) pts.push_back({r, p});
        return interpolated_ap(pts);
      },
      py::arg("curve"), "curve: list of (recall, precision)");
  m.def("support_set", &support_set, py::arg("boxes"), py::arg("width"), py::arg("height"),
        py::arg("orientation") = "higher", py::arg("include_background") = true, py::arg("margin_frac") = 0.5);
  m.def("llc_encode", &llc, py::arg("x"), py::arg("centers"), py::arg("neighbors") = 5, py::arg("lam") = 1e-4);

  py::class_<SvmModel>(m, "SvmModel")
      .def_property_readonly("bias", [](const SvmModel& s) { return s.bias; })
      .def_property_readonly("support_count", [](const SvmModel& s) { return s.dual_coef.size(); })
      .def("score", [](const SvmModel& s, const std::vector<double>& x) { return s.score(x); });
  m.def(
      "train_svm",
      [](const RowMatrix& x, const std::vector<int>& y, const std::string& kernel, double C, double gamma,
         std::uint64_t seed) {
        if (kernel != "linear" && kernel != "rbf") throw std::invalid_argument("kernel must be 'linear' or 'rbf'");
        const KernelSpec spec = kernel == "rbf" ? KernelSpec::rbf(gamma) : KernelSpec::linear();
        SmoParams params;
        params.C = C;
        params.seed = seed;
        return smo_train(x, y, spec, params);
      },
      py::arg("x"), py::arg("y"), py::arg("kernel") = "linear", py::arg("C") = 1.0, py::arg("gamma") = 1.0,
      py::arg("seed") = 0);

  m.def(
      "default_config", [] { return to_python(to_json(RunConfig{})); }, "default run configuration as a dict");
  m.def(
      "simulate",
      [](std::uint64_t seed, const std::filesystem::path& out_dir, int images, int categories, double fp_rate,
         double score_noise, const std::string& prefix) {
        SceneParams p;
        p.images = images;
        p.categories = categories;
        p.fp_rate = fp_rate;
        p.score_noise = score_noise;
        p.id_prefix = prefix;
        write_simulation(simulate(seed, p), out_dir);
      },
      py::arg("seed"), py::arg("out_dir"), py::arg("images") = 200, py::arg("categories") = 3,
      py::arg("fp_rate") = 0.5, py::arg("score_noise") = 0.3, py::arg("prefix") = "img");
  m.def(
      "evaluate",
      [](const std::filesystem::path& annotations, const std::filesystem::path& detections) {
        const AnnotationFile ann = load_annotations(annotations);
        const DetectionFile dets = load_detections(detections, ann);
        return to_python(eval_json(evaluate_dataset(dets.records, ann.objects, ann.categories)));
      },
      py::arg("annotations"), py::arg("detections"));
  m.def(
      "train_model",
      [](const std::filesystem::path& annotations, const std::filesystem::path& model, std::uint64_t seed,
         const py::object& config) {
        ModelBundle bundle;
        bundle.config = config_of(config);
        bundle.config.seed = seed;
        const AnnotationFile ann = load_annotations(annotations);
        const ImageProvider images = disk_images(ann);
        bundle.encoding = train_codebook(ann, images, bundle.config);
        const RegionDataset ds = build_region_dataset(ann, {}, DatasetPolicy::gt_only, seed, bundle.config.support);
        bundle.classifiers = train_region_classifiers(ann, ds, images, *bundle.encoding, bundle.config);
        save_model(bundle, model);
      },
      py::arg("annotations"), py::arg("model"), py::arg("seed"), py::arg("config") = py::none(),
      "codebook plus region classifiers from ground-truth boxes");
  m.def(
      "run",
      [](const std::filesystem::path& annotations, const std::filesystem::path& detections,
         const std::filesystem::path& model, const std::filesystem::path& out_dir, const py::object& config) {
        ModelBundle bundle = load_model(model);
        bundle.config = config_of(config, bundle.config);
        const AnnotationFile ann = load_annotations(annotations);
        const DetectionFile dets = load_detections(detections, ann);
        CascadeResult result;
        {
          py::gil_scoped_release release;
          result = run_cascade(bundle, ann, dets, disk_images(ann));
        }
        write_run_outputs(result, out_dir);
        return to_python(report_json(result));
      },
      py::arg("annotations"), py::arg("detections"), py::arg("model"), py::arg("out_dir"),
      py::arg("config") = py::none(), "runs the cascade, writes outputs and returns the report");
}
