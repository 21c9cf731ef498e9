#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "docsynth/dataset.hpp"
#include "docsynth/groundtruth.hpp"
#include "docsynth/pipeline.hpp"
#include "docsynth/render.hpp"
#include "docsynth/sampler.hpp"
#include "docsynth/textures.hpp"

namespace py = pybind11;
using namespace docsynth;

namespace {

py::dict summary_dict(const RunSummary& s) {
  py::dict d;
  d["status"] = static_cast<int>(s.status);
  d["message"] = s.message;
  d["samples"] = s.samples;
  d["failed_sample"] = s.failed_sample;
  d["wall_seconds"] = s.wall_seconds;
  d["output_dir"] = s.output_dir;
  d["written"] = s.written;
  return d;
}

RunConfig make_config(const std::filesystem::path& spec, std::optional<std::filesystem::path> output,
                      std::optional<std::filesystem::path> input, std::optional<std::uint64_t> count,
                      std::optional<std::uint64_t> seed, int threads, std::optional<int> spp,
                      std::optional<std::pair<int, int>> resolution) {
  RunConfig cfg;
  cfg.spec_path = spec;
  cfg.output_dir = std::move(output);
  cfg.input_dir = std::move(input);
  cfg.count = count;
  cfg.seed = seed;
  cfg.threads = threads;
  cfg.spp = spp;
  if (resolution) cfg.resolution = Resolution{resolution->first, resolution->second};
  return cfg;
}

template <typename T>
py::array_t<T> to_array(std::vector<T> values, std::vector<py::ssize_t> shape) {
  auto* heap = new std::vector<T>(std::move(values));
  py::capsule owner(heap, [](void* p) { delete static_cast<std::vector<T>*>(p); });
  return py::array_t<T>(shape, heap->data(), owner);
}

}  // namespace

PYBIND11_MODULE(_docsynth, m) {
  m.doc() = "Synthetic document-scene generator";
  m.attr("__version__") = kToolVersion;
  m.attr("DEPTH_MISS_SENTINEL") = kDepthMissSentinel;

  m.def("periodic_loss", &periodic_loss, py::arg("pred_sin"), py::arg("pred_cos"), py::arg("theta"));
  m.def("encode_angle", &encode_angle, py::arg("theta"));
  m.def("decode_angle", &decode_angle, py::arg("sin_value"), py::arg("cos_value"));
  m.def("wrap_angle", &wrap_angle, py::arg("theta"));

  m.def(
      "generate",
      [](const std::filesystem::path& spec, std::optional<std::filesystem::path> output,
         std::optional<std::filesystem::path> input, std::optional<std::uint64_t> count,
         std::optional<std::uint64_t> seed, int threads, std::optional<int> spp,
         std::optional<std::pair<int, int>> resolution) {
        const RunConfig cfg = make_config(spec, std::move(output), std::move(input), count, seed, threads, spp, resolution);
        py::gil_scoped_release release;
        return run_generate(cfg);
      },
      py::arg("spec"), py::arg("output") = py::none(), py::arg("input") = py::none(), py::arg("count") = py::none(),
      py::arg("seed") = py::none(), py::arg("threads") = 1, py::arg("spp") = py::none(),
      py::arg("resolution") = py::none());

  m.def(
      "preview",
      [](const std::filesystem::path& spec, std::optional<std::filesystem::path> output,
         std::optional<std::filesystem::path> input, std::optional<std::uint64_t> seed, int threads,
         std::optional<int> spp, std::optional<std::pair<int, int>> resolution) {
        RunConfig cfg = make_config(spec, std::move(output), std::move(input), std::nullopt, seed, threads, spp, resolution);
        cfg.preview = true;
        py::gil_scoped_release release;
        return run_preview(cfg);
      },
      py::arg("spec"), py::arg("output") = py::none(), py::arg("input") = py::none(), py::arg("seed") = py::none(),
      py::arg("threads") = 1, py::arg("spp") = py::none(), py::arg("resolution") = py::none());

  py::class_<RunSummary>(m, "RunSummary")
      .def_property_readonly("status", [](const RunSummary& s) { return static_cast<int>(s.status); })
      .def_readonly("message", &RunSummary::message)
      .def_readonly("samples", &RunSummary::samples)
      .def_readonly("failed_sample", &RunSummary::failed_sample)
      .def_readonly("wall_seconds", &RunSummary::wall_seconds)
      .def_readonly("output_dir", &RunSummary::output_dir)
      .def_readonly("written", &RunSummary::written)
      .def("as_dict", &summary_dict);

  // Single samples, sampled and labelled exactly as generate() would.
  py::class_<RunContext, std::shared_ptr<RunContext>>(m, "Generator")
      .def(py::init([](const std::filesystem::path& spec, std::optional<std::filesystem::path> input,
                       std::optional<std::uint64_t> seed, std::optional<int> spp,
                       std::optional<std::pair<int, int>> resolution) {
             // Nothing is written, so any output directory satisfies the loader.
             RunConfig cfg = make_config(spec, std::filesystem::path("."), std::move(input), std::nullopt, seed, 1, spp,
                                         resolution);
             auto ctx = std::make_shared<RunContext>();
             if (const auto fail = load_run(cfg, *ctx)) throw py::value_error(fail->message);
             return ctx;
           }),
           py::arg("spec"), py::arg("input") = py::none(), py::arg("seed") = py::none(), py::arg("spp") = py::none(),
           py::arg("resolution") = py::none())
      .def_property_readonly("document_count", [](const RunContext& c) { return c.documents.size(); })
      .def(
          "scene",
          [](const RunContext& c, std::uint64_t index) {
            const SheetSpec& doc = c.documents[choose_document(c.spec.seed, index, c.documents.size())];
            return py::module_::import("json").attr("loads")(scene_to_json(sample_scene(c.spec, doc, index, c.patches)));
          },
          py::arg("index"), "Sampled scene parameters for one index, as a dict.")
      .def(
          "sample",
          [](const RunContext& c, std::uint64_t index, int threads) {
            SampleResult r;
            {
              py::gil_scoped_release release;
              r = generate_sample(c.spec, c.documents, c.patches, *c.textures, index, threads);
            }
            const py::ssize_t h = r.passes.height, w = r.passes.width;
            py::dict out;
            out["record"] = py::module_::import("json").attr("loads")(serialize_record(r.record));
            out["rgb"] = to_array(std::move(r.passes.rgb), {h, w, 3});
            out["depth"] = to_array(std::move(r.passes.depth), {h, w});
            out["seg"] = to_array(std::move(r.passes.seg), {h, w});
            return out;
          },
          py::arg("index"), py::arg("threads") = 1,
          "Renders one sample; returns its manifest record and linear rgb, depth and seg arrays.");

  m.def(
      "read_pfm",
      [](const std::filesystem::path& path) {
        FloatImage img = read_pfm(path);
        return to_array(std::move(img.values), {img.height, img.width});
      },
      py::arg("path"), "Depth map as a (height, width) float32 array, top row first.");

  m.def(
      "render_scene",
      [](const std::string& scene_json, const std::filesystem::path& texture_root, int threads) {
        const SceneInstance scene = scene_from_json(scene_json);
        RenderPasses passes;
        {
          py::gil_scoped_release release;
          TextureCache textures(texture_root);
          passes = render(prepare_scene(scene, textures), threads);
        }
        const py::ssize_t h = passes.height, w = passes.width;
        py::dict out;
        out["rgb"] = to_array(std::move(passes.rgb), {h, w, 3});
        out["depth"] = to_array(std::move(passes.depth), {h, w});
        out["seg"] = to_array(std::move(passes.seg), {h, w});
        return out;
      },
      py::arg("scene_json"), py::arg("texture_root"), py::arg("threads") = 1,
      "Re-renders a scene serialized in a manifest record. Returns linear rgb, depth and seg arrays.");

  m.def("parameter_vocabulary", [] {
    py::list out;
    for (const ParamInfo& p : parameter_vocabulary()) {
      py::dict d;
      d["path"] = p.path;
      d["kind"] = p.kind == ParamKind::kCategorical ? "categorical" : p.kind == ParamKind::kInteger ? "integer" : "continuous";
      if (p.kind == ParamKind::kCategorical) {
        d["default"] = p.default_choice;
        d["choices"] = p.choices;
      } else {
        d["default"] = p.default_value;
        d["domain"] = py::make_tuple(p.domain_min, p.domain_max);
      }
      d["description"] = p.description;
      out.append(d);
    }
    return out;
  });
}
