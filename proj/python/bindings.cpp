// Python bindings over the C++ core. Images cross as float64 arrays in [0, 1].
#include <filesystem>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fer/classify.hpp"
#include "fer/evalharness.hpp"
#include "fer/image_io.hpp"
#include "fer/manifold.hpp"
#include "fer/pipeline.hpp"

namespace py = pybind11;
using namespace fer;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

GrayImage to_image(const Array& a) {
    if (a.ndim() != 2) throw Error(ErrorKind::InvalidInput, "image must be a 2-D array");
    const auto h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
    return GrayImage(w, h, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const GrayImage& img) {
    Array out({img.height(), img.width()});
    std::copy(img.data().begin(), img.data().end(), out.mutable_data());
    return out;
}

Array to_array(const std::vector<double>& v) {
    Array out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

lbp::Mode lbp_mode(const std::string& s) {
    if (s == "lbp") return lbp::Mode::Lbp;
    if (s == "cbp") return lbp::Mode::Cbp;
    throw Error(ErrorKind::InvalidInput, "mode must be 'lbp' or 'cbp'");
}

py::dict metrics_dict(const eval::ClassMetrics& m) {
    py::dict d;
    d["tp"] = m.tp;
    d["fp"] = m.fp;
    d["fn"] = m.fn;
    d["tn"] = m.tn;
    d["sen"] = m.sen;
    d["spe"] = m.spe;
    d["ace"] = m.ace;
    return d;
}

// Relative manifest rows resolve against the manifest's folder by default.
pipeline::DatasetManifest ingest(const std::string& manifest, const std::string& root,
                                 const pipeline::PipelineConfig& c) {
    const std::string base = root.empty() ? std::filesystem::path(manifest).parent_path().string() : root;
    return pipeline::ingest_dataset(base, manifest, c.class_names);
}

pipeline::PipelineConfig config_of(const std::optional<std::string>& json) {
    return json ? pipeline::config_from_json(*json) : pipeline::PipelineConfig{};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Facial expression recognition pipeline";

    static py::exception<Error> error(m, "FerError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object inst = py::handle(error.ptr())(e.what());
            inst.attr("kind") = to_string(e.kind());
            PyErr_SetObject(error.ptr(), inst.ptr());
        }
    });

    // imaging
    m.def("read_image", [](const std::string& path) { return to_array(read_image(path)); }, py::arg("path"));
    m.def("write_pgm", [](const std::string& path, const Array& img) { write_pgm(path, to_image(img)); },
          py::arg("path"), py::arg("image"));
    m.def("mean_filter", [](const Array& img, int r) { return to_array(mean_filter(to_image(img), r)); },
          py::arg("image"), py::arg("radius") = 1);
    m.def("hist_equalize", [](const Array& img) { return to_array(hist_equalize(to_image(img))); }, py::arg("image"));
    m.def("integral_sum",
          [](const Array& img, int x0, int y0, int x1, int y1) { return integral_image(to_image(img)).rect_sum(x0, y0, x1, y1); },
          py::arg("image"), py::arg("x0"), py::arg("y0"), py::arg("x1"), py::arg("y1"));
    m.def("harris_corners", [](const Array& img) {
        std::vector<std::pair<double, double>> out;
        for (const auto& p : harris_corners(to_image(img))) out.emplace_back(p.x, p.y);
        return out;
    }, py::arg("image"));

    // features
    m.def("gabor_features", [](const Array& img) { return to_array(gabor::extract_gabor_features(to_image(img), {})); },
          py::arg("image"));
    m.def("lbp_codes", [](const Array& img, const std::string& mode, double threshold) {
        return to_array(lbp::code_image(to_image(img), lbp_mode(mode), {threshold}));
    }, py::arg("image"), py::arg("mode") = "lbp", py::arg("threshold") = 6.0);
    m.def("lbp_features", [](const Array& img, const std::string& mode, double threshold) {
        return to_array(lbp::extract_lbp_features(to_image(img), lbp_mode(mode), {threshold}));
    }, py::arg("image"), py::arg("mode") = "lbp", py::arg("threshold") = 6.0);

    // manifold
    m.def("le_embed", [](const manifold::Matrix& w, int dim) {
        const auto model = manifold::le_embed(manifold::WeightMatrix(w), dim);
        return py::make_tuple(model.eigenvalues, model.embedding);
    }, py::arg("weights"), py::arg("dim"), "Non-trivial generalized eigenpairs of L y = lambda D y.");

    py::class_<manifold::SdleModel>(m, "SdleModel")
        .def_property_readonly("output_dim", &manifold::SdleModel::output_dim)
        .def_readonly("eigenvalues", &manifold::SdleModel::eigenvalues)
        .def("transform", [](const manifold::SdleModel& s, const manifold::Matrix& x) { return manifold::sdle_transform(s, x); });
    m.def("sdle_fit", [](const manifold::Matrix& x, std::vector<int> labels, int dim) {
        return manifold::sdle_fit({x, std::move(labels)}, dim);
    }, py::arg("x"), py::arg("labels"), py::arg("dim"));

    // metrics
    m.def("metrics_from_counts", [](std::int64_t tp, std::int64_t fp, std::int64_t fn, std::int64_t tn) {
        return metrics_dict(eval::metrics_from_counts(tp, fp, fn, tn));
    }, py::arg("tp"), py::arg("fp"), py::arg("fn"), py::arg("tn"));
    m.def("confusion_metrics", [](const Eigen::MatrixXi& counts) {
        if (counts.rows() != counts.cols() || counts.rows() < 1)
            throw Error(ErrorKind::InvalidInput, "confusion matrix must be square");
        eval::ConfusionMatrix cm(static_cast<int>(counts.rows()));
        for (int i = 0; i < counts.rows(); ++i)
            for (int j = 0; j < counts.cols(); ++j) cm.add(i, j, counts(i, j));
        py::list out;
        for (const auto& cmx : eval::all_class_metrics(cm)) out.append(metrics_dict(cmx));
        return out;
    }, py::arg("counts"), "Rows are true classes.");
    m.def("round_half_up", &eval::round_half_up, py::arg("value"), py::arg("decimals") = 2);

    // pipeline
    m.def("default_config", [] { return pipeline::config_to_json({}); });
    m.def("synth_dataset", [](const std::string& out, int per_class, int classes, double noise, std::uint64_t seed) {
        pipeline::SynthParams p;
        p.per_class = per_class;
        p.classes = classes;
        p.noise = noise;
        p.seed = seed;
        return pipeline::synth_dataset(p, out).entries.size();
    }, py::arg("out_dir"), py::arg("per_class") = 14, py::arg("classes") = 7, py::arg("noise") = pipeline::SynthParams{}.noise,
       py::arg("seed") = 42);
    m.def("evaluate", [](const std::string& manifest, const std::optional<std::string>& config, const std::string& root) {
        const auto c = config_of(config);
        const auto data = ingest(manifest, root, c);
        return eval::report_json(pipeline::evaluate(c, data));
    }, py::arg("manifest"), py::arg("config") = py::none(), py::arg("root") = "",
       "Cross-validates and returns the report as JSON text.");

    py::class_<pipeline::ModelBundle>(m, "Bundle")
        .def_readonly("checksum", &pipeline::ModelBundle::checksum)
        .def("save", [](pipeline::ModelBundle& b, const std::string& path) { pipeline::save_bundle(path, b); })
        .def("predict", [](const pipeline::ModelBundle& b, const Array& img) {
            const auto p = pipeline::predict(b, to_image(img));
            return py::make_tuple(p.label, p.name, p.score);
        })
        .def("predict_file", [](const pipeline::ModelBundle& b, const std::string& path) {
            const auto p = pipeline::predict_file(b, path);
            return py::make_tuple(p.label, p.name, p.score);
        });
    m.def("train", [](const std::string& manifest, const std::optional<std::string>& config, const std::string& root) {
        const auto c = config_of(config);
        auto bundle = pipeline::train(c, ingest(manifest, root, c));
        pipeline::serialize_bundle(bundle);  // fills the checksum
        return bundle;
    }, py::arg("manifest"), py::arg("config") = py::none(), py::arg("root") = "");
    m.def("load_bundle", &pipeline::load_bundle, py::arg("path"));
}
