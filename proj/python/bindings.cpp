#include "adadrug/config.hpp"
#include "adadrug/data.hpp"
#include "adadrug/error.hpp"
#include "adadrug/eval.hpp"
#include "adadrug/synth.hpp"
#include "adadrug/train.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>
#include <vector>

namespace py = pybind11;
using namespace adadrug;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
    if (a.ndim() != 2) throw ShapeError("expected a 2-d array, got " + std::to_string(a.ndim()) + "-d");
    const auto r = static_cast<std::size_t>(a.shape(0)), c = static_cast<std::size_t>(a.shape(1));
    return Matrix(r, c, std::vector<double>(a.data(), a.data() + r * c));
}

Array to_array(const Matrix& m) {
    Array out({m.rows(), m.cols()});
    std::copy(m.values().begin(), m.values().end(), out.mutable_data());
    return out;
}

std::vector<std::string> numbered(const std::string& prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

ExpressionMatrix to_expr(const Array& x, const std::string& prefix) {
    ExpressionMatrix e;
    e.values = to_matrix(x);
    e.sample_ids = numbered(prefix, e.samples());
    e.gene_names = numbered("g", e.genes());
    return e;
}

/// Sources as (X, y) pairs plus a target matrix, all with the same column count.
DomainBundle to_bundle(const std::vector<std::pair<Array, std::vector<int>>>& sources, const Array& target) {
    DomainBundle b;
    for (std::size_t k = 0; k < sources.size(); ++k) {
        LabeledDomain d;
        d.expr = to_expr(sources[k].first, "s" + std::to_string(k) + "_");
        d.labels = sources[k].second;
        b.sources.push_back(std::move(d));
    }
    b.target = to_expr(target, "t_");
    b.validate();
    return b;
}

py::dict metrics_dict(const MetricsReport& m) {
    py::dict d;
    d["auroc"] = m.auroc;
    d["aupr"] = m.aupr;
    d["n_pos"] = m.n_pos;
    d["n_neg"] = m.n_neg;
    return d;
}

struct PyModel {
    ModelBundle model;
    TrainConfig config;
    std::size_t step = 0;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Adversarial multi-source domain adaptation for drug response";

    py::register_exception<Error>(m, "AdaDrugError", PyExc_ValueError);

    m.def("auroc", [](const std::vector<double>& s, const std::vector<int>& y) { return auroc(s, y); },
          py::arg("scores"), py::arg("labels"));
    m.def("aupr", [](const std::vector<double>& s, const std::vector<int>& y) { return aupr(s, y); },
          py::arg("scores"), py::arg("labels"));
    m.def("binarize_ic50", [](const std::vector<double>& v) { return binarize_ic50(v); }, py::arg("ic50"));
    m.def(
        "select_hvg",
        [](const Array& x, const std::vector<std::string>& genes, std::size_t n) {
            ExpressionMatrix e = to_expr(x, "s");
            e.gene_names = genes;
            e.validate();
            return select_hvg(e, n).genes;
        },
        py::arg("x"), py::arg("gene_names"), py::arg("n"));

    py::class_<SynthConfig>(m, "SynthConfig")
        .def(py::init<>())
        .def_readwrite("sources", &SynthConfig::sources)
        .def_readwrite("n_per_domain", &SynthConfig::n_per_domain)
        .def_readwrite("n_target", &SynthConfig::n_target)
        .def_readwrite("genes", &SynthConfig::genes)
        .def_readwrite("signal_dim", &SynthConfig::signal_dim)
        .def_readwrite("sigma_shift", &SynthConfig::sigma_shift)
        .def_readwrite("sigma_noise", &SynthConfig::sigma_noise)
        .def_readwrite("rho", &SynthConfig::rho)
        .def_readwrite("seed", &SynthConfig::seed);

    py::class_<SynthBundle>(m, "SynthData")
        .def_property_readonly("sources",
                               [](const SynthBundle& s) {
                                   py::list out;
                                   for (const auto& d : s.bundle().sources) {
                                       out.append(py::make_tuple(to_array(d.expr.values), d.labels));
                                   }
                                   return out;
                               })
        .def_property_readonly("target", [](const SynthBundle& s) { return to_array(s.bundle().target.values); })
        .def("evaluate", [](const SynthBundle& s, const std::vector<double>& scores) {
            return metrics_dict(s.evaluate(scores));
        });

    m.def("generate", &generate, py::arg("config") = SynthConfig{});

    m.def("bench_train_config", [] { return train_config_to_json(bench_train_config()).dump(); });

    m.def(
        "benchmark",
        [](const SynthConfig& synth, const std::vector<std::string>& variants, const std::vector<std::uint64_t>& seeds,
           const std::string& train_json) {
            std::vector<VariantSpec> specs;
            for (const auto& v : variants) specs.push_back(VariantSpec::parse(v));
            BenchmarkOptions opts;
            if (!train_json.empty()) {
                Json j = train_config_to_json(opts.train);
                j.merge_patch(Json::parse(train_json));
                opts.train = train_config_from_json(j);
            }
            BenchmarkReport r;
            {
                py::gil_scoped_release release;
                r = run_benchmark(synth, specs, seeds, opts);
            }
            py::list runs;
            for (const auto& run : r.runs) {
                py::dict d;
                d["variant"] = run.variant.name();
                d["seed"] = run.seed;
                d["auroc"] = run.auroc;
                d["aupr"] = run.aupr;
                runs.append(d);
            }
            return runs;
        },
        py::arg("synth"), py::arg("variants"), py::arg("seeds"), py::arg("train_json") = "");

    py::class_<PyModel>(m, "Model")
        .def_property_readonly("config", [](const PyModel& p) { return train_config_to_json(p.config).dump(); })
        .def_property_readonly("step", [](const PyModel& p) { return p.step; })
        .def_property_readonly("genes", [](const PyModel& p) { return p.model.genes(); })
        .def(
            "predict",
            [](const PyModel& p, const Array& target, const std::vector<std::pair<Array, std::vector<int>>>& sources,
               std::size_t reference_samples, std::uint64_t seed) {
                const DomainBundle b = to_bundle(sources, target);
                return predict_target(p.model, b.target.values, b.sources, {reference_samples, seed});
            },
            py::arg("target"), py::arg("sources"), py::arg("reference_samples") = 128, py::arg("seed") = 0)
        .def(
            "embed",
            [](const PyModel& p, const Array& x) { return to_array(encode(p.model, to_matrix(x))); }, py::arg("x"))
        .def(
            "save", [](const PyModel& p, const std::filesystem::path& path) { save_checkpoint(path, p.model, p.config, p.step); },
            py::arg("path"));

    m.def(
        "train",
        [](const std::vector<std::pair<Array, std::vector<int>>>& sources, const Array& target,
           const std::string& config_json) {
            const DomainBundle b = to_bundle(sources, target);
            const TrainConfig cfg = config_json.empty() ? TrainConfig{} : train_config_from_json(Json::parse(config_json));
            PyModel out;
            out.config = cfg;
            {
                py::gil_scoped_release release;
                TrainResult r = train(b, cfg);
                out.model = std::move(r.model);
                out.step = r.history.final_step;
            }
            return out;
        },
        py::arg("sources"), py::arg("target"), py::arg("config_json") = "");

    m.def(
        "load",
        [](const std::filesystem::path& path) {
            Checkpoint ck = load_checkpoint(path);
            return PyModel{std::move(ck.model), ck.config, ck.step};
        },
        py::arg("path"));
}
