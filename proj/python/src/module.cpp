#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hgd/cli.hpp"
#include "hgd/dataset.hpp"
#include "hgd/embeddings.hpp"
#include "hgd/error.hpp"
#include "hgd/experiments.hpp"

namespace py = pybind11;
using namespace hgd;

namespace {

std::vector<ModelConfig> model_configs(const std::vector<std::string>& names, std::uint64_t seed) {
    std::vector<ModelConfig> out;
    for (const auto& n : names) out.push_back(ModelConfig::defaults(parse_model_kind(n), seed));
    return out;
}

py::dict metrics_dict(const Metrics& m) {
    py::dict d;
    d["accuracy"] = m.accuracy;
    d["precision"] = m.precision_macro;
    d["recall"] = m.recall_macro;
    d["f1"] = m.f1_macro;
    d["support"] = m.support;
    return d;
}

}  // namespace

PYBIND11_MODULE(_hgd, m) {
    m.doc() = "Homograph disambiguation toolkit: datasets, embedding stores, classifiers and experiments.";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<EncodingError>(m, "EncodingError", base.ptr());
    py::register_exception<FormatError>(m, "FormatError", base.ptr());
    py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
    py::register_exception<DegenerateVectorError>(m, "DegenerateVectorError", base.ptr());
    py::register_exception<InsufficientDataError>(m, "InsufficientDataError", base.ptr());
    py::register_exception<LookupError>(m, "LookupError", base.ptr());
    py::register_exception<SplitError>(m, "SplitError", base.ptr());
    py::register_exception<FitError>(m, "FitError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ArgumentError>(m, "ArgumentError", base.ptr());

    py::class_<HomographRecord>(m, "HomographRecord")
        .def_readonly("record_id", &HomographRecord::record_id)
        .def_readonly("homograph", &HomographRecord::homograph)
        .def_readonly("phoneme", &HomographRecord::phoneme)
        .def_readonly("sentence", &HomographRecord::sentence)
        .def("__repr__", [](const HomographRecord& r) {
            return "HomographRecord(" + std::to_string(r.record_id) + ", " + r.homograph + ", " + r.phoneme + ")";
        });

    py::class_<Dataset>(m, "Dataset")
        .def_property_readonly("records", &Dataset::records)
        .def("__len__", &Dataset::size)
        .def("homographs", [](const Dataset& d) {
            std::vector<std::string> out;
            for (const auto& [h, _] : d.index()) out.push_back(h);
            return out;
        })
        .def("ids_for", &Dataset::ids_for, py::arg("homograph"))
        .def("phonemes_for", &Dataset::phonemes_for, py::arg("homograph"))
        .def("to_tsv", &dataset_to_tsv);

    m.def(
        "parse_dataset",
        [](const std::string& text, bool normalize) {
            return parse_dataset_string(text, ParseOptions{normalize});
        },
        py::arg("text"), py::arg("normalize_arabic_yeh_kaf") = false,
        "Parse the tab-separated homograph, phoneme, sentence format.");

    m.def(
        "validate",
        [](const Dataset& d) { return validation_to_csv(d, validate(d)); }, py::arg("dataset"),
        "Validation issues as CSV text.");

    m.def(
        "phoneme_count_distribution", [](const Dataset& d) { return compute_stats(d).phoneme_count_dist; },
        py::arg("dataset"));
    m.def(
        "sentence_length_histogram", [](const Dataset& d) { return compute_stats(d).sentence_length_hist; },
        py::arg("dataset"));

    m.def(
        "split",
        [](const Dataset& d, const std::string& homograph, double test_fraction, std::uint64_t seed) {
            const auto r = split(d, homograph, {test_fraction, seed, true});
            return std::make_pair(r.train, r.test);
        },
        py::arg("dataset"), py::arg("homograph"), py::arg("test_fraction") = kModelComparisonTestFraction,
        py::arg("seed") = 0, "Stratified split; returns (train_ids, test_ids).");

    py::class_<EmbeddingRecord>(m, "EmbeddingRecord")
        .def_readonly("record_id", &EmbeddingRecord::record_id)
        .def_readonly("homograph", &EmbeddingRecord::homograph)
        .def_readonly("phoneme", &EmbeddingRecord::phoneme)
        .def_readonly("vector", &EmbeddingRecord::vector);

    py::class_<EmbeddingStore>(m, "EmbeddingStore")
        .def_property_readonly("dim", &EmbeddingStore::dim)
        .def_property_readonly("pooling", [](const EmbeddingStore& s) { return std::string(to_string(s.pooling())); })
        .def_property_readonly("model_id", &EmbeddingStore::model_id)
        .def_property_readonly("records", &EmbeddingStore::records)
        .def("__len__", &EmbeddingStore::size)
        .def("to_text", &store_to_string)
        .def("__eq__", [](const EmbeddingStore& a, const EmbeddingStore& b) { return a == b; });

    m.def("read_store", &read_store_string, py::arg("text"), "Parse an hgd-emb/1 store.");
    m.def(
        "synthetic_store", [](const std::string& spec) { return generate_synthetic_store(parse_synth_spec(spec)); },
        py::arg("spec_json"));
    m.def(
        "synthetic_dataset", [](const std::string& spec) { return synthetic_dataset(parse_synth_spec(spec)); },
        py::arg("spec_json"));

    m.def(
        "cosine", [](const std::vector<double>& u, const std::vector<double>& v) { return cosine(u, v); },
        py::arg("u"), py::arg("v"));
    m.def(
        "mean_pairwise_cosine", [](const std::vector<Vector>& vs) { return mean_pairwise_cosine(vs); },
        py::arg("vectors"));

    m.def(
        "compute_metrics",
        [](const std::vector<std::string>& y_true, const std::vector<std::string>& y_pred) {
            return metrics_dict(compute_metrics(y_true, y_pred));
        },
        py::arg("y_true"), py::arg("y_pred"));

    m.def(
        "compare_models",
        [](const Dataset& d, const EmbeddingStore& store, const std::vector<std::string>& models, double test_fraction,
           std::uint64_t seed, std::size_t jobs, bool weighted) {
            const auto cfgs = model_configs(models, seed);
            ModelComparisonOptions opts;
            opts.jobs = jobs;
            opts.weighted = weighted;
            py::gil_scoped_release release;
            return to_csv(run_model_comparison(d, store, cfgs, {test_fraction, seed, true}, opts));
        },
        py::arg("dataset"), py::arg("store"),
        py::arg("models") = std::vector<std::string>{"forest", "knn", "logreg", "mlp", "ridge"},
        py::arg("test_fraction") = kModelComparisonTestFraction, py::arg("seed") = 0, py::arg("jobs") = 1,
        py::arg("weighted") = false, "Model comparison report as CSV text.");

    m.def(
        "compare_embeddings",
        [](const Dataset& d, const EmbeddingStore& last, const EmbeddingStore& avg4, double test_fraction,
           std::uint64_t seed, std::size_t jobs) {
            EmbeddingComparisonOptions opts;
            opts.jobs = jobs;
            opts.seed = seed;
            py::gil_scoped_release release;
            return to_csv(run_embedding_comparison(d, last, avg4, {test_fraction, seed, true}, opts));
        },
        py::arg("dataset"), py::arg("store_last"), py::arg("store_avg4"),
        py::arg("test_fraction") = kEmbeddingComparisonTestFraction, py::arg("seed") = 0, py::arg("jobs") = 1,
        "Embedding comparison report as CSV text.");

    m.def(
        "cosine_analysis",
        [](const EmbeddingStore& store, const std::string& pairs) {
            const auto r = run_cosine_analysis(store, parse_pair_filter(pairs));
            return py::make_tuple(r.per_homograph, r.histogram);
        },
        py::arg("store"), py::arg("pairs") = "all", "Returns ([(homograph, mean_cosine)], histogram counts).");

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = cli::run(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run a CLI invocation in-process; returns (exit_code, stdout, stderr).");
}
