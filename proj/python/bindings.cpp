#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cmox/corpus.hpp"
#include "cmox/ensemble.hpp"
#include "cmox/error.hpp"
#include "cmox/eval.hpp"
#include "cmox/io.hpp"
#include "cmox/pipeline.hpp"
#include "cmox/preprocess.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

cmox::LabeledCorpus read_corpus(const std::filesystem::path& path, cmox::Language lang, bool has_ids, bool labeled) {
    const auto contents = cmox::read_file(path);
    cmox::TsvOptions opts;
    opts.has_ids = has_ids || contents.rfind("id\ttext", 0) == 0;
    opts.labeled = labeled;
    std::vector<std::string> warnings;
    return cmox::parse_tsv(contents, lang, opts, &warnings);
}

json parse_overrides(const std::string& text) { return text.empty() ? json::object() : json::parse(text); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Native core of the cmox toolkit";
    py::register_exception<cmox::Error>(m, "Error", PyExc_ValueError);

    m.def("clean", &cmox::clean, py::arg("text"));
    m.def("tokenize", &cmox::tokenize, py::arg("clean_text"));
    m.def("clean_tokens", &cmox::clean_tokens, py::arg("text"));
    m.def("codebook", [](const std::string& lang) { return cmox::codebook(cmox::parse_language(lang)); },
          py::arg("language"));

    m.def(
        "synth_tsv",
        [](const std::string& lang, std::size_t size, std::uint64_t seed, const std::string& split) {
            const auto spec = cmox::default_synth_spec(cmox::parse_language(lang), size, seed, cmox::parse_split(split));
            return cmox::to_tsv(cmox::synth_generate(spec));
        },
        py::arg("language"), py::arg("size"), py::arg("seed") = 7, py::arg("split") = "train");

    m.def(
        "class_distribution",
        [](const std::filesystem::path& path, const std::string& lang, bool has_ids) {
            const auto l = cmox::parse_language(lang);
            std::vector<std::pair<std::string, std::size_t>> out;
            for (const auto& [code, n] : cmox::class_distribution(read_corpus(path, l, has_ids, true))) {
                out.emplace_back(cmox::render_label(code, l), n);
            }
            return out;
        },
        py::arg("path"), py::arg("language"), py::arg("has_ids") = false);

    m.def(
        "metrics_json",
        [](const std::vector<int>& gold, const std::vector<int>& pred, const std::vector<std::string>& labels) {
            return cmox::metrics(cmox::confusion(gold, pred, labels)).to_json().dump();
        },
        py::arg("gold"), py::arg("pred"), py::arg("labels"));
    m.def(
        "weighted_f1",
        [](const std::vector<int>& gold, const std::vector<int>& pred, int k) { return cmox::weighted_f1(gold, pred, k); },
        py::arg("gold"), py::arg("pred"), py::arg("n_classes"));
    m.def(
        "select_best",
        [](const std::vector<std::tuple<std::string, double, double, double>>& rows) {
            std::vector<std::pair<std::string, cmox::Scores>> c;
            for (const auto& [name, p, r, f] : rows) c.emplace_back(name, cmox::Scores{p, r, f});
            return cmox::select_best(c);
        },
        py::arg("candidates"), "Candidates are (name, precision, recall, f1) tuples.");
    m.def("vote", [](const std::vector<int>& preds) { return cmox::vote(preds); }, py::arg("predictions"));

    py::class_<cmox::Pipeline>(m, "Model")
        .def_static(
            "train",
            [](const std::string& kind, const std::string& lang_key, const std::filesystem::path& train,
               std::optional<std::filesystem::path> valid, std::uint64_t seed, const std::string& overrides) {
                const auto k = cmox::parse_model_kind(kind);
                const auto lang = cmox::language_of(lang_key);
                const auto hyper = cmox::resolve_hyperparameters(lang_key, parse_overrides(overrides));
                const auto tr = read_corpus(train, lang, false, true);
                std::optional<cmox::LabeledCorpus> va;
                if (valid) va = read_corpus(*valid, lang, false, true);
                py::gil_scoped_release release;
                return cmox::train_pipeline(k, lang_key, {&tr, va ? &*va : nullptr, {}}, hyper, seed);
            },
            py::arg("kind"), py::arg("language"), py::arg("train"), py::arg("valid") = std::nullopt,
            py::arg("seed") = 7, py::arg("overrides") = "")
        .def_static("load", &cmox::Pipeline::load, py::arg("manifest"))
        .def("save", &cmox::Pipeline::save, py::arg("manifest"))
        .def_property_readonly("kind", [](const cmox::Pipeline& p) { return std::string(cmox::to_string(p.kind)); })
        .def_property_readonly("labels", &cmox::Pipeline::labels)
        .def_property_readonly("config_json", [](const cmox::Pipeline& p) { return p.config.dump(); })
        .def(
            "predict",
            [](const cmox::Pipeline& p, const std::filesystem::path& path, bool labeled) {
                const auto corpus = read_corpus(path, p.language, false, labeled);
                std::vector<std::tuple<std::string, std::string, std::vector<double>>> out;
                for (auto& row : p.predict(corpus).rows) out.emplace_back(row.id, row.label, row.probabilities);
                return out;
            },
            py::arg("path"), py::arg("labeled") = true);

    m.def(
        "run_grid",
        [](const std::string& lang_key, const std::filesystem::path& out, std::uint64_t seed,
           std::optional<std::vector<std::string>> models, std::size_t synth_train, std::size_t synth_valid,
           std::size_t synth_test, const std::string& overrides) {
            cmox::GridConfig cfg;
            cfg.language_key = lang_key;
            cfg.out = out;
            cfg.seed = seed;
            cfg.overrides = parse_overrides(overrides);
            cfg.synth_train = synth_train;
            cfg.synth_valid = synth_valid;
            cfg.synth_test = synth_test;
            if (models) {
                cfg.models.clear();
                for (const auto& name : *models) cfg.models.push_back(cmox::parse_model_kind(name));
            }
            py::gil_scoped_release release;
            return cmox::summary_tsv(cmox::run_grid(cfg));
        },
        py::arg("language"), py::arg("out"), py::arg("seed") = 7, py::arg("models") = std::nullopt,
        py::arg("synth_train") = 2000, py::arg("synth_valid") = 400, py::arg("synth_test") = 400,
        py::arg("overrides") = "");
}
