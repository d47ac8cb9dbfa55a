#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cmox/corpus.hpp"
#include "cmox/ensemble.hpp"
#include "cmox/eval.hpp"
#include "cmox/features.hpp"
#include "cmox/forest.hpp"
#include "cmox/linear_models.hpp"
#include "cmox/neural.hpp"

namespace cmox {

enum class ModelKind { lr, svm, dt, rf, ensemble, lstm, lstm_attn };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);
std::vector<ModelKind> all_model_kinds();
bool is_neural(ModelKind kind);

/// Built-in hyperparameter table: shared defaults plus one patch per
/// language key (tamil, malayalam, kannada, synthetic).
const nlohmann::json& hyperparameter_table();

/// Defaults merged with the language patch and then `overrides`
/// (JSON merge patch). Unknown language keys throw.
nlohmann::json resolve_hyperparameters(std::string_view language_key,
                                       const nlohmann::json& overrides = nlohmann::json::object());

/// Label language of a table entry ("synthetic" uses the Kannada label set).
Language language_of(std::string_view language_key);
bool is_synthetic(std::string_view language_key);

/// A trained classifier together with the preprocessing it needs.
class Pipeline {
public:
    using Classifier = std::variant<LinearModel, Tree, Forest, EnsembleModel, NeuralModel>;

    ModelKind kind = ModelKind::lr;
    Language language = Language::tamil;
    std::string language_key;
    nlohmann::json config;                // resolved hyperparameters
    std::optional<TfidfModel> tfidf;      // classical models
    std::optional<Vocabulary> vocabulary; // neural models
    int max_len = 0;
    Classifier classifier;
    std::optional<TrainRun> run;          // neural training curve

    std::vector<std::string> labels() const { return codebook(language); }

    struct Output {
        std::vector<int> labels;
        std::vector<PredictionRow> rows;
    };
    Output predict(const LabeledCorpus& corpus) const;

    void save(const std::filesystem::path& manifest) const;
    static Pipeline load(const std::filesystem::path& manifest);
};

struct PipelineInputs {
    const LabeledCorpus* train = nullptr;
    const LabeledCorpus* valid = nullptr;  // required for neural models
    std::optional<std::filesystem::path> vectors;  // pretrained word vectors (neural)
};

Pipeline train_pipeline(ModelKind kind, std::string_view language_key, const PipelineInputs& inputs,
                        const nlohmann::json& hyper, std::uint64_t seed);

/// Builds the ensemble from already trained SVM, LR, RF and DT pipelines
/// that share one tf-idf model.
Pipeline ensemble_from(const Pipeline& svm, const Pipeline& lr, const Pipeline& rf, const Pipeline& dt);

/// Weighted scores of always predicting the most frequent training class.
Scores majority_baseline(const LabeledCorpus& train, const LabeledCorpus& test);

struct GridConfig {
    std::string language_key = "synthetic";
    std::optional<std::filesystem::path> train, valid, test;  // required unless synthetic
    bool has_ids = false;
    std::optional<std::filesystem::path> vectors;
    std::filesystem::path out;
    std::uint64_t seed = 7;
    nlohmann::json overrides = nlohmann::json::object();
    std::vector<ModelKind> models = all_model_kinds();
    std::size_t synth_train = 2000;
    std::size_t synth_valid = 400;
    std::size_t synth_test = 400;
};

struct GridRow {
    std::string model;
    Scores scores;
};

struct GridResult {
    std::vector<GridRow> rows;  // in the order of GridConfig::models
    Scores majority;
    std::string best;
};

/// Trains and evaluates every requested model on one language. Writes
/// data/ (synthetic only), models/, predictions/, metrics/, reports/,
/// logs/, config.json, summary.tsv and best.txt under `out`.
GridResult run_grid(const GridConfig& config);

/// summary.tsv contents: header then one row per model, 4 decimals.
std::string summary_tsv(const GridResult& result);

}  // namespace cmox
