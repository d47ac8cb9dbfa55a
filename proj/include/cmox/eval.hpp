#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cmox/corpus.hpp"

namespace cmox {

/// Rows are gold classes, columns predicted classes.
struct ConfusionMatrix {
    std::vector<std::string> labels;
    std::vector<std::int64_t> counts;  // row-major k x k

    int size() const { return static_cast<int>(labels.size()); }
    std::int64_t at(int gold, int pred) const {
        return counts[static_cast<std::size_t>(gold * size() + pred)];
    }
    std::int64_t row_sum(int gold) const;
    std::int64_t col_sum(int pred) const;
    std::int64_t total() const;
};

ConfusionMatrix confusion(std::span<const int> gold, std::span<const int> pred, std::vector<std::string> labels);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;  // also the class's true-positive rate
    double f1 = 0.0;
    std::int64_t support = 0;
};

struct Scores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct MetricsReport {
    std::vector<std::string> labels;
    std::vector<ClassMetrics> per_class;
    Scores weighted;  // support-weighted averages
    double accuracy = 0.0;

    nlohmann::json to_json() const;
};

/// Per-class precision/recall/F1 with 0 for undefined ratios, and their
/// support-weighted averages.
MetricsReport metrics(const ConfusionMatrix& cm);

double weighted_f1(std::span<const int> gold, std::span<const int> pred, int n_classes);

/// Best candidate by F1, then recall, then precision, then name.
std::string select_best(std::span<const std::pair<std::string, Scores>> candidates);

struct ConfusedPair {
    int gold = 0;
    int pred = 0;
    std::int64_t count = 0;
    std::vector<std::pair<std::string, std::string>> samples;  // (id, text)
};

struct ErrorReport {
    std::vector<std::string> labels;
    std::vector<std::int64_t> support;
    std::vector<double> tpr;
    std::vector<ConfusedPair> pairs;  // off-diagonal cells, most frequent first
    int modal_class = 0;              // class with the largest gold support
    std::int64_t total_errors = 0;
    double majority_bias = 0.0;       // share of errors predicted as the modal class

    std::string to_text() const;
    std::string to_jsonl() const;
};

ErrorReport error_report(const ConfusionMatrix& cm, const LabeledCorpus& corpus, std::span<const int> pred,
                         std::size_t max_samples = 5);

// Prediction exchange format: "id\tpredicted_label[\tp1,p2,...]" with a header row.

struct PredictionRow {
    std::string id;
    std::string label;
    std::vector<double> probabilities;  // codebook order; empty when absent
};

std::string to_prediction_tsv(std::span<const PredictionRow> rows);
/// Accepts the exchange format, or a corpus TSV with a header row (in which
/// case the label column is read as the prediction).
std::vector<PredictionRow> parse_predictions(std::string_view contents);
std::vector<PredictionRow> load_predictions(const std::filesystem::path& path);

/// Gold/predicted class indices aligned by record id.
struct AlignedLabels {
    std::vector<int> gold;
    std::vector<int> pred;
};

AlignedLabels align_predictions(const LabeledCorpus& gold, std::span<const PredictionRow> predictions);

}  // namespace cmox
