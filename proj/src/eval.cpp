#include "cmox/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "cmox/error.hpp"
#include "cmox/io.hpp"

namespace cmox {

std::int64_t ConfusionMatrix::row_sum(int gold) const {
    std::int64_t s = 0;
    for (int j = 0; j < size(); ++j) s += at(gold, j);
    return s;
}

std::int64_t ConfusionMatrix::col_sum(int pred) const {
    std::int64_t s = 0;
    for (int i = 0; i < size(); ++i) s += at(i, pred);
    return s;
}

std::int64_t ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), std::int64_t{0}); }

ConfusionMatrix confusion(std::span<const int> gold, std::span<const int> pred, std::vector<std::string> labels) {
    if (gold.size() != pred.size()) {
        throw Error("confusion: " + std::to_string(gold.size()) + " gold labels but " +
                    std::to_string(pred.size()) + " predictions");
    }
    ConfusionMatrix cm;
    cm.labels = std::move(labels);
    const int k = cm.size();
    cm.counts.assign(static_cast<std::size_t>(k * k), 0);
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (gold[i] < 0 || gold[i] >= k || pred[i] < 0 || pred[i] >= k) {
            throw Error("confusion: label index outside the codebook at position " + std::to_string(i));
        }
        ++cm.counts[static_cast<std::size_t>(gold[i] * k + pred[i])];
    }
    return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
    const auto total = cm.total();
    if (total < 1) throw Error("metrics: empty confusion matrix");
    MetricsReport r;
    r.labels = cm.labels;
    std::int64_t correct = 0;
    for (int c = 0; c < cm.size(); ++c) {
        const auto tp = cm.at(c, c);
        const auto predicted = cm.col_sum(c);
        ClassMetrics m;
        m.support = cm.row_sum(c);
        m.precision = predicted > 0 ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
        m.recall = m.support > 0 ? static_cast<double>(tp) / static_cast<double>(m.support) : 0.0;
        m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
        const double w = static_cast<double>(m.support) / static_cast<double>(total);
        r.weighted.precision += w * m.precision;
        r.weighted.recall += w * m.recall;
        r.weighted.f1 += w * m.f1;
        correct += tp;
        r.per_class.push_back(m);
    }
    r.accuracy = static_cast<double>(correct) / static_cast<double>(total);
    return r;
}

nlohmann::json MetricsReport::to_json() const {
    auto classes = nlohmann::json::array();
    for (std::size_t c = 0; c < labels.size(); ++c) {
        const auto& m = per_class[c];
        classes.push_back({{"label", labels[c]},
                           {"precision", m.precision},
                           {"recall", m.recall},
                           {"f1", m.f1},
                           {"support", m.support}});
    }
    return {{"weighted_precision", weighted.precision},
            {"weighted_recall", weighted.recall},
            {"weighted_f1", weighted.f1},
            {"accuracy", accuracy},
            {"classes", std::move(classes)}};
}

double weighted_f1(std::span<const int> gold, std::span<const int> pred, int n_classes) {
    std::vector<std::string> labels(static_cast<std::size_t>(n_classes));
    return metrics(confusion(gold, pred, std::move(labels))).weighted.f1;
}

std::string select_best(std::span<const std::pair<std::string, Scores>> candidates) {
    if (candidates.empty()) throw Error("select_best: no candidates");
    const auto better = [](const std::pair<std::string, Scores>& a, const std::pair<std::string, Scores>& b) {
        if (a.second.f1 != b.second.f1) return a.second.f1 > b.second.f1;
        if (a.second.recall != b.second.recall) return a.second.recall > b.second.recall;
        if (a.second.precision != b.second.precision) return a.second.precision > b.second.precision;
        return a.first < b.first;
    };
    return std::min_element(candidates.begin(), candidates.end(), better)->first;
}

ErrorReport error_report(const ConfusionMatrix& cm, const LabeledCorpus& corpus, std::span<const int> pred,
                         std::size_t max_samples) {
    if (corpus.size() != pred.size()) throw Error("error_report: corpus and predictions differ in length");
    const int k = cm.size();
    std::vector<int> gold;
    gold.reserve(corpus.size());
    for (const auto& rec : corpus.records) {
        if (!rec.label) throw Error("error_report: record '" + rec.id + "' is unlabeled");
        gold.push_back(label_index(corpus.language, *rec.label));
    }
    if (confusion(gold, pred, cm.labels).counts != cm.counts) {
        throw Error("error_report: confusion matrix does not match the corpus and predictions");
    }

    ErrorReport r;
    r.labels = cm.labels;
    for (int c = 0; c < k; ++c) {
        const auto support = cm.row_sum(c);
        r.support.push_back(support);
        r.tpr.push_back(support > 0 ? static_cast<double>(cm.at(c, c)) / static_cast<double>(support) : 0.0);
        if (support > r.support[static_cast<std::size_t>(r.modal_class)]) r.modal_class = c;
    }
    std::int64_t into_modal = 0;
    for (int g = 0; g < k; ++g) {
        for (int p = 0; p < k; ++p) {
            if (g == p || cm.at(g, p) == 0) continue;
            r.pairs.push_back({g, p, cm.at(g, p), {}});
            r.total_errors += cm.at(g, p);
            if (p == r.modal_class) into_modal += cm.at(g, p);
        }
    }
    std::stable_sort(r.pairs.begin(), r.pairs.end(),
                     [](const ConfusedPair& a, const ConfusedPair& b) { return a.count > b.count; });
    for (auto& pair : r.pairs) {
        for (std::size_t i = 0; i < gold.size() && pair.samples.size() < max_samples; ++i) {
            if (gold[i] == pair.gold && pred[i] == pair.pred) {
                pair.samples.emplace_back(corpus.records[i].id, corpus.records[i].text);
            }
        }
    }
    r.majority_bias = r.total_errors > 0 ? static_cast<double>(into_modal) / static_cast<double>(r.total_errors) : 0.0;
    return r;
}

namespace {

std::string fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

std::string ErrorReport::to_text() const {
    std::ostringstream out;
    std::int64_t n = std::accumulate(support.begin(), support.end(), std::int64_t{0});
    out << "Error analysis: " << n << " records, " << total_errors << " errors\n\n";
    std::size_t width = 5;
    for (const auto& l : labels) width = std::max(width, l.size());
    out << "class" << std::string(width - 5 + 2, ' ') << "support  TPR\n";
    for (std::size_t c = 0; c < labels.size(); ++c) {
        out << labels[c] << std::string(width - labels[c].size() + 2, ' ') << support[c]
            << std::string(std::max<std::size_t>(1, 9 - std::to_string(support[c]).size()), ' ') << fixed(tpr[c])
            << '\n';
    }
    out << "\nConfused pairs (gold -> predicted):\n";
    if (pairs.empty()) out << "  none\n";
    for (const auto& p : pairs) {
        out << "  " << labels[static_cast<std::size_t>(p.gold)] << " -> " << labels[static_cast<std::size_t>(p.pred)]
            << ": " << p.count << '\n';
        for (const auto& [id, text] : p.samples) out << "    [" << id << "] " << text << '\n';
    }
    out << "\nMajority-class bias: " << fixed(majority_bias) << " of errors predicted as "
        << labels[static_cast<std::size_t>(modal_class)] << '\n';
    return out.str();
}

std::string ErrorReport::to_jsonl() const {
    std::string out;
    for (std::size_t c = 0; c < labels.size(); ++c) {
        out += nlohmann::json{{"type", "class"}, {"label", labels[c]}, {"support", support[c]}, {"tpr", tpr[c]}}.dump();
        out += '\n';
    }
    for (const auto& p : pairs) {
        auto samples = nlohmann::json::array();
        for (const auto& [id, text] : p.samples) samples.push_back({{"id", id}, {"text", text}});
        out += nlohmann::json{{"type", "pair"},
                              {"gold", labels[static_cast<std::size_t>(p.gold)]},
                              {"pred", labels[static_cast<std::size_t>(p.pred)]},
                              {"count", p.count},
                              {"samples", std::move(samples)}}
                   .dump();
        out += '\n';
    }
    out += nlohmann::json{{"type", "bias"},
                          {"modal_class", labels[static_cast<std::size_t>(modal_class)]},
                          {"errors", total_errors},
                          {"share", majority_bias}}
               .dump();
    out += '\n';
    return out;
}

// ---------------------------------------------------------------------------
// Prediction files

namespace {

constexpr std::string_view kPredictionHeader = "id\tpredicted_label";

std::string format_probability(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", p);
    return buf;
}

std::vector<double> parse_probabilities(std::string_view field, std::size_t line_no) {
    std::vector<double> out;
    if (field.empty()) return out;
    for (auto part : split(field, ',')) {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (ec != std::errc() || ptr != part.data() + part.size()) {
            throw Error("predictions: line " + std::to_string(line_no) + ": bad probability '" + std::string(part) + "'");
        }
        out.push_back(v);
    }
    return out;
}

}  // namespace

std::string to_prediction_tsv(std::span<const PredictionRow> rows) {
    const bool with_probs = !rows.empty() && !rows.front().probabilities.empty();
    std::string out(kPredictionHeader);
    if (with_probs) out += "\tprobabilities";
    out += '\n';
    for (const auto& row : rows) {
        out += row.id;
        out += '\t';
        out += row.label;
        if (with_probs) {
            out += '\t';
            for (std::size_t i = 0; i < row.probabilities.size(); ++i) {
                if (i > 0) out += ',';
                out += format_probability(row.probabilities[i]);
            }
        }
        out += '\n';
    }
    return out;
}

std::vector<PredictionRow> parse_predictions(std::string_view contents) {
    const auto lines = split_lines(contents);
    std::vector<PredictionRow> rows;
    if (lines.empty()) return rows;

    const auto header = split(lines.front(), '\t');
    // Corpus TSV: its label column is taken as the prediction.
    const bool corpus_with_ids = header.size() == 3 && header[0] == "id" && header[1] == "text" && header[2] == "category";
    const bool corpus_plain = header.size() == 2 && header[0] == "text" && header[1] == "category";
    if (corpus_with_ids || corpus_plain) {
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto f = split(lines[i], '\t');
            if (f.size() != header.size()) {
                throw Error("predictions: line " + std::to_string(i + 1) + ": wrong column count");
            }
            rows.push_back({corpus_with_ids ? std::string(f[0]) : "r" + std::to_string(i), std::string(f.back()), {}});
        }
        return rows;
    }

    const bool has_header = header.size() >= 2 && header[0] == "id" && header[1] == "predicted_label";
    for (std::size_t i = has_header ? 1 : 0; i < lines.size(); ++i) {
        const auto f = split(lines[i], '\t');
        if (f.size() < 2 || f.size() > 3) {
            throw Error("predictions: line " + std::to_string(i + 1) + ": expected 2 or 3 columns");
        }
        PredictionRow row{std::string(f[0]), std::string(f[1]), {}};
        if (f.size() == 3) row.probabilities = parse_probabilities(f[2], i + 1);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<PredictionRow> load_predictions(const std::filesystem::path& path) {
    try {
        return parse_predictions(read_file(path));
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

AlignedLabels align_predictions(const LabeledCorpus& gold, std::span<const PredictionRow> predictions) {
    std::unordered_map<std::string_view, const PredictionRow*> by_id;
    for (const auto& row : predictions) {
        if (!by_id.emplace(row.id, &row).second) throw Error("predictions: duplicate id '" + row.id + "'");
    }
    if (predictions.size() != gold.size()) {
        throw Error("predictions: " + std::to_string(predictions.size()) + " rows for " +
                    std::to_string(gold.size()) + " gold records");
    }
    AlignedLabels out;
    for (const auto& rec : gold.records) {
        if (!rec.label) throw Error("gold record '" + rec.id + "' is unlabeled");
        const auto it = by_id.find(rec.id);
        if (it == by_id.end()) throw Error("predictions: no prediction for id '" + rec.id + "'");
        const auto code = parse_label(it->second->label, gold.language);
        if (!code) throw Error("predictions: unknown label '" + it->second->label + "' for id '" + rec.id + "'");
        out.gold.push_back(label_index(gold.language, *rec.label));
        out.pred.push_back(label_index(gold.language, *code));
    }
    return out;
}

}  // namespace cmox
