#pragma once
// Independent reference implementations used by the unit and acceptance
// tests. They follow the textbook definitions directly and share no code
// with the library beyond plain data types.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cmox/neural.hpp"

namespace oracle {

struct Weighted {
    double precision = 0.0, recall = 0.0, f1 = 0.0;
};

// Per-class counts straight from the label vectors, no confusion matrix.
inline Weighted weighted_scores(const std::vector<int>& gold, const std::vector<int>& pred, int k) {
    Weighted w;
    const double n = static_cast<double>(gold.size());
    for (int c = 0; c < k; ++c) {
        double tp = 0, fp = 0, fn = 0, support = 0;
        for (std::size_t i = 0; i < gold.size(); ++i) {
            if (gold[i] == c) support += 1;
            if (gold[i] == c && pred[i] == c) tp += 1;
            if (gold[i] != c && pred[i] == c) fp += 1;
            if (gold[i] == c && pred[i] != c) fn += 1;
        }
        const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
        const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
        const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
        w.precision += support / n * p;
        w.recall += support / n * r;
        w.f1 += support / n * f;
    }
    return w;
}

// Walks voters in priority order; the first voter whose label reaches the
// top count decides.
inline int plurality(const std::vector<int>& votes) {
    std::map<int, int> count;
    for (int v : votes) ++count[v];
    int top = 0;
    for (const auto& [label, c] : count) top = std::max(top, c);
    for (int v : votes) {
        if (count[v] == top) return v;
    }
    return -1;
}

// Dense tf-idf: idf = ln((1+N)/(1+df)) + 1, raw counts, L2 normalized.
// Unknown tokens fall into `unk`.
struct BruteTfidf {
    std::map<std::string, double> idf;
    double unk_idf = 0.0;

    explicit BruteTfidf(const std::vector<std::vector<std::string>>& docs) {
        const double n = static_cast<double>(docs.size());
        std::map<std::string, double> df;
        for (const auto& d : docs) {
            for (const auto& t : std::set<std::string>(d.begin(), d.end())) df[t] += 1;
        }
        for (const auto& [t, c] : df) idf[t] = std::log((1 + n) / (1 + c)) + 1;
        unk_idf = std::log((1 + n) / 1) + 1;
    }

    // Keyed by token; unknown tokens accumulate under "".
    std::map<std::string, double> weights(const std::vector<std::string>& doc) const {
        std::map<std::string, double> w;
        for (const auto& t : doc) {
            const auto it = idf.find(t);
            if (it == idf.end()) {
                w[""] += unk_idf;
            } else {
                w[t] += it->second;
            }
        }
        double sq = 0;
        for (const auto& [t, v] : w) sq += v * v;
        if (sq > 0) {
            for (auto& [t, v] : w) v /= std::sqrt(sq);
        }
        return w;
    }
};

inline double gini(const std::vector<int>& labels, int k) {
    if (labels.empty()) return 0.0;
    std::vector<double> c(static_cast<std::size_t>(k), 0.0);
    for (int y : labels) c[static_cast<std::size_t>(y)] += 1;
    double g = 1.0;
    for (double v : c) g -= (v / labels.size()) * (v / labels.size());
    return g;
}

struct Split {
    double threshold, weighted_gini;
};

// Every midpoint threshold of one dense feature column.
inline std::vector<Split> all_splits(const std::vector<double>& x, const std::vector<int>& y, int k) {
    std::set<double> values(x.begin(), x.end());
    std::vector<double> v(values.begin(), values.end());
    std::vector<Split> out;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        const double t = (v[i] + v[i + 1]) / 2;
        std::vector<int> l, r;
        for (std::size_t j = 0; j < x.size(); ++j) (x[j] <= t ? l : r).push_back(y[j]);
        const double n = static_cast<double>(x.size());
        out.push_back({t, (l.size() * gini(l, k) + r.size() * gini(r, k)) / n});
    }
    return out;
}

struct GradCheck {
    double worst = 0.0;
    std::string where;
    std::size_t checked = 0;
};

// Central differences of the mean batch loss against `analytic`.
// stride > 1 samples every stride-th entry of each tensor.
inline GradCheck check_gradients(cmox::NeuralModel model, const cmox::NeuralParams& analytic,
                                 const std::vector<cmox::IdSequence>& batch, const std::vector<int>& labels,
                                 double eps = 1e-5, std::size_t stride = 1) {
    GradCheck out;
    auto tensors = model.params.tensors();
    const auto grads = analytic.tensors();
    for (std::size_t t = 0; t < tensors.size(); ++t) {
        auto& m = *tensors[t].second;
        const auto& g = *grads[t].second;
        for (Eigen::Index e = 0; e < m.size(); e += static_cast<Eigen::Index>(stride)) {
            const double saved = m.data()[e];
            m.data()[e] = saved + eps;
            const double up = cmox::batch_loss(model, batch, labels);
            m.data()[e] = saved - eps;
            const double down = cmox::batch_loss(model, batch, labels);
            m.data()[e] = saved;
            const double numeric = (up - down) / (2 * eps);
            const double a = g.data()[e];
            const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
            ++out.checked;
            if (rel > out.worst) {
                out.worst = rel;
                out.where = tensors[t].first + "[" + std::to_string(e) + "]";
            }
        }
    }
    return out;
}

}  // namespace oracle
