#include "cmox/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>
#include <tuple>

#include "cmox/error.hpp"
#include "cmox/io.hpp"
#include "cmox/random.hpp"

namespace cmox {

namespace {

struct ValueGroup {
    double value;
    std::vector<double> hist;
};

double gini_mass(const std::vector<double>& hist, double n) {
    // n * Gini = n - sum(c^2) / n
    if (n <= 0.0) return 0.0;
    double sq = 0.0;
    for (const double c : hist) sq += c * c;
    return n - sq / n;
}

struct FeatureColumn {
    int feature;
    std::vector<std::pair<double, int>> nonzeros;  // (value, class), one per sample occurrence
};

// Distinct-value groups of one feature at a node, ascending, with the
// implicit zeros merged in.
std::vector<ValueGroup> value_groups(const FeatureColumn& col, const std::vector<double>& node_hist,
                                     int n_classes) {
    auto nz = col.nonzeros;
    std::sort(nz.begin(), nz.end());
    std::vector<double> zero_hist = node_hist;
    for (const auto& [v, c] : nz) zero_hist[static_cast<std::size_t>(c)] -= 1.0;
    const double zeros = std::accumulate(zero_hist.begin(), zero_hist.end(), 0.0);

    std::vector<ValueGroup> groups;
    bool zero_placed = zeros <= 0.0;
    auto place_zero = [&] {
        groups.push_back({0.0, zero_hist});
        zero_placed = true;
    };
    for (const auto& [v, c] : nz) {
        if (!zero_placed && v > 0.0) place_zero();
        if (groups.empty() || groups.back().value != v) {
            groups.push_back({v, std::vector<double>(static_cast<std::size_t>(n_classes), 0.0)});
        }
        groups.back().hist[static_cast<std::size_t>(c)] += 1.0;
    }
    if (!zero_placed) place_zero();
    return groups;
}

std::vector<SplitCandidate> scan_groups(const std::vector<ValueGroup>& groups, const std::vector<double>& node_hist,
                                        double n) {
    std::vector<SplitCandidate> out;
    std::vector<double> left(node_hist.size(), 0.0);
    std::vector<double> right = node_hist;
    double n_left = 0.0;
    for (std::size_t g = 0; g + 1 < groups.size(); ++g) {
        for (std::size_t c = 0; c < left.size(); ++c) {
            left[c] += groups[g].hist[c];
            right[c] -= groups[g].hist[c];
            n_left += groups[g].hist[c];
        }
        SplitCandidate cand;
        cand.threshold = 0.5 * (groups[g].value + groups[g + 1].value);
        cand.n_left = static_cast<std::size_t>(n_left);
        cand.weighted_gini = (gini_mass(left, n_left) + gini_mass(right, n - n_left)) / n;
        out.push_back(cand);
    }
    return out;
}

std::vector<double> histogram_of(const Dataset& data, std::span<const std::size_t> samples) {
    std::vector<double> hist(static_cast<std::size_t>(data.n_classes()), 0.0);
    for (const auto i : samples) hist[static_cast<std::size_t>(data.y[i])] += 1.0;
    return hist;
}

std::vector<FeatureColumn> node_columns(const Dataset& data, std::span<const std::size_t> samples) {
    std::vector<std::tuple<int, double, int>> triples;
    for (const auto i : samples) {
        for (const auto& e : data.X[i].entries) {
            if (e.value != 0.0) triples.emplace_back(e.index, e.value, data.y[i]);
        }
    }
    std::sort(triples.begin(), triples.end());
    std::vector<FeatureColumn> cols;
    for (const auto& [f, v, c] : triples) {
        if (cols.empty() || cols.back().feature != f) cols.push_back({f, {}});
        cols.back().nonzeros.emplace_back(v, c);
    }
    return cols;
}

class TreeBuilder {
public:
    TreeBuilder(const Dataset& data, const TreeParams& params) : data_(data), params_(params), rng_(params.seed) {}

    Tree build(std::vector<std::size_t> samples) {
        tree_.n_classes = data_.n_classes();
        tree_.n_features = data_.n_features();
        grow(std::move(samples), 0);
        return std::move(tree_);
    }

private:
    struct Best {
        int feature = -1;
        double threshold = 0.0;
        double impurity = 0.0;
    };

    int grow(std::vector<std::size_t> samples, int depth) {
        const auto id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        const auto hist = histogram_of(data_, samples);
        const double n = static_cast<double>(samples.size());
        const bool pure = std::count_if(hist.begin(), hist.end(), [](double c) { return c > 0.0; }) <= 1;
        const bool depth_capped = params_.max_depth > 0 && depth >= params_.max_depth;
        const bool too_small = samples.size() < 2 * static_cast<std::size_t>(params_.min_leaf);

        Best best;
        if (!pure && !depth_capped && !too_small) best = find_split(samples, hist, n);
        if (best.feature < 0) {
            tree_.nodes[static_cast<std::size_t>(id)].histogram = hist;
            return id;
        }

        std::vector<std::size_t> left, right;
        for (const auto i : samples) {
            (data_.X[i].at(best.feature) <= best.threshold ? left : right).push_back(i);
        }
        samples.clear();
        samples.shrink_to_fit();
        const int l = grow(std::move(left), depth + 1);
        const int r = grow(std::move(right), depth + 1);
        auto& node = tree_.nodes[static_cast<std::size_t>(id)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    Best find_split(std::span<const std::size_t> samples, const std::vector<double>& hist, double n) {
        auto cols = node_columns(data_, samples);
        const auto mtry = params_.feature_subsample;
        const bool subsample = mtry > 0 && static_cast<std::size_t>(mtry) < cols.size();
        if (subsample) rng_.shuffle(std::span(cols));

        Best best;
        double best_imp = std::numeric_limits<double>::infinity();
        int evaluated = 0;
        const auto min_leaf = static_cast<std::size_t>(params_.min_leaf);
        for (const auto& col : cols) {
            if (subsample && evaluated >= mtry) break;
            const auto groups = value_groups(col, hist, data_.n_classes());
            if (groups.size() < 2) continue;  // constant at this node
            ++evaluated;
            for (const auto& cand : scan_groups(groups, hist, n)) {
                if (cand.n_left < min_leaf || samples.size() - cand.n_left < min_leaf) continue;
                if (cand.weighted_gini < best_imp) {
                    best_imp = cand.weighted_gini;
                    best = {col.feature, cand.threshold, cand.weighted_gini};
                }
            }
        }
        return best;
    }

    const Dataset& data_;
    const TreeParams& params_;
    Rng rng_;
    Tree tree_;
};

int argmax_lowest(const std::vector<double>& v) {
    int best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    }
    return best;
}

const TreeNode& leaf_for(const Tree& tree, const SparseVector& x) {
    const TreeNode* node = &tree.nodes.at(0);
    while (!node->is_leaf()) {
        node = &tree.nodes[static_cast<std::size_t>(x.at(node->feature) <= node->threshold ? node->left : node->right)];
    }
    return *node;
}

}  // namespace

int Tree::depth() const {
    if (nodes.empty()) return 0;
    std::vector<int> depth(nodes.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        deepest = std::max(deepest, depth[i]);
        if (!nodes[i].is_leaf()) {
            depth[static_cast<std::size_t>(nodes[i].left)] = depth[i] + 1;
            depth[static_cast<std::size_t>(nodes[i].right)] = depth[i] + 1;
        }
    }
    return deepest;
}

std::vector<SplitCandidate> split_candidates(const Dataset& data, std::span<const std::size_t> samples,
                                             int feature) {
    FeatureColumn col{feature, {}};
    for (const auto i : samples) {
        const double v = data.X[i].at(feature);
        if (v != 0.0) col.nonzeros.emplace_back(v, data.y[i]);
    }
    const auto hist = histogram_of(data, samples);
    return scan_groups(value_groups(col, hist, data.n_classes()), hist, static_cast<double>(samples.size()));
}

Tree train_tree(const Dataset& data, std::span<const std::size_t> samples, const TreeParams& params) {
    if (samples.empty() || data.X.empty()) throw Error("train_tree: empty training data");
    if (data.X.size() != data.y.size()) throw Error("train_tree: feature and label counts differ");
    if (params.min_leaf < 1) throw Error("train_tree: min_leaf must be at least 1");
    for (const auto i : samples) {
        if (i >= data.X.size()) throw Error("train_tree: sample index out of range");
        if (data.y[i] < 0 || data.y[i] >= data.n_classes()) throw Error("train_tree: label out of range");
    }
    return TreeBuilder(data, params).build({samples.begin(), samples.end()});
}

Tree train_tree(const Dataset& data, const TreeParams& params) {
    std::vector<std::size_t> all(data.X.size());
    std::iota(all.begin(), all.end(), 0);
    return train_tree(data, all, params);
}

Forest train_forest(const Dataset& data, const ForestParams& params) {
    if (data.X.empty()) throw Error("train_forest: empty training data");
    if (params.n_estimators < 1) throw Error("train_forest: n_estimators must be positive");
    const auto n = data.X.size();
    const auto n_features = data.n_features();
    const int mtry = params.max_features.value_or(
        std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(n_features))))));

    Forest forest;
    forest.labels = data.labels;
    forest.n_features = n_features;
    forest.trees.resize(static_cast<std::size_t>(params.n_estimators));

    auto build = [&](std::size_t i) {
        const std::uint64_t seed = params.seed + i;
        Rng rng(seed);
        std::vector<std::size_t> samples(n);
        if (params.bootstrap) {
            for (auto& s : samples) s = static_cast<std::size_t>(rng.uniform_int(n));
            std::sort(samples.begin(), samples.end());
        } else {
            std::iota(samples.begin(), samples.end(), 0);
        }
        TreeParams tp;
        tp.max_depth = params.max_depth;
        tp.min_leaf = params.min_leaf;
        tp.feature_subsample = mtry >= static_cast<int>(n_features) ? 0 : mtry;
        tp.seed = rng.next();
        if (!params.bootstrap) tp.seed = seed;
        forest.trees[i] = train_tree(data, samples, tp);
    };

    const auto workers = std::min<std::size_t>(thread_count(), forest.trees.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < forest.trees.size(); ++i) build(i);
        return forest;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < forest.trees.size(); i = next++) {
                try {
                    build(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return forest;
}

Prediction predict_forest(const Tree& tree, const SparseVector& x) {
    if (x.dim != tree.n_features) throw Error("predict_forest: input dimension does not match tree");
    const auto& hist = leaf_for(tree, x).histogram;
    const double total = std::accumulate(hist.begin(), hist.end(), 0.0);
    Prediction p;
    p.label = argmax_lowest(hist);
    for (const double c : hist) p.scores.push_back(c / total);
    return p;
}

Prediction predict_forest(const Forest& forest, const SparseVector& x) {
    if (x.dim != forest.n_features) throw Error("predict_forest: input dimension does not match forest");
    std::vector<double> votes(forest.labels.size(), 0.0);
    for (const auto& tree : forest.trees) votes[static_cast<std::size_t>(argmax_lowest(leaf_for(tree, x).histogram))] += 1.0;
    Prediction p;
    p.label = argmax_lowest(votes);
    for (const double v : votes) p.scores.push_back(v / static_cast<double>(forest.trees.size()));
    return p;
}

nlohmann::json encode_tree(const Tree& tree) {
    auto nodes = nlohmann::json::array();
    for (const auto& node : tree.nodes) {
        if (node.is_leaf()) {
            nodes.push_back({{"h", node.histogram}});
        } else {
            nodes.push_back({{"f", node.feature}, {"t", node.threshold}, {"l", node.left}, {"r", node.right}});
        }
    }
    return {{"n_classes", tree.n_classes}, {"n_features", tree.n_features}, {"nodes", std::move(nodes)}};
}

Tree decode_tree(const nlohmann::json& j) {
    Tree tree;
    tree.n_classes = j.at("n_classes").get<int>();
    tree.n_features = j.at("n_features").get<std::size_t>();
    const auto count = static_cast<int>(j.at("nodes").size());
    for (const auto& n : j.at("nodes")) {
        TreeNode node;
        if (n.contains("h")) {
            node.histogram = n.at("h").get<std::vector<double>>();
            if (static_cast<int>(node.histogram.size()) != tree.n_classes) throw Error("decode_tree: bad leaf histogram");
        } else {
            node.feature = n.at("f").get<int>();
            node.threshold = n.at("t").get<double>();
            node.left = n.at("l").get<int>();
            node.right = n.at("r").get<int>();
            if (node.left <= 0 || node.right <= 0 || node.left >= count || node.right >= count) {
                throw Error("decode_tree: child index out of range");
            }
        }
        tree.nodes.push_back(std::move(node));
    }
    if (tree.nodes.empty()) throw Error("decode_tree: tree has no nodes");
    return tree;
}

nlohmann::json encode_forest(const Forest& forest) {
    auto trees = nlohmann::json::array();
    for (const auto& t : forest.trees) trees.push_back(encode_tree(t));
    return {{"kind", "forest"},
            {"labels", forest.labels},
            {"n_features", forest.n_features},
            {"n_estimators", forest.trees.size()},
            {"trees", std::move(trees)}};
}

Forest decode_forest(const nlohmann::json& j) {
    Forest forest;
    forest.labels = j.at("labels").get<std::vector<std::string>>();
    forest.n_features = j.at("n_features").get<std::size_t>();
    for (const auto& t : j.at("trees")) forest.trees.push_back(decode_tree(t));
    if (forest.trees.empty()) throw Error("decode_forest: no trees");
    return forest;
}

}  // namespace cmox
