#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cmox/container.hpp"
#include "cmox/linear_models.hpp"

namespace cmox {

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> histogram;  // leaves only: training class counts

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    int n_classes = 0;
    std::size_t n_features = 0;

    int depth() const;
};

struct TreeParams {
    int max_depth = 0;           // 0 = unlimited
    int min_leaf = 1;
    int feature_subsample = 0;   // features examined per node; 0 = all
    std::uint64_t seed = 0;
};

/// CART with Gini impurity. Sparse rows are split directly, with absent
/// features read as 0. Thresholds are midpoints between consecutive
/// distinct values; x[f] <= threshold goes left.
Tree train_tree(const Dataset& data, const TreeParams& params);

/// Same, on a multiset of row indices (bootstrap samples repeat rows).
Tree train_tree(const Dataset& data, std::span<const std::size_t> samples, const TreeParams& params);

struct SplitCandidate {
    double threshold = 0.0;
    double weighted_gini = 0.0;  // (n_L * G_L + n_R * G_R) / n
    std::size_t n_left = 0;
};

/// Every threshold candidate for one feature at a node holding `samples`.
std::vector<SplitCandidate> split_candidates(const Dataset& data, std::span<const std::size_t> samples,
                                             int feature);

struct ForestParams {
    int n_estimators = 100;
    bool bootstrap = true;
    std::optional<int> max_features;  // unset = floor(sqrt(F))
    int max_depth = 0;
    int min_leaf = 1;
    std::uint64_t seed = 0;
};

struct Forest {
    std::vector<Tree> trees;
    std::vector<std::string> labels;
    std::size_t n_features = 0;
};

/// Tree i trains on a bootstrap sample drawn with seed + i. Trees train
/// in parallel; the result does not depend on the thread count.
Forest train_forest(const Dataset& data, const ForestParams& params);

/// Leaf class distribution; label is the histogram argmax (lowest index on ties).
Prediction predict_forest(const Tree& tree, const SparseVector& x);
/// Majority vote over trees; scores are vote shares, ties go to the lowest index.
Prediction predict_forest(const Forest& forest, const SparseVector& x);

nlohmann::json encode_tree(const Tree& tree);
Tree decode_tree(const nlohmann::json& j);
nlohmann::json encode_forest(const Forest& forest);
Forest decode_forest(const nlohmann::json& j);

}  // namespace cmox
