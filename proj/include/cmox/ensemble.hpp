#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cmox/container.hpp"
#include "cmox/forest.hpp"
#include "cmox/linear_models.hpp"

namespace cmox {

/// Plurality vote. `predictions` must be ordered by member priority,
/// highest first; a tie between labels goes to the label proposed by the
/// highest-priority member among the tied labels' proposers.
int vote(std::span<const int> predictions);

struct EnsembleMember {
    std::string name;
    std::variant<LinearModel, Forest, Tree> model;
};

/// Hard-voting ensemble. Members are stored in priority order.
struct EnsembleModel {
    std::vector<EnsembleMember> members;
    std::vector<std::string> labels;
};

struct EnsembleConfig {
    TrainConfig svm = TrainConfig::svm(1.0);
    TrainConfig logreg = TrainConfig::logreg(1.0);
    ForestParams forest;
    TreeParams tree;
};

/// Trains SVM, LR, RF and DT (that priority order) on the same data.
EnsembleModel train_ensemble(const Dataset& data, const EnsembleConfig& config);

/// Builds an ensemble from already trained members (priority order).
EnsembleModel make_ensemble(std::vector<EnsembleMember> members);

Prediction predict_member(const EnsembleMember& member, const SparseVector& x);

/// Scores are the members' vote shares per class.
Prediction predict_ensemble(const EnsembleModel& model, const SparseVector& x);

nlohmann::json encode_ensemble(const EnsembleModel& model, ModelContainer& out);
EnsembleModel decode_ensemble(const nlohmann::json& section, const ModelContainer& in);

}  // namespace cmox
