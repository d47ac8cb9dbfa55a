#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "cmox/container.hpp"
#include "cmox/features.hpp"

namespace cmox {

/// Training data shared by the classical classifiers: sparse rows with
/// class indices into `labels`.
struct Dataset {
    std::vector<SparseVector> X;
    std::vector<int> y;
    std::vector<std::string> labels;

    int n_classes() const { return static_cast<int>(labels.size()); }
    std::size_t n_features() const { return X.empty() ? 0 : X.front().dim; }

    /// Throws unless |X| = |y| >= n_classes, dims agree, every class has
    /// at least one example and every y is a valid index.
    void validate(std::string_view who) const;
};

enum class LinearKind { logreg, svm };

struct TrainConfig {
    double C = 1.0;          // inverse regularization strength
    int max_iter = 1000;     // L-BFGS iterations (logreg) or epochs (svm)
    double tol = 1e-4;
    std::uint64_t seed = 0;
    int batch_size = 1;      // svm: examples per subgradient step

    static TrainConfig logreg(double C) { return {C, 1000, 1e-4, 0, 1}; }
    static TrainConfig svm(double C, std::uint64_t seed = 0, int batch_size = 8) {
        return {C, 100, 1e-4, seed, batch_size};
    }
};

struct LinearModel {
    LinearKind kind = LinearKind::logreg;
    std::vector<std::string> labels;
    double C = 1.0;
    Eigen::MatrixXd weights;  // n_classes x n_features
    Eigen::VectorXd bias;     // n_classes
    int iterations = 0;
    bool converged = false;

    int n_classes() const { return static_cast<int>(weights.rows()); }
    std::size_t n_features() const { return static_cast<std::size_t>(weights.cols()); }
};

/// Multinomial logistic regression. Minimizes
///   (1/n) * [ sum_i CE(x_i, y_i) + ||W||^2 / (2C) ]
/// (bias unregularized) with L-BFGS from a zero start.
LinearModel train_logreg(const Dataset& data, const TrainConfig& config);

/// Value and gradient of the logreg objective above. Gradients are
/// written when the output pointers are non-null.
double logreg_objective(const Eigen::MatrixXd& W, const Eigen::VectorXd& b, const Dataset& data,
                        double C, Eigen::MatrixXd* grad_w = nullptr, Eigen::VectorXd* grad_b = nullptr);

/// One-vs-rest linear SVM trained with averaged mini-batch Pegasos
/// (step 1/(lambda t), uniform iterate averaging). For each class,
/// minimizes lambda/2 (||w||^2 + b^2) + (1/n) sum hinge with
/// lambda = 1/(C n); the bias is a regularized constant feature.
/// The shuffling schedule depends only on the seed, so every binary
/// subproblem sees the same sample order. When `objective_trace` is given
/// it receives, per class, the objective of the averaged iterate after
/// each epoch.
LinearModel train_svm(const Dataset& data, const TrainConfig& config,
                      std::vector<std::vector<double>>* objective_trace = nullptr);

/// Primal objective of one binary subproblem (targets +1/-1).
double svm_objective(const Eigen::VectorXd& w, double b, const Dataset& data,
                     const std::vector<double>& targets, double lambda);

struct Prediction {
    int label = 0;
    std::vector<double> scores;  // softmax probabilities (logreg) or margins (svm)
};

Prediction predict_linear(const LinearModel& model, const SparseVector& x);

nlohmann::json encode_linear(const LinearModel& model, ModelContainer& out, const std::string& prefix = "");
LinearModel decode_linear(const nlohmann::json& section, const ModelContainer& in,
                          const std::string& prefix = "");

std::string_view to_string(LinearKind kind);

}  // namespace cmox
