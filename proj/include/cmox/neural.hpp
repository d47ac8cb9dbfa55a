#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cmox/container.hpp"
#include "cmox/features.hpp"

namespace cmox {

enum class NeuralVariant { lstm, lstm_attn };

std::string_view to_string(NeuralVariant v);
NeuralVariant parse_variant(std::string_view name);

struct NeuralConfig {
    int embed_dim = 100;
    int hidden = 100;     // units per direction; the BiLSTM output is 2 * hidden wide
    int attention = 20;   // projection width of the attention scorer
    double dropout = 0.1; // applied to the pooled representation in training mode
};

/// Every trainable tensor, stored as a dense matrix (biases are 1 x n,
/// the attention context is n x 1). Gate blocks are ordered i, f, g, o.
/// The same layout holds gradients and Adam moments.
struct NeuralParams {
    Eigen::MatrixXd embedding;                      // V x D, row 0 is PAD
    Eigen::MatrixXd fwd_w_input, fwd_w_hidden, fwd_bias;  // D x 4H, H x 4H, 1 x 4H
    Eigen::MatrixXd bwd_w_input, bwd_w_hidden, bwd_bias;
    Eigen::MatrixXd attn_proj, attn_proj_bias, attn_context;  // 2H x A, 1 x A, A x 1 (empty without attention)
    Eigen::MatrixXd out_weight, out_bias;           // 2H x k, 1 x k

    /// Named non-empty tensors in a fixed order.
    std::vector<std::pair<std::string, Eigen::MatrixXd*>> tensors();
    std::vector<std::pair<std::string, const Eigen::MatrixXd*>> tensors() const;
    Eigen::Index parameter_count() const;
    NeuralParams zeros_like() const;
};

struct NeuralModel {
    NeuralVariant variant = NeuralVariant::lstm_attn;
    NeuralConfig config;
    NeuralParams params;
    std::vector<std::string> labels;

    int n_classes() const { return static_cast<int>(params.out_bias.cols()); }
    int vocab_size() const { return static_cast<int>(params.embedding.rows()); }
};

/// Glorot-uniform weights, zero biases except the forget gates (1.0).
/// A pretrained table replaces the embedding initialization (PAD row is
/// forced to zero) and stays trainable.
NeuralModel init_model(int vocab_size, int n_classes, std::uint64_t seed, NeuralVariant variant,
                       const NeuralConfig& config = {}, const Eigen::MatrixXd* pretrained = nullptr);

/// Intermediate values of one forward pass, consumed by backward().
struct ForwardCache {
    struct Step {
        Eigen::MatrixXd x, h_prev, c_prev, i, f, g, o, c, tanh_c, h;
        Eigen::VectorXd mask;  // 1 where the position is inside the sequence
    };
    int batch = 0;
    int steps = 0;
    std::vector<std::vector<int>> ids;  // batch x steps
    std::vector<int> lengths;
    std::vector<Step> fwd, bwd;         // indexed by position
    std::vector<Eigen::MatrixXd> states;  // per position, batch x 2H
    std::vector<Eigen::MatrixXd> attn_hidden;  // per position, tanh(states P + b)
    Eigen::MatrixXd attention;           // batch x steps
    Eigen::MatrixXd pooled;              // after dropout
    Eigen::MatrixXd dropout_mask;        // empty when not in training mode
    Eigen::MatrixXd logits;
};

struct ForwardResult {
    Eigen::MatrixXd probabilities;  // batch x k
    Eigen::MatrixXd attention;      // batch x max_len, zero at PAD; empty for the lstm variant
    ForwardCache cache;
};

/// Throws on an empty batch, mixed sequence lengths or an all-PAD sequence.
ForwardResult forward(const NeuralModel& model, std::span<const IdSequence> batch, bool train_mode,
                      std::uint64_t dropout_seed = 0);

struct BackwardResult {
    NeuralParams grads;
    double loss = 0.0;  // mean cross-entropy over the batch
};

BackwardResult backward(const NeuralModel& model, std::span<const int> labels, const ForwardCache& cache);

/// Mean cross-entropy of a deterministic (or seeded-dropout) forward pass.
double batch_loss(const NeuralModel& model, std::span<const IdSequence> batch, std::span<const int> labels,
                  bool train_mode = false, std::uint64_t dropout_seed = 0);

struct EncodedSet {
    std::vector<IdSequence> sequences;
    std::vector<int> labels;
};

struct TrainOptions {
    int epochs = 20;
    int batch_size = 32;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double valid_weighted_f1 = 0.0;
};

struct TrainRun {
    std::vector<EpochRecord> epochs;
    int best_epoch = 0;
    double best_valid_f1 = 0.0;

    /// One {"epoch", "train_loss", "valid_weighted_f1"} object per line.
    std::string to_jsonl() const;
};

struct TrainResult {
    TrainRun run;
    NeuralModel best;  // snapshot from best_epoch
};

/// Adam over shuffled mini-batches. After each epoch the validation
/// weighted F1 is measured and the best parameters are kept (earliest
/// epoch on ties). Throws with the epoch and batch if the loss diverges.
TrainResult train_neural(NeuralModel model, const EncodedSet& train, const EncodedSet& valid,
                         const TrainOptions& options);

/// Class probabilities, batch_size sequences at a time, no dropout.
Eigen::MatrixXd predict_proba(const NeuralModel& model, std::span<const IdSequence> sequences,
                              int batch_size = 64);

nlohmann::json encode_neural(const NeuralModel& model, ModelContainer& out);
NeuralModel decode_neural(const nlohmann::json& section, const ModelContainer& in);

}  // namespace cmox
