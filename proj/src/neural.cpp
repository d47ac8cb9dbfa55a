#include "cmox/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cmox/error.hpp"
#include "cmox/eval.hpp"
#include "cmox/random.hpp"

namespace cmox {

using Mat = Eigen::MatrixXd;

std::string_view to_string(NeuralVariant v) { return v == NeuralVariant::lstm ? "lstm" : "lstm_attn"; }

NeuralVariant parse_variant(std::string_view name) {
    if (name == "lstm") return NeuralVariant::lstm;
    if (name == "lstm_attn" || name == "lstm-attn") return NeuralVariant::lstm_attn;
    throw Error("unknown neural variant '" + std::string(name) + "'");
}

std::vector<std::pair<std::string, Mat*>> NeuralParams::tensors() {
    std::vector<std::pair<std::string, Mat*>> all = {
        {"embedding", &embedding},
        {"lstm_fwd.w_input", &fwd_w_input},
        {"lstm_fwd.w_hidden", &fwd_w_hidden},
        {"lstm_fwd.bias", &fwd_bias},
        {"lstm_bwd.w_input", &bwd_w_input},
        {"lstm_bwd.w_hidden", &bwd_w_hidden},
        {"lstm_bwd.bias", &bwd_bias},
        {"attention.proj", &attn_proj},
        {"attention.proj_bias", &attn_proj_bias},
        {"attention.context", &attn_context},
        {"output.weight", &out_weight},
        {"output.bias", &out_bias},
    };
    std::erase_if(all, [](const auto& t) { return t.second->size() == 0; });
    return all;
}

std::vector<std::pair<std::string, const Mat*>> NeuralParams::tensors() const {
    std::vector<std::pair<std::string, const Mat*>> out;
    for (const auto& [name, ptr] : const_cast<NeuralParams*>(this)->tensors()) out.emplace_back(name, ptr);
    return out;
}

Eigen::Index NeuralParams::parameter_count() const {
    Eigen::Index n = 0;
    for (const auto& [name, t] : tensors()) n += t->size();
    return n;
}

NeuralParams NeuralParams::zeros_like() const {
    NeuralParams z;
    const auto shape_of = [](const Mat& m) { return Mat::Zero(m.rows(), m.cols()); };
    z.embedding = shape_of(embedding);
    z.fwd_w_input = shape_of(fwd_w_input);
    z.fwd_w_hidden = shape_of(fwd_w_hidden);
    z.fwd_bias = shape_of(fwd_bias);
    z.bwd_w_input = shape_of(bwd_w_input);
    z.bwd_w_hidden = shape_of(bwd_w_hidden);
    z.bwd_bias = shape_of(bwd_bias);
    z.attn_proj = shape_of(attn_proj);
    z.attn_proj_bias = shape_of(attn_proj_bias);
    z.attn_context = shape_of(attn_context);
    z.out_weight = shape_of(out_weight);
    z.out_bias = shape_of(out_bias);
    return z;
}

namespace {

void glorot(Mat& m, Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    m.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(-limit, limit);
    }
}

Mat sigmoid(const Mat& z) { return (1.0 / (1.0 + (-z.array()).exp())).matrix(); }

}  // namespace

NeuralModel init_model(int vocab_size, int n_classes, std::uint64_t seed, NeuralVariant variant,
                       const NeuralConfig& config, const Mat* pretrained) {
    if (vocab_size < 2) throw Error("init_model: vocabulary must hold at least PAD and UNK");
    if (n_classes < 2) throw Error("init_model: at least two classes required");
    if (config.embed_dim < 1 || config.hidden < 1 || config.attention < 1) {
        throw Error("init_model: layer sizes must be positive");
    }
    if (!(config.dropout >= 0.0 && config.dropout < 1.0)) throw Error("init_model: dropout must be in [0, 1)");
    const int d = config.embed_dim;
    const int h = config.hidden;
    const int a = config.attention;

    NeuralModel model;
    model.variant = variant;
    model.config = config;
    for (int c = 0; c < n_classes; ++c) model.labels.push_back(std::to_string(c));
    auto& p = model.params;
    Rng rng(seed);

    glorot(p.embedding, vocab_size, d, rng);
    if (pretrained) {
        if (pretrained->cols() != d) {
            throw Error("init_model: pretrained embedding dimension " + std::to_string(pretrained->cols()) +
                        " does not match " + std::to_string(d));
        }
        if (pretrained->rows() != vocab_size) {
            throw Error("init_model: pretrained table has " + std::to_string(pretrained->rows()) +
                        " rows for a vocabulary of " + std::to_string(vocab_size));
        }
        p.embedding = *pretrained;
    }
    p.embedding.row(0).setZero();

    glorot(p.fwd_w_input, d, 4 * h, rng);
    glorot(p.fwd_w_hidden, h, 4 * h, rng);
    glorot(p.bwd_w_input, d, 4 * h, rng);
    glorot(p.bwd_w_hidden, h, 4 * h, rng);
    for (auto* bias : {&p.fwd_bias, &p.bwd_bias}) {
        *bias = Mat::Zero(1, 4 * h);
        bias->middleCols(h, h).setOnes();
    }
    if (variant == NeuralVariant::lstm_attn) {
        glorot(p.attn_proj, 2 * h, a, rng);
        p.attn_proj_bias = Mat::Zero(1, a);
        glorot(p.attn_context, a, 1, rng);
    }
    glorot(p.out_weight, 2 * h, n_classes, rng);
    p.out_bias = Mat::Zero(1, n_classes);
    return model;
}

namespace {

using Step = ForwardCache::Step;

void run_direction(const Mat& embedding, const Mat& w_input, const Mat& w_hidden, const Mat& bias,
                   ForwardCache& cache, bool reverse, std::vector<Step>& steps) {
    const int b = cache.batch;
    const auto h = w_hidden.rows();
    const auto d = embedding.cols();
    steps.assign(static_cast<std::size_t>(cache.steps), {});
    Mat hs = Mat::Zero(b, h);
    Mat cs = Mat::Zero(b, h);
    for (int k = 0; k < cache.steps; ++k) {
        const int t = reverse ? cache.steps - 1 - k : k;
        Step& s = steps[static_cast<std::size_t>(t)];
        s.x.resize(b, d);
        s.mask.resize(b);
        for (int r = 0; r < b; ++r) {
            s.x.row(r) = embedding.row(cache.ids[static_cast<std::size_t>(r)][static_cast<std::size_t>(t)]);
            s.mask(r) = t < cache.lengths[static_cast<std::size_t>(r)] ? 1.0 : 0.0;
        }
        s.h_prev = hs;
        s.c_prev = cs;
        Mat z = s.x * w_input;
        z.noalias() += hs * w_hidden;
        z.rowwise() += bias.row(0);
        s.i = sigmoid(z.leftCols(h));
        s.f = sigmoid(z.middleCols(h, h));
        s.g = z.middleCols(2 * h, h).array().tanh().matrix();
        s.o = sigmoid(z.rightCols(h));
        Mat c_new = s.f.cwiseProduct(cs) + s.i.cwiseProduct(s.g);
        s.tanh_c = c_new.array().tanh().matrix();
        Mat h_new = s.o.cwiseProduct(s.tanh_c);
        for (int r = 0; r < b; ++r) {
            if (s.mask(r) == 0.0) {
                c_new.row(r) = cs.row(r);
                h_new.row(r) = hs.row(r);
            }
        }
        s.c = c_new;
        s.h = h_new;
        cs = std::move(c_new);
        hs = std::move(h_new);
    }
}

void backprop_direction(const Mat& w_input, const Mat& w_hidden, const ForwardCache& cache,
                        const std::vector<Step>& steps, bool reverse, const std::vector<Mat>& d_out,
                        Mat& d_w_input, Mat& d_w_hidden, Mat& d_bias, Mat& d_embedding) {
    const auto h = w_hidden.rows();
    Mat dh_next = Mat::Zero(cache.batch, h);
    Mat dc_next = Mat::Zero(cache.batch, h);
    Mat dz(cache.batch, 4 * h);
    for (int k = cache.steps - 1; k >= 0; --k) {
        const int t = reverse ? cache.steps - 1 - k : k;
        const Step& s = steps[static_cast<std::size_t>(t)];
        const Mat dh = dh_next + d_out[static_cast<std::size_t>(t)];
        const Mat& dc = dc_next;
        const auto mask = s.mask.array();
        const Eigen::ArrayXXd dh_a = dh.array().colwise() * mask;
        const Eigen::ArrayXXd dc_a = dc.array().colwise() * mask;

        const Eigen::ArrayXXd d_o = dh_a * s.tanh_c.array();
        const Eigen::ArrayXXd dct = dc_a + dh_a * s.o.array() * (1.0 - s.tanh_c.array().square());
        dz.leftCols(h) = (dct * s.g.array() * s.i.array() * (1.0 - s.i.array())).matrix();
        dz.middleCols(h, h) = (dct * s.c_prev.array() * s.f.array() * (1.0 - s.f.array())).matrix();
        dz.middleCols(2 * h, h) = (dct * s.i.array() * (1.0 - s.g.array().square())).matrix();
        dz.rightCols(h) = (d_o * s.o.array() * (1.0 - s.o.array())).matrix();

        d_w_input.noalias() += s.x.transpose() * dz;
        d_w_hidden.noalias() += s.h_prev.transpose() * dz;
        d_bias += dz.colwise().sum();
        const Mat dx = dz * w_input.transpose();
        for (int r = 0; r < cache.batch; ++r) {
            if (s.mask(r) != 0.0) {
                d_embedding.row(cache.ids[static_cast<std::size_t>(r)][static_cast<std::size_t>(t)]) += dx.row(r);
            }
        }
        const auto inactive = 1.0 - mask;
        Mat dh_prev = dz * w_hidden.transpose();
        dh_prev.array() += dh.array().colwise() * inactive;
        Mat dc_prev = (dct * s.f.array()).matrix();
        dc_prev.array() += dc.array().colwise() * inactive;
        dh_next = std::move(dh_prev);
        dc_next = std::move(dc_prev);
    }
}

}  // namespace

ForwardResult forward(const NeuralModel& model, std::span<const IdSequence> batch, bool train_mode,
                      std::uint64_t dropout_seed) {
    if (batch.empty()) throw Error("forward: empty batch");
    const auto& p = model.params;
    const auto max_len = batch.front().ids.size();
    ForwardCache cache;
    cache.batch = static_cast<int>(batch.size());
    for (const auto& seq : batch) {
        if (seq.ids.size() != max_len) throw Error("forward: sequences in a batch must share max_len");
        if (seq.true_length < 1) throw Error("forward: all-PAD sequence (empty text must be filtered upstream)");
        if (seq.true_length > static_cast<int>(max_len)) throw Error("forward: true_length exceeds max_len");
        for (const int id : seq.ids) {
            if (id < 0 || id >= model.vocab_size()) throw Error("forward: token id " + std::to_string(id) + " out of range");
        }
        cache.steps = std::max(cache.steps, seq.true_length);
        cache.lengths.push_back(seq.true_length);
        cache.ids.emplace_back(seq.ids.begin(), seq.ids.end());
    }

    run_direction(p.embedding, p.fwd_w_input, p.fwd_w_hidden, p.fwd_bias, cache, false, cache.fwd);
    run_direction(p.embedding, p.bwd_w_input, p.bwd_w_hidden, p.bwd_bias, cache, true, cache.bwd);

    const int b = cache.batch;
    const auto h = p.fwd_w_hidden.rows();
    cache.states.resize(static_cast<std::size_t>(cache.steps));
    for (int t = 0; t < cache.steps; ++t) {
        auto& st = cache.states[static_cast<std::size_t>(t)];
        st.resize(b, 2 * h);
        st.leftCols(h) = cache.fwd[static_cast<std::size_t>(t)].h;
        st.rightCols(h) = cache.bwd[static_cast<std::size_t>(t)].h;
    }

    Mat pooled;
    ForwardResult result;
    if (model.variant == NeuralVariant::lstm_attn) {
        Mat scores(b, cache.steps);
        cache.attn_hidden.resize(static_cast<std::size_t>(cache.steps));
        for (int t = 0; t < cache.steps; ++t) {
            Mat u = cache.states[static_cast<std::size_t>(t)] * p.attn_proj;
            u.rowwise() += p.attn_proj_bias.row(0);
            u = u.array().tanh().matrix();
            scores.col(t) = u * p.attn_context;
            cache.attn_hidden[static_cast<std::size_t>(t)] = std::move(u);
        }
        cache.attention = Mat::Zero(b, cache.steps);
        for (int r = 0; r < b; ++r) {
            const int len = cache.lengths[static_cast<std::size_t>(r)];
            const double m = scores.row(r).head(len).maxCoeff();
            double z = 0.0;
            for (int t = 0; t < len; ++t) z += (cache.attention(r, t) = std::exp(scores(r, t) - m));
            cache.attention.row(r).head(len) /= z;
        }
        pooled = Mat::Zero(b, 2 * h);
        for (int t = 0; t < cache.steps; ++t) {
            pooled.array() += cache.states[static_cast<std::size_t>(t)].array().colwise() * cache.attention.col(t).array();
        }
        result.attention = Mat::Zero(b, static_cast<Eigen::Index>(max_len));
        result.attention.leftCols(cache.steps) = cache.attention;
    } else {
        pooled.resize(b, 2 * h);
        pooled.leftCols(h) = cache.fwd[static_cast<std::size_t>(cache.steps - 1)].h;  // frozen past each sequence end
        pooled.rightCols(h) = cache.bwd[0].h;
    }

    if (train_mode && model.config.dropout > 0.0) {
        const double keep = 1.0 - model.config.dropout;
        Rng rng(dropout_seed);
        cache.dropout_mask.resize(b, 2 * h);
        for (int r = 0; r < b; ++r) {
            for (Eigen::Index c = 0; c < 2 * h; ++c) {
                cache.dropout_mask(r, c) = rng.uniform() < model.config.dropout ? 0.0 : 1.0 / keep;
            }
        }
        pooled = pooled.cwiseProduct(cache.dropout_mask);
    }
    cache.pooled = std::move(pooled);
    cache.logits = cache.pooled * p.out_weight;
    cache.logits.rowwise() += p.out_bias.row(0);

    result.probabilities = cache.logits;
    for (int r = 0; r < b; ++r) {
        auto row = result.probabilities.row(r);
        const double m = row.maxCoeff();
        row = (row.array() - m).exp().matrix();
        row /= row.sum();
    }
    result.cache = std::move(cache);
    return result;
}

BackwardResult backward(const NeuralModel& model, std::span<const int> labels, const ForwardCache& cache) {
    const auto& p = model.params;
    const int b = cache.batch;
    const int k = model.n_classes();
    if (static_cast<int>(labels.size()) != b) throw Error("backward: label count does not match the batch");
    for (const int y : labels) {
        if (y < 0 || y >= k) throw Error("backward: label index " + std::to_string(y) + " out of range");
    }

    BackwardResult out;
    out.grads = p.zeros_like();
    auto& g = out.grads;

    // Softmax cross-entropy.
    Mat d_logits(b, k);
    double loss = 0.0;
    for (int r = 0; r < b; ++r) {
        const auto row = cache.logits.row(r);
        const double m = row.maxCoeff();
        const double lse = m + std::log((row.array() - m).exp().sum());
        loss += lse - row(labels[static_cast<std::size_t>(r)]);
        d_logits.row(r) = (row.array() - lse).exp().matrix();
        d_logits(r, labels[static_cast<std::size_t>(r)]) -= 1.0;
    }
    out.loss = loss / b;
    d_logits /= b;

    g.out_weight.noalias() = cache.pooled.transpose() * d_logits;
    g.out_bias = d_logits.colwise().sum();
    Mat d_pooled = d_logits * p.out_weight.transpose();
    if (cache.dropout_mask.size() > 0) d_pooled = d_pooled.cwiseProduct(cache.dropout_mask);

    const auto h = p.fwd_w_hidden.rows();
    std::vector<Mat> d_fwd(static_cast<std::size_t>(cache.steps), Mat::Zero(b, h));
    std::vector<Mat> d_bwd(static_cast<std::size_t>(cache.steps), Mat::Zero(b, h));

    if (model.variant == NeuralVariant::lstm_attn) {
        const auto& alpha = cache.attention;
        Mat d_alpha(b, cache.steps);
        for (int t = 0; t < cache.steps; ++t) {
            d_alpha.col(t) = d_pooled.cwiseProduct(cache.states[static_cast<std::size_t>(t)]).rowwise().sum();
        }
        const Eigen::VectorXd weighted = alpha.cwiseProduct(d_alpha).rowwise().sum();
        const Mat d_scores = (alpha.array() * (d_alpha.colwise() - weighted).array()).matrix();
        for (int t = 0; t < cache.steps; ++t) {
            const auto& st = cache.states[static_cast<std::size_t>(t)];
            const auto& u = cache.attn_hidden[static_cast<std::size_t>(t)];
            g.attn_context.noalias() += u.transpose() * d_scores.col(t);
            const Mat d_pre = ((d_scores.col(t) * p.attn_context.transpose()).array() * (1.0 - u.array().square())).matrix();
            g.attn_proj.noalias() += st.transpose() * d_pre;
            g.attn_proj_bias += d_pre.colwise().sum();
            Mat d_state = d_pre * p.attn_proj.transpose();
            d_state.array() += d_pooled.array().colwise() * alpha.col(t).array();
            d_fwd[static_cast<std::size_t>(t)] = d_state.leftCols(h);
            d_bwd[static_cast<std::size_t>(t)] = d_state.rightCols(h);
        }
    } else {
        d_fwd[static_cast<std::size_t>(cache.steps - 1)] = d_pooled.leftCols(h);
        d_bwd[0] = d_pooled.rightCols(h);
    }

    backprop_direction(p.fwd_w_input, p.fwd_w_hidden, cache, cache.fwd, false, d_fwd, g.fwd_w_input, g.fwd_w_hidden,
                       g.fwd_bias, g.embedding);
    backprop_direction(p.bwd_w_input, p.bwd_w_hidden, cache, cache.bwd, true, d_bwd, g.bwd_w_input, g.bwd_w_hidden,
                       g.bwd_bias, g.embedding);
    return out;
}

double batch_loss(const NeuralModel& model, std::span<const IdSequence> batch, std::span<const int> labels,
                  bool train_mode, std::uint64_t dropout_seed) {
    const auto fr = forward(model, batch, train_mode, dropout_seed);
    double loss = 0.0;
    for (int r = 0; r < fr.cache.batch; ++r) {
        const auto row = fr.cache.logits.row(r);
        const double m = row.maxCoeff();
        loss += m + std::log((row.array() - m).exp().sum()) - row(labels[static_cast<std::size_t>(r)]);
    }
    return loss / fr.cache.batch;
}

Mat predict_proba(const NeuralModel& model, std::span<const IdSequence> sequences, int batch_size) {
    Mat probs(static_cast<Eigen::Index>(sequences.size()), model.n_classes());
    for (std::size_t start = 0; start < sequences.size(); start += static_cast<std::size_t>(batch_size)) {
        const auto n = std::min(sequences.size() - start, static_cast<std::size_t>(batch_size));
        const auto fr = forward(model, sequences.subspan(start, n), false);
        probs.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(n)) = fr.probabilities;
    }
    return probs;
}

std::string TrainRun::to_jsonl() const {
    std::string out;
    for (const auto& e : epochs) {
        out += nlohmann::json{{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"valid_weighted_f1", e.valid_weighted_f1}}
                   .dump();
        out += '\n';
    }
    return out;
}

TrainResult train_neural(NeuralModel model, const EncodedSet& train, const EncodedSet& valid,
                         const TrainOptions& options) {
    if (train.sequences.empty()) throw Error("train_neural: empty training set");
    if (valid.sequences.empty()) throw Error("train_neural: empty validation set");
    if (train.sequences.size() != train.labels.size() || valid.sequences.size() != valid.labels.size()) {
        throw Error("train_neural: sequence and label counts differ");
    }
    if (options.epochs < 1 || options.batch_size < 1) throw Error("train_neural: epochs and batch size must be positive");

    auto first = model.params.zeros_like();
    auto second = model.params.zeros_like();
    auto params = model.params.tensors();
    auto m1 = first.tensors();
    auto m2 = second.tensors();

    std::vector<std::size_t> order(train.sequences.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(options.seed);

    TrainResult result;
    result.run.best_valid_f1 = -1.0;
    std::int64_t step = 0;
    std::vector<IdSequence> batch;
    std::vector<int> labels;
    for (int epoch = 1; epoch <= options.epochs; ++epoch) {
        rng.shuffle(std::span(order));
        double loss_sum = 0.0;
        int batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(options.batch_size), ++batch_index) {
            const auto end = std::min(order.size(), start + static_cast<std::size_t>(options.batch_size));
            batch.clear();
            labels.clear();
            for (auto i = start; i < end; ++i) {
                batch.push_back(train.sequences[order[i]]);
                labels.push_back(train.labels[order[i]]);
            }
            const auto dropout_seed = derive_seed(options.seed, static_cast<std::uint64_t>(epoch) << 32 | static_cast<std::uint64_t>(batch_index));
            const auto fr = forward(model, batch, true, dropout_seed);
            auto br = backward(model, labels, fr.cache);
            if (!std::isfinite(br.loss)) {
                throw Error("train_neural: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batch_index + 1));
            }
            loss_sum += br.loss * static_cast<double>(batch.size());

            ++step;
            const double c1 = 1.0 - std::pow(options.beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(options.beta2, static_cast<double>(step));
            auto grads = br.grads.tensors();
            for (std::size_t t = 0; t < params.size(); ++t) {
                auto& p = *params[t].second;
                auto& g = *grads[t].second;
                auto& m = *m1[t].second;
                auto& v = *m2[t].second;
                m = options.beta1 * m + (1.0 - options.beta1) * g;
                v = options.beta2 * v + (1.0 - options.beta2) * g.cwiseAbs2();
                p.array() -= options.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + options.epsilon);
            }
        }

        const Mat probs = predict_proba(model, valid.sequences);
        std::vector<int> pred(valid.sequences.size());
        for (Eigen::Index r = 0; r < probs.rows(); ++r) {
            Eigen::Index arg = 0;
            probs.row(r).maxCoeff(&arg);
            pred[static_cast<std::size_t>(r)] = static_cast<int>(arg);
        }
        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(order.size());
        rec.valid_weighted_f1 = weighted_f1(valid.labels, pred, model.n_classes());
        result.run.epochs.push_back(rec);
        if (rec.valid_weighted_f1 > result.run.best_valid_f1) {
            result.run.best_valid_f1 = rec.valid_weighted_f1;
            result.run.best_epoch = epoch;
            result.best = model;
        }
    }
    return result;
}

nlohmann::json encode_neural(const NeuralModel& model, ModelContainer& out) {
    for (const auto& [name, t] : model.params.tensors()) out.add_matrix(name, *t);
    return {{"kind", to_string(model.variant)},
            {"labels", model.labels},
            {"config",
             {{"embed_dim", model.config.embed_dim},
              {"hidden", model.config.hidden},
              {"attention", model.config.attention},
              {"dropout", model.config.dropout}}},
            {"shape", {{"vocab", model.vocab_size()}, {"classes", model.n_classes()}}},
            {"parameters", model.params.parameter_count()}};
}

NeuralModel decode_neural(const nlohmann::json& section, const ModelContainer& in) {
    NeuralModel model;
    model.variant = parse_variant(section.at("kind").get<std::string>());
    model.labels = section.at("labels").get<std::vector<std::string>>();
    const auto& cfg = section.at("config");
    model.config.embed_dim = cfg.at("embed_dim").get<int>();
    model.config.hidden = cfg.at("hidden").get<int>();
    model.config.attention = cfg.at("attention").get<int>();
    model.config.dropout = cfg.at("dropout").get<double>();

    auto& p = model.params;
    const int d = model.config.embed_dim;
    const int h = model.config.hidden;
    const int a = model.config.attention;
    const auto k = static_cast<Eigen::Index>(model.labels.size());
    auto load = [&](const char* name, Mat& dst, Eigen::Index rows, Eigen::Index cols) {
        dst = in.matrix(name);
        if ((rows >= 0 && dst.rows() != rows) || dst.cols() != cols) {
            throw Error(std::string("decode_neural: tensor '") + name + "' has an unexpected shape");
        }
    };
    load("embedding", p.embedding, -1, d);
    load("lstm_fwd.w_input", p.fwd_w_input, d, 4 * h);
    load("lstm_fwd.w_hidden", p.fwd_w_hidden, h, 4 * h);
    load("lstm_fwd.bias", p.fwd_bias, 1, 4 * h);
    load("lstm_bwd.w_input", p.bwd_w_input, d, 4 * h);
    load("lstm_bwd.w_hidden", p.bwd_w_hidden, h, 4 * h);
    load("lstm_bwd.bias", p.bwd_bias, 1, 4 * h);
    if (model.variant == NeuralVariant::lstm_attn) {
        load("attention.proj", p.attn_proj, 2 * h, a);
        load("attention.proj_bias", p.attn_proj_bias, 1, a);
        load("attention.context", p.attn_context, a, 1);
    }
    load("output.weight", p.out_weight, 2 * h, k);
    load("output.bias", p.out_bias, 1, k);
    return model;
}

}  // namespace cmox
