#include "cmox/linear_models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cmox/error.hpp"
#include "cmox/lbfgs.hpp"
#include "cmox/random.hpp"

namespace cmox {

void Dataset::validate(std::string_view who) const {
    const std::string w(who);
    if (X.size() != y.size()) throw Error(w + ": feature and label counts differ");
    if (labels.empty()) throw Error(w + ": empty label codebook");
    if (X.size() < labels.size()) throw Error(w + ": fewer examples than classes");
    std::vector<std::size_t> support(labels.size(), 0);
    const auto dim = n_features();
    for (std::size_t i = 0; i < X.size(); ++i) {
        if (X[i].dim != dim) throw Error(w + ": example " + std::to_string(i) + " has a different dimension");
        if (y[i] < 0 || y[i] >= n_classes()) {
            throw Error(w + ": label index " + std::to_string(y[i]) + " out of range");
        }
        ++support[static_cast<std::size_t>(y[i])];
    }
    for (std::size_t c = 0; c < support.size(); ++c) {
        if (support[c] == 0) throw Error(w + ": class '" + labels[c] + "' has no examples");
    }
}

namespace {

Eigen::VectorXd scores_of(const Eigen::MatrixXd& W, const Eigen::VectorXd& b, const SparseVector& x) {
    Eigen::VectorXd s = b;
    for (const auto& e : x.entries) s.noalias() += e.value * W.col(e.index);
    return s;
}

// In-place softmax; returns log-sum-exp of the input.
double softmax_inplace(Eigen::VectorXd& v) {
    const double m = v.maxCoeff();
    v = (v.array() - m).exp();
    const double z = v.sum();
    v /= z;
    return m + std::log(z);
}

int argmax_lowest(const Eigen::VectorXd& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i) {
        if (v(i) > v(best)) best = i;
    }
    return best;
}

}  // namespace

double logreg_objective(const Eigen::MatrixXd& W, const Eigen::VectorXd& b, const Dataset& data,
                        double C, Eigen::MatrixXd* grad_w, Eigen::VectorXd* grad_b) {
    const double n = static_cast<double>(data.X.size());
    if (grad_w) grad_w->setZero(W.rows(), W.cols());
    if (grad_b) grad_b->setZero(b.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < data.X.size(); ++i) {
        Eigen::VectorXd p = scores_of(W, b, data.X[i]);
        const double score_y = p(data.y[i]);
        loss += softmax_inplace(p) - score_y;
        p(data.y[i]) -= 1.0;
        if (grad_w) {
            for (const auto& e : data.X[i].entries) grad_w->col(e.index).noalias() += e.value * p;
        }
        if (grad_b) *grad_b += p;
    }
    const double reg = W.squaredNorm() / (2.0 * C);
    if (grad_w) *grad_w = (*grad_w + W / C) / n;
    if (grad_b) *grad_b /= n;
    return (loss + reg) / n;
}

LinearModel train_logreg(const Dataset& data, const TrainConfig& config) {
    data.validate("train_logreg");
    if (!(config.C > 0.0)) throw Error("train_logreg: C must be positive");
    const auto k = static_cast<Eigen::Index>(data.n_classes());
    const auto f = static_cast<Eigen::Index>(data.n_features());
    const Eigen::Index nw = k * f;

    auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
        const Eigen::Map<const Eigen::MatrixXd> W(x.data(), k, f);
        const Eigen::Map<const Eigen::VectorXd> b(x.data() + nw, k);
        Eigen::MatrixXd gw;
        Eigen::VectorXd gb;
        const double v = logreg_objective(W, b, data, config.C, &gw, &gb);
        grad.resize(x.size());
        grad.head(nw) = Eigen::Map<const Eigen::VectorXd>(gw.data(), nw);
        grad.tail(k) = gb;
        return v;
    };

    LbfgsOptions opts;
    opts.max_iter = config.max_iter;
    opts.tol = config.tol;
    const auto res = lbfgs_minimize(objective, Eigen::VectorXd::Zero(nw + k), opts);

    LinearModel model;
    model.kind = LinearKind::logreg;
    model.labels = data.labels;
    model.C = config.C;
    model.weights = Eigen::Map<const Eigen::MatrixXd>(res.x.data(), k, f);
    model.bias = res.x.tail(k);
    model.iterations = res.iterations;
    model.converged = res.converged;
    return model;
}

double svm_objective(const Eigen::VectorXd& w, double b, const Dataset& data,
                     const std::vector<double>& targets, double lambda) {
    double hinge = 0.0;
    const std::span<const double> dense(w.data(), static_cast<std::size_t>(w.size()));
    for (std::size_t i = 0; i < data.X.size(); ++i) {
        hinge += std::max(0.0, 1.0 - targets[i] * (data.X[i].dot(dense) + b));
    }
    return 0.5 * lambda * (w.squaredNorm() + b * b) + hinge / static_cast<double>(data.X.size());
}

namespace {

// Pegasos iterate stored as w = scale * v, with lazily accumulated
// running sums of w for averaging. sigma is the running sum of scale;
// a coordinate's contribution since its last change is v_j * (sigma - mark_j).
class PegasosState {
public:
    // The last coordinate holds the bias (constant feature 1).
    explicit PegasosState(Eigen::Index dim) : v_(Eigen::VectorXd::Zero(dim + 1)), sum_(Eigen::VectorXd::Zero(dim + 1)),
                                              mark_(Eigen::VectorXd::Zero(dim + 1)), bias_index_(dim) {}

    double margin(const SparseVector& x) const {
        double s = v_(bias_index_);
        for (const auto& e : x.entries) s += e.value * v_(e.index);
        return scale_ * s;
    }

    void shrink(double factor) {
        if (factor <= 0.0) {
            flush();
            v_.setZero();
            sq_norm_v_ = 0.0;
            scale_ = 1.0;
            return;
        }
        scale_ *= factor;
        if (scale_ < 1e-9) renormalize();
    }

    void add(const SparseVector& x, double coeff) {
        const double a = coeff / scale_;
        bump(bias_index_, a);
        for (const auto& e : x.entries) bump(e.index, a * e.value);
    }

    double norm() const { return scale_ * std::sqrt(std::max(0.0, sq_norm_v_)); }

    /// Closes a time step: the current iterate joins the running average
    /// with the given weight.
    void accumulate(double weight) {
        sigma_ += weight * scale_;
        total_weight_ += weight;
    }

    void averaged(Eigen::VectorXd& w, double& b) {
        flush();
        w = sum_.head(bias_index_) / total_weight_;
        b = sum_(bias_index_) / total_weight_;
    }

private:
    void bump(Eigen::Index j, double delta) {
        auto& vj = v_(j);
        sum_(j) += vj * (sigma_ - mark_(j));
        mark_(j) = sigma_;
        sq_norm_v_ += delta * (2.0 * vj + delta);
        vj += delta;
    }

    void flush() {
        sum_.array() += v_.array() * (sigma_ - mark_.array());
        mark_.setConstant(sigma_);
    }

    void renormalize() {
        flush();
        v_ *= scale_;
        sq_norm_v_ = v_.squaredNorm();
        // Sums are already in absolute units, so restart sigma bookkeeping.
        sigma_ = 0.0;
        mark_.setZero();
        scale_ = 1.0;
    }

    Eigen::VectorXd v_, sum_, mark_;
    double scale_ = 1.0;
    double sq_norm_v_ = 0.0;
    double sigma_ = 0.0;
    Eigen::Index bias_index_;
    double total_weight_ = 0.0;
};

}  // namespace

LinearModel train_svm(const Dataset& data, const TrainConfig& config,
                      std::vector<std::vector<double>>* objective_trace) {
    data.validate("train_svm");
    if (!(config.C > 0.0)) throw Error("train_svm: C must be positive");
    if (config.max_iter < 1) throw Error("train_svm: at least one epoch required");
    if (config.batch_size < 1) throw Error("train_svm: batch size must be positive");
    const auto n = data.X.size();
    const auto k = data.n_classes();
    const auto f = static_cast<Eigen::Index>(data.n_features());
    const double lambda = 1.0 / (config.C * static_cast<double>(n));
    const double radius = 1.0 / std::sqrt(lambda);
    const auto batch = static_cast<std::size_t>(config.batch_size);

    std::vector<std::vector<std::size_t>> schedule(static_cast<std::size_t>(config.max_iter));
    Rng rng(config.seed);
    for (auto& order : schedule) {
        order.resize(n);
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(std::span(order));
    }

    LinearModel model;
    model.kind = LinearKind::svm;
    model.labels = data.labels;
    model.C = config.C;
    model.weights.resize(k, f);
    model.bias.resize(k);
    model.iterations = config.max_iter;
    model.converged = true;
    if (objective_trace) objective_trace->assign(static_cast<std::size_t>(k), {});

    std::vector<double> targets(n);
    for (int c = 0; c < k; ++c) {
        for (std::size_t i = 0; i < n; ++i) targets[i] = data.y[i] == c ? 1.0 : -1.0;
        PegasosState state(f);
        std::int64_t t = 0;
        Eigen::VectorXd w_avg;
        double b_avg = 0.0;
        std::vector<std::size_t> violators;
        for (const auto& order : schedule) {
            for (std::size_t start = 0; start < n; start += batch) {
                ++t;
                const double eta = 1.0 / (lambda * static_cast<double>(t));
                const auto stop = std::min(n, start + batch);
                violators.clear();
                for (auto j = start; j < stop; ++j) {
                    const auto i = order[j];
                    if (targets[i] * state.margin(data.X[i]) < 1.0) violators.push_back(i);
                }
                state.shrink(1.0 - eta * lambda);
                const double step = eta / static_cast<double>(stop - start);
                for (const auto i : violators) state.add(data.X[i], step * targets[i]);
                const double norm = state.norm();
                if (norm > radius) state.shrink(radius / norm);
                state.accumulate(1.0);
            }
            if (objective_trace) {
                state.averaged(w_avg, b_avg);
                (*objective_trace)[static_cast<std::size_t>(c)].push_back(
                    svm_objective(w_avg, b_avg, data, targets, lambda));
            }
        }
        state.averaged(w_avg, b_avg);
        model.weights.row(c) = w_avg.transpose();
        model.bias(c) = b_avg;
    }
    return model;
}

Prediction predict_linear(const LinearModel& model, const SparseVector& x) {
    if (x.dim != model.n_features()) {
        throw Error("predict_linear: input dimension " + std::to_string(x.dim) +
                    " does not match model dimension " + std::to_string(model.n_features()));
    }
    Eigen::VectorXd s = scores_of(model.weights, model.bias, x);
    if (model.kind == LinearKind::logreg) softmax_inplace(s);
    Prediction p;
    p.label = argmax_lowest(s);
    p.scores.assign(s.data(), s.data() + s.size());
    return p;
}

std::string_view to_string(LinearKind kind) { return kind == LinearKind::logreg ? "logreg" : "svm"; }

nlohmann::json encode_linear(const LinearModel& model, ModelContainer& out, const std::string& prefix) {
    out.add_matrix(prefix + "weights", model.weights);
    out.add_vector(prefix + "bias", model.bias);
    return {{"kind", to_string(model.kind)},
            {"labels", model.labels},
            {"C", model.C},
            {"shape", {model.weights.rows(), model.weights.cols()}},
            {"iterations", model.iterations},
            {"converged", model.converged}};
}

LinearModel decode_linear(const nlohmann::json& section, const ModelContainer& in, const std::string& prefix) {
    LinearModel m;
    const auto kind = section.at("kind").get<std::string>();
    if (kind == "logreg") {
        m.kind = LinearKind::logreg;
    } else if (kind == "svm") {
        m.kind = LinearKind::svm;
    } else {
        throw Error("decode_linear: unexpected kind '" + kind + "'");
    }
    m.labels = section.at("labels").get<std::vector<std::string>>();
    m.C = section.at("C").get<double>();
    m.iterations = section.value("iterations", 0);
    m.converged = section.value("converged", false);
    m.weights = in.matrix(prefix + "weights");
    m.bias = in.vector(prefix + "bias");
    if (m.weights.rows() != static_cast<Eigen::Index>(m.labels.size()) || m.bias.size() != m.weights.rows()) {
        throw Error("decode_linear: tensor shapes do not match the label codebook");
    }
    return m;
}

}  // namespace cmox
