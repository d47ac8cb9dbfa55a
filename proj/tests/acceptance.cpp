// Acceptance suite: one PASS/FAIL line per criterion. Exit status is
// nonzero when any criterion fails. An optional argument restricts the
// run to criteria whose name contains it.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cmox/corpus.hpp"
#include "cmox/ensemble.hpp"
#include "cmox/eval.hpp"
#include "cmox/forest.hpp"
#include "cmox/neural.hpp"
#include "cmox/pipeline.hpp"
#include "cmox/random.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace cmox;

namespace {

struct Outcome {
    enum { pass, fail, skip } status = fail;
    std::string detail;
};

int failures = 0;
std::string only;  // substring filter from argv[1]

std::string fmt(double v, int digits = 4) {
    std::ostringstream os;
    os.precision(digits);
    os << std::fixed << v;
    return os.str();
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

// Runs one criterion; `limit_s` <= 0 means no runtime bound.
void criterion(const std::string& name, double limit_s, const std::function<Outcome()>& body) {
    if (name.find(only) == std::string::npos) return;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {Outcome::fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.status == Outcome::pass && limit_s > 0 && secs >= limit_s) {
        o.status = Outcome::fail;
        o.detail += "; over the " + fmt(limit_s, 0) + " s limit";
    }
    const char* tag = o.status == Outcome::pass ? "PASS" : o.status == Outcome::skip ? "SKIP" : "FAIL";
    if (o.status == Outcome::fail) ++failures;
    std::cout << tag << "  " << name << "  (" << o.detail << "; " << fmt(secs, 1) << " s)" << std::endl;
}

Outcome verdict(bool ok, std::string detail) { return {ok ? Outcome::pass : Outcome::fail, std::move(detail)}; }

Outcome metric_oracle() {
    Rng rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int k = 2 + static_cast<int>(rng.uniform_int(5));
        const int n = 1 + static_cast<int>(rng.uniform_int(200));
        std::vector<int> gold(static_cast<std::size_t>(n)), pred(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            gold[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(k)));
            pred[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(k)));
        }
        std::vector<std::string> labels;
        for (int c = 0; c < k; ++c) labels.push_back("c" + std::to_string(c));
        const auto w = metrics(confusion(gold, pred, labels)).weighted;
        const auto o = oracle::weighted_scores(gold, pred, k);
        worst = std::max({worst, std::abs(w.precision - o.precision), std::abs(w.recall - o.recall),
                          std::abs(w.f1 - o.f1)});
    }
    return verdict(worst <= 1e-12, "1000 cases, max deviation " + sci(worst) + ", tol 1e-12");
}

Outcome model_selection() {
    using C = std::pair<std::string, Scores>;
    const std::vector<C> tamil = {{"m-BERT", {0.74, 0.78, 0.76}},
                                  {"Indic-BERT", {0.74, 0.78, 0.74}},
                                  {"XLM-R", {0.75, 0.78, 0.76}}};
    const std::vector<C> kannada = {{"XLM-R", {0.71, 0.70, 0.71}}, {"m-BERT", {0.70, 0.74, 0.71}}};
    const auto t = select_best(tamil);
    const auto k = select_best(kannada);
    return verdict(t == "XLM-R" && k == "m-BERT", "tamil -> " + t + ", kannada -> " + k);
}

IdSequence seq(std::vector<int> ids, int max_len) {
    IdSequence s;
    s.true_length = static_cast<int>(ids.size());
    ids.resize(static_cast<std::size_t>(max_len), 0);
    s.ids = std::move(ids);
    return s;
}

NeuralModel perturbed(int vocab, int k, NeuralVariant v, const NeuralConfig& cfg, std::uint64_t seed, double scale) {
    auto m = init_model(vocab, k, seed, v, cfg);
    Rng rng(seed + 100);
    for (auto& [name, t] : m.params.tensors()) {
        for (Eigen::Index i = 0; i < t->size(); ++i) t->data()[i] += scale * rng.normal();
    }
    return m;
}

Outcome gradient_check() {
    const std::vector<IdSequence> batch = {seq({2, 3, 4, 5, 6}, 5), seq({6, 1, 3}, 5)};
    const std::vector<int> labels = {0, 2};
    std::string detail;
    bool ok = true;
    for (const auto v : {NeuralVariant::lstm, NeuralVariant::lstm_attn}) {
        // Small layer widths: every parameter is checked.
        NeuralConfig small;
        small.embed_dim = 4;
        small.hidden = 3;
        small.attention = 2;
        const auto toy = perturbed(7, 3, v, small, 11, 0.3);
        const auto gt = backward(toy, labels, forward(toy, batch, false).cache);
        const auto all = oracle::check_gradients(toy, gt.grads, batch, labels);
        // Default widths: a strided sample of every tensor.
        const auto full = perturbed(7, 3, v, NeuralConfig{}, 12, 0.05);
        const auto gf = backward(full, labels, forward(full, batch, false).cache);
        const auto sampled = oracle::check_gradients(full, gf.grads, batch, labels, 1e-5, 101);
        ok = ok && all.checked == static_cast<std::size_t>(toy.params.parameter_count()) && all.worst < 1e-4 &&
             sampled.worst < 1e-4;
        if (!detail.empty()) detail += "; ";
        detail += std::string(to_string(v)) + ": " + std::to_string(all.checked) + " params worst " + sci(all.worst) +
                  ", default widths " + std::to_string(sampled.checked) + " sampled worst " + sci(sampled.worst);
    }
    return verdict(ok, detail + ", tol 1e-4");
}

Outcome analytic_loss() {
    double worst = 0.0;
    for (const auto v : {NeuralVariant::lstm, NeuralVariant::lstm_attn}) {
        for (const int k : {2, 3, 6}) {
            auto m = perturbed(7, k, v, NeuralConfig{}, 3, 0.05);
            m.params.out_weight.setZero();
            m.params.out_bias.setZero();
            const std::vector<IdSequence> batch = {seq({2, 3}, 5), seq({4, 5, 6, 1}, 5)};
            const double loss = batch_loss(m, batch, std::vector<int>{0, k - 1});
            worst = std::max(worst, std::abs(loss - std::log(static_cast<double>(k))));
        }
    }
    return verdict(worst <= 1e-10, "k in {2,3,6}, both variants, max |loss - ln k| " + sci(worst) + ", tol 1e-10");
}

Outcome degenerate_forest() {
    Rng rng(77);
    const int f = 10, k = 4;
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    for (int i = 0; i < 120; ++i) {
        std::vector<double> r(f, 0.0);
        for (auto& v : r) {
            if (rng.uniform() < 0.3) v = std::round(rng.uniform(0, 4)) / 4;
        }
        rows.push_back(r);
        y.push_back(i < k ? i : static_cast<int>(rng.uniform_int(k)));
    }
    const auto data = testing::dataset(rows, y, k);
    ForestParams fp;
    fp.n_estimators = 1;
    fp.bootstrap = false;
    fp.max_features = f;
    const auto forest = train_forest(data, fp);
    const auto tree = train_tree(data, TreeParams{});
    int agree = 0;
    for (int i = 0; i < 100; ++i) {
        std::vector<double> x(f);
        for (auto& v : x) v = rng.uniform() < 0.4 ? std::round(rng.uniform(0, 4)) / 4 : 0.0;
        const auto sx = testing::sparse(x);
        agree += predict_forest(forest, sx).label == predict_forest(tree, sx).label;
    }
    return verdict(agree == 100, std::to_string(agree) + "/100 inputs agree");
}

Outcome vote_oracle() {
    Rng rng(5);
    int agree = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const int voters = 1 + static_cast<int>(rng.uniform_int(7));
        const int k = 2 + static_cast<int>(rng.uniform_int(5));
        std::vector<int> votes(static_cast<std::size_t>(voters));
        for (auto& v : votes) v = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(k)));
        agree += vote(votes) == oracle::plurality(votes);
    }
    return verdict(agree == 10000, std::to_string(agree) + "/10000 vote vectors agree");
}

double f1_of(const GridResult& r, const std::string& model) {
    for (const auto& row : r.rows) {
        if (row.model == model) return row.scores.f1;
    }
    throw std::runtime_error("model missing from grid: " + model);
}

Outcome synthetic_benchmark(const GridResult& r) {
    const double base = r.majority.f1;
    bool ok = true;
    std::string detail = "majority " + fmt(base);
    for (const std::string m : {"lr", "svm", "ensemble", "lstm", "lstm-attn"}) {
        const double f = f1_of(r, m);
        ok = ok && f >= base + 0.10;
        detail += ", " + m + " " + fmt(f);
    }
    const double dt = f1_of(r, "dt");
    const double ens = f1_of(r, "ensemble");
    ok = ok && ens >= dt;
    detail += ", dt " + fmt(dt) + "; margin 0.10, ensemble >= dt";
    return verdict(ok, detail);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome determinism(const fs::path& a, const fs::path& b) {
    std::size_t compared = 0;
    std::vector<std::string> differ;
    for (const char* sub : {"models", "predictions", "reports"}) {
        for (const auto& e : fs::recursive_directory_iterator(a / sub)) {
            if (!e.is_regular_file()) continue;
            const auto rel = fs::relative(e.path(), a);
            ++compared;
            if (!fs::exists(b / rel) || slurp(e.path()) != slurp(b / rel)) differ.push_back(rel.string());
        }
        for (const auto& e : fs::recursive_directory_iterator(b / sub)) {
            if (e.is_regular_file() && !fs::exists(a / fs::relative(e.path(), b))) {
                differ.push_back(fs::relative(e.path(), b).string());
            }
        }
    }
    std::string detail = std::to_string(compared) + " files compared";
    for (const auto& d : differ) detail += ", differs: " + d;
    return verdict(compared > 0 && differ.empty(), detail);
}

// Per-class cells from the published class distribution table, in
// label_set order.
std::vector<std::size_t> published_counts(Language lang, Split split) {
    const int s = split == Split::train ? 0 : split == Split::valid ? 1 : 2;
    switch (lang) {
        case Language::tamil: {
            // NF, OTIO, OTII, OTIG, OU, NT
            const std::size_t t[3][6] = {{25425, 454, 2343, 2557, 2906, 1454},
                                         {3193, 65, 307, 295, 356, 172},
                                         {3190, 71, 315, 288, 368, 160}};
            return {std::begin(t[s]), std::end(t[s])};
        }
        case Language::malayalam: {
            // NF, OTII, OTIG, OU, NM
            const std::size_t t[3][5] = {{14153, 239, 140, 191, 1287},
                                         {1779, 24, 13, 20, 163},
                                         {1765, 27, 23, 29, 157}};
            return {std::begin(t[s]), std::end(t[s])};
        }
        case Language::kannada: {
            const std::size_t t[3][6] = {{3544, 123, 487, 329, 212, 1522},
                                         {426, 16, 66, 45, 33, 191},
                                         {427, 14, 75, 44, 33, 185}};
            return {std::begin(t[s]), std::end(t[s])};
        }
    }
    return {};
}

LabeledCorpus load_any(const fs::path& p, Language lang, Split split) {
    try {
        return load_tsv(p, lang, TsvOptions{false, true, split});
    } catch (const std::exception&) {
        return load_tsv(p, lang, TsvOptions{true, true, split});
    }
}

Outcome dataset_distribution() {
    const char* dir = std::getenv("CMOX_DATA_DIR");
    if (dir == nullptr || *dir == '\0') return {Outcome::skip, "CMOX_DATA_DIR not set"};
    std::size_t files = 0, cells = 0, wrong = 0;
    std::string detail;
    for (const auto lang : {Language::tamil, Language::malayalam, Language::kannada}) {
        for (const auto split : {Split::train, Split::valid, Split::test}) {
            const fs::path p = fs::path(dir) / (std::string(to_string(lang)) + "_" + std::string(to_string(split)) + ".tsv");
            if (!fs::exists(p)) continue;
            ++files;
            const auto dist = class_distribution(load_any(p, lang, split));
            const auto expected = published_counts(lang, split);
            const auto labels = label_set(lang);
            for (std::size_t i = 0; i < labels.size(); ++i) {
                ++cells;
                const std::size_t got = dist.at(labels[i]);
                if (got != expected[i]) {
                    ++wrong;
                    detail += ", " + p.filename().string() + " " + short_code(labels[i], lang) + " " +
                              std::to_string(got) + " != " + std::to_string(expected[i]);
                }
            }
        }
    }
    if (files == 0) return {Outcome::skip, "no <language>_<split>.tsv files in CMOX_DATA_DIR"};
    return verdict(wrong == 0, std::to_string(files) + " files, " + std::to_string(cells) + " cells" + detail);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) only = argv[1];
    criterion("metric oracle", 5, metric_oracle);
    criterion("model selection", 0, model_selection);
    criterion("gradient check", 60, gradient_check);
    criterion("analytic loss", 0, analytic_loss);
    criterion("degenerate forest", 0, degenerate_forest);
    criterion("ensemble vote oracle", 0, vote_oracle);

    const fs::path root = fs::temp_directory_path() / ("cmox-acceptance-" + std::to_string(::getpid()));
    fs::remove_all(root);
    GridConfig cfg;
    cfg.language_key = "synthetic";
    cfg.seed = 7;
    std::optional<GridResult> first;
    criterion("synthetic benchmark", 600, [&] {
        cfg.out = root / "a";
        first = run_grid(cfg);
        return synthetic_benchmark(*first);
    });
    criterion("grid determinism", 0, [&]() -> Outcome {
        if (!first) {
            cfg.out = root / "a";
            first = run_grid(cfg);
        }
        // The repeat runs single-threaded so scheduling cannot matter.
        const char* previous = std::getenv("CMOX_THREADS");
        const std::string saved = previous ? previous : "";
        ::setenv("CMOX_THREADS", "1", 1);
        cfg.out = root / "b";
        run_grid(cfg);
        if (previous) ::setenv("CMOX_THREADS", saved.c_str(), 1);
        else ::unsetenv("CMOX_THREADS");
        return determinism(root / "a", root / "b");
    });
    criterion("dataset class distribution", 0, dataset_distribution);

    fs::remove_all(root);
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
