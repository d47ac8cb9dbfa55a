#include "cmox/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>
#include <thread>

#include "cmox/error.hpp"
#include "cmox/io.hpp"
#include "cmox/preprocess.hpp"
#include "cmox/random.hpp"

namespace cmox {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::lr: return "lr";
        case ModelKind::svm: return "svm";
        case ModelKind::dt: return "dt";
        case ModelKind::rf: return "rf";
        case ModelKind::ensemble: return "ensemble";
        case ModelKind::lstm: return "lstm";
        case ModelKind::lstm_attn: return "lstm-attn";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view name) {
    for (const auto kind : all_model_kinds()) {
        if (name == to_string(kind)) return kind;
    }
    if (name == "lstm_attn") return ModelKind::lstm_attn;
    throw Error("unknown model '" + std::string(name) + "' (expected lr, svm, dt, rf, ensemble, lstm, lstm-attn)");
}

std::vector<ModelKind> all_model_kinds() {
    return {ModelKind::lr, ModelKind::svm, ModelKind::dt, ModelKind::rf,
            ModelKind::ensemble, ModelKind::lstm, ModelKind::lstm_attn};
}

bool is_neural(ModelKind kind) { return kind == ModelKind::lstm || kind == ModelKind::lstm_attn; }

const json& hyperparameter_table() {
    static const json table = json::parse(R"({
  "defaults": {
    "lr": {"C": 1.0, "max_iter": 1000, "tol": 0.0001},
    "svm": {"C": 1.0, "epochs": 100, "batch_size": 8},
    "dt": {"max_depth": 0, "min_leaf": 1},
    "rf": {"n_estimators": 100, "max_depth": 0, "min_leaf": 1, "bootstrap": true},
    "neural": {"embed_dim": 100, "hidden": 100, "attention": 20, "dropout": 0.1,
               "epochs": 20, "batch_size": 32, "learning_rate": 0.001,
               "max_len": 70, "min_freq": 1}
  },
  "languages": {
    "tamil":     {"labels": "tamil",     "lr": {"C": 0.4}, "svm": {"C": 3},  "neural": {"max_len": 70}},
    "malayalam": {"labels": "malayalam", "lr": {"C": 0.7}, "svm": {"C": 10}, "neural": {"max_len": 70}},
    "kannada":   {"labels": "kannada",   "lr": {"C": 5},   "svm": {"C": 7},  "neural": {"max_len": 50}},
    "synthetic": {"labels": "kannada",   "lr": {"C": 5},   "svm": {"C": 7},  "neural": {"max_len": 50},
                  "synthetic": true}
  }
})");
    return table;
}

namespace {

const json& language_entry(std::string_view key) {
    const auto& langs = hyperparameter_table().at("languages");
    const auto it = langs.find(std::string(key));
    if (it == langs.end()) throw Error("unknown language '" + std::string(key) + "'");
    return *it;
}

}  // namespace

json resolve_hyperparameters(std::string_view language_key, const json& overrides) {
    json resolved = hyperparameter_table().at("defaults");
    json patch = language_entry(language_key);
    patch.erase("labels");
    patch.erase("synthetic");
    resolved.merge_patch(patch);
    resolved.merge_patch(overrides);
    resolved["language"] = std::string(language_key);
    return resolved;
}

Language language_of(std::string_view language_key) {
    return parse_language(language_entry(language_key).at("labels").get<std::string>());
}

bool is_synthetic(std::string_view language_key) { return language_entry(language_key).value("synthetic", false); }

namespace {

TokenizedCorpus tokenize_corpus(const LabeledCorpus& corpus) {
    TokenizedCorpus docs;
    docs.reserve(corpus.size());
    for (const auto& rec : corpus.records) docs.push_back(clean_tokens(rec.text));
    return docs;
}

std::vector<int> label_indices(const LabeledCorpus& corpus) {
    std::vector<int> y;
    y.reserve(corpus.size());
    for (const auto& rec : corpus.records) {
        if (!rec.label) throw Error("record '" + rec.id + "' is unlabeled");
        y.push_back(label_index(corpus.language, *rec.label));
    }
    return y;
}

TrainConfig lr_config(const json& hyper) {
    const auto& h = hyper.at("lr");
    TrainConfig c = TrainConfig::logreg(h.at("C").get<double>());
    c.max_iter = h.at("max_iter").get<int>();
    c.tol = h.at("tol").get<double>();
    return c;
}

TrainConfig svm_config(const json& hyper, std::uint64_t seed) {
    const auto& h = hyper.at("svm");
    return TrainConfig{h.at("C").get<double>(), h.at("epochs").get<int>(), 1e-4, seed, h.at("batch_size").get<int>()};
}

TreeParams tree_params(const json& hyper) {
    const auto& h = hyper.at("dt");
    TreeParams p;
    p.max_depth = h.at("max_depth").get<int>();
    p.min_leaf = h.at("min_leaf").get<int>();
    return p;
}

ForestParams forest_params(const json& hyper, std::uint64_t seed) {
    const auto& h = hyper.at("rf");
    ForestParams p;
    p.n_estimators = h.at("n_estimators").get<int>();
    p.max_depth = h.at("max_depth").get<int>();
    p.min_leaf = h.at("min_leaf").get<int>();
    p.bootstrap = h.at("bootstrap").get<bool>();
    if (h.contains("max_features")) p.max_features = h.at("max_features").get<int>();
    p.seed = seed;
    return p;
}

NeuralConfig neural_config(const json& hyper) {
    const auto& h = hyper.at("neural");
    NeuralConfig c;
    c.embed_dim = h.at("embed_dim").get<int>();
    c.hidden = h.at("hidden").get<int>();
    c.attention = h.at("attention").get<int>();
    c.dropout = h.at("dropout").get<double>();
    return c;
}

TrainOptions train_options(const json& hyper, std::uint64_t seed) {
    const auto& h = hyper.at("neural");
    TrainOptions o;
    o.epochs = h.at("epochs").get<int>();
    o.batch_size = h.at("batch_size").get<int>();
    o.learning_rate = h.at("learning_rate").get<double>();
    o.seed = seed;
    return o;
}

// Empty texts become a lone UNK so every record still gets a prediction.
IdSequence encode_for_inference(const Vocabulary& vocab, const std::vector<std::string>& tokens, int max_len) {
    auto seq = encode_sequence(vocab, tokens, max_len);
    if (seq.true_length == 0) {
        seq.ids[0] = Vocabulary::kUnk;
        seq.true_length = 1;
    }
    return seq;
}

Dataset classical_dataset(const TfidfModel& tfidf, const TokenizedCorpus& docs, const LabeledCorpus& corpus) {
    Dataset data;
    data.X = tfidf.transform_all(docs);
    data.y = label_indices(corpus);
    data.labels = codebook(corpus.language);
    return data;
}

}  // namespace

Pipeline train_pipeline(ModelKind kind, std::string_view language_key, const PipelineInputs& inputs,
                        const json& hyper, std::uint64_t seed) {
    if (!inputs.train) throw Error("train_pipeline: training corpus required");
    const auto& train = *inputs.train;
    Pipeline p;
    p.kind = kind;
    p.language_key = std::string(language_key);
    p.language = language_of(language_key);
    p.config = hyper;
    if (train.language != p.language) throw Error("train_pipeline: corpus language does not match the configuration");

    const auto docs = tokenize_corpus(train);
    if (!is_neural(kind)) {
        p.tfidf = TfidfModel::fit(docs);
        const auto data = classical_dataset(*p.tfidf, docs, train);
        switch (kind) {
            case ModelKind::lr: p.classifier = train_logreg(data, lr_config(hyper)); break;
            case ModelKind::svm: p.classifier = train_svm(data, svm_config(hyper, seed)); break;
            case ModelKind::dt: p.classifier = train_tree(data, tree_params(hyper)); break;
            case ModelKind::rf: p.classifier = train_forest(data, forest_params(hyper, seed)); break;
            case ModelKind::ensemble: {
                EnsembleConfig ec;
                ec.svm = svm_config(hyper, seed);
                ec.logreg = lr_config(hyper);
                ec.forest = forest_params(hyper, seed);
                ec.tree = tree_params(hyper);
                p.classifier = train_ensemble(data, ec);
                break;
            }
            default: break;
        }
        return p;
    }

    if (!inputs.valid) throw Error("train_pipeline: neural models need a validation corpus");
    const auto& nh = hyper.at("neural");
    p.max_len = nh.at("max_len").get<int>();
    p.vocabulary = Vocabulary::build(docs, nh.at("min_freq").get<std::size_t>());
    const auto cfg = neural_config(hyper);

    EncodedSet train_set, valid_set;
    const auto y_train = label_indices(train);
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (docs[i].empty()) continue;  // nothing to read
        train_set.sequences.push_back(encode_sequence(*p.vocabulary, docs[i], p.max_len));
        train_set.labels.push_back(y_train[i]);
    }
    const auto valid_docs = tokenize_corpus(*inputs.valid);
    valid_set.labels = label_indices(*inputs.valid);
    for (const auto& d : valid_docs) valid_set.sequences.push_back(encode_for_inference(*p.vocabulary, d, p.max_len));

    std::optional<EmbeddingTable> pretrained;
    if (inputs.vectors) pretrained = load_pretrained_vectors(*inputs.vectors, *p.vocabulary, cfg.embed_dim, seed);
    const auto variant = kind == ModelKind::lstm ? NeuralVariant::lstm : NeuralVariant::lstm_attn;
    auto model = init_model(static_cast<int>(p.vocabulary->size()), static_cast<int>(codebook(p.language).size()),
                            seed, variant, cfg, pretrained ? &pretrained->matrix : nullptr);
    model.labels = codebook(p.language);
    auto result = train_neural(std::move(model), train_set, valid_set, train_options(hyper, derive_seed(seed, 1)));
    p.classifier = std::move(result.best);
    p.run = std::move(result.run);
    return p;
}

Pipeline ensemble_from(const Pipeline& svm, const Pipeline& lr, const Pipeline& rf, const Pipeline& dt) {
    for (const auto* m : {&svm, &lr, &rf, &dt}) {
        if (!m->tfidf || m->tfidf->idf_table() != svm.tfidf->idf_table() ||
            m->tfidf->vocabulary().tokens() != svm.tfidf->vocabulary().tokens()) {
            throw Error("ensemble_from: members must share one tf-idf model");
        }
    }
    Pipeline p;
    p.kind = ModelKind::ensemble;
    p.language = svm.language;
    p.language_key = svm.language_key;
    p.config = svm.config;
    p.tfidf = svm.tfidf;
    std::vector<EnsembleMember> members;
    members.push_back({"svm", std::get<LinearModel>(svm.classifier)});
    members.push_back({"logreg", std::get<LinearModel>(lr.classifier)});
    members.push_back({"forest", std::get<Forest>(rf.classifier)});
    members.push_back({"tree", std::get<Tree>(dt.classifier)});
    p.classifier = make_ensemble(std::move(members));
    return p;
}

Pipeline::Output Pipeline::predict(const LabeledCorpus& corpus) const {
    if (corpus.language != language) throw Error("predict: corpus language does not match the model");
    const auto docs = tokenize_corpus(corpus);
    const auto names = labels();
    Output out;
    auto emit = [&](std::size_t i, int label, std::vector<double> probs) {
        out.labels.push_back(label);
        out.rows.push_back({corpus.records[i].id, names.at(static_cast<std::size_t>(label)), std::move(probs)});
    };

    if (const auto* neural = std::get_if<NeuralModel>(&classifier)) {
        std::vector<IdSequence> seqs;
        for (const auto& d : docs) seqs.push_back(encode_for_inference(*vocabulary, d, max_len));
        const auto probs = predict_proba(*neural, seqs);
        for (std::size_t i = 0; i < docs.size(); ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            Eigen::Index arg = 0;
            probs.row(r).maxCoeff(&arg);
            emit(i, static_cast<int>(arg), std::vector<double>(probs.row(r).data(), probs.row(r).data() + 0));
            auto& row = out.rows.back().probabilities;
            for (Eigen::Index c = 0; c < probs.cols(); ++c) row.push_back(probs(r, c));
        }
        return out;
    }

    for (std::size_t i = 0; i < docs.size(); ++i) {
        const auto x = tfidf->transform(docs[i]);
        const auto pred = std::visit([&](const auto& m) -> Prediction {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LinearModel>) {
                return predict_linear(m, x);
            } else if constexpr (std::is_same_v<T, Tree> || std::is_same_v<T, Forest>) {
                return predict_forest(m, x);
            } else if constexpr (std::is_same_v<T, EnsembleModel>) {
                return predict_ensemble(m, x);
            } else {
                return {};
            }
        }, classifier);
        // Probabilities only where the scores are a distribution over classes.
        const bool distribution = kind == ModelKind::lr || kind == ModelKind::dt || kind == ModelKind::rf;
        emit(i, pred.label, distribution ? pred.scores : std::vector<double>{});
    }
    return out;
}

void Pipeline::save(const fs::path& manifest) const {
    ModelContainer c;
    json section = std::visit([&](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
            return encode_linear(m, c);
        } else if constexpr (std::is_same_v<T, Tree>) {
            auto j = encode_tree(m);
            j["kind"] = "tree";
            j["labels"] = labels();
            return j;
        } else if constexpr (std::is_same_v<T, Forest>) {
            return encode_forest(m);
        } else if constexpr (std::is_same_v<T, EnsembleModel>) {
            return encode_ensemble(m, c);
        } else {
            return encode_neural(m, c);
        }
    }, classifier);
    c.manifest = std::move(section);
    c.manifest["pipeline"] = {{"model", to_string(kind)},
                              {"language", to_string(language)},
                              {"language_key", language_key},
                              {"max_len", max_len}};
    c.manifest["config"] = config;
    if (tfidf) {
        c.manifest["features"] = {{"type", "tfidf"}, {"n_docs", tfidf->n_docs()}, {"vocabulary", tfidf->vocabulary().tokens()}};
        c.add("tfidf.idf", {static_cast<std::int64_t>(tfidf->idf_table().size())}, tfidf->idf_table());
    } else if (vocabulary) {
        c.manifest["features"] = {{"type", "sequence"}, {"vocabulary", vocabulary->tokens()}};
    }
    if (run) c.manifest["training"] = {{"best_epoch", run->best_epoch}, {"best_valid_weighted_f1", run->best_valid_f1}};
    c.write(manifest);
}

Pipeline Pipeline::load(const fs::path& manifest) {
    const auto c = ModelContainer::read(manifest);
    const auto& m = c.manifest;
    Pipeline p;
    try {
        const auto& info = m.at("pipeline");
        p.kind = parse_model_kind(info.at("model").get<std::string>());
        p.language = parse_language(info.at("language").get<std::string>());
        p.language_key = info.at("language_key").get<std::string>();
        p.max_len = info.at("max_len").get<int>();
        p.config = m.value("config", json::object());
        const auto& features = m.at("features");
        auto tokens = features.at("vocabulary").get<std::vector<std::string>>();
        if (features.at("type") == "tfidf") {
            const auto& idf = c.get("tfidf.idf").data;
            p.tfidf = TfidfModel::restore(Vocabulary::from_tokens(std::move(tokens)), idf,
                                          features.at("n_docs").get<std::size_t>());
        } else {
            p.vocabulary = Vocabulary::from_tokens(std::move(tokens));
        }
        switch (p.kind) {
            case ModelKind::lr:
            case ModelKind::svm: p.classifier = decode_linear(m, c); break;
            case ModelKind::dt: p.classifier = decode_tree(m); break;
            case ModelKind::rf: p.classifier = decode_forest(m); break;
            case ModelKind::ensemble: p.classifier = decode_ensemble(m, c); break;
            case ModelKind::lstm:
            case ModelKind::lstm_attn: p.classifier = decode_neural(m, c); break;
        }
    } catch (const json::exception& e) {
        throw Error(manifest.string() + ": malformed manifest: " + e.what());
    }
    return p;
}

Scores majority_baseline(const LabeledCorpus& train, const LabeledCorpus& test) {
    const auto dist = class_distribution(train);
    LabelCode modal = dist.begin()->first;
    for (const auto& [code, n] : dist) {
        if (n > dist.at(modal)) modal = code;
    }
    const auto gold = label_indices(test);
    const std::vector<int> pred(gold.size(), label_index(test.language, modal));
    return metrics(confusion(gold, pred, codebook(test.language))).weighted;
}

namespace {

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

LabeledCorpus load_split(const std::optional<fs::path>& path, Language lang, bool has_ids, Split split,
                         const char* name) {
    if (!path) throw Error(std::string("grid: --") + name + " is required for non-synthetic languages");
    const auto contents = read_file(*path);
    TsvOptions opts;
    opts.has_ids = has_ids || contents.rfind("id\ttext", 0) == 0;
    opts.split = split;
    try {
        return parse_tsv(contents, lang, opts);
    } catch (const Error& e) {
        throw Error(path->string() + ": " + e.what());
    }
}

}  // namespace

std::string summary_tsv(const GridResult& result) {
    std::string out = "model\tprecision\trecall\tweighted_f1\n";
    for (const auto& row : result.rows) {
        out += row.model + "\t" + fixed4(row.scores.precision) + "\t" + fixed4(row.scores.recall) + "\t" +
               fixed4(row.scores.f1) + "\n";
    }
    return out;
}

GridResult run_grid(const GridConfig& config) {
    const auto lang = language_of(config.language_key);
    const auto hyper = resolve_hyperparameters(config.language_key, config.overrides);
    const fs::path& out = config.out;

    LabeledCorpus train, valid, test;
    if (is_synthetic(config.language_key)) {
        train = synth_generate(default_synth_spec(lang, config.synth_train, config.seed, Split::train));
        valid = synth_generate(default_synth_spec(lang, config.synth_valid, config.seed + 1, Split::valid));
        test = synth_generate(default_synth_spec(lang, config.synth_test, config.seed + 2, Split::test));
        save_tsv(train, out / "data" / "train.tsv");
        save_tsv(valid, out / "data" / "valid.tsv");
        save_tsv(test, out / "data" / "test.tsv");
    } else {
        train = load_split(config.train, lang, config.has_ids, Split::train, "train");
        valid = load_split(config.valid, lang, config.has_ids, Split::valid, "valid");
        test = load_split(config.test, lang, config.has_ids, Split::test, "test");
    }

    json echo = {{"language", config.language_key},
                 {"seed", config.seed},
                 {"hyperparameters", hyper},
                 {"sizes", {{"train", train.size()}, {"valid", valid.size()}, {"test", test.size()}}}};
    auto model_names = json::array();
    for (const auto k : config.models) model_names.push_back(to_string(k));
    echo["models"] = std::move(model_names);
    if (config.vectors) echo["vectors"] = config.vectors->string();
    write_file_atomic(out / "config.json", echo.dump(2) + "\n");

    const auto requested = [&](ModelKind k) {
        return std::find(config.models.begin(), config.models.end(), k) != config.models.end();
    };
    const bool need_ensemble = requested(ModelKind::ensemble);

    // Train everything except the ensemble, which reuses the classical members.
    std::vector<ModelKind> jobs;
    for (const auto k : all_model_kinds()) {
        if (k == ModelKind::ensemble) continue;
        const bool member = k == ModelKind::lr || k == ModelKind::svm || k == ModelKind::dt || k == ModelKind::rf;
        if (requested(k) || (need_ensemble && member)) jobs.push_back(k);
    }

    PipelineInputs inputs{&train, &valid, config.vectors};
    std::map<ModelKind, Pipeline> trained;
    std::mutex trained_mutex;
    std::map<ModelKind, Scores> scores;

    auto evaluate = [&](const Pipeline& p) {
        const auto name = std::string(to_string(p.kind));
        p.save(out / "models" / (name + ".json"));
        const auto output = p.predict(test);
        write_file_atomic(out / "predictions" / (name + ".tsv"), to_prediction_tsv(output.rows));
        const auto gold = label_indices(test);
        const auto cm = confusion(gold, output.labels, codebook(lang));
        const auto report = metrics(cm);
        auto mj = report.to_json();
        mj["model"] = name;
        write_file_atomic(out / "metrics" / (name + ".json"), mj.dump(2) + "\n");
        const auto errors = error_report(cm, test, output.labels);
        write_file_atomic(out / "reports" / (name + ".txt"), errors.to_text());
        write_file_atomic(out / "reports" / (name + ".jsonl"), errors.to_jsonl());
        if (p.run) write_file_atomic(out / "logs" / (name + ".jsonl"), p.run->to_jsonl());
        return report.weighted;
    };

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            try {
                const auto kind = jobs[j];
                const auto seed = derive_seed(config.seed, static_cast<std::uint64_t>(kind));
                auto p = train_pipeline(kind, config.language_key, inputs, hyper, seed);
                std::optional<Scores> s;
                if (requested(kind)) s = evaluate(p);
                std::lock_guard lock(trained_mutex);
                if (s) scores[kind] = *s;
                trained.emplace(kind, std::move(p));
            } catch (...) {
                std::lock_guard lock(trained_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const auto workers = std::max<std::size_t>(1, std::min<std::size_t>(thread_count(), jobs.size()));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    if (need_ensemble) {
        const auto ensemble = ensemble_from(trained.at(ModelKind::svm), trained.at(ModelKind::lr),
                                            trained.at(ModelKind::rf), trained.at(ModelKind::dt));
        scores[ModelKind::ensemble] = evaluate(ensemble);
    }

    GridResult result;
    std::vector<std::pair<std::string, Scores>> candidates;
    for (const auto k : config.models) {
        result.rows.push_back({std::string(to_string(k)), scores.at(k)});
        candidates.emplace_back(std::string(to_string(k)), scores.at(k));
    }
    result.majority = majority_baseline(train, test);
    result.best = candidates.empty() ? std::string() : select_best(candidates);

    write_file_atomic(out / "summary.tsv", summary_tsv(result));
    write_file_atomic(out / "best.txt", result.best + "\n");
    write_file_atomic(out / "metrics" / "majority.json",
                      json{{"model", "majority"},
                           {"weighted_precision", result.majority.precision},
                           {"weighted_recall", result.majority.recall},
                           {"weighted_f1", result.majority.f1}}
                              .dump(2) + "\n");
    return result;
}

}  // namespace cmox
