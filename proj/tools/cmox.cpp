// Command-line front end: clean, synth, train, predict, evaluate, report, grid.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <iterator>
#include <sstream>

#include "cmox/corpus.hpp"
#include "cmox/error.hpp"
#include "cmox/eval.hpp"
#include "cmox/io.hpp"
#include "cmox/pipeline.hpp"
#include "cmox/preprocess.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Overrides {
    std::vector<std::string> assignments;  // key.path=value
    std::string config_file;

    json resolve() const {
        json patch = json::object();
        if (!config_file.empty()) {
            try {
                patch = json::parse(cmox::read_file(config_file));
            } catch (const json::exception& e) {
                throw cmox::Error(config_file + ": " + e.what());
            }
        }
        for (const auto& a : assignments) {
            const auto eq = a.find('=');
            if (eq == std::string::npos || eq == 0) throw cmox::Error("--set expects key=value, got '" + a + "'");
            const auto key = a.substr(0, eq);
            const auto text = a.substr(eq + 1);
            json value = json::parse(text, nullptr, false);
            if (value.is_discarded()) value = text;
            json::json_pointer ptr("/" + [&] {
                std::string p = key;
                for (auto& ch : p) if (ch == '.') ch = '/';
                return p;
            }());
            json one = json::object();
            one[ptr] = value;
            patch.merge_patch(one);
        }
        return patch;
    }
};

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--set", o.assignments, "Hyperparameter override, e.g. lr.C=0.5 (repeatable)");
    cmd->add_option("--config", o.config_file, "JSON merge patch applied to the hyperparameters")->check(CLI::ExistingFile);
}

std::string peek_first_line(const std::string& contents) {
    const auto lines = cmox::split_lines(contents);
    return lines.empty() ? std::string() : std::string(lines.front());
}

bool header_has_ids(const std::string& contents) { return peek_first_line(contents).rfind("id\ttext", 0) == 0; }

void write_output(const std::string& path, const std::string& contents) {
    if (path.empty() || path == "-") {
        std::cout << contents;
    } else {
        cmox::write_file_atomic(path, contents);
    }
}

fs::path echo_path(const fs::path& output) { return output.parent_path() / (output.filename().string() + ".config.json"); }

// Gold corpus loaded under an explicit language, or the first language
// whose label set accepts every row.
cmox::LabeledCorpus load_gold(const std::string& path, const std::string& lang, bool has_ids) {
    const auto contents = cmox::read_file(path);
    cmox::TsvOptions opts;
    opts.has_ids = has_ids || header_has_ids(contents);
    opts.split = cmox::Split::test;
    if (!lang.empty()) {
        try {
            return cmox::parse_tsv(contents, cmox::language_of(lang), opts);
        } catch (const cmox::Error& e) {
            throw cmox::Error(path + ": " + e.what());
        }
    }
    std::string last;
    for (const auto l : {cmox::Language::tamil, cmox::Language::malayalam, cmox::Language::kannada}) {
        try {
            std::vector<std::string> quiet;
            return cmox::parse_tsv(contents, l, opts, &quiet);
        } catch (const cmox::Error& e) {
            last = e.what();
        }
    }
    throw cmox::Error(path + ": no language label set fits this file (" + last + ")");
}

cmox::LabeledCorpus load_corpus(const std::string& path, cmox::Language lang, bool has_ids, cmox::Split split) {
    const auto contents = cmox::read_file(path);
    cmox::TsvOptions opts;
    opts.has_ids = has_ids || header_has_ids(contents);
    opts.split = split;
    try {
        return cmox::parse_tsv(contents, lang, opts);
    } catch (const cmox::Error& e) {
        throw cmox::Error(path + ": " + e.what());
    }
}

struct Scored {
    cmox::LabeledCorpus gold;
    cmox::ConfusionMatrix cm;
    std::vector<int> pred;
};

Scored score_files(const std::string& gold_path, const std::string& pred_path, const std::string& lang, bool has_ids) {
    Scored s;
    s.gold = load_gold(gold_path, lang, has_ids);
    const auto rows = cmox::load_predictions(pred_path);
    const auto aligned = cmox::align_predictions(s.gold, rows);
    s.pred = aligned.pred;
    s.cm = cmox::confusion(aligned.gold, aligned.pred, cmox::codebook(s.gold.language));
    return s;
}

std::string format_metrics(const cmox::MetricsReport& r) {
    std::ostringstream out;
    char buf[160];
    out << "class\tprecision\trecall\tf1\tsupport\n";
    for (std::size_t c = 0; c < r.labels.size(); ++c) {
        const auto& m = r.per_class[c];
        std::snprintf(buf, sizeof buf, "%s\t%.4f\t%.4f\t%.4f\t%lld\n", r.labels[c].c_str(), m.precision, m.recall,
                      m.f1, static_cast<long long>(m.support));
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "weighted\t%.4f\t%.4f\t%.4f\n", r.weighted.precision, r.weighted.recall,
                  r.weighted.f1);
    out << buf;
    std::snprintf(buf, sizeof buf, "accuracy\t%.4f\n", r.accuracy);
    out << buf;
    std::snprintf(buf, sizeof buf, "weighted F1: %.4f\n", r.weighted.f1);
    out << buf;
    return out.str();
}

int cmd_clean(const std::string& input, const std::string& output, bool has_ids) {
    std::string contents;
    if (input.empty() || input == "-") {
        contents.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
    } else {
        contents = cmox::read_file(input);
    }
    const auto lines = cmox::split_lines(contents);
    const std::size_t col = has_ids || header_has_ids(contents) ? 1 : 0;
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto fields = cmox::split(lines[i], '\t');
        if (fields.size() <= col) throw cmox::Error("line " + std::to_string(i + 1) + ": missing text column");
        const bool header = i == 0 && fields[col] == "text";
        for (std::size_t f = 0; f < fields.size(); ++f) {
            if (f) out += '\t';
            out += (f == col && !header) ? cmox::clean(fields[f]) : std::string(fields[f]);
        }
        out += '\n';
    }
    write_output(output, out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Code-mixed offensive language identification toolkit"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    // clean
    std::string clean_in = "-", clean_out = "-";
    bool clean_ids = false;
    auto* clean = app.add_subcommand("clean", "Clean the text column of a TSV");
    clean->add_option("-i,--input", clean_in, "Input TSV ('-' for stdin)");
    clean->add_option("-o,--output", clean_out, "Output TSV ('-' for stdout)");
    clean->add_flag("--has-ids", clean_ids, "Rows carry a leading id column");

    // synth
    std::string synth_lang = "kannada", synth_split = "train", synth_out = "-";
    std::size_t synth_size = 2000;
    std::uint64_t synth_seed = 7;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled corpus");
    synth->add_option("--lang", synth_lang, "Label set: tamil, malayalam or kannada");
    synth->add_option("--split", synth_split, "train, valid or test");
    synth->add_option("--size", synth_size, "Number of records")->check(CLI::PositiveNumber);
    synth->add_option("--seed", synth_seed, "Random seed");
    synth->add_option("-o,--output", synth_out, "Output TSV ('-' for stdout)");

    // train
    std::string train_lang, train_model, train_path, valid_path, vectors_path, train_out;
    bool train_ids = false;
    std::uint64_t train_seed = 7;
    Overrides train_over;
    auto* train = app.add_subcommand("train", "Train one model");
    train->add_option("--lang", train_lang, "tamil, malayalam, kannada or synthetic")->required();
    train->add_option("--model", train_model, "lr, svm, dt, rf, ensemble, lstm or lstm-attn")->required();
    train->add_option("--train", train_path, "Training corpus TSV (synthetic corpus when omitted with --lang synthetic)");
    train->add_option("--valid", valid_path, "Validation corpus TSV (neural models)");
    train->add_option("--vectors", vectors_path, "Pretrained word vectors (neural models)")->check(CLI::ExistingFile);
    train->add_option("-o,--out", train_out, "Output directory")->required();
    train->add_flag("--has-ids", train_ids, "Corpora carry an id column");
    train->add_option("--seed", train_seed, "Random seed");
    add_overrides(train, train_over);

    // predict
    std::string pred_model, pred_input, pred_out = "-";
    bool pred_ids = false, pred_unlabeled = false;
    auto* predict = app.add_subcommand("predict", "Predict labels for a corpus");
    predict->add_option("-m,--model", pred_model, "Model manifest written by train")->required()->check(CLI::ExistingFile);
    predict->add_option("-i,--input", pred_input, "Corpus TSV")->required()->check(CLI::ExistingFile);
    predict->add_option("-o,--output", pred_out, "Prediction TSV ('-' for stdout)");
    predict->add_flag("--has-ids", pred_ids, "Input carries an id column");
    predict->add_flag("--unlabeled", pred_unlabeled, "Input has no label column");

    // evaluate / report
    std::string eval_gold, eval_pred, eval_lang, eval_out;
    bool eval_ids = false;
    auto* evaluate = app.add_subcommand("evaluate", "Score predictions against a gold corpus");
    evaluate->add_option("--gold", eval_gold, "Gold corpus TSV")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--pred", eval_pred, "Prediction TSV")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--lang", eval_lang, "Label set (inferred when omitted)");
    evaluate->add_flag("--has-ids", eval_ids, "Gold corpus carries an id column");
    evaluate->add_option("-o,--output", eval_out, "Also write the metrics record as JSON");

    std::string rep_gold, rep_pred, rep_lang, rep_out;
    bool rep_ids = false;
    std::size_t rep_samples = 5;
    auto* report = app.add_subcommand("report", "Error analysis of predictions against a gold corpus");
    report->add_option("--gold", rep_gold, "Gold corpus TSV")->required()->check(CLI::ExistingFile);
    report->add_option("--pred", rep_pred, "Prediction TSV")->required()->check(CLI::ExistingFile);
    report->add_option("--lang", rep_lang, "Label set (inferred when omitted)");
    report->add_flag("--has-ids", rep_ids, "Gold corpus carries an id column");
    report->add_option("--samples", rep_samples, "Example texts kept per confused pair");
    report->add_option("-o,--output", rep_out, "Write <output>.txt and <output>.jsonl instead of printing");

    // grid
    cmox::GridConfig grid_cfg;
    std::string grid_train, grid_valid, grid_test, grid_vectors, grid_out;
    std::vector<std::string> grid_models;
    Overrides grid_over;
    auto* grid = app.add_subcommand("grid", "Train and evaluate every model for one language");
    grid->add_option("--lang", grid_cfg.language_key, "tamil, malayalam, kannada or synthetic");
    grid->add_option("--train", grid_train, "Training corpus TSV")->check(CLI::ExistingFile);
    grid->add_option("--valid", grid_valid, "Validation corpus TSV")->check(CLI::ExistingFile);
    grid->add_option("--test", grid_test, "Test corpus TSV")->check(CLI::ExistingFile);
    grid->add_option("--vectors", grid_vectors, "Pretrained word vectors")->check(CLI::ExistingFile);
    grid->add_option("-o,--out", grid_out, "Output directory")->required();
    grid->add_flag("--has-ids", grid_cfg.has_ids, "Corpora carry an id column");
    grid->add_option("--seed", grid_cfg.seed, "Random seed");
    grid->add_option("--models", grid_models, "Subset of models (default: all)")->delimiter(',');
    grid->add_option("--synth-train", grid_cfg.synth_train, "Synthetic training size");
    grid->add_option("--synth-valid", grid_cfg.synth_valid, "Synthetic validation size");
    grid->add_option("--synth-test", grid_cfg.synth_test, "Synthetic test size");
    add_overrides(grid, grid_over);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n";
        const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        std::cerr << sub->help();
        return 2;
    }

    try {
        if (*clean) return cmd_clean(clean_in, clean_out, clean_ids);

        if (*synth) {
            const auto lang = cmox::parse_language(synth_lang);
            const auto split = cmox::parse_split(synth_split);
            const auto corpus = cmox::synth_generate(cmox::default_synth_spec(lang, synth_size, synth_seed, split));
            write_output(synth_out, cmox::to_tsv(corpus));
            if (synth_out != "-") {
                const json echo = {{"command", "synth"}, {"language", synth_lang}, {"split", synth_split},
                                   {"size", synth_size}, {"seed", synth_seed}};
                cmox::write_file_atomic(echo_path(synth_out), echo.dump(2) + "\n");
            }
            return 0;
        }

        if (*train) {
            const auto kind = cmox::parse_model_kind(train_model);
            const auto lang = cmox::language_of(train_lang);
            const auto hyper = cmox::resolve_hyperparameters(train_lang, train_over.resolve());
            cmox::LabeledCorpus train_corpus, valid_corpus;
            if (!train_path.empty()) {
                train_corpus = load_corpus(train_path, lang, train_ids, cmox::Split::train);
            } else if (cmox::is_synthetic(train_lang)) {
                train_corpus = cmox::synth_generate(cmox::default_synth_spec(lang, 2000, train_seed));
            } else {
                throw cmox::Error("--train is required for language '" + train_lang + "'");
            }
            if (!valid_path.empty()) {
                valid_corpus = load_corpus(valid_path, lang, train_ids, cmox::Split::valid);
            } else if (cmox::is_neural(kind) && cmox::is_synthetic(train_lang)) {
                valid_corpus = cmox::synth_generate(cmox::default_synth_spec(lang, 400, train_seed + 1, cmox::Split::valid));
            }
            cmox::PipelineInputs inputs{&train_corpus, valid_corpus.records.empty() ? nullptr : &valid_corpus, {}};
            if (!vectors_path.empty()) inputs.vectors = vectors_path;
            const auto pipeline = cmox::train_pipeline(kind, train_lang, inputs, hyper, train_seed);

            const fs::path out(train_out);
            pipeline.save(out / "model.json");
            if (pipeline.run) cmox::write_file_atomic(out / "training.jsonl", pipeline.run->to_jsonl());
            json echo = {{"command", "train"}, {"language", train_lang}, {"model", train_model}, {"seed", train_seed},
                         {"has_ids", train_ids}, {"hyperparameters", hyper}};
            if (!train_path.empty()) echo["train"] = train_path;
            if (!valid_path.empty()) echo["valid"] = valid_path;
            if (!vectors_path.empty()) echo["vectors"] = vectors_path;
            cmox::write_file_atomic(out / "config.json", echo.dump(2) + "\n");
            std::cout << "wrote " << (out / "model.json").string() << '\n';
            return 0;
        }

        if (*predict) {
            const auto pipeline = cmox::Pipeline::load(pred_model);
            cmox::TsvOptions opts;
            const auto contents = cmox::read_file(pred_input);
            opts.has_ids = pred_ids || header_has_ids(contents);
            opts.labeled = !pred_unlabeled;
            opts.split = cmox::Split::test;
            cmox::LabeledCorpus corpus;
            try {
                corpus = cmox::parse_tsv(contents, pipeline.language, opts);
            } catch (const cmox::Error& e) {
                throw cmox::Error(pred_input + ": " + e.what());
            }
            const auto output = pipeline.predict(corpus);
            write_output(pred_out, cmox::to_prediction_tsv(output.rows));
            if (pred_out != "-") {
                const json echo = {{"command", "predict"}, {"model", pred_model}, {"input", pred_input},
                                   {"has_ids", opts.has_ids}, {"labeled", opts.labeled},
                                   {"hyperparameters", pipeline.config}};
                cmox::write_file_atomic(echo_path(pred_out), echo.dump(2) + "\n");
            }
            return 0;
        }

        if (*evaluate) {
            const auto s = score_files(eval_gold, eval_pred, eval_lang, eval_ids);
            const auto m = cmox::metrics(s.cm);
            std::cout << format_metrics(m);
            if (!eval_out.empty()) cmox::write_file_atomic(eval_out, m.to_json().dump(2) + "\n");
            return 0;
        }

        if (*report) {
            const auto s = score_files(rep_gold, rep_pred, rep_lang, rep_ids);
            const auto r = cmox::error_report(s.cm, s.gold, s.pred, rep_samples);
            if (rep_out.empty()) {
                std::cout << r.to_text();
            } else {
                cmox::write_file_atomic(rep_out + ".txt", r.to_text());
                cmox::write_file_atomic(rep_out + ".jsonl", r.to_jsonl());
            }
            return 0;
        }

        if (*grid) {
            if (!grid_train.empty()) grid_cfg.train = grid_train;
            if (!grid_valid.empty()) grid_cfg.valid = grid_valid;
            if (!grid_test.empty()) grid_cfg.test = grid_test;
            if (!grid_vectors.empty()) grid_cfg.vectors = grid_vectors;
            grid_cfg.out = grid_out;
            grid_cfg.overrides = grid_over.resolve();
            if (!grid_models.empty()) {
                grid_cfg.models.clear();
                for (const auto& m : grid_models) grid_cfg.models.push_back(cmox::parse_model_kind(m));
            }
            const auto result = cmox::run_grid(grid_cfg);
            std::cout << cmox::summary_tsv(result);
            std::printf("majority\t%.4f\t%.4f\t%.4f\n", result.majority.precision, result.majority.recall,
                        result.majority.f1);
            std::cout << "best\t" << result.best << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
