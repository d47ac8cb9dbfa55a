#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cmox/corpus.hpp"
#include "cmox/error.hpp"
#include "cmox/eval.hpp"
#include "cmox/random.hpp"
#include "oracles.hpp"

using namespace cmox;

TEST_SUITE("eval") {

TEST_CASE("confusion counts") {
    const auto id = confusion(std::vector<int>{0, 1}, std::vector<int>{0, 1}, {"A", "B"});
    CHECK(id.at(0, 0) == 1);
    CHECK(id.at(1, 1) == 1);
    CHECK(id.at(0, 1) == 0);
    const auto cm = confusion(std::vector<int>{0, 0, 1}, std::vector<int>{0, 1, 1}, {"A", "B"});
    CHECK(cm.at(0, 0) == 1);
    CHECK(cm.at(0, 1) == 1);
    CHECK(cm.at(1, 0) == 0);
    CHECK(cm.at(1, 1) == 1);
    CHECK_THROWS_AS(confusion(std::vector<int>{0}, std::vector<int>{0, 1}, {"A", "B"}), Error);
    CHECK_THROWS_AS(confusion(std::vector<int>{0}, std::vector<int>{2}, {"A", "B"}), Error);
}

TEST_CASE("hand-computed metrics") {
    // cm [[1,1],[0,2]]
    const auto r = metrics(confusion(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 1, 1, 1}, {"A", "B"}));
    CHECK(r.per_class[0].precision == 1.0);
    CHECK(r.per_class[0].recall == 0.5);
    CHECK(r.per_class[0].f1 == doctest::Approx(2.0 / 3));
    CHECK(r.per_class[1].precision == doctest::Approx(2.0 / 3));
    CHECK(r.per_class[1].recall == 1.0);
    CHECK(r.per_class[1].f1 == doctest::Approx(0.8));
    CHECK(std::abs(r.weighted.f1 - (2 * (2.0 / 3) + 2 * 0.8) / 4) < 1e-12);
    CHECK(r.weighted.f1 == doctest::Approx(0.7333333333));

    std::vector<int> gold(10, 0), pred(10, 0);
    gold[9] = 1;
    const auto m = metrics(confusion(gold, pred, {"A", "B"}));
    CHECK(std::abs(m.weighted.f1 - 0.9 * (2 * 0.9 / 1.9)) < 1e-12);
    CHECK(m.weighted.f1 == doctest::Approx(0.8526).epsilon(1e-4));
    CHECK(m.per_class[1].precision == 0.0);  // undefined ratio reads as 0
}

TEST_CASE("perfect predictions score one") {
    Rng rng(1);
    for (int t = 0; t < 20; ++t) {
        std::vector<int> g(1 + rng.uniform_int(40));
        for (auto& x : g) x = static_cast<int>(rng.uniform_int(4));
        const auto r = metrics(confusion(g, g, {"a", "b", "c", "d"}));
        CHECK(r.weighted.precision == doctest::Approx(1.0));
        CHECK(r.weighted.recall == doctest::Approx(1.0));
        CHECK(r.weighted.f1 == doctest::Approx(1.0));
        CHECK(r.accuracy == 1.0);
    }
}

TEST_CASE("weighted scores agree with the oracle and survive codebook permutation") {
    Rng rng(7);
    for (int t = 0; t < 200; ++t) {
        const int k = 2 + static_cast<int>(rng.uniform_int(5));
        std::vector<int> g(1 + rng.uniform_int(60)), p(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            g[i] = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(k)));
            p[i] = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(k)));
        }
        std::vector<std::string> labels;
        for (int c = 0; c < k; ++c) labels.push_back(std::to_string(c));
        const auto cm = confusion(g, p, labels);
        const auto r = metrics(cm);
        const auto o = oracle::weighted_scores(g, p, k);
        CHECK(std::abs(r.weighted.precision - o.precision) < 1e-12);
        CHECK(std::abs(r.weighted.recall - o.recall) < 1e-12);
        CHECK(std::abs(r.weighted.f1 - o.f1) < 1e-12);
        CHECK(std::abs(weighted_f1(g, p, k) - o.f1) < 1e-12);
        double sum = 0;
        for (int c = 0; c < k; ++c) {
            CHECK(cm.row_sum(c) == std::count(g.begin(), g.end(), c));
            sum += static_cast<double>(r.per_class[static_cast<std::size_t>(c)].support) / g.size() *
                   r.per_class[static_cast<std::size_t>(c)].f1;
        }
        CHECK(std::abs(sum - r.weighted.f1) < 1e-12);

        std::vector<int> perm(static_cast<std::size_t>(k));
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(std::span(perm));
        std::vector<int> g2, p2;
        for (std::size_t i = 0; i < g.size(); ++i) {
            g2.push_back(perm[static_cast<std::size_t>(g[i])]);
            p2.push_back(perm[static_cast<std::size_t>(p[i])]);
        }
        const auto r2 = metrics(confusion(g2, p2, labels));
        CHECK(std::abs(r2.weighted.f1 - r.weighted.f1) < 1e-12);
        CHECK(confusion(g2, p2, labels).at(perm[0], perm[1 % k]) == cm.at(0, 1 % k));
    }
}

TEST_CASE("select_best follows F, then R, then P") {
    using C = std::pair<std::string, Scores>;
    std::vector<C> tamil = {{"m-BERT", {0.74, 0.78, 0.76}}, {"Indic-BERT", {0.74, 0.78, 0.74}}, {"XLM-R", {0.75, 0.78, 0.76}}};
    CHECK(select_best(tamil) == "XLM-R");
    std::reverse(tamil.begin(), tamil.end());
    CHECK(select_best(tamil) == "XLM-R");
    std::vector<C> kannada = {{"XLM-R", {0.71, 0.70, 0.71}}, {"m-BERT", {0.70, 0.74, 0.71}}};
    CHECK(select_best(kannada) == "m-BERT");
    std::vector<C> one = {{"solo", {0.1, 0.2, 0.3}}};
    CHECK(select_best(one) == "solo");
    std::vector<C> same = {{"b", {0.5, 0.5, 0.5}}, {"a", {0.5, 0.5, 0.5}}};
    CHECK(select_best(same) == "a");
}

TEST_CASE("error report") {
    LabeledCorpus corpus;
    corpus.language = Language::kannada;
    const std::vector<LabelCode> gold_codes = {LabelCode::nf, LabelCode::nf, LabelCode::nf, LabelCode::otio,
                                               LabelCode::otio, LabelCode::ou, LabelCode::ou, LabelCode::not_lang};
    for (std::size_t i = 0; i < gold_codes.size(); ++i) {
        corpus.records.push_back({"r" + std::to_string(i), "text " + std::to_string(i), gold_codes[i]});
    }
    std::vector<int> gold;
    for (const auto c : gold_codes) gold.push_back(label_index(Language::kannada, c));
    const int nf = label_index(Language::kannada, LabelCode::nf);
    const int ou = label_index(Language::kannada, LabelCode::ou);
    const std::vector<int> pred = {nf, nf, ou, nf, nf, ou, nf, nf};
    const auto cm = confusion(gold, pred, codebook(Language::kannada));
    const auto r = error_report(cm, corpus, pred);
    CHECK(r.tpr[static_cast<std::size_t>(label_index(Language::kannada, LabelCode::otio))] == 0.0);
    CHECK(r.modal_class == nf);
    CHECK(r.total_errors == 5);
    // Recount: errors predicted as NF.
    int to_modal = 0, errors = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (gold[i] != pred[i]) {
            ++errors;
            to_modal += pred[i] == nf;
        }
    }
    CHECK(r.majority_bias == doctest::Approx(static_cast<double>(to_modal) / errors));
    REQUIRE(!r.pairs.empty());
    CHECK(r.pairs.front().count == 2);
    for (std::size_t i = 1; i < r.pairs.size(); ++i) CHECK(r.pairs[i - 1].count >= r.pairs[i].count);
    CHECK(r.to_text().find("TPR") != std::string::npos);
    CHECK(!r.to_jsonl().empty());

    const auto perfect = error_report(confusion(gold, gold, codebook(Language::kannada)), corpus, gold);
    CHECK(perfect.pairs.empty());
    CHECK(perfect.total_errors == 0);
    CHECK(perfect.majority_bias == 0.0);
}

TEST_CASE("prediction exchange format") {
    std::vector<PredictionRow> rows = {{"a", "Not_offensive", {0.9, 0.1}}, {"b", "not-Kannada", {0.25, 0.75}}};
    const auto text = to_prediction_tsv(rows);
    CHECK(text.rfind("id\tpredicted_label\tprobabilities\n", 0) == 0);
    const auto back = parse_predictions(text);
    REQUIRE(back.size() == 2);
    CHECK(back[1].label == "not-Kannada");
    CHECK(back[1].probabilities[1] == doctest::Approx(0.75));
    CHECK(to_prediction_tsv(std::vector<PredictionRow>{}) == "id\tpredicted_label\n");
    CHECK(parse_predictions("x\tNot_offensive\n").front().id == "x");
    CHECK_THROWS_AS(parse_predictions("a\tb\tc\td\n"), Error);
}

TEST_CASE("alignment by id") {
    TsvOptions o;
    o.has_ids = true;
    const auto gold = parse_tsv("1\tx\tNot_offensive\n2\ty\tnot-Kannada\n", Language::kannada, o);
    const auto ok = align_predictions(gold, parse_predictions("2\tNK\n1\tNot_offensive\n"));
    CHECK(ok.gold == ok.pred);
    CHECK_THROWS_AS(align_predictions(gold, parse_predictions("1\tNot_offensive\n")), Error);
    CHECK_THROWS_AS(align_predictions(gold, parse_predictions("1\tNot_offensive\n3\tNot_offensive\n")), Error);
    CHECK_THROWS_AS(align_predictions(gold, parse_predictions("1\tNot_offensive\n1\tNot_offensive\n")), Error);
    CHECK_THROWS_AS(align_predictions(gold, parse_predictions("1\tNot_offensive\n2\tnot-Tamil\n")), Error);
}

}
