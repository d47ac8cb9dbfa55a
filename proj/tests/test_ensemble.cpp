#include <doctest.h>

#include "cmox/container.hpp"
#include "cmox/ensemble.hpp"
#include "cmox/error.hpp"
#include "cmox/random.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace cmox;

TEST_SUITE("ensemble") {

TEST_CASE("vote examples") {
    // NF=0, OTII=2, OU=4
    CHECK(vote(std::vector<int>{0, 0, 2, 4}) == 0);
    CHECK(vote(std::vector<int>{0, 0, 4, 4}) == 0);
    CHECK(vote(std::vector<int>{4, 0, 0, 4}) == 4);
    CHECK(vote(std::vector<int>{3}) == 3);
    CHECK_THROWS_AS(vote(std::vector<int>{}), Error);
}

TEST_CASE("vote agrees with the brute-force evaluator") {
    Rng rng(31);
    for (int i = 0; i < 2000; ++i) {
        std::vector<int> v(1 + rng.uniform_int(6));
        for (auto& x : v) x = static_cast<int>(rng.uniform_int(6));
        CHECK(vote(v) == oracle::plurality(v));
    }
}

TEST_CASE("trained ensemble") {
    Rng rng(2);
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    for (int i = 0; i < 60; ++i) {
        std::vector<double> x(4, 0.0);
        x[static_cast<std::size_t>(i % 3)] = rng.uniform(0.5, 1);
        x[3] = rng.uniform(0, 0.2);
        rows.push_back(x);
        y.push_back(i % 3);
    }
    const auto d = testing::dataset(rows, y, 3);
    EnsembleConfig cfg;
    cfg.forest.n_estimators = 10;
    const auto e = train_ensemble(d, cfg);
    REQUIRE(e.members.size() == 4);
    CHECK(e.members[0].name == "svm");
    CHECK(e.members[3].name == "tree");
    for (std::size_t i = 0; i < d.X.size(); ++i) {
        // Members agree on these easy points, so the ensemble matches each.
        const auto p = predict_ensemble(e, d.X[i]);
        bool unanimous = true;
        for (const auto& m : e.members) unanimous &= predict_member(m, d.X[i]).label == predict_member(e.members[0], d.X[i]).label;
        if (unanimous) CHECK(p.label == predict_member(e.members[0], d.X[i]).label);
        CHECK(p.label == d.y[i]);
    }

    ModelContainer c;
    c.manifest = encode_ensemble(e, c);
    const auto back = decode_ensemble(c.manifest, c);
    for (const auto& x : d.X) CHECK(predict_ensemble(back, x).scores == predict_ensemble(e, x).scores);
}

TEST_CASE("make_ensemble validates members") {
    const auto d = testing::toy_separable();
    const auto lr = train_logreg(d, TrainConfig::logreg(1.0));
    CHECK_THROWS_AS(make_ensemble({{"lr", lr}}), Error);
    auto other = lr;
    other.labels = {"x", "y"};
    CHECK_THROWS_AS(make_ensemble({{"a", lr}, {"b", other}}), Error);
}

}
