#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numeric>

#include "cmox/error.hpp"
#include "cmox/forest.hpp"
#include "cmox/random.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace cmox;
using testing::dataset;
using testing::sparse;

namespace {

Dataset random_sparse(Rng& rng, int n, int f, int k, double density = 0.3) {
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    for (int i = 0; i < n; ++i) {
        std::vector<double> r(static_cast<std::size_t>(f), 0.0);
        for (auto& v : r) {
            if (rng.uniform() < density) v = std::round(rng.uniform(0, 4)) / 4;  // repeated values
        }
        rows.push_back(r);
        y.push_back(static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(k))));
    }
    for (int c = 0; c < k; ++c) y[static_cast<std::size_t>(c)] = c;
    return dataset(rows, y, k);
}

void check_structure(const Tree& t) {
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        const auto& n = t.nodes[i];
        if (n.is_leaf()) {
            CHECK(std::accumulate(n.histogram.begin(), n.histogram.end(), 0.0) >= 1.0);
        } else {
            CHECK(std::isfinite(n.threshold));
            CHECK(n.left > static_cast<int>(i));
            CHECK(n.right > static_cast<int>(i));
        }
    }
}

}  // namespace

TEST_SUITE("forest") {

TEST_CASE("single class gives a single leaf") {
    const auto d = dataset({{1, 0}, {0, 1}, {2, 2}}, {0, 0, 0}, 1);
    const auto t = train_tree(d, {});
    CHECK(t.nodes.size() == 1);
    CHECK(predict_forest(t, sparse({5, 5})).label == 0);
}

TEST_CASE("one threshold suffices") {
    const auto d = dataset({{-2}, {-1}, {-0.5}, {0}, {0.5}, {3}}, {0, 0, 0, 1, 1, 1}, 2);
    const auto t = train_tree(d, {});
    CHECK(t.depth() == 1);
    for (std::size_t i = 0; i < d.X.size(); ++i) CHECK(predict_forest(t, d.X[i]).label == d.y[i]);
    CHECK(t.nodes[0].threshold == doctest::Approx(-0.25));
}

TEST_CASE("split candidates match brute-force Gini") {
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const auto d = random_sparse(rng, 30, 5, 3);
        std::vector<std::size_t> samples(d.X.size());
        std::iota(samples.begin(), samples.end(), 0);
        for (int f = 0; f < 5; ++f) {
            std::vector<double> col;
            for (const auto& x : d.X) col.push_back(x.at(f));
            const auto expected = oracle::all_splits(col, d.y, 3);
            const auto got = split_candidates(d, samples, f);
            REQUIRE(got.size() == expected.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                CHECK(got[i].threshold == doctest::Approx(expected[i].threshold));
                CHECK(std::abs(got[i].weighted_gini - expected[i].weighted_gini) < 1e-12);
            }
        }
    }
}

TEST_CASE("root split is the first minimum-Gini candidate") {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const auto d = random_sparse(rng, 40, 6, 3);
        const auto t = train_tree(d, {});
        if (t.nodes[0].is_leaf()) continue;
        double best = 1e9;
        int best_f = -1;
        double best_t = 0;
        for (int f = 0; f < 6; ++f) {
            std::vector<double> col;
            for (const auto& x : d.X) col.push_back(x.at(f));
            for (const auto& s : oracle::all_splits(col, d.y, 3)) {
                if (s.weighted_gini < best - 1e-12) {
                    best = s.weighted_gini;
                    best_f = f;
                    best_t = s.threshold;
                }
            }
        }
        CHECK(t.nodes[0].feature == best_f);
        CHECK(t.nodes[0].threshold == doctest::Approx(best_t));
    }
}

TEST_CASE("trees are well formed and fit the training data") {
    Rng rng(8);
    const auto d = random_sparse(rng, 80, 10, 4, 0.5);
    const auto t = train_tree(d, {});
    check_structure(t);
    // Unlimited depth reaches purity unless two rows are identical.
    int ok = 0;
    for (std::size_t i = 0; i < d.X.size(); ++i) ok += predict_forest(t, d.X[i]).label == d.y[i];
    CHECK(ok >= 70);
    TreeParams p;
    p.max_depth = 2;
    CHECK(train_tree(d, p).depth() <= 2);
    CHECK_THROWS_AS(train_tree(Dataset{}, {}), Error);
}

TEST_CASE("degenerate forest equals the tree") {
    Rng rng(10);
    const auto d = random_sparse(rng, 60, 8, 3);
    ForestParams fp;
    fp.n_estimators = 1;
    fp.bootstrap = false;
    fp.max_features = 8;
    const auto forest = train_forest(d, fp);
    const auto tree = train_tree(d, {});
    for (int i = 0; i < 100; ++i) {
        std::vector<double> x(8);
        for (auto& v : x) v = rng.uniform() < 0.4 ? std::round(rng.uniform(0, 4)) / 4 : 0.0;
        CHECK(predict_forest(forest, sparse(x)).label == predict_forest(tree, sparse(x)).label);
    }
}

TEST_CASE("forest is deterministic across thread counts") {
    Rng rng(12);
    const auto d = random_sparse(rng, 100, 12, 3);
    ForestParams fp;
    fp.n_estimators = 12;
    fp.seed = 77;
    setenv("CMOX_THREADS", "1", 1);
    const auto a = encode_forest(train_forest(d, fp)).dump();
    setenv("CMOX_THREADS", "3", 1);
    const auto b = encode_forest(train_forest(d, fp)).dump();
    unsetenv("CMOX_THREADS");
    CHECK(a == b);
    fp.seed = 78;
    CHECK(encode_forest(train_forest(d, fp)).dump() != a);
}

TEST_CASE("vote shares and the tie rule") {
    auto leaf = [](int cls) {
        Tree t;
        t.n_classes = 2;
        t.n_features = 1;
        TreeNode n;
        n.histogram = {cls == 0 ? 1.0 : 0.0, cls == 1 ? 1.0 : 0.0};
        t.nodes.push_back(n);
        return t;
    };
    Forest f;
    f.labels = {"a", "b"};
    f.n_features = 1;
    for (int i = 0; i < 100; ++i) f.trees.push_back(leaf(i % 2 == 0 ? 1 : 0));
    auto p = predict_forest(f, sparse({1}));
    CHECK(p.label == 0);
    CHECK(p.scores[0] == 0.5);

    Forest g = f;
    g.trees.assign(7, leaf(1));
    p = predict_forest(g, sparse({1}));
    CHECK(p.label == 1);
    CHECK(p.scores[1] == 1.0);
    CHECK_THROWS_AS(predict_forest(g, sparse({1, 2})), Error);
}

TEST_CASE("serialization round trip") {
    Rng rng(14);
    const auto d = random_sparse(rng, 50, 6, 3);
    ForestParams fp;
    fp.n_estimators = 5;
    const auto f = train_forest(d, fp);
    const auto back = decode_forest(encode_forest(f));
    CHECK(encode_forest(back).dump() == encode_forest(f).dump());
    for (const auto& x : d.X) CHECK(predict_forest(back, x).scores == predict_forest(f, x).scores);
}

}
