#include "doctest.h"

#include <cmath>
#include <numeric>
#include <set>

#include "assl/error.hpp"
#include "assl/prm.hpp"
#include "oracles.hpp"

using namespace assl;
using namespace assl::prm;

namespace {

data::Dataset make_dataset(Matrix rows, std::vector<int> labels, std::size_t m) {
    data::Dataset ds;
    ds.schema = data::DatasetSchema::generic(rows.cols(), m);
    ds.rows = std::move(rows);
    ds.labels = std::move(labels);
    ds.role = data::Role::train;
    return ds;
}

data::Dataset synthetic(std::size_t n, std::size_t f, std::size_t m, double sep, std::uint64_t seed) {
    data::SynthConfig c;
    c.num_features = f;
    c.num_classes = m;
    c.num_rows = n;
    c.labeled_fraction = 1.0;
    c.separation = sep;
    c.seed = seed;
    auto ds = data::generate_synthetic(c).labeled;
    ds.role = data::Role::train;
    return ds;
}

double sse(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s;
}

struct StumpOracle {
    double best_gain = -1.0;
};

// Reduction in squared error of the split x[f] <= t, computed from scratch.
double split_gain(const Matrix& x, const std::vector<double>& t, std::size_t f, double threshold) {
    std::vector<double> left, right;
    for (std::size_t r = 0; r < x.rows(); ++r) (x(r, f) <= threshold ? left : right).push_back(t[r]);
    return sse(t) - sse(left) - sse(right);
}

StumpOracle exhaustive_stump(const Matrix& x, const std::vector<double>& t, std::size_t min_leaf) {
    StumpOracle o;
    for (std::size_t f = 0; f < x.cols(); ++f) {
        std::set<double> values;
        for (std::size_t r = 0; r < x.rows(); ++r) values.insert(x(r, f));
        std::vector<double> sorted(values.begin(), values.end());
        for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
            const double mid = 0.5 * (sorted[i] + sorted[i + 1]);
            std::size_t nl = 0;
            for (std::size_t r = 0; r < x.rows(); ++r) nl += x(r, f) <= mid;
            if (nl < min_leaf || x.rows() - nl < min_leaf) continue;
            o.best_gain = std::max(o.best_gain, split_gain(x, t, f, mid));
        }
    }
    return o;
}

}  // namespace

TEST_SUITE("prm") {

TEST_CASE("constant targets give a single leaf") {
    Rng rng = make_stream(1, "tree");
    const Matrix x = oracle::random_matrix(20, 3, rng);
    const std::vector<double> t(20, 2.5);
    const auto tree = fit_regression_tree(x, t, 3, 1);
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].value == 2.5);
}

TEST_CASE("two-point stump") {
    const Matrix x = Matrix::from_rows({{0}, {1}});
    const auto tree = fit_regression_tree(x, std::vector<double>{-1, 1}, 1, 1);
    REQUIRE(tree.nodes.size() == 3);
    CHECK(tree.nodes[0].feature == 0);
    CHECK(tree.nodes[0].threshold == 0.5);
    CHECK(tree.nodes[tree.nodes[0].left].value == -1.0);
    CHECK(tree.nodes[tree.nodes[0].right].value == 1.0);
    CHECK(tree.predict(std::vector<double>{0.2}) == -1.0);
    CHECK(tree.predict(std::vector<double>{0.9}) == 1.0);
}

TEST_CASE("depth-1 trees match exhaustive stump search") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        CAPTURE(seed);
        Rng rng = make_stream(seed, "stump");
        const std::size_t n = 5 + seed % 46, f = 1 + seed % 5;
        Matrix x = oracle::random_matrix(n, f, rng);
        // every other instance uses coarse values so ties are common
        if (seed % 2 == 1)
            for (auto& v : x.values()) v = std::round(v * 2.0);
        std::vector<double> t(n);
        for (auto& v : t) v = std::normal_distribution<double>()(rng);
        const std::size_t min_leaf = 1 + seed % 3;

        const auto oracle_best = exhaustive_stump(x, t, min_leaf);
        const auto tree = fit_regression_tree(x, t, 1, min_leaf);
        if (oracle_best.best_gain <= 1e-12 * std::inner_product(t.begin(), t.end(), t.begin(), 0.0)) {
            CHECK(tree.nodes.size() == 1);
            continue;
        }
        REQUIRE(tree.nodes.size() == 3);
        const auto& root = tree.nodes[0];
        const double got = split_gain(x, t, static_cast<std::size_t>(root.feature), root.threshold);
        CHECK(oracle::rel_err(got, oracle_best.best_gain) < 1e-9);

        // leaves are the means of their partitions
        std::vector<double> left, right;
        for (std::size_t r = 0; r < n; ++r) (x(r, root.feature) <= root.threshold ? left : right).push_back(t[r]);
        CHECK(left.size() >= min_leaf);
        CHECK(right.size() >= min_leaf);
        const double lm = std::accumulate(left.begin(), left.end(), 0.0) / double(left.size());
        CHECK(tree.nodes[root.left].value == doctest::Approx(lm).epsilon(1e-12));

        const std::vector<int> node_of(n, 0);
        const SortedColumns sorted(x);
        const auto s = serial::best_split(x, sorted, t, node_of, 0, min_leaf);
        const auto o = omp::best_split(x, sorted, t, node_of, 0, min_leaf);
        CHECK(s.feature == o.feature);
        CHECK(s.threshold == o.threshold);
        CHECK(s.gain == o.gain);
        CHECK(oracle::rel_err(s.gain, oracle_best.best_gain) < 1e-9);
    }
}

TEST_CASE("deeper trees respect depth and leaf-size limits") {
    Rng rng = make_stream(2, "deep");
    const Matrix x = oracle::random_matrix(300, 4, rng);
    std::vector<double> t(300);
    for (std::size_t r = 0; r < 300; ++r) t[r] = std::sin(3.0 * x(r, 0)) + x(r, 1) * x(r, 2);
    for (std::size_t depth : {1u, 2u, 4u}) {
        const auto tree = fit_regression_tree(x, t, depth, 7);
        CHECK(tree.depth() <= depth);
        std::vector<std::size_t> leaf_counts(tree.nodes.size(), 0);
        for (std::size_t r = 0; r < 300; ++r) {
            std::size_t i = 0;
            while (!tree.nodes[i].is_leaf())
                i = x(r, tree.nodes[i].feature) <= tree.nodes[i].threshold ? tree.nodes[i].left : tree.nodes[i].right;
            ++leaf_counts[i];
        }
        for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
            if (tree.nodes[i].is_leaf()) CHECK(leaf_counts[i] >= 7);
            else CHECK(std::isfinite(tree.nodes[i].threshold));
        }
    }
    CHECK_THROWS_AS(fit_regression_tree(Matrix(0, 2), std::vector<double>{}, 2, 1), DataError);
}

TEST_CASE("gbdt with zero rounds and balanced classes predicts uniform") {
    const auto ds = synthetic(90, 3, 3, 1.0, 1);
    PrmConfig cfg;
    cfg.gbdt.rounds = 0;
    const auto model = train_gbdt(ds, cfg);
    for (std::size_t r = 0; r < 5; ++r) {
        const auto p = model.predict_proba(ds.rows.row(r));
        for (double v : p) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
}

TEST_CASE("gbdt separates a 1-d two-class set") {
    Matrix x(40, 1);
    std::vector<int> y(40);
    for (std::size_t i = 0; i < 40; ++i) {
        x(i, 0) = -2.0 + 0.1 * double(i);
        y[i] = x(i, 0) < 0.0 ? 0 : 1;
    }
    PrmConfig cfg;
    cfg.gbdt = {20, 2, 0.3, 1};
    const auto model = train_gbdt(make_dataset(x, y, 2), cfg);
    for (std::size_t i = 0; i < 40; ++i) CHECK(argmax(model.predict_proba(x.row(i))) == static_cast<std::size_t>(y[i]));
}

TEST_CASE("gbdt training log-loss never increases") {
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto ds = synthetic(200, 5, 3, 1.0, seed);
        PrmConfig cfg;
        cfg.gbdt = {60, 3, 0.5, 5};
        const auto trace = train_gbdt_traced(ds, cfg);
        REQUIRE(trace.log_loss.size() == 61);
        for (std::size_t t = 1; t < trace.log_loss.size(); ++t) CHECK(trace.log_loss[t] <= trace.log_loss[t - 1]);
        CHECK(trace.log_loss.back() < trace.log_loss.front());
    }
}

TEST_CASE("gbdt rejects bad shrinkage and empty data") {
    const auto ds = synthetic(30, 2, 3, 1.0, 4);
    PrmConfig cfg;
    cfg.gbdt.shrinkage = 0.0;
    CHECK_THROWS_AS(train_gbdt(ds, cfg), ConfigError);
    cfg.gbdt.shrinkage = 1.5;
    CHECK_THROWS_AS(train_gbdt(ds, cfg), ConfigError);
    CHECK_THROWS_AS(train_gbdt(make_dataset(Matrix(0, 2), {}, 3), PrmConfig{}), DataError);
}

TEST_CASE("hand-built gbdt probabilities") {
    GbdtModel g;
    g.num_classes = 2;
    g.num_features = 1;
    g.shrinkage = 0.5;
    g.base_score = {std::log(0.25), std::log(0.75)};
    RegressionTree stump;
    stump.num_features = 1;
    stump.max_depth = 1;
    stump.nodes = {TreeNode{0, 0.0, 1, 2, 0.0}, TreeNode{-1, 0.0, -1, -1, 1.0}, TreeNode{-1, 0.0, -1, -1, -1.0}};
    RegressionTree leaf;
    leaf.num_features = 1;
    leaf.nodes = {TreeNode{-1, 0.0, -1, -1, 2.0}};
    g.trees = {{stump, leaf}};
    const PlainModel model(g);

    const double s0 = std::log(0.25) + 0.5 * 1.0, s1 = std::log(0.75) + 0.5 * 2.0;
    const double p0 = std::exp(s0) / (std::exp(s0) + std::exp(s1));
    const auto p = model.predict_proba(std::vector<double>{-1.0});
    CHECK(p[0] == doctest::Approx(p0).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(1.0 - p0).epsilon(1e-12));

    const double r0 = std::log(0.25) - 0.5, r1 = std::log(0.75) + 1.0;
    const auto q = model.predict_proba(std::vector<double>{3.0});
    CHECK(q[0] == doctest::Approx(std::exp(r0) / (std::exp(r0) + std::exp(r1))).epsilon(1e-12));
    CHECK_THROWS_AS(model.predict_proba(std::vector<double>{1.0, 2.0}), ShapeError);
}

TEST_CASE("logistic regression: zero weights predict uniform") {
    const PlainModel model(LogRegModel{nn::DenseLayer{Matrix(4, 3, 0.0), std::vector<double>(4, 0.0)}});
    for (double v : model.predict_proba(std::vector<double>{1.0, -5.0, 2.0})) CHECK(v == 0.25);
}

TEST_CASE("logistic regression on a single present class") {
    Rng rng = make_stream(5, "single");
    const Matrix x = oracle::random_matrix(40, 3, rng);
    PrmConfig cfg;
    cfg.variant = PrmVariant::logistic_regression;
    const auto model = train_prm(make_dataset(x, std::vector<int>(40, 2), 3), cfg);
    for (std::size_t r = 0; r < 40; ++r) CHECK(model.predict_proba(x.row(r))[2] >= 1.0 - 1e-3);
    const Matrix probe = oracle::random_matrix(20, 3, rng);
    for (std::size_t r = 0; r < 20; ++r) CHECK(model.predict_proba(probe.row(r))[2] >= 1.0 - 1e-3);
}

TEST_CASE("logistic regression separates two blobs") {
    Rng rng = make_stream(6, "blobs");
    Matrix x = oracle::random_matrix(60, 2, rng, 0.5);
    std::vector<int> y(60);
    for (std::size_t r = 0; r < 60; ++r) {
        y[r] = r % 2;
        x(r, 0) += y[r] ? 3.0 : -3.0;
        x(r, 1) += y[r] ? 3.0 : -3.0;
    }
    PrmConfig cfg;
    cfg.variant = PrmVariant::logistic_regression;
    const auto model = train_prm(make_dataset(x, y, 2), cfg);
    for (std::size_t r = 0; r < 60; ++r) CHECK(argmax(model.predict_proba(x.row(r))) == static_cast<std::size_t>(y[r]));
}

TEST_CASE("logistic regression loss gradient matches central differences") {
    Rng rng = make_stream(7, "lrgrad");
    const Matrix x = oracle::random_matrix(12, 4, rng);
    std::vector<int> y(12);
    for (std::size_t i = 0; i < 12; ++i) y[i] = static_cast<int>(i % 3);
    nn::DenseLayer layer{oracle::random_matrix(3, 4, rng, 0.5), {0.1, -0.2, 0.3}};
    const auto loss = logreg_loss(layer, x, y, 0.01);
    const nn::MlpParams wrapped{{layer}};
    auto f = [&](const std::vector<double>& flat) {
        nn::MlpParams p = wrapped;
        nn::unflatten_into(p, flat);
        return logreg_loss(p.layers[0], x, y, 0.01).value;
    };
    CHECK(oracle::max_rel_err(nn::flatten(loss.grads), oracle::central_diff(f, nn::flatten(wrapped))) < 1e-5);
}

TEST_CASE("predict_proba is a simplex for every model and input") {
    const auto ds = synthetic(150, 4, 3, 1.5, 8);
    PrmConfig g;
    g.gbdt.rounds = 15;
    PrmConfig l;
    l.variant = PrmVariant::logistic_regression;
    l.logreg.epochs = 50;
    Rng rng = make_stream(8, "probe");
    for (const auto& model : {train_prm(ds, g), train_prm(ds, l)}) {
        const Matrix probe = oracle::random_matrix(50, 4, rng, 20.0);
        const Matrix p = model.predict_proba(probe);
        for (std::size_t r = 0; r < p.rows(); ++r) {
            double s = 0.0;
            for (double v : p.row(r)) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
                s += v;
            }
            CHECK(std::abs(s - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("retraining with the same seed reproduces the model") {
    const auto ds = synthetic(150, 4, 3, 1.5, 9);
    PrmConfig g;
    g.gbdt.rounds = 10;
    const auto a = train_prm(ds, g), b = train_prm(ds, g);
    REQUIRE(a.gbdt());
    CHECK(a.gbdt()->trees == b.gbdt()->trees);
    CHECK(a.gbdt()->base_score == b.gbdt()->base_score);
    PrmConfig l;
    l.variant = PrmVariant::logistic_regression;
    l.logreg.epochs = 30;
    CHECK(train_prm(ds, l).logreg()->layer == train_prm(ds, l).logreg()->layer);
}

TEST_CASE("pseudo_label examples") {
    auto fixed = [](std::vector<double> probs) {
        std::vector<double> bias;
        for (double p : probs) bias.push_back(std::log(p));
        return PlainModel(LogRegModel{nn::DenseLayer{Matrix(probs.size(), 2, 0.0), bias}});
    };
    data::Dataset pool;
    pool.schema = data::DatasetSchema::generic(2, 3);
    Rng rng = make_stream(10, "pool");
    pool.rows = oracle::random_matrix(6, 2, rng);
    pool.role = data::Role::unlabeled;

    const auto a = pseudo_label(fixed({0.1, 0.7, 0.2}), pool);
    REQUIRE(a.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(a.labels[i] == 1);
        CHECK(a.confidences[i] == doctest::Approx(0.7).epsilon(1e-12));
    }
    CHECK(a.rows == pool.rows);

    const auto tie = pseudo_label(fixed({0.4, 0.4, 0.2}), pool);
    for (int y : tie.labels) CHECK(y == 0);

    data::Dataset empty = pool;
    empty.rows = Matrix(0, 2);
    CHECK(pseudo_label(fixed({0.1, 0.7, 0.2}), empty).size() == 0);
}

TEST_CASE("pseudo_label is pure and confidences lie in [1/m, 1]") {
    const auto ds = synthetic(200, 4, 4, 1.0, 11);
    PrmConfig g;
    g.gbdt.rounds = 10;
    const auto model = train_prm(ds, g);
    data::Dataset pool = synthetic(100, 4, 4, 1.0, 12);
    pool.labels.reset();
    const auto a = pseudo_label(model, pool), b = pseudo_label(model, pool);
    CHECK(a.labels == b.labels);
    CHECK(a.confidences == b.confidences);
    for (double c : a.confidences) {
        CHECK(c >= 0.25 - 1e-15);
        CHECK(c <= 1.0);
    }
    const auto filtered = pseudo_label(model, pool, 0.6);
    for (double c : filtered.confidences) CHECK(c >= 0.6);
    CHECK(filtered.size() <= a.size());
}

TEST_CASE("argmax breaks ties toward the lowest index") {
    CHECK(argmax(std::vector<double>{0.2, 0.5, 0.5}) == 1);
    CHECK(argmax(std::vector<double>{1.0, 1.0}) == 0);
}

}
