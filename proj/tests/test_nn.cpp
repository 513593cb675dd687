#include "doctest.h"

#include <cmath>
#include <limits>
#include <numeric>

#include "assl/error.hpp"
#include "assl/nn.hpp"
#include "oracles.hpp"

using namespace assl;
using namespace assl::nn;

namespace {

DenseLayer layer(Matrix w, std::vector<double> b, Activation a) { return DenseLayer{std::move(w), std::move(b), a}; }

MlpParams random_net(std::vector<LayerSpec> specs, std::uint64_t seed) {
    Rng rng = make_stream(seed, "test.net");
    MlpParams net = make_mlp(specs, rng);
    // nonzero biases so every parameter is exercised
    std::normal_distribution<double> dist(0.0, 0.3);
    for (auto& l : net.layers)
        for (auto& b : l.bias) b = dist(rng);
    return net;
}

double contract(const Matrix& out, const Matrix& up) {
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += out.values()[i] * up.values()[i];
    return s;
}

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("dense_forward examples") {
    const auto id = layer(Matrix::from_rows({{1, 0}, {0, 1}}), {0, 0}, Activation::identity);
    CHECK(dense_forward(id, Matrix::from_rows({{3, 4}})) == Matrix::from_rows({{3, 4}}));

    const auto zero = layer(Matrix(2, 2, 0.0), {1, 2}, Activation::identity);
    CHECK(dense_forward(zero, Matrix::from_rows({{5, 5}})) == Matrix::from_rows({{1, 2}}));

    const auto w = layer(Matrix::from_rows({{1, 2}, {3, 4}}), {0, 0}, Activation::identity);
    CHECK(dense_forward(w, Matrix::from_rows({{1, 1}})) == Matrix::from_rows({{3, 7}}));
}

TEST_CASE("dense_forward shape error names both dimensions") {
    const auto w = layer(Matrix(2, 3, 0.0), {0, 0}, Activation::identity);
    try {
        dense_forward(w, Matrix(1, 4));
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        const std::string msg = e.what();
        CHECK(msg.find('3') != std::string::npos);
        CHECK(msg.find('4') != std::string::npos);
    }
}

TEST_CASE("activations") {
    CHECK(activate(Activation::relu, Matrix::from_rows({{-1, 0, 2}})) == Matrix::from_rows({{0, 0, 2}}));
    CHECK(std::isnan(activate(Activation::relu, Matrix::from_rows({{std::nan("")}}))(0, 0)));
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(activate(Activation::identity, Matrix::from_rows({{-2.5}})) == Matrix::from_rows({{-2.5}}));
    // stable at the extremes
    CHECK(sigmoid(-800.0) >= 0.0);
    CHECK(sigmoid(800.0) == 1.0);
    CHECK(std::isfinite(sigmoid(-800.0)));
}

TEST_CASE("softmax examples") {
    const auto u = softmax(std::vector<double>{0, 0, 0});
    for (double p : u) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    const auto p = softmax(std::vector<double>{std::log(1.0), std::log(2.0), std::log(3.0)});
    CHECK(p[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(2.0 / 6.0).epsilon(1e-14));
    CHECK(p[2] == doctest::Approx(3.0 / 6.0).epsilon(1e-14));

    const auto big = softmax(std::vector<double>{1000, 0, 0});
    CHECK(big[0] == doctest::Approx(1.0));
    CHECK(big[1] < 1e-300);
    for (double v : big) CHECK(std::isfinite(v));
}

TEST_CASE("softmax sums to one and ignores a constant shift") {
    Rng rng = make_stream(3, "softmax");
    std::uniform_real_distribution<double> logit(-50.0, 50.0), shift(-100.0, 100.0);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> z(2 + trial % 9);
        for (auto& v : z) v = logit(rng);
        const auto p = softmax(z);
        CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) <= 1e-12);
        const double c = shift(rng);
        for (auto& v : z) v += c;
        const auto q = softmax(z);
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(p[i] - q[i]) < 1e-12);
    }
}

TEST_CASE("dense_forward is linear before the activation") {
    Rng rng = make_stream(4, "linear");
    for (int trial = 0; trial < 20; ++trial) {
        const auto w = layer(oracle::random_matrix(4, 6, rng), std::vector<double>(4, 0.0), Activation::identity);
        const Matrix x = oracle::random_matrix(5, 6, rng), y = oracle::random_matrix(5, 6, rng);
        const double a = 1.7, b = -0.6;
        Matrix combo(5, 6);
        for (std::size_t i = 0; i < combo.size(); ++i) combo.values()[i] = a * x.values()[i] + b * y.values()[i];
        const Matrix lhs = dense_forward(w, combo);
        const Matrix fx = dense_forward(w, x), fy = dense_forward(w, y);
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            CHECK(std::abs(lhs.values()[i] - (a * fx.values()[i] + b * fy.values()[i])) <= 1e-12);
        }
    }
}

TEST_CASE("mlp_forward examples") {
    Rng rng = make_stream(5, "fwd");
    const Matrix x = oracle::random_matrix(3, 2, rng);
    MlpParams id{{layer(Matrix::from_rows({{1, 0}, {0, 1}}), {0, 0}, Activation::identity)}};
    CHECK(mlp_forward(id, x).output == x);

    MlpParams zeros{{layer(Matrix(4, 2, 0.0), std::vector<double>(4, 0.0), Activation::relu),
                     layer(Matrix(3, 4, 0.0), std::vector<double>(3, 0.0), Activation::relu)}};
    CHECK(mlp_forward(zeros, x).output == Matrix(3, 3, 0.0));

    const auto net = random_net({{2, 5, Activation::relu}, {5, 3, Activation::sigmoid}}, 6);
    const Matrix composed = dense_forward(net.layers[1], dense_forward(net.layers[0], x));
    const auto fwd = mlp_forward(net, x);
    CHECK(fwd.output == composed);
    CHECK(mlp_predict(net, x) == composed);
    CHECK(fwd.cache.inputs.size() == 2);
    CHECK(fwd.cache.inputs[0] == x);
}

TEST_CASE("mlp_backward examples") {
    const auto net = random_net({{3, 4, Activation::relu}, {4, 2, Activation::identity}}, 7);
    Rng rng = make_stream(7, "x");
    const Matrix x = oracle::random_matrix(5, 3, rng);
    const auto fwd = mlp_forward(net, x);
    const auto back = mlp_backward(net, fwd.cache, Matrix(5, 2, 0.0));
    for (double g : flatten(back.grads)) CHECK(g == 0.0);
    for (double g : back.input_grad.values()) CHECK(g == 0.0);

    MlpParams one{{layer(Matrix::from_rows({{0.5}}), {0.0}, Activation::identity)}};
    const auto f1 = mlp_forward(one, Matrix::from_rows({{2}}));
    const auto b1 = mlp_backward(one, f1.cache, Matrix::from_rows({{3}}));
    CHECK(b1.grads.layers[0].weights(0, 0) == 6.0);
    CHECK(b1.grads.layers[0].bias[0] == 3.0);
    CHECK(b1.input_grad(0, 0) == 1.5);
}

TEST_CASE("mlp_backward matches central differences for batch sizes 1, 3 and 17") {
    for (std::size_t batch : {1u, 3u, 17u}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            CAPTURE(batch);
            CAPTURE(seed);
            const auto net = random_net(
                {{4, 6, Activation::relu}, {6, 5, Activation::sigmoid}, {5, 3, Activation::identity}}, 100 + seed);
            Rng rng = make_stream(seed, "batch");
            const Matrix x = oracle::random_matrix(batch, 4, rng);
            const Matrix up = oracle::random_matrix(batch, 3, rng);

            const auto fwd = mlp_forward(net, x);
            const auto back = mlp_backward(net, fwd.cache, up);

            auto f = [&](const std::vector<double>& flat) {
                MlpParams p = net;
                unflatten_into(p, flat);
                return contract(mlp_predict(p, x), up);
            };
            const auto numeric = oracle::central_diff(f, flatten(net));
            CHECK(oracle::max_rel_err(flatten(back.grads), numeric) < 1e-5);

            auto fx = [&](const std::vector<double>& flat) {
                return contract(mlp_predict(net, Matrix(batch, 4, flat)), up);
            };
            const std::vector<double> xs(x.values().begin(), x.values().end());
            const std::vector<double> ig(back.input_grad.values().begin(), back.input_grad.values().end());
            CHECK(oracle::max_rel_err(ig, oracle::central_diff(fx, xs)) < 1e-5);
        }
    }
}

TEST_CASE("softmax_backward matches central differences") {
    Rng rng = make_stream(8, "smb");
    const Matrix z = oracle::random_matrix(4, 5, rng);
    const Matrix up = oracle::random_matrix(4, 5, rng);
    const Matrix analytic = softmax_backward(softmax_rows(z), up);
    auto f = [&](const std::vector<double>& flat) { return contract(softmax_rows(Matrix(4, 5, flat)), up); };
    const auto numeric = oracle::central_diff(f, std::vector<double>(z.values().begin(), z.values().end()));
    CHECK(oracle::max_rel_err(std::vector<double>(analytic.values().begin(), analytic.values().end()), numeric) < 1e-5);
}

TEST_CASE("make_mlp uses the documented init ranges and is seeded") {
    const std::vector<LayerSpec> specs{{10, 20, Activation::relu}, {20, 4, Activation::identity}};
    Rng a = make_stream(9, "init"), b = make_stream(9, "init"), c = make_stream(10, "init");
    const auto n1 = make_mlp(specs, a), n2 = make_mlp(specs, b), n3 = make_mlp(specs, c);
    CHECK(n1 == n2);
    CHECK_FALSE(n1 == n3);
    const double he = std::sqrt(6.0 / 10.0), xavier = std::sqrt(6.0 / 24.0);
    for (double w : n1.layers[0].weights.values()) CHECK(std::abs(w) <= he);
    for (double w : n1.layers[1].weights.values()) CHECK(std::abs(w) <= xavier);
    for (double bias : n1.layers[0].bias) CHECK((bias != 0.0 && std::abs(bias) <= 1.0 / std::sqrt(10.0)));
    for (double bias : n1.layers[1].bias) CHECK((bias != 0.0 && std::abs(bias) <= 1.0 / std::sqrt(20.0)));
    CHECK(n1.parameter_count() == 10 * 20 + 20 + 20 * 4 + 4);
}

TEST_CASE("MlpParams::validate rejects broken chains") {
    MlpParams bad{{layer(Matrix(3, 2), {0, 0, 0}, Activation::relu), layer(Matrix(1, 4), {0}, Activation::identity)}};
    CHECK_THROWS_AS(bad.validate(), ShapeError);
}

TEST_CASE("adam_step examples") {
    MlpParams p{{layer(Matrix::from_rows({{1.0, -2.0}}), {0.5}, Activation::identity)}};
    const MlpParams before = p;

    AdamState zero_state = AdamState::for_params(p, {0.01, 0.9, 0.999, 1e-8});
    adam_step(p, zeros_like(p), zero_state);
    CHECK(p == before);
    CHECK(zero_state.step_count == 1);

    MlpParams g{{layer(Matrix::from_rows({{0.3, -4.0}}), {1e-3}, Activation::identity)}};
    AdamState st = AdamState::for_params(p, {0.01, 0.9, 0.999, 1e-8});
    adam_step(p, g, st);
    CHECK(p.layers[0].weights(0, 0) == doctest::Approx(1.0 - 0.01).epsilon(1e-6));
    CHECK(p.layers[0].weights(0, 1) == doctest::Approx(-2.0 + 0.01).epsilon(1e-6));
    CHECK(p.layers[0].bias[0] == doctest::Approx(0.5 - 0.01).epsilon(1e-4));
}

TEST_CASE("two Adam steps on a scalar follow the hand-unrolled recurrence") {
    const double lr = 0.05, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double g1 = 0.7, g2 = -0.2;
    double w = 1.5;
    const double m1 = (1 - b1) * g1, v1 = (1 - b2) * g1 * g1;
    w -= lr * (m1 / (1 - b1)) / (std::sqrt(v1 / (1 - b2)) + eps);
    const double m2 = b1 * m1 + (1 - b1) * g2, v2 = b2 * v1 + (1 - b2) * g2 * g2;
    w -= lr * (m2 / (1 - b1 * b1)) / (std::sqrt(v2 / (1 - b2 * b2)) + eps);

    MlpParams p{{layer(Matrix::from_rows({{1.5}}), {0.0}, Activation::identity)}};
    AdamState st = AdamState::for_params(p, {lr, b1, b2, eps});
    adam_step(p, MlpParams{{layer(Matrix::from_rows({{g1}}), {0.0}, Activation::identity)}}, st);
    adam_step(p, MlpParams{{layer(Matrix::from_rows({{g2}}), {0.0}, Activation::identity)}}, st);
    CHECK(std::abs(p.layers[0].weights(0, 0) - w) <= 1e-12);
    CHECK(st.step_count == 2);
}

TEST_CASE("adam_step with zero learning rate is the identity") {
    const auto net = random_net({{3, 4, Activation::relu}, {4, 2, Activation::identity}}, 11);
    MlpParams p = net;
    Rng rng = make_stream(11, "g");
    MlpParams g = zeros_like(p);
    std::vector<double> flat(p.parameter_count());
    for (auto& v : flat) v = std::normal_distribution<double>()(rng);
    unflatten_into(g, flat);
    AdamState st = AdamState::for_params(p, {0.0, 0.9, 0.999, 1e-8});
    for (int i = 0; i < 5; ++i) adam_step(p, g, st);
    CHECK(p == net);
}

TEST_CASE("l2_penalty examples") {
    const auto net = random_net({{2, 3, Activation::relu}}, 12);
    const auto none = l2_penalty(net, 0.0);
    CHECK(none.value == 0.0);
    for (double g : flatten(none.grads)) CHECK(g == 0.0);

    MlpParams single{{layer(Matrix::from_rows({{2.0}}), {0.0}, Activation::identity)}};
    const auto half = l2_penalty(single, 0.5);
    CHECK(half.value == 2.0);
    CHECK(half.grads.layers[0].weights(0, 0) == 2.0);

    CHECK_THROWS(l2_penalty(net, -1.0));

    const auto pen = l2_penalty(net, 0.37);
    auto f = [&](const std::vector<double>& flat) {
        MlpParams p = net;
        unflatten_into(p, flat);
        return l2_penalty(p, 0.37).value;
    };
    CHECK(oracle::max_rel_err(flatten(pen.grads), oracle::central_diff(f, flatten(net))) < 1e-8);
}

TEST_CASE("grad_check examples") {
    const LossWithGrad quad = [](std::span<const double> w) {
        return std::pair<double, std::vector<double>>{w[0] * w[0], {2.0 * w[0]}};
    };
    CHECK(grad_check(quad, std::vector<double>{3.0}) < 1e-8);

    const LossWithGrad flat = [](std::span<const double> w) {
        return std::pair<double, std::vector<double>>{4.2, std::vector<double>(w.size(), 0.0)};
    };
    CHECK(grad_check(flat, std::vector<double>{1.0, -2.0, 3.0}) < 1e-8);

    const LossWithGrad wrong = [](std::span<const double> w) {
        return std::pair<double, std::vector<double>>{w[0] * w[0], {3.0 * w[0]}};
    };
    CHECK(grad_check(wrong, std::vector<double>{3.0}) > 0.1);
}

TEST_CASE("finite inputs never produce NaN or Inf") {
    Rng rng = make_stream(13, "finite");
    std::uniform_real_distribution<double> wide(-1e3, 1e3);
    for (int trial = 0; trial < 50; ++trial) {
        auto net = random_net({{5, 7, Activation::relu}, {7, 3, Activation::sigmoid}}, 200 + trial);
        Matrix x(9, 5);
        for (auto& v : x.values()) v = wide(rng);
        const auto fwd = mlp_forward(net, x);
        CHECK(fwd.output.all_finite());
        const auto sm = softmax_rows(oracle::random_matrix(9, 4, rng, 300.0));
        CHECK(sm.all_finite());
        const auto back = mlp_backward(net, fwd.cache, oracle::random_matrix(9, 3, rng));
        for (double g : flatten(back.grads)) CHECK(std::isfinite(g));
        CHECK(back.input_grad.all_finite());
        AdamState st = AdamState::for_params(net, {});
        adam_step(net, back.grads, st);
        for (double v : flatten(net)) CHECK(std::isfinite(v));
    }
}

TEST_CASE("flatten and unflatten round-trip") {
    const auto net = random_net({{3, 4, Activation::relu}, {4, 2, Activation::identity}}, 14);
    MlpParams copy = zeros_like(net);
    unflatten_into(copy, flatten(net));
    CHECK(copy == net);
    CHECK_THROWS_AS(unflatten_into(copy, std::vector<double>(3, 0.0)), ShapeError);
}

TEST_CASE("IndexCycler visits every index once per pass and is seeded") {
    IndexCycler a(10, make_stream(1, "c")), b(10, make_stream(1, "c"));
    std::vector<std::size_t> seen;
    for (int i = 0; i < 5; ++i) {
        const auto chunk = a.next(4);
        CHECK(chunk == b.next(4));
        seen.insert(seen.end(), chunk.begin(), chunk.end());
    }
    // 20 draws = two full passes
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<std::size_t> part(seen.begin() + pass * 10, seen.begin() + pass * 10 + 10);
        std::sort(part.begin(), part.end());
        for (std::size_t i = 0; i < 10; ++i) CHECK(part[i] == i);
    }
}

}
