#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "delaykit/predictor.hpp"
#include "delaykit/rng.hpp"
#include "delaykit/series.hpp"

using namespace delaykit;

namespace {

Dataset linear_dataset(std::size_t n, int dim, std::uint64_t seed) {
    // Realizable target y = W x with a fixed mixing matrix.
    Rng rng(seed);
    Dataset ds;
    ds.dim = dim;
    ds.n = n;
    std::vector<double> w(static_cast<std::size_t>(dim) * dim);
    for (auto& v : w) v = rng.uniform() - 0.5;
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<double> x(static_cast<std::size_t>(dim));
        for (auto& v : x) v = rng.uniform() * 2.0 - 1.0;
        for (int j = 0; j < dim; ++j) ds.inputs.push_back(x[static_cast<std::size_t>(j)]);
        for (int i = 0; i < dim; ++i) {
            double acc = 0.0;
            for (int j = 0; j < dim; ++j)
                acc += w[static_cast<std::size_t>(i * dim + j)] * x[static_cast<std::size_t>(j)];
            ds.targets.push_back(acc);
        }
    }
    return ds;
}

}  // namespace

TEST_CASE("analytic gradients match central finite differences") {
    // 5-parameter micro net: layers {2, 1, 1}.
    MlpModel model = MlpModel::init({2, 1, 1}, 3);
    CHECK(model.parameter_count() == 5);
    const double x[2] = {0.7, -0.3};
    const double y[1] = {0.42};

    MlpGradients grads = MlpGradients::zeros_like(model);
    backprop(model, x, y, grads);

    const double h = 1e-6;
    auto loss_at = [&](MlpModel& m) {
        MlpGradients scratch = MlpGradients::zeros_like(m);
        return backprop(m, x, y, scratch);
    };
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        for (std::size_t i = 0; i < model.weights[l].size(); ++i) {
            MlpModel plus = model, minus = model;
            plus.weights[l][i] += h;
            minus.weights[l][i] -= h;
            const double numeric = (loss_at(plus) - loss_at(minus)) / (2.0 * h);
            const double analytic = grads.weights[l][i];
            CHECK(std::abs(numeric - analytic) <=
                  1e-4 * std::max(1.0, std::abs(analytic)));
        }
        for (std::size_t i = 0; i < model.biases[l].size(); ++i) {
            MlpModel plus = model, minus = model;
            plus.biases[l][i] += h;
            minus.biases[l][i] -= h;
            const double numeric = (loss_at(plus) - loss_at(minus)) / (2.0 * h);
            CHECK(std::abs(numeric - grads.biases[l][i]) <=
                  1e-4 * std::max(1.0, std::abs(grads.biases[l][i])));
        }
    }
}

TEST_CASE("gradient check on random larger instances") {
    Rng rng(9);
    for (int trial = 0; trial < 3; ++trial) {
        MlpModel model = MlpModel::init({3, 8, 3}, 100 + static_cast<std::uint64_t>(trial));
        std::vector<double> x(3), y(3);
        for (auto& v : x) v = rng.uniform() * 2.0 - 1.0;
        for (auto& v : y) v = rng.uniform() * 2.0 - 1.0;
        MlpGradients grads = MlpGradients::zeros_like(model);
        backprop(model, x.data(), y.data(), grads);
        const double h = 1e-6;
        // spot check a handful of parameters per layer
        for (std::size_t l = 0; l < model.weights.size(); ++l) {
            for (std::size_t i = 0; i < model.weights[l].size(); i += 7) {
                MlpModel plus = model, minus = model;
                plus.weights[l][i] += h;
                minus.weights[l][i] -= h;
                MlpGradients s1 = MlpGradients::zeros_like(model);
                MlpGradients s2 = MlpGradients::zeros_like(model);
                const double numeric =
                    (backprop(plus, x.data(), y.data(), s1) -
                     backprop(minus, x.data(), y.data(), s2)) /
                    (2.0 * h);
                CHECK(std::abs(numeric - grads.weights[l][i]) <=
                      1e-4 * std::max(1.0, std::abs(grads.weights[l][i])));
            }
        }
    }
}

TEST_CASE("training fits a realizable linear target") {
    const auto ds = linear_dataset(8000, 3, 17);
    MlpModel model = MlpModel::init({3, 32, 3}, 4);
    TrainOptions opts;
    opts.lr = 2e-3;
    opts.batch = 64;
    opts.epochs = 30;
    opts.seed = 4;
    const auto report = train(model, ds, opts);
    CHECK(report.final_mse < 1e-3);

    // 5-epoch moving average decreases on a realizable target
    const auto& mse = report.epoch_mse;
    REQUIRE(mse.size() == 30);
    for (std::size_t i = 5; i + 5 < mse.size(); i += 5) {
        double early = 0.0, late = 0.0;
        for (std::size_t k = 0; k < 5; ++k) {
            early += mse[i - 5 + k];
            late += mse[i + k];
        }
        CHECK(late <= early);
    }
}

TEST_CASE("zero epochs leaves the model untouched") {
    const auto ds = linear_dataset(100, 2, 5);
    MlpModel model = MlpModel::init({2, 4, 2}, 8);
    const auto before = model.weights;
    TrainOptions opts;
    opts.epochs = 0;
    train(model, ds, opts);
    CHECK(model.weights == before);
}

TEST_CASE("same seed trains to bit-identical parameters") {
    const auto ds = linear_dataset(512, 2, 6);
    TrainOptions opts;
    opts.epochs = 5;
    opts.batch = 64;
    opts.seed = 12;
    MlpModel a = MlpModel::init({2, 16, 2}, 9);
    MlpModel b = MlpModel::init({2, 16, 2}, 9);
    train(a, ds, opts);
    train(b, ds, opts);
    CHECK(a.weights == b.weights);
    CHECK(a.biases == b.biases);
}

TEST_CASE("freerun identity and composition") {
    // Identity on the positive orthant: unit weights pass through ReLU.
    MlpModel id;
    id.layer_sizes = {2, 2, 2};
    id.weights = {{1, 0, 0, 1}, {1, 0, 0, 1}};
    id.biases = {{0, 0}, {0, 0}};
    const std::vector<double> x0 = {0.4, 0.9};
    CHECK(freerun(id, x0, 0) == x0);
    CHECK(freerun(id, x0, 7) == x0);

    MlpModel net = MlpModel::init({2, 8, 2}, 3);
    const auto ab = freerun(net, x0, 5);
    const auto a_then_b = freerun(net, freerun(net, x0, 2), 3);
    CHECK(ab == a_then_b);
}

TEST_CASE("evaluate: perfect model on a fixed point has zero errors") {
    MlpModel id;
    id.layer_sizes = {2, 2, 2};
    id.weights = {{1, 0, 0, 1}, {1, 0, 0, 1}};
    id.biases = {{0, 0}, {0, 0}};
    PointCloud cloud;
    cloud.dim = 2;
    for (int k = 0; k < 50; ++k) {
        cloud.data.push_back(0.3);
        cloud.data.push_back(0.8);
        cloud.time_index.push_back(k);
    }
    const auto report = evaluate(id, cloud, 10, "fixed");
    CHECK(report.errors.size() == 40);
    for (const double e : report.errors) CHECK(e == 0.0);
    CHECK(report.mean == 0.0);
    CHECK(report.median == 0.0);

    const auto threaded = evaluate(id, cloud, 10, "fixed", 2);
    CHECK(threaded.errors == report.errors);
}

TEST_CASE("make_dataset pairs consecutive points") {
    PointCloud cloud;
    cloud.dim = 1;
    cloud.data = {1.0, 2.0, 3.0};
    cloud.time_index = {0, 1, 2};
    const auto ds = make_dataset(cloud);
    CHECK(ds.n == 2);
    CHECK(ds.inputs == std::vector<double>{1.0, 2.0});
    CHECK(ds.targets == std::vector<double>{2.0, 3.0});
}

TEST_CASE("model json round trip") {
    MlpModel model = MlpModel::init({3, 5, 3}, 77);
    const auto text = model_to_json(model);
    const auto back = model_from_json(text);
    CHECK(back.layer_sizes == model.layer_sizes);
    CHECK(back.weights == model.weights);
    CHECK(back.biases == model.biases);
    CHECK_THROWS(model_from_json("{\"kind\":\"mlp\",\"layer_sizes\":[2,2]}"));
}

TEST_CASE("training aborts on divergence with diagnostics") {
    const auto ds = linear_dataset(256, 2, 30);
    MlpModel model = MlpModel::init({2, 8, 2}, 1);
    model.weights[0][0] = 1e300;  // poisoned parameter overflows the loss
    model.weights[0][1] = 1e300;
    TrainOptions opts;
    opts.adam = false;
    opts.lr = 1e10;
    opts.epochs = 3;
    CHECK_THROWS_WITH_AS(train(model, ds, opts), doctest::Contains("non-finite"),
                         std::runtime_error);
}
