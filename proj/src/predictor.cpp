#include "delaykit/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "delaykit/kernels.hpp"
#include "delaykit/rng.hpp"
#include "delaykit/threadpool.hpp"

#include <nlohmann/json.hpp>

namespace delaykit {

std::size_t MlpModel::parameter_count() const {
    std::size_t count = 0;
    for (std::size_t l = 0; l < weights.size(); ++l)
        count += weights[l].size() + biases[l].size();
    return count;
}

MlpModel MlpModel::init(const std::vector<int>& sizes, std::uint64_t seed) {
    if (sizes.size() < 2) throw std::invalid_argument("need at least two layers");
    for (const int s : sizes)
        if (s < 1) throw std::invalid_argument("layer sizes must be >= 1");
    MlpModel model;
    model.layer_sizes = sizes;
    Rng rng(seed_hash(seed, 0x696e6974));
    // Glorot-uniform: with the shallow net and identity output this trains
    // an order of magnitude tighter than fan-in-only scaling at the same
    // budget.
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const std::size_t fan_in = static_cast<std::size_t>(sizes[l]);
        const std::size_t fan_out = static_cast<std::size_t>(sizes[l + 1]);
        const double bound =
            std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::vector<double> w(fan_out * fan_in);
        for (auto& x : w) x = (2.0 * rng.uniform() - 1.0) * bound;
        model.weights.push_back(std::move(w));
        model.biases.emplace_back(fan_out, 0.0);
    }
    return model;
}

namespace {

// Forward pass keeping pre-activation outputs of every layer.
void forward_cached(const MlpModel& model, const double* x,
                    std::vector<std::vector<double>>& activations) {
    const std::size_t n_layers = model.weights.size();
    activations.resize(n_layers + 1);
    activations[0].assign(x, x + model.input_dim());
    for (std::size_t l = 0; l < n_layers; ++l) {
        const std::size_t out_dim = model.biases[l].size();
        const std::size_t in_dim = activations[l].size();
        auto& out = activations[l + 1];
        out.resize(out_dim);
        for (std::size_t o = 0; o < out_dim; ++o) {
            out[o] = model.biases[l][o] +
                     knl::dot(model.weights[l].data() + o * in_dim,
                              activations[l].data(), in_dim);
        }
        if (l + 1 < n_layers) {
            for (auto& v : out) v = v > 0.0 ? v : 0.0;  // ReLU
        }
    }
}

}  // namespace

std::vector<double> MlpModel::forward(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != input_dim())
        throw std::invalid_argument("input dimension mismatch");
    std::vector<std::vector<double>> acts;
    forward_cached(*this, x.data(), acts);
    return acts.back();
}

Dataset make_dataset(const PointCloud& cloud) {
    if (cloud.n_pts() < 2) throw std::invalid_argument("cloud needs at least 2 points");
    Dataset ds;
    ds.dim = cloud.dim;
    ds.n = cloud.n_pts() - 1;
    ds.inputs.resize(ds.n * static_cast<std::size_t>(ds.dim));
    ds.targets.resize(ds.n * static_cast<std::size_t>(ds.dim));
    std::copy(cloud.data.begin(), cloud.data.end() - cloud.dim, ds.inputs.begin());
    std::copy(cloud.data.begin() + cloud.dim, cloud.data.end(), ds.targets.begin());
    return ds;
}

MlpGradients MlpGradients::zeros_like(const MlpModel& model) {
    MlpGradients g;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        g.weights.emplace_back(model.weights[l].size(), 0.0);
        g.biases.emplace_back(model.biases[l].size(), 0.0);
    }
    return g;
}

void MlpGradients::scale(double factor) {
    for (auto& w : weights)
        for (auto& v : w) v *= factor;
    for (auto& b : biases)
        for (auto& v : b) v *= factor;
}

double backprop(const MlpModel& model, const double* x, const double* y,
                MlpGradients& grads) {
    std::vector<std::vector<double>> acts;
    forward_cached(model, x, acts);
    const std::size_t n_layers = model.weights.size();
    const std::size_t out_dim = static_cast<std::size_t>(model.output_dim());

    // loss = (1/out_dim) sum_j (yhat_j - y_j)^2
    std::vector<double> delta(out_dim);
    double loss = 0.0;
    for (std::size_t j = 0; j < out_dim; ++j) {
        const double diff = acts[n_layers][j] - y[j];
        loss += diff * diff;
        delta[j] = 2.0 * diff / static_cast<double>(out_dim);
    }
    loss /= static_cast<double>(out_dim);

    for (std::size_t l = n_layers; l-- > 0;) {
        const auto& input = acts[l];
        const std::size_t in_dim = input.size();
        auto& gw = grads.weights[l];
        auto& gb = grads.biases[l];
        for (std::size_t o = 0; o < delta.size(); ++o) {
            gb[o] += delta[o];
            knl::axpy(delta[o], input.data(), gw.data() + o * in_dim, in_dim);
        }
        if (l == 0) break;
        std::vector<double> prev(in_dim, 0.0);
        for (std::size_t o = 0; o < delta.size(); ++o)
            knl::axpy(delta[o], model.weights[l].data() + o * in_dim, prev.data(), in_dim);
        // ReLU derivative on the hidden activation.
        for (std::size_t i = 0; i < in_dim; ++i)
            if (acts[l][i] <= 0.0) prev[i] = 0.0;
        delta = std::move(prev);
    }
    return loss;
}

TrainReport train(MlpModel& model, const Dataset& dataset, const TrainOptions& opts) {
    if (dataset.n == 0) throw std::invalid_argument("empty dataset");
    if (dataset.dim != model.input_dim() || dataset.dim != model.output_dim())
        throw std::invalid_argument("dataset dimension mismatch");
    if (opts.batch < 1) throw std::invalid_argument("batch must be >= 1");

    TrainReport report;
    if (opts.epochs == 0) return report;

    Rng rng(seed_hash(opts.seed, 0x74726e));
    std::vector<std::size_t> order(dataset.n);
    for (std::size_t i = 0; i < dataset.n; ++i) order[i] = i;

    MlpGradients grads = MlpGradients::zeros_like(model);
    MlpGradients m1 = MlpGradients::zeros_like(model);
    MlpGradients m2 = MlpGradients::zeros_like(model);
    std::size_t step = 0;

    auto apply_update = [&](double inv_batch) {
        grads.scale(inv_batch);
        if (!opts.adam) {
            for (std::size_t l = 0; l < model.weights.size(); ++l) {
                knl::axpy(-opts.lr, grads.weights[l].data(), model.weights[l].data(),
                          model.weights[l].size());
                knl::axpy(-opts.lr, grads.biases[l].data(), model.biases[l].data(),
                          model.biases[l].size());
            }
            return;
        }
        ++step;
        const double bc1 = 1.0 - std::pow(opts.adam_beta1, static_cast<double>(step));
        const double bc2 = 1.0 - std::pow(opts.adam_beta2, static_cast<double>(step));
        auto adam_axis = [&](std::vector<double>& p, std::vector<double>& g,
                             std::vector<double>& mm, std::vector<double>& vv) {
            for (std::size_t i = 0; i < p.size(); ++i) {
                mm[i] = opts.adam_beta1 * mm[i] + (1.0 - opts.adam_beta1) * g[i];
                vv[i] = opts.adam_beta2 * vv[i] + (1.0 - opts.adam_beta2) * g[i] * g[i];
                const double mhat = mm[i] / bc1;
                const double vhat = vv[i] / bc2;
                p[i] -= opts.lr * mhat / (std::sqrt(vhat) + opts.adam_eps);
            }
        };
        for (std::size_t l = 0; l < model.weights.size(); ++l) {
            adam_axis(model.weights[l], grads.weights[l], m1.weights[l], m2.weights[l]);
            adam_axis(model.biases[l], grads.biases[l], m1.biases[l], m2.biases[l]);
        }
    };

    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        // Fisher-Yates shuffle with the training stream.
        for (std::size_t i = 0; i + 1 < dataset.n; ++i) {
            const std::size_t j =
                i + static_cast<std::size_t>(rng.uniform_int(dataset.n - i));
            std::swap(order[i], order[j]);
        }
        double epoch_loss = 0.0;
        std::size_t pos = 0;
        while (pos < dataset.n) {
            const std::size_t take =
                std::min<std::size_t>(static_cast<std::size_t>(opts.batch),
                                      dataset.n - pos);
            for (auto& w : grads.weights) std::fill(w.begin(), w.end(), 0.0);
            for (auto& b : grads.biases) std::fill(b.begin(), b.end(), 0.0);
            double batch_loss = 0.0;
            for (std::size_t b = 0; b < take; ++b) {
                const std::size_t idx = order[pos + b];
                batch_loss += backprop(
                    model, dataset.inputs.data() + idx * static_cast<std::size_t>(dataset.dim),
                    dataset.targets.data() + idx * static_cast<std::size_t>(dataset.dim),
                    grads);
            }
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                         std::to_string(epoch));
            apply_update(1.0 / static_cast<double>(take));
            epoch_loss += batch_loss;
            pos += take;
        }
        report.epoch_mse.push_back(epoch_loss / static_cast<double>(dataset.n));
    }
    report.final_mse = report.epoch_mse.back();
    return report;
}

std::vector<double> freerun(const MlpModel& model, std::span<const double> x0, int n) {
    if (n < 0) throw std::invalid_argument("n must be >= 0");
    std::vector<double> state(x0.begin(), x0.end());
    for (int i = 0; i < n; ++i) {
        state = model.forward(state);
        for (const double v : state)
            if (!std::isfinite(v))
                throw std::runtime_error("freerun diverged at step " + std::to_string(i + 1));
    }
    return state;
}

PredictionReport evaluate(const MlpModel& model, const PointCloud& test_cloud,
                          int n, const std::string& method_label, int threads) {
    if (test_cloud.n_pts() <= static_cast<std::size_t>(n))
        throw std::invalid_argument("test cloud must have more than n points");
    PredictionReport report;
    report.horizon = n;
    report.method_label = method_label;
    const std::size_t n_starts = test_cloud.n_pts() - static_cast<std::size_t>(n);
    report.errors.assign(n_starts, 0.0);
    parallel_for(threads, n_starts, [&](std::size_t s) {
        const auto pred = freerun(model, test_cloud.point(s), n);
        const double* truth = test_cloud.row(s + static_cast<std::size_t>(n));
        report.errors[s] =
            std::sqrt(knl::dist2(pred.data(), truth, pred.size()));
    });
    report.mean = knl::sum(report.errors.data(), n_starts) / static_cast<double>(n_starts);
    std::vector<double> sorted = report.errors;
    std::sort(sorted.begin(), sorted.end());
    report.median = n_starts % 2 == 1
                        ? sorted[n_starts / 2]
                        : 0.5 * (sorted[n_starts / 2 - 1] + sorted[n_starts / 2]);
    return report;
}

std::string model_to_json(const MlpModel& model) {
    nlohmann::json j;
    j["schema"] = "delaykit/1";
    j["kind"] = "mlp";
    j["layer_sizes"] = model.layer_sizes;
    j["activation"] = "relu_hidden_identity_out";
    j["weights"] = model.weights;
    j["biases"] = model.biases;
    return j.dump(2);
}

MlpModel model_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    if (j.value("kind", "") != "mlp") throw std::runtime_error("not an mlp model file");
    MlpModel model;
    model.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    model.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    model.biases = j.at("biases").get<std::vector<std::vector<double>>>();
    if (model.weights.size() + 1 != model.layer_sizes.size() ||
        model.biases.size() != model.weights.size())
        throw std::runtime_error("inconsistent model file");
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        const std::size_t expect = static_cast<std::size_t>(model.layer_sizes[l]) *
                                   static_cast<std::size_t>(model.layer_sizes[l + 1]);
        if (model.weights[l].size() != expect ||
            model.biases[l].size() != static_cast<std::size_t>(model.layer_sizes[l + 1]))
            throw std::runtime_error("inconsistent model file");
        for (const double v : model.weights[l])
            if (!std::isfinite(v)) throw std::runtime_error("non-finite model parameter");
    }
    return model;
}

}  // namespace delaykit
