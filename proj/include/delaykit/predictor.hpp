#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "delaykit/series.hpp"

namespace delaykit {

/// Fully connected network, rectifier on hidden layers, identity output.
struct MlpModel {
    std::vector<int> layer_sizes;                // e.g. {3, 128, 128, 3}
    std::vector<std::vector<double>> weights;    // per layer, out x in row-major
    std::vector<std::vector<double>> biases;

    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
    std::size_t parameter_count() const;

    /// He-style uniform init, seeded.
    static MlpModel init(const std::vector<int>& sizes, std::uint64_t seed);

    std::vector<double> forward(std::span<const double> x) const;
};

/// One-step prediction pairs: inputs are consecutive cloud points,
/// targets their successors.
struct Dataset {
    int dim = 0;
    std::size_t n = 0;
    std::vector<double> inputs;   // row-major n x dim
    std::vector<double> targets;  // row-major n x dim
};

Dataset make_dataset(const PointCloud& cloud);

struct TrainOptions {
    double lr = 1e-3;
    int batch = 512;
    int epochs = 30;
    std::uint64_t seed = 1;
    bool adam = true;  // false: plain SGD
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
};

struct TrainReport {
    std::vector<double> epoch_mse;
    double final_mse = 0.0;
};

/// Mini-batch gradient descent on mean squared error; deterministic
/// shuffling per seed. Throws on a non-finite loss.
TrainReport train(MlpModel& model, const Dataset& dataset, const TrainOptions& opts);

/// Gradients with the same shapes as the model.
struct MlpGradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    static MlpGradients zeros_like(const MlpModel& model);
    void scale(double factor);
};

/// Accumulates d(loss)/d(params) for one sample into grads and returns the
/// sample loss, with loss = mean over output dims of squared error.
double backprop(const MlpModel& model, const double* x, const double* y,
                MlpGradients& grads);

/// n-fold self-composition of the model.
std::vector<double> freerun(const MlpModel& model, std::span<const double> x0, int n);

struct PredictionReport {
    int horizon = 0;
    std::vector<double> errors;
    double mean = 0.0;
    double median = 0.0;
    std::string method_label;
};

/// Freerun error over every admissible start of the test cloud:
/// E(t) = || model^(n)(x_t) - x_{t+n} ||.
PredictionReport evaluate(const MlpModel& model, const PointCloud& test_cloud,
                          int n, const std::string& method_label = "",
                          int threads = 1);

/// JSON round-trip of the model (layer sizes + row-major parameters).
std::string model_to_json(const MlpModel& model);
MlpModel model_from_json(const std::string& text);

}  // namespace delaykit
