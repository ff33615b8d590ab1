#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

namespace climalign::emulator {

// Dense feed-forward network, tanh hidden layers, linear output layer.
// Column-major batches: one sample per column.
struct Layer {
    Eigen::MatrixXd w;  // out x in
    Eigen::VectorXd b;
};

struct Mlp {
    std::vector<Layer> layers;

    std::size_t n_inputs() const { return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().w.cols()); }
    std::size_t n_outputs() const { return layers.empty() ? 0 : static_cast<std::size_t>(layers.back().w.rows()); }
    std::size_t n_parameters() const;
    Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
};

// Glorot-uniform hidden weights, zero output weights and biases; deterministic
// in the seed.
Mlp make_mlp(std::size_t n_in, const std::vector<std::size_t>& hidden, std::size_t n_out, std::uint64_t seed);

struct AdamConfig {
    std::size_t epochs = 2000;
    double learning_rate = 3e-3;
    double final_lr_fraction = 0.01;  // cosine decay to this fraction of the initial rate
    std::size_t batch = 32;           // 0 = full batch
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 1;
    std::size_t record_every = 10;  // loss-history stride in epochs
};

struct FitResult {
    std::vector<double> train_loss;       // per recorded epoch
    std::vector<double> validation_loss;  // empty without validation data
    std::size_t best_epoch = 0;
    double best_validation_loss = 0.0;
};

// Mean squared error over all outputs; keeps the weights with the lowest
// validation loss when validation data is given. Throws RuntimeError on a
// non-finite loss.
FitResult fit(Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Eigen::MatrixXd* x_val,
              const Eigen::MatrixXd* y_val, const AdamConfig& cfg,
              const std::function<void(std::size_t, double)>& progress = {});

double mse(const Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

}  // namespace climalign::emulator
