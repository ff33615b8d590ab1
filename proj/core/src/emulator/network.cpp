#include "climalign/emulator/network.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "climalign/errors.hpp"
#include "climalign/util/rng.hpp"

namespace climalign::emulator {

std::size_t Mlp::n_parameters() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.w.size() + l.b.size());
    return n;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd h = x;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        Eigen::MatrixXd z = layers[i].w * h;
        z.colwise() += layers[i].b;
        h = i + 1 < layers.size() ? Eigen::MatrixXd(z.array().tanh()) : z;
    }
    return h;
}

Mlp make_mlp(std::size_t n_in, const std::vector<std::size_t>& hidden, std::size_t n_out, std::uint64_t seed) {
    if (n_in == 0 || n_out == 0) throw ConfigError("network needs at least one input and one output");
    std::vector<std::size_t> sizes{n_in};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(n_out);
    Mlp net;
    auto g = util::stream(seed, 0, 0x6e6e);
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
        if (sizes[i + 1] == 0) throw ConfigError("hidden layer of width zero");
        const auto fan_in = static_cast<Eigen::Index>(sizes[i]);
        const auto fan_out = static_cast<Eigen::Index>(sizes[i + 1]);
        const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Layer l;
        l.w = Eigen::MatrixXd::Zero(fan_out, fan_in);
        // Output layer starts at zero so the initial prediction is the label mean.
        if (i + 2 < sizes.size())
            for (Eigen::Index c = 0; c < fan_in; ++c)
                for (Eigen::Index r = 0; r < fan_out; ++r) l.w(r, c) = a * (2.0 * util::uniform01(g) - 1.0);
        l.b = Eigen::VectorXd::Zero(fan_out);
        net.layers.push_back(std::move(l));
    }
    return net;
}

double mse(const Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    return (net.forward(x) - y).squaredNorm() / static_cast<double>(y.size());
}

namespace {

struct Moments {
    std::vector<Layer> m, v;
};

std::vector<Layer> zeros_like(const Mlp& net) {
    std::vector<Layer> z;
    for (const auto& l : net.layers) z.push_back({Eigen::MatrixXd::Zero(l.w.rows(), l.w.cols()), Eigen::VectorXd::Zero(l.b.size())});
    return z;
}

// Gradient of the batch MSE; returns the loss.
double backprop(const Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, std::vector<Layer>& grad) {
    const std::size_t nl = net.layers.size();
    std::vector<Eigen::MatrixXd> acts(nl + 1);
    acts[0] = x;
    for (std::size_t i = 0; i < nl; ++i) {
        Eigen::MatrixXd z = net.layers[i].w * acts[i];
        z.colwise() += net.layers[i].b;
        acts[i + 1] = i + 1 < nl ? Eigen::MatrixXd(z.array().tanh()) : z;
    }
    const double scale = 2.0 / static_cast<double>(y.size());
    Eigen::MatrixXd delta = acts[nl] - y;
    const double loss = delta.squaredNorm() / static_cast<double>(y.size());
    delta *= scale;
    for (std::size_t i = nl; i-- > 0;) {
        grad[i].w.noalias() = delta * acts[i].transpose();
        grad[i].b = delta.rowwise().sum();
        if (i == 0) break;
        Eigen::MatrixXd back = net.layers[i].w.transpose() * delta;
        delta = back.array() * (1.0 - acts[i].array().square());
    }
    return loss;
}

}  // namespace

FitResult fit(Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Eigen::MatrixXd* x_val,
              const Eigen::MatrixXd* y_val, const AdamConfig& cfg, const std::function<void(std::size_t, double)>& progress) {
    if (x.cols() != y.cols() || x.cols() == 0) throw ConfigError("training inputs and labels differ in sample count");
    if (static_cast<std::size_t>(x.rows()) != net.n_inputs() || static_cast<std::size_t>(y.rows()) != net.n_outputs())
        throw ConfigError("training data does not match the network shape");
    const bool has_val = x_val && y_val && x_val->cols() > 0;

    const auto n = static_cast<std::size_t>(x.cols());
    const std::size_t batch = cfg.batch == 0 ? n : std::min(cfg.batch, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto g = util::stream(cfg.seed, 0, 0x6164616d);

    auto grad = zeros_like(net);
    Moments mom{zeros_like(net), zeros_like(net)};
    Mlp best = net;
    FitResult res;
    res.best_validation_loss = std::numeric_limits<double>::infinity();
    std::size_t step = 0;
    Eigen::MatrixXd xb, yb;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double t = static_cast<double>(epoch) / static_cast<double>(std::max<std::size_t>(1, cfg.epochs - 1));
        const double lr = cfg.learning_rate *
                          (cfg.final_lr_fraction + (1.0 - cfg.final_lr_fraction) * 0.5 * (1.0 + std::cos(std::numbers::pi * t)));
        if (batch < n)
            for (std::size_t i = n - 1; i > 0; --i)
                std::swap(order[i], order[static_cast<std::size_t>(util::uniform01(g) * static_cast<double>(i + 1)) % (i + 1)]);

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t m = std::min(batch, n - start);
            xb.resize(x.rows(), static_cast<Eigen::Index>(m));
            yb.resize(y.rows(), static_cast<Eigen::Index>(m));
            for (std::size_t k = 0; k < m; ++k) {
                xb.col(static_cast<Eigen::Index>(k)) = x.col(static_cast<Eigen::Index>(order[start + k]));
                yb.col(static_cast<Eigen::Index>(k)) = y.col(static_cast<Eigen::Index>(order[start + k]));
            }
            const double loss = backprop(net, xb, yb, grad);
            if (!std::isfinite(loss))
                throw RuntimeError("training loss is not finite at epoch " + std::to_string(epoch) + " (learning rate " +
                                   std::to_string(lr) + ")");
            epoch_loss += loss * static_cast<double>(m);
            ++step;
            const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
            for (std::size_t i = 0; i < net.layers.size(); ++i) {
                auto update = [&](auto& param, const auto& gr, auto& m1, auto& m2) {
                    m1 = cfg.beta1 * m1 + (1.0 - cfg.beta1) * gr;
                    m2 = cfg.beta2 * m2 + (1.0 - cfg.beta2) * gr.cwiseAbs2();
                    param.array() -= lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + cfg.epsilon);
                };
                update(net.layers[i].w, grad[i].w, mom.m[i].w, mom.v[i].w);
                update(net.layers[i].b, grad[i].b, mom.m[i].b, mom.v[i].b);
            }
        }
        epoch_loss /= static_cast<double>(n);

        const bool record = epoch % std::max<std::size_t>(1, cfg.record_every) == 0 || epoch + 1 == cfg.epochs;
        if (has_val) {
            const double vl = mse(net, *x_val, *y_val);
            if (!std::isfinite(vl)) throw RuntimeError("validation loss is not finite at epoch " + std::to_string(epoch));
            if (vl < res.best_validation_loss) {
                res.best_validation_loss = vl;
                res.best_epoch = epoch;
                best = net;
            }
            if (record) res.validation_loss.push_back(vl);
        }
        if (record) {
            res.train_loss.push_back(epoch_loss);
            if (progress) progress(epoch, epoch_loss);
        }
    }
    if (has_val)
        net = std::move(best);
    else
        res.best_epoch = cfg.epochs ? cfg.epochs - 1 : 0;
    return res;
}

}  // namespace climalign::emulator
