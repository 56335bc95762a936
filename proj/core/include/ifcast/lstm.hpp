#ifndef IFCAST_LSTM_HPP
#define IFCAST_LSTM_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "ifcast/dataset.hpp"
#include "ifcast/nn.hpp"
#include "ifcast/predictor.hpp"

namespace ifcast {

// Stacked LSTM: every layer consumes the full hidden sequence of the layer
// below (the first layer reads the scalar series), and the last layer's final
// hidden state feeds a small dense head (ReLU on all but the last layer).
struct LstmConfig {
    int window = 30;
    std::vector<int> layer_sizes = {16, 16, 16};
    std::vector<int> dense_sizes = {8, 1};
    int epochs = 100;
    double learning_rate = 1e-3;
    int batch_size = 16;
    std::uint64_t seed = 1;

    void validate() const; // throws ConfigError
};

class LstmModel {
public:
    LstmModel(const LstmConfig& cfg, std::uint64_t init_seed);

    // X: batch of normalized windows (B x W).
    Eigen::VectorXd predict_batch(const Eigen::MatrixXd& X) const;

    double loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& targets) const;

    // Accumulates parameter gradients via backpropagation through time and
    // returns the batch MSE.
    double loss_and_grad(const Eigen::MatrixXd& X, const Eigen::VectorXd& targets);

    std::vector<nn::Tensor*> parameters();
    const LstmConfig& config() const { return cfg_; }

private:
    struct Layer {
        nn::Tensor wx, wh, b; // gate order [input, forget, cell, output]
        int units = 0;
    };
    struct Dense {
        nn::Tensor w, b;
    };

    LstmConfig cfg_;
    std::vector<Layer> layers_;
    std::vector<Dense> dense_;
};

// Trains with Adam on MSE for cfg.epochs epochs; deterministic given
// (dataset, cfg.seed). Throws DivergenceError on non-finite loss.
std::unique_ptr<Predictor> train_lstm(const WindowDataset& ds,
                                      const LstmConfig& cfg);

std::unique_ptr<Predictor> lstm_from_checkpoint(const std::string& json_text);

} // namespace ifcast

#endif
