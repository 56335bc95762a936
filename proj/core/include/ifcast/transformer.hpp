#ifndef IFCAST_TRANSFORMER_HPP
#define IFCAST_TRANSFORMER_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "ifcast/dataset.hpp"
#include "ifcast/nn.hpp"
#include "ifcast/predictor.hpp"

namespace ifcast {

// Sequence-to-one encoder: scalar input projection + sinusoidal positions,
// post-norm encoder blocks, mean pooling over timesteps, affine head.
//
// Attention widths come in two modes. By default the model width equals
// head_size and each of `heads` parallel heads spans head_size/heads lanes
// (at least one); with table2_literal the width is heads*head_size and every
// head spans head_size lanes.
struct TransformerConfig {
    int window = 10;
    int blocks = 16;
    int head_size = 32;
    int heads = 16;
    int ff_dim = 4;
    double dropout = 0.2;
    int epochs = 100;
    double learning_rate = 1e-3;
    int batch_size = 16;
    std::uint64_t seed = 1;
    bool table2_literal = false;

    int model_width() const { return table2_literal ? heads * head_size : head_size; }
    int head_width() const {
        return table2_literal ? head_size : std::max(1, head_size / heads);
    }
    int attention_width() const { return heads * head_width(); }

    void validate() const; // throws ConfigError
};

// The raw network with explicit forward/backward, exposed so tests can check
// analytic gradients against finite differences.
class TransformerModel {
public:
    TransformerModel(const TransformerConfig& cfg, std::uint64_t init_seed);

    // X: batch of normalized windows, one row per sample (B x W).
    Eigen::VectorXd predict_batch(const Eigen::MatrixXd& X) const;

    double loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& targets) const;

    // Fills parameter gradients (overwriting previous contents) and returns
    // the batch MSE. Dropout is active only when `training` and the config
    // rate is nonzero; `rng` supplies the masks.
    double loss_and_grad(const Eigen::MatrixXd& X, const Eigen::VectorXd& targets,
                         bool training, Rng* rng);

    std::vector<nn::Tensor*> parameters();
    const TransformerConfig& config() const { return cfg_; }

private:
    struct Block {
        nn::Tensor wq, bq, wk, bk, wv, bv, wo, bo;
        nn::Tensor ln1_gamma, ln1_beta;
        nn::Tensor ff_w1, ff_b1, ff_w2, ff_b2;
        nn::Tensor ln2_gamma, ln2_beta;
    };

    struct BlockCache {
        Eigen::MatrixXd x, q, k, v, z, attn_out, drop1, r1, xhat1, y;
        Eigen::MatrixXd ff_pre, ff_act, ff_out, drop2, r2, xhat2;
        Eigen::VectorXd inv_std1, inv_std2;
        std::vector<Eigen::MatrixXd> softmax; // one W x W matrix per (sample, head)
        bool dropped = false;
    };

    Eigen::MatrixXd embed(const Eigen::MatrixXd& X) const;
    Eigen::MatrixXd run_block(const Block& blk, const Eigen::MatrixXd& input,
                              Eigen::Index batch, bool training, Rng* rng,
                              BlockCache* cache) const;

    TransformerConfig cfg_;
    nn::Tensor in_w_, in_b_;
    std::vector<Block> blocks_;
    nn::Tensor head_w_, head_b_;
    Eigen::MatrixXd positional_; // W x d, fixed
};

// Trains with Adam on MSE for cfg.epochs epochs. Deterministic given
// (dataset, cfg.seed). Throws DivergenceError on non-finite loss.
std::unique_ptr<Predictor> train_transformer(const WindowDataset& ds,
                                             const TransformerConfig& cfg);

std::unique_ptr<Predictor> transformer_from_checkpoint(const std::string& json_text);

} // namespace ifcast

#endif
