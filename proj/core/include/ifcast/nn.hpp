#ifndef IFCAST_NN_HPP
#define IFCAST_NN_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ifcast/rng.hpp"

namespace ifcast::nn {

// A trainable parameter matrix with its gradient and Adam moments.
struct Tensor {
    std::string name;
    Eigen::MatrixXd value;
    Eigen::MatrixXd grad;
    Eigen::MatrixXd adam_m;
    Eigen::MatrixXd adam_v;

    Tensor() = default;
    Tensor(std::string name, Eigen::Index rows, Eigen::Index cols)
        : name(std::move(name)),
          value(Eigen::MatrixXd::Zero(rows, cols)),
          grad(Eigen::MatrixXd::Zero(rows, cols)),
          adam_m(Eigen::MatrixXd::Zero(rows, cols)),
          adam_v(Eigen::MatrixXd::Zero(rows, cols)) {}

    void glorot_uniform(Rng& rng) {
        double fan_in = static_cast<double>(value.rows());
        double fan_out = static_cast<double>(value.cols());
        double a = std::sqrt(6.0 / (fan_in + fan_out));
        for (Eigen::Index j = 0; j < value.cols(); ++j) {
            for (Eigen::Index i = 0; i < value.rows(); ++i) {
                value(i, j) = rng.next_uniform(-a, a);
            }
        }
    }

    void fill(double v) { value.setConstant(v); }
    void zero_grad() { grad.setZero(); }
};

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

class Adam {
public:
    Adam(std::vector<Tensor*> params, AdamConfig cfg)
        : params_(std::move(params)), cfg_(cfg) {}

    void zero_grad() {
        for (Tensor* p : params_) p->zero_grad();
    }

    void step() {
        ++t_;
        double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
        double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
        for (Tensor* p : params_) {
            p->adam_m = cfg_.beta1 * p->adam_m + (1.0 - cfg_.beta1) * p->grad;
            p->adam_v = cfg_.beta2 * p->adam_v.array().matrix() +
                        (1.0 - cfg_.beta2) * p->grad.array().square().matrix();
            p->value.array() -= cfg_.learning_rate * (p->adam_m.array() / bc1) /
                                ((p->adam_v.array() / bc2).sqrt() + cfg_.epsilon);
        }
    }

private:
    std::vector<Tensor*> params_;
    AdamConfig cfg_;
    long t_ = 0;
};

// Inverted-dropout mask with keep probability 1-rate; entries are either 0 or
// 1/(1-rate) so expected activation is unchanged.
inline Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols,
                                    double rate, Rng& rng) {
    Eigen::MatrixXd mask(rows, cols);
    double keep = 1.0 - rate;
    double scale = 1.0 / keep;
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            mask(i, j) = rng.next_double() < keep ? scale : 0.0;
        }
    }
    return mask;
}

} // namespace ifcast::nn

#endif
