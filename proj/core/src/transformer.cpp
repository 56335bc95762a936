#include "ifcast/transformer.hpp"

#include <json.hpp>

#include <cmath>
#include <numeric>
#include <sstream>

#include "ifcast/errors.hpp"

namespace ifcast {

namespace {

constexpr double kLnEps = 1e-5;

Eigen::MatrixXd sinusoidal_positions(int window, int width) {
    Eigen::MatrixXd pe(window, width);
    for (int t = 0; t < window; ++t) {
        for (int j = 0; j < width; ++j) {
            double exponent = static_cast<double>(2 * (j / 2)) / width;
            double angle = t / std::pow(10000.0, exponent);
            pe(t, j) = (j % 2 == 0) ? std::sin(angle) : std::cos(angle);
        }
    }
    return pe;
}

// y = gamma .* xhat + beta applied row-wise; xhat and 1/sqrt(var+eps) are
// returned for the backward pass.
Eigen::MatrixXd layer_norm(const Eigen::MatrixXd& r, const nn::Tensor& gamma,
                           const nn::Tensor& beta, Eigen::MatrixXd* xhat,
                           Eigen::VectorXd* inv_std) {
    Eigen::VectorXd mean = r.rowwise().mean();
    Eigen::MatrixXd centered = r.colwise() - mean;
    Eigen::VectorXd var = centered.array().square().rowwise().mean();
    Eigen::VectorXd istd = (var.array() + kLnEps).sqrt().inverse();
    Eigen::MatrixXd xh = centered.array().colwise() * istd.array();
    if (xhat) *xhat = xh;
    if (inv_std) *inv_std = istd;
    Eigen::MatrixXd out = xh.array().rowwise() * gamma.value.row(0).array();
    out.array().rowwise() += beta.value.row(0).array();
    return out;
}

// Gradient of layer_norm wrt its input; accumulates parameter gradients.
Eigen::MatrixXd layer_norm_backward(const Eigen::MatrixXd& dy,
                                    const Eigen::MatrixXd& xhat,
                                    const Eigen::VectorXd& inv_std,
                                    nn::Tensor& gamma, nn::Tensor& beta) {
    gamma.grad.row(0) += (dy.array() * xhat.array()).colwise().sum().matrix();
    beta.grad.row(0) += dy.colwise().sum();
    Eigen::MatrixXd dxhat = dy.array().rowwise() * gamma.value.row(0).array();
    Eigen::VectorXd mean_dxhat = dxhat.rowwise().mean();
    Eigen::VectorXd mean_dxhat_xhat = (dxhat.array() * xhat.array()).rowwise().mean();
    Eigen::MatrixXd dr =
        (dxhat.array().colwise() - mean_dxhat.array()) -
        (xhat.array().colwise() * mean_dxhat_xhat.array());
    dr.array().colwise() *= inv_std.array();
    return dr;
}

void softmax_rows(Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        double mx = m.row(i).maxCoeff();
        m.row(i) = (m.row(i).array() - mx).exp();
        m.row(i) /= m.row(i).sum();
    }
}

} // namespace

void TransformerConfig::validate() const {
    if (window < 1) throw ConfigError("transformer window must be >= 1");
    if (blocks < 1) throw ConfigError("transformer blocks must be >= 1");
    if (head_size < 1) throw ConfigError("transformer head_size must be >= 1");
    if (heads < 1) throw ConfigError("transformer heads must be >= 1");
    if (ff_dim < 1) throw ConfigError("transformer ff_dim must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0))
        throw ConfigError("transformer dropout must lie in [0, 1)");
    if (epochs < 1) throw ConfigError("transformer epochs must be >= 1");
    if (!(learning_rate > 0.0))
        throw ConfigError("transformer learning_rate must be positive");
    if (batch_size < 1) throw ConfigError("transformer batch_size must be >= 1");
}

TransformerModel::TransformerModel(const TransformerConfig& cfg,
                                   std::uint64_t init_seed)
    : cfg_(cfg) {
    cfg_.validate();
    const int d = cfg_.model_width();
    const int a = cfg_.attention_width();
    const int f = cfg_.ff_dim;

    in_w_ = nn::Tensor("in_w", 1, d);
    in_b_ = nn::Tensor("in_b", 1, d);
    blocks_.resize(static_cast<std::size_t>(cfg_.blocks));
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        Block& blk = blocks_[i];
        std::string p = "block" + std::to_string(i) + ".";
        blk.wq = nn::Tensor(p + "wq", d, a);
        blk.bq = nn::Tensor(p + "bq", 1, a);
        blk.wk = nn::Tensor(p + "wk", d, a);
        blk.bk = nn::Tensor(p + "bk", 1, a);
        blk.wv = nn::Tensor(p + "wv", d, a);
        blk.bv = nn::Tensor(p + "bv", 1, a);
        blk.wo = nn::Tensor(p + "wo", a, d);
        blk.bo = nn::Tensor(p + "bo", 1, d);
        blk.ln1_gamma = nn::Tensor(p + "ln1_gamma", 1, d);
        blk.ln1_beta = nn::Tensor(p + "ln1_beta", 1, d);
        blk.ff_w1 = nn::Tensor(p + "ff_w1", d, f);
        blk.ff_b1 = nn::Tensor(p + "ff_b1", 1, f);
        blk.ff_w2 = nn::Tensor(p + "ff_w2", f, d);
        blk.ff_b2 = nn::Tensor(p + "ff_b2", 1, d);
        blk.ln2_gamma = nn::Tensor(p + "ln2_gamma", 1, d);
        blk.ln2_beta = nn::Tensor(p + "ln2_beta", 1, d);
    }
    head_w_ = nn::Tensor("head_w", d, 1);
    head_b_ = nn::Tensor("head_b", 1, 1);

    Rng rng(init_seed);
    in_w_.glorot_uniform(rng);
    for (Block& blk : blocks_) {
        blk.wq.glorot_uniform(rng);
        blk.wk.glorot_uniform(rng);
        blk.wv.glorot_uniform(rng);
        blk.wo.glorot_uniform(rng);
        blk.ff_w1.glorot_uniform(rng);
        blk.ff_w2.glorot_uniform(rng);
        blk.ln1_gamma.fill(1.0);
        blk.ln2_gamma.fill(1.0);
    }
    head_w_.glorot_uniform(rng);

    positional_ = sinusoidal_positions(cfg_.window, d);
}

std::vector<nn::Tensor*> TransformerModel::parameters() {
    std::vector<nn::Tensor*> out;
    out.push_back(&in_w_);
    out.push_back(&in_b_);
    for (Block& blk : blocks_) {
        for (nn::Tensor* t : {&blk.wq, &blk.bq, &blk.wk, &blk.bk, &blk.wv,
                              &blk.bv, &blk.wo, &blk.bo, &blk.ln1_gamma,
                              &blk.ln1_beta, &blk.ff_w1, &blk.ff_b1, &blk.ff_w2,
                              &blk.ff_b2, &blk.ln2_gamma, &blk.ln2_beta}) {
            out.push_back(t);
        }
    }
    out.push_back(&head_w_);
    out.push_back(&head_b_);
    return out;
}

// Rows are laid out sample-major: row b*W + t holds timestep t of sample b.
Eigen::MatrixXd TransformerModel::embed(const Eigen::MatrixXd& X) const {
    const Eigen::Index batch = X.rows();
    const Eigen::Index w = X.cols();
    const Eigen::Index d = in_w_.value.cols();
    Eigen::MatrixXd e(batch * w, d);
    for (Eigen::Index b = 0; b < batch; ++b) {
        for (Eigen::Index t = 0; t < w; ++t) {
            e.row(b * w + t) = X(b, t) * in_w_.value.row(0) + in_b_.value.row(0) +
                               positional_.row(t);
        }
    }
    return e;
}

Eigen::MatrixXd TransformerModel::run_block(const Block& blk,
                                            const Eigen::MatrixXd& input,
                                            Eigen::Index batch, bool training,
                                            Rng* rng, BlockCache* cache) const {
    const Eigen::Index w = cfg_.window;
    const Eigen::Index dh = cfg_.head_width();
    const Eigen::Index heads = cfg_.heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    const bool drop = training && cfg_.dropout > 0.0;

    Eigen::MatrixXd q = input * blk.wq.value;
    q.array().rowwise() += blk.bq.value.row(0).array();
    Eigen::MatrixXd k = input * blk.wk.value;
    k.array().rowwise() += blk.bk.value.row(0).array();
    Eigen::MatrixXd v = input * blk.wv.value;
    v.array().rowwise() += blk.bv.value.row(0).array();

    Eigen::MatrixXd z(q.rows(), q.cols());
    std::vector<Eigen::MatrixXd> softmaxes;
    if (cache) softmaxes.reserve(static_cast<std::size_t>(batch * heads));
    for (Eigen::Index b = 0; b < batch; ++b) {
        for (Eigen::Index h = 0; h < heads; ++h) {
            auto qb = q.block(b * w, h * dh, w, dh);
            auto kb = k.block(b * w, h * dh, w, dh);
            auto vb = v.block(b * w, h * dh, w, dh);
            Eigen::MatrixXd attn = scale * (qb * kb.transpose());
            softmax_rows(attn);
            z.block(b * w, h * dh, w, dh).noalias() = attn * vb;
            if (cache) softmaxes.push_back(std::move(attn));
        }
    }

    Eigen::MatrixXd attn_out = z * blk.wo.value;
    attn_out.array().rowwise() += blk.bo.value.row(0).array();

    Eigen::MatrixXd mask1;
    if (drop) {
        mask1 = nn::dropout_mask(attn_out.rows(), attn_out.cols(), cfg_.dropout, *rng);
        attn_out.array() *= mask1.array();
    }

    Eigen::MatrixXd r1 = input + attn_out;
    Eigen::MatrixXd xhat1;
    Eigen::VectorXd inv_std1;
    Eigen::MatrixXd y = layer_norm(r1, blk.ln1_gamma, blk.ln1_beta,
                                   cache ? &xhat1 : nullptr,
                                   cache ? &inv_std1 : nullptr);

    Eigen::MatrixXd ff_pre = y * blk.ff_w1.value;
    ff_pre.array().rowwise() += blk.ff_b1.value.row(0).array();
    Eigen::MatrixXd ff_act = ff_pre.cwiseMax(0.0);
    Eigen::MatrixXd ff_out = ff_act * blk.ff_w2.value;
    ff_out.array().rowwise() += blk.ff_b2.value.row(0).array();

    Eigen::MatrixXd mask2;
    if (drop) {
        mask2 = nn::dropout_mask(ff_out.rows(), ff_out.cols(), cfg_.dropout, *rng);
        ff_out.array() *= mask2.array();
    }

    Eigen::MatrixXd r2 = y + ff_out;
    Eigen::MatrixXd xhat2;
    Eigen::VectorXd inv_std2;
    Eigen::MatrixXd out = layer_norm(r2, blk.ln2_gamma, blk.ln2_beta,
                                     cache ? &xhat2 : nullptr,
                                     cache ? &inv_std2 : nullptr);

    if (cache) {
        cache->x = input;
        cache->q = std::move(q);
        cache->k = std::move(k);
        cache->v = std::move(v);
        cache->z = std::move(z);
        cache->softmax = std::move(softmaxes);
        cache->drop1 = std::move(mask1);
        cache->xhat1 = std::move(xhat1);
        cache->inv_std1 = std::move(inv_std1);
        cache->y = std::move(y);
        cache->ff_pre = std::move(ff_pre);
        cache->ff_act = std::move(ff_act);
        cache->drop2 = std::move(mask2);
        cache->xhat2 = std::move(xhat2);
        cache->inv_std2 = std::move(inv_std2);
        cache->dropped = drop;
    }
    return out;
}

Eigen::VectorXd TransformerModel::predict_batch(const Eigen::MatrixXd& X) const {
    if (X.cols() != cfg_.window)
        throw InputError("transformer input width does not match the window");
    const Eigen::Index batch = X.rows();
    const Eigen::Index w = cfg_.window;
    Eigen::MatrixXd h = embed(X);
    for (const Block& blk : blocks_) {
        h = run_block(blk, h, batch, false, nullptr, nullptr);
    }
    Eigen::VectorXd out(batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
        Eigen::RowVectorXd pooled = h.middleRows(b * w, w).colwise().mean();
        out(b) = pooled.dot(head_w_.value.col(0)) + head_b_.value(0, 0);
    }
    return out;
}

double TransformerModel::loss(const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& targets) const {
    Eigen::VectorXd pred = predict_batch(X);
    return (pred - targets).squaredNorm() / static_cast<double>(targets.size());
}

double TransformerModel::loss_and_grad(const Eigen::MatrixXd& X,
                                       const Eigen::VectorXd& targets,
                                       bool training, Rng* rng) {
    if (X.cols() != cfg_.window)
        throw InputError("transformer input width does not match the window");
    if (training && cfg_.dropout > 0.0 && rng == nullptr)
        throw InputError("dropout requires an rng stream");
    const Eigen::Index batch = X.rows();
    const Eigen::Index w = cfg_.window;
    const Eigen::Index dh = cfg_.head_width();
    const Eigen::Index heads = cfg_.heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    Eigen::MatrixXd embedded = embed(X);
    std::vector<BlockCache> caches(blocks_.size());
    Eigen::MatrixXd h = embedded;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        h = run_block(blocks_[i], h, batch, training, rng, &caches[i]);
    }

    Eigen::MatrixXd pooled(batch, h.cols());
    for (Eigen::Index b = 0; b < batch; ++b) {
        pooled.row(b) = h.middleRows(b * w, w).colwise().mean();
    }
    Eigen::VectorXd pred =
        (pooled * head_w_.value.col(0)).array() + head_b_.value(0, 0);
    Eigen::VectorXd err = pred - targets;
    double mse = err.squaredNorm() / static_cast<double>(batch);

    // Head and pooling.
    Eigen::VectorXd dpred = 2.0 * err / static_cast<double>(batch);
    head_w_.grad.col(0) += pooled.transpose() * dpred;
    head_b_.grad(0, 0) += dpred.sum();
    Eigen::MatrixXd dpooled = dpred * head_w_.value.col(0).transpose();
    Eigen::MatrixXd dh_mat(h.rows(), h.cols());
    for (Eigen::Index b = 0; b < batch; ++b) {
        dh_mat.middleRows(b * w, w) =
            (dpooled.row(b) / static_cast<double>(w)).replicate(w, 1);
    }

    // Blocks in reverse.
    for (std::size_t bi = blocks_.size(); bi-- > 0;) {
        Block& blk = blocks_[bi];
        BlockCache& c = caches[bi];

        Eigen::MatrixXd dr2 = layer_norm_backward(dh_mat, c.xhat2, c.inv_std2,
                                                  blk.ln2_gamma, blk.ln2_beta);
        Eigen::MatrixXd dy = dr2;
        Eigen::MatrixXd dff_out = dr2;
        if (c.dropped) dff_out.array() *= c.drop2.array();

        blk.ff_w2.grad.noalias() += c.ff_act.transpose() * dff_out;
        blk.ff_b2.grad.row(0) += dff_out.colwise().sum();
        Eigen::MatrixXd dff_act = dff_out * blk.ff_w2.value.transpose();
        Eigen::MatrixXd dff_pre =
            (c.ff_pre.array() > 0.0).select(dff_act, 0.0);
        blk.ff_w1.grad.noalias() += c.y.transpose() * dff_pre;
        blk.ff_b1.grad.row(0) += dff_pre.colwise().sum();
        dy.noalias() += dff_pre * blk.ff_w1.value.transpose();

        Eigen::MatrixXd dr1 = layer_norm_backward(dy, c.xhat1, c.inv_std1,
                                                  blk.ln1_gamma, blk.ln1_beta);
        Eigen::MatrixXd dx = dr1;
        Eigen::MatrixXd dattn_out = dr1;
        if (c.dropped) dattn_out.array() *= c.drop1.array();

        blk.wo.grad.noalias() += c.z.transpose() * dattn_out;
        blk.bo.grad.row(0) += dattn_out.colwise().sum();
        Eigen::MatrixXd dz = dattn_out * blk.wo.value.transpose();

        Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(c.q.rows(), c.q.cols());
        Eigen::MatrixXd dk = Eigen::MatrixXd::Zero(c.k.rows(), c.k.cols());
        Eigen::MatrixXd dv = Eigen::MatrixXd::Zero(c.v.rows(), c.v.cols());
        for (Eigen::Index b = 0; b < batch; ++b) {
            for (Eigen::Index hd = 0; hd < heads; ++hd) {
                const Eigen::MatrixXd& attn =
                    c.softmax[static_cast<std::size_t>(b * heads + hd)];
                auto qb = c.q.block(b * w, hd * dh, w, dh);
                auto kb = c.k.block(b * w, hd * dh, w, dh);
                auto vb = c.v.block(b * w, hd * dh, w, dh);
                auto dzb = dz.block(b * w, hd * dh, w, dh);

                Eigen::MatrixXd dattn = dzb * vb.transpose();
                dv.block(b * w, hd * dh, w, dh).noalias() +=
                    attn.transpose() * dzb;

                Eigen::MatrixXd dscores(w, w);
                for (Eigen::Index r = 0; r < w; ++r) {
                    double dot = dattn.row(r).dot(attn.row(r));
                    dscores.row(r) =
                        attn.row(r).array() * (dattn.row(r).array() - dot);
                }
                dq.block(b * w, hd * dh, w, dh).noalias() +=
                    scale * (dscores * kb);
                dk.block(b * w, hd * dh, w, dh).noalias() +=
                    scale * (dscores.transpose() * qb);
            }
        }

        blk.wq.grad.noalias() += c.x.transpose() * dq;
        blk.bq.grad.row(0) += dq.colwise().sum();
        blk.wk.grad.noalias() += c.x.transpose() * dk;
        blk.bk.grad.row(0) += dk.colwise().sum();
        blk.wv.grad.noalias() += c.x.transpose() * dv;
        blk.bv.grad.row(0) += dv.colwise().sum();
        dx.noalias() += dq * blk.wq.value.transpose();
        dx.noalias() += dk * blk.wk.value.transpose();
        dx.noalias() += dv * blk.wv.value.transpose();

        dh_mat = std::move(dx);
    }

    // Embedding.
    Eigen::VectorXd x_flat(batch * w);
    for (Eigen::Index b = 0; b < batch; ++b) {
        for (Eigen::Index t = 0; t < w; ++t) x_flat(b * w + t) = X(b, t);
    }
    in_w_.grad.row(0) += (dh_mat.transpose() * x_flat).transpose();
    in_b_.grad.row(0) += dh_mat.colwise().sum();

    return mse;
}

namespace {

class TransformerPredictor final : public Predictor {
public:
    TransformerPredictor(std::unique_ptr<TransformerModel> model, Normalizer norm)
        : model_(std::move(model)), norm_(norm) {}

    double predict(std::span<const double> history) const override {
        const auto w = static_cast<std::size_t>(model_->config().window);
        if (history.size() < w)
            throw InputError("history shorter than the transformer window");
        Eigen::MatrixXd x(1, static_cast<Eigen::Index>(w));
        for (std::size_t i = 0; i < w; ++i) {
            x(0, static_cast<Eigen::Index>(i)) =
                norm_.normalize(history[history.size() - w + i]);
        }
        return norm_.denormalize(model_->predict_batch(x)(0));
    }

    std::size_t min_history() const override {
        return static_cast<std::size_t>(model_->config().window);
    }

    std::string kind() const override { return "transformer"; }

    std::string serialize() const override;

private:
    std::unique_ptr<TransformerModel> model_;
    Normalizer norm_;
};

nlohmann::json tensor_to_json(const nn::Tensor& t) {
    nlohmann::json data = nlohmann::json::array();
    for (Eigen::Index i = 0; i < t.value.rows(); ++i) {
        for (Eigen::Index j = 0; j < t.value.cols(); ++j) {
            data.push_back(t.value(i, j));
        }
    }
    return {{"name", t.name},
            {"rows", t.value.rows()},
            {"cols", t.value.cols()},
            {"data", std::move(data)}};
}

void tensor_from_json(const nlohmann::json& j, nn::Tensor& t) {
    if (j.at("name").get<std::string>() != t.name ||
        j.at("rows").get<Eigen::Index>() != t.value.rows() ||
        j.at("cols").get<Eigen::Index>() != t.value.cols()) {
        throw InputError("checkpoint tensor does not match the model layout: " +
                         t.name);
    }
    const auto& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != t.value.size())
        throw InputError("checkpoint tensor has the wrong element count: " + t.name);
    std::size_t idx = 0;
    for (Eigen::Index i = 0; i < t.value.rows(); ++i) {
        for (Eigen::Index j2 = 0; j2 < t.value.cols(); ++j2) {
            t.value(i, j2) = data[idx++].get<double>();
        }
    }
}

std::string TransformerPredictor::serialize() const {
    const TransformerConfig& c = model_->config();
    nlohmann::json j;
    j["format"] = "ifcast-predictor";
    j["version"] = 1;
    j["kind"] = "transformer";
    j["config"] = {{"window", c.window},
                   {"blocks", c.blocks},
                   {"head_size", c.head_size},
                   {"heads", c.heads},
                   {"ff_dim", c.ff_dim},
                   {"dropout", c.dropout},
                   {"epochs", c.epochs},
                   {"learning_rate", c.learning_rate},
                   {"batch_size", c.batch_size},
                   {"seed", c.seed},
                   {"table2_literal", c.table2_literal}};
    j["normalizer"] = {{"mean", norm_.mean}, {"stddev", norm_.stddev}};
    nlohmann::json params = nlohmann::json::array();
    for (const nn::Tensor* t :
         const_cast<TransformerModel*>(model_.get())->parameters()) {
        params.push_back(tensor_to_json(*t));
    }
    j["params"] = std::move(params);
    return j.dump();
}

} // namespace

std::unique_ptr<Predictor> train_transformer(const WindowDataset& ds,
                                             const TransformerConfig& cfg) {
    cfg.validate();
    if (ds.window != cfg.window)
        throw InputError("dataset window does not match the transformer window");
    if (ds.split_index == 0)
        throw InputError("dataset has no training pairs");

    const auto n_train = static_cast<Eigen::Index>(ds.split_index);
    const auto w = static_cast<Eigen::Index>(cfg.window);
    Eigen::MatrixXd X(n_train, w);
    Eigen::VectorXd y(n_train);
    for (Eigen::Index i = 0; i < n_train; ++i) {
        const auto& win = ds.inputs[static_cast<std::size_t>(i)];
        for (Eigen::Index t = 0; t < w; ++t) {
            X(i, t) = ds.normalizer.normalize(win[static_cast<std::size_t>(t)]);
        }
        y(i) = ds.normalizer.normalize(ds.targets[static_cast<std::size_t>(i)]);
    }

    auto model = std::make_unique<TransformerModel>(
        cfg, derive_seed(cfg.seed, "transformer-init"));
    nn::AdamConfig adam_cfg;
    adam_cfg.learning_rate = cfg.learning_rate;
    nn::Adam adam(model->parameters(), adam_cfg);
    Rng shuffle_rng(derive_seed(cfg.seed, "transformer-shuffle"));
    Rng dropout_rng(derive_seed(cfg.seed, "transformer-dropout"));

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n_train));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::vector<double> epoch_loss;
    epoch_loss.reserve(static_cast<std::size_t>(cfg.epochs));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(shuffle_rng.next_index(i));
            std::swap(order[i - 1], order[j]);
        }
        double sq_sum = 0.0;
        for (Eigen::Index start = 0; start < n_train; start += cfg.batch_size) {
            Eigen::Index count = std::min<Eigen::Index>(cfg.batch_size,
                                                        n_train - start);
            Eigen::MatrixXd xb(count, w);
            Eigen::VectorXd yb(count);
            for (Eigen::Index r = 0; r < count; ++r) {
                xb.row(r) = X.row(order[static_cast<std::size_t>(start + r)]);
                yb(r) = y(order[static_cast<std::size_t>(start + r)]);
            }
            adam.zero_grad();
            double batch_mse = model->loss_and_grad(xb, yb, true, &dropout_rng);
            if (!std::isfinite(batch_mse)) {
                throw DivergenceError("transformer training loss became non-finite",
                                      epoch, cfg.learning_rate);
            }
            adam.step();
            sq_sum += batch_mse * static_cast<double>(count);
        }
        epoch_loss.push_back(sq_sum / static_cast<double>(n_train));
    }

    auto predictor = std::make_unique<TransformerPredictor>(std::move(model),
                                                            ds.normalizer);
    predictor->epoch_loss = std::move(epoch_loss);
    return predictor;
}

std::unique_ptr<Predictor> transformer_from_checkpoint(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("unparseable checkpoint: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "ifcast-predictor" ||
            j.at("kind").get<std::string>() != "transformer")
            throw InputError("checkpoint is not a transformer predictor");
        if (j.at("version").get<int>() != 1)
            throw InputError("unsupported transformer checkpoint version");
        const auto& jc = j.at("config");
        TransformerConfig cfg;
        cfg.window = jc.at("window").get<int>();
        cfg.blocks = jc.at("blocks").get<int>();
        cfg.head_size = jc.at("head_size").get<int>();
        cfg.heads = jc.at("heads").get<int>();
        cfg.ff_dim = jc.at("ff_dim").get<int>();
        cfg.dropout = jc.at("dropout").get<double>();
        cfg.epochs = jc.at("epochs").get<int>();
        cfg.learning_rate = jc.at("learning_rate").get<double>();
        cfg.batch_size = jc.at("batch_size").get<int>();
        cfg.seed = jc.at("seed").get<std::uint64_t>();
        cfg.table2_literal = jc.at("table2_literal").get<bool>();

        auto model = std::make_unique<TransformerModel>(cfg, 0);
        auto params = model->parameters();
        const auto& jp = j.at("params");
        if (jp.size() != params.size())
            throw InputError("checkpoint parameter count does not match the model");
        for (std::size_t i = 0; i < params.size(); ++i) {
            tensor_from_json(jp[i], *params[i]);
        }

        Normalizer norm;
        norm.mean = j.at("normalizer").at("mean").get<double>();
        norm.stddev = j.at("normalizer").at("stddev").get<double>();
        return std::make_unique<TransformerPredictor>(std::move(model), norm);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed checkpoint: ") + e.what());
    }
}

} // namespace ifcast
