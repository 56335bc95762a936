#include "ifcast/lstm.hpp"

#include <json.hpp>

#include <cmath>
#include <numeric>

#include "ifcast/errors.hpp"

namespace ifcast {

namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& x) {
    return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

// Per-timestep activations of one layer, kept for the backward pass.
struct StepCache {
    Eigen::MatrixXd x;      // layer input at this step
    Eigen::MatrixXd i, f, g, o;
    Eigen::MatrixXd c, tanh_c;
    Eigen::MatrixXd h_prev, c_prev;
};

} // namespace

void LstmConfig::validate() const {
    if (window < 1) throw ConfigError("lstm window must be >= 1");
    if (layer_sizes.empty()) throw ConfigError("lstm layer_sizes must be non-empty");
    for (int u : layer_sizes) {
        if (u < 1) throw ConfigError("lstm layer sizes must be >= 1");
    }
    if (dense_sizes.empty()) throw ConfigError("lstm dense_sizes must be non-empty");
    for (int u : dense_sizes) {
        if (u < 1) throw ConfigError("lstm dense sizes must be >= 1");
    }
    if (dense_sizes.back() != 1)
        throw ConfigError("lstm dense head must end in a single output");
    if (epochs < 1) throw ConfigError("lstm epochs must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("lstm learning_rate must be positive");
    if (batch_size < 1) throw ConfigError("lstm batch_size must be >= 1");
}

LstmModel::LstmModel(const LstmConfig& cfg, std::uint64_t init_seed) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(init_seed);
    int in_dim = 1;
    layers_.resize(cfg_.layer_sizes.size());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const int units = cfg_.layer_sizes[l];
        std::string p = "lstm" + std::to_string(l) + ".";
        Layer& layer = layers_[l];
        layer.units = units;
        layer.wx = nn::Tensor(p + "wx", in_dim, 4 * units);
        layer.wh = nn::Tensor(p + "wh", units, 4 * units);
        layer.b = nn::Tensor(p + "b", 1, 4 * units);
        layer.wx.glorot_uniform(rng);
        layer.wh.glorot_uniform(rng);
        // Forget-gate bias starts at 1 so early training does not erase state.
        layer.b.value.block(0, units, 1, units).setConstant(1.0);
        in_dim = units;
    }
    dense_.resize(cfg_.dense_sizes.size());
    for (std::size_t l = 0; l < dense_.size(); ++l) {
        const int units = cfg_.dense_sizes[l];
        std::string p = "dense" + std::to_string(l) + ".";
        dense_[l].w = nn::Tensor(p + "w", in_dim, units);
        dense_[l].b = nn::Tensor(p + "b", 1, units);
        dense_[l].w.glorot_uniform(rng);
        in_dim = units;
    }
}

std::vector<nn::Tensor*> LstmModel::parameters() {
    std::vector<nn::Tensor*> out;
    for (Layer& layer : layers_) {
        out.push_back(&layer.wx);
        out.push_back(&layer.wh);
        out.push_back(&layer.b);
    }
    for (Dense& d : dense_) {
        out.push_back(&d.w);
        out.push_back(&d.b);
    }
    return out;
}

Eigen::VectorXd LstmModel::predict_batch(const Eigen::MatrixXd& X) const {
    if (X.cols() != cfg_.window)
        throw InputError("lstm input width does not match the window");
    const Eigen::Index batch = X.rows();
    const Eigen::Index w = cfg_.window;

    // Hidden sequence of the current layer, one B x units matrix per step.
    std::vector<Eigen::MatrixXd> seq(static_cast<std::size_t>(w));
    for (Eigen::Index t = 0; t < w; ++t) seq[static_cast<std::size_t>(t)] = X.col(t);

    for (const Layer& layer : layers_) {
        const Eigen::Index u = layer.units;
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(batch, u);
        Eigen::MatrixXd c = Eigen::MatrixXd::Zero(batch, u);
        for (Eigen::Index t = 0; t < w; ++t) {
            Eigen::MatrixXd a = seq[static_cast<std::size_t>(t)] * layer.wx.value +
                                h * layer.wh.value;
            a.array().rowwise() += layer.b.value.row(0).array();
            Eigen::MatrixXd i = sigmoid(a.middleCols(0, u));
            Eigen::MatrixXd f = sigmoid(a.middleCols(u, u));
            Eigen::MatrixXd g = a.middleCols(2 * u, u).array().tanh();
            Eigen::MatrixXd o = sigmoid(a.middleCols(3 * u, u));
            c = (f.array() * c.array() + i.array() * g.array()).matrix();
            h = (o.array() * c.array().tanh()).matrix();
            seq[static_cast<std::size_t>(t)] = h;
        }
    }

    Eigen::MatrixXd act = seq.back();
    for (std::size_t l = 0; l < dense_.size(); ++l) {
        act = act * dense_[l].w.value;
        act.array().rowwise() += dense_[l].b.value.row(0).array();
        if (l + 1 < dense_.size()) act = act.cwiseMax(0.0);
    }
    return act.col(0);
}

double LstmModel::loss(const Eigen::MatrixXd& X,
                       const Eigen::VectorXd& targets) const {
    Eigen::VectorXd pred = predict_batch(X);
    return (pred - targets).squaredNorm() / static_cast<double>(targets.size());
}

double LstmModel::loss_and_grad(const Eigen::MatrixXd& X,
                                const Eigen::VectorXd& targets) {
    if (X.cols() != cfg_.window)
        throw InputError("lstm input width does not match the window");
    const Eigen::Index batch = X.rows();
    const Eigen::Index w = cfg_.window;
    const std::size_t n_layers = layers_.size();

    // Forward with caches: caches[l][t].
    std::vector<std::vector<StepCache>> caches(
        n_layers, std::vector<StepCache>(static_cast<std::size_t>(w)));
    std::vector<Eigen::MatrixXd> seq(static_cast<std::size_t>(w));
    for (Eigen::Index t = 0; t < w; ++t) seq[static_cast<std::size_t>(t)] = X.col(t);

    for (std::size_t l = 0; l < n_layers; ++l) {
        const Layer& layer = layers_[l];
        const Eigen::Index u = layer.units;
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(batch, u);
        Eigen::MatrixXd c = Eigen::MatrixXd::Zero(batch, u);
        for (Eigen::Index t = 0; t < w; ++t) {
            StepCache& sc = caches[l][static_cast<std::size_t>(t)];
            sc.x = seq[static_cast<std::size_t>(t)];
            sc.h_prev = h;
            sc.c_prev = c;
            Eigen::MatrixXd a = sc.x * layer.wx.value + h * layer.wh.value;
            a.array().rowwise() += layer.b.value.row(0).array();
            sc.i = sigmoid(a.middleCols(0, u));
            sc.f = sigmoid(a.middleCols(u, u));
            sc.g = a.middleCols(2 * u, u).array().tanh();
            sc.o = sigmoid(a.middleCols(3 * u, u));
            c = (sc.f.array() * c.array() + sc.i.array() * sc.g.array()).matrix();
            sc.c = c;
            sc.tanh_c = c.array().tanh();
            h = (sc.o.array() * sc.tanh_c.array()).matrix();
            seq[static_cast<std::size_t>(t)] = h;
        }
    }

    // Dense head on the final hidden state.
    std::vector<Eigen::MatrixXd> dense_in(dense_.size());
    Eigen::MatrixXd act = seq.back();
    for (std::size_t l = 0; l < dense_.size(); ++l) {
        dense_in[l] = act;
        act = act * dense_[l].w.value;
        act.array().rowwise() += dense_[l].b.value.row(0).array();
        if (l + 1 < dense_.size()) act = act.cwiseMax(0.0);
    }
    Eigen::VectorXd pred = act.col(0);
    Eigen::VectorXd err = pred - targets;
    double mse = err.squaredNorm() / static_cast<double>(batch);

    // Dense backward.
    Eigen::MatrixXd dact = (2.0 * err / static_cast<double>(batch));
    for (std::size_t l = dense_.size(); l-- > 0;) {
        // Redo the pre-activation products cheaply to recover ReLU masks.
        if (l + 1 < dense_.size()) {
            Eigen::MatrixXd pre = dense_in[l + 1];
            dact = (pre.array() > 0.0).select(dact, 0.0);
        }
        dense_[l].w.grad.noalias() += dense_in[l].transpose() * dact;
        dense_[l].b.grad.row(0) += dact.colwise().sum();
        dact = dact * dense_[l].w.value.transpose();
    }

    // BPTT, top layer first. dseq holds the gradient flowing into each
    // timestep's hidden output of the current layer.
    std::vector<Eigen::MatrixXd> dseq(static_cast<std::size_t>(w));
    for (Eigen::Index t = 0; t < w; ++t) {
        dseq[static_cast<std::size_t>(t)] =
            Eigen::MatrixXd::Zero(batch, layers_.back().units);
    }
    dseq.back() = dact;

    for (std::size_t l = n_layers; l-- > 0;) {
        Layer& layer = layers_[l];
        const Eigen::Index u = layer.units;
        std::vector<Eigen::MatrixXd> dx(static_cast<std::size_t>(w));
        Eigen::MatrixXd dh_next = Eigen::MatrixXd::Zero(batch, u);
        Eigen::MatrixXd dc_next = Eigen::MatrixXd::Zero(batch, u);
        for (Eigen::Index t = w - 1; t >= 0; --t) {
            const StepCache& sc = caches[l][static_cast<std::size_t>(t)];
            Eigen::MatrixXd dh = dseq[static_cast<std::size_t>(t)] + dh_next;
            Eigen::MatrixXd dc =
                (dh.array() * sc.o.array() * (1.0 - sc.tanh_c.array().square()))
                    .matrix() +
                dc_next;
            Eigen::MatrixXd da(batch, 4 * u);
            da.middleCols(0, u) = (dc.array() * sc.g.array() * sc.i.array() *
                                   (1.0 - sc.i.array()))
                                      .matrix();
            da.middleCols(u, u) = (dc.array() * sc.c_prev.array() * sc.f.array() *
                                   (1.0 - sc.f.array()))
                                      .matrix();
            da.middleCols(2 * u, u) =
                (dc.array() * sc.i.array() * (1.0 - sc.g.array().square())).matrix();
            da.middleCols(3 * u, u) = (dh.array() * sc.tanh_c.array() *
                                       sc.o.array() * (1.0 - sc.o.array()))
                                          .matrix();

            layer.wx.grad.noalias() += sc.x.transpose() * da;
            layer.wh.grad.noalias() += sc.h_prev.transpose() * da;
            layer.b.grad.row(0) += da.colwise().sum();
            dx[static_cast<std::size_t>(t)] = da * layer.wx.value.transpose();
            dh_next = da * layer.wh.value.transpose();
            dc_next = (dc.array() * sc.f.array()).matrix();
        }
        if (l > 0) {
            dseq = std::move(dx);
        }
    }

    return mse;
}

namespace {

class LstmPredictor final : public Predictor {
public:
    LstmPredictor(std::unique_ptr<LstmModel> model, Normalizer norm)
        : model_(std::move(model)), norm_(norm) {}

    double predict(std::span<const double> history) const override {
        const auto w = static_cast<std::size_t>(model_->config().window);
        if (history.size() < w)
            throw InputError("history shorter than the lstm window");
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

    std::string kind() const override { return "lstm"; }

    std::string serialize() const override {
        const LstmConfig& c = model_->config();
        nlohmann::json j;
        j["format"] = "ifcast-predictor";
        j["version"] = 1;
        j["kind"] = "lstm";
        j["config"] = {{"window", c.window},
                       {"layer_sizes", c.layer_sizes},
                       {"dense_sizes", c.dense_sizes},
                       {"epochs", c.epochs},
                       {"learning_rate", c.learning_rate},
                       {"batch_size", c.batch_size},
                       {"seed", c.seed}};
        j["normalizer"] = {{"mean", norm_.mean}, {"stddev", norm_.stddev}};
        nlohmann::json params = nlohmann::json::array();
        for (const nn::Tensor* t :
             const_cast<LstmModel*>(model_.get())->parameters()) {
            nlohmann::json data = nlohmann::json::array();
            for (Eigen::Index i = 0; i < t->value.rows(); ++i) {
                for (Eigen::Index jj = 0; jj < t->value.cols(); ++jj) {
                    data.push_back(t->value(i, jj));
                }
            }
            params.push_back({{"name", t->name},
                              {"rows", t->value.rows()},
                              {"cols", t->value.cols()},
                              {"data", std::move(data)}});
        }
        j["params"] = std::move(params);
        return j.dump();
    }

private:
    std::unique_ptr<LstmModel> model_;
    Normalizer norm_;
};

} // namespace

std::unique_ptr<Predictor> train_lstm(const WindowDataset& ds,
                                      const LstmConfig& cfg) {
    cfg.validate();
    if (ds.window != cfg.window)
        throw InputError("dataset window does not match the lstm window");
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

    auto model =
        std::make_unique<LstmModel>(cfg, derive_seed(cfg.seed, "lstm-init"));
    nn::AdamConfig adam_cfg;
    adam_cfg.learning_rate = cfg.learning_rate;
    nn::Adam adam(model->parameters(), adam_cfg);
    Rng shuffle_rng(derive_seed(cfg.seed, "lstm-shuffle"));

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
            Eigen::Index count =
                std::min<Eigen::Index>(cfg.batch_size, n_train - start);
            Eigen::MatrixXd xb(count, w);
            Eigen::VectorXd yb(count);
            for (Eigen::Index r = 0; r < count; ++r) {
                xb.row(r) = X.row(order[static_cast<std::size_t>(start + r)]);
                yb(r) = y(order[static_cast<std::size_t>(start + r)]);
            }
            adam.zero_grad();
            double batch_mse = model->loss_and_grad(xb, yb);
            if (!std::isfinite(batch_mse)) {
                throw DivergenceError("lstm training loss became non-finite",
                                      epoch, cfg.learning_rate);
            }
            adam.step();
            sq_sum += batch_mse * static_cast<double>(count);
        }
        epoch_loss.push_back(sq_sum / static_cast<double>(n_train));
    }

    auto predictor =
        std::make_unique<LstmPredictor>(std::move(model), ds.normalizer);
    predictor->epoch_loss = std::move(epoch_loss);
    return predictor;
}

std::unique_ptr<Predictor> lstm_from_checkpoint(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("unparseable checkpoint: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "ifcast-predictor" ||
            j.at("kind").get<std::string>() != "lstm")
            throw InputError("checkpoint is not an lstm predictor");
        if (j.at("version").get<int>() != 1)
            throw InputError("unsupported lstm checkpoint version");
        const auto& jc = j.at("config");
        LstmConfig cfg;
        cfg.window = jc.at("window").get<int>();
        cfg.layer_sizes = jc.at("layer_sizes").get<std::vector<int>>();
        cfg.dense_sizes = jc.at("dense_sizes").get<std::vector<int>>();
        cfg.epochs = jc.at("epochs").get<int>();
        cfg.learning_rate = jc.at("learning_rate").get<double>();
        cfg.batch_size = jc.at("batch_size").get<int>();
        cfg.seed = jc.at("seed").get<std::uint64_t>();

        auto model = std::make_unique<LstmModel>(cfg, 0);
        auto params = model->parameters();
        const auto& jp = j.at("params");
        if (jp.size() != params.size())
            throw InputError("checkpoint parameter count does not match the model");
        for (std::size_t i = 0; i < params.size(); ++i) {
            const auto& jt = jp[i];
            nn::Tensor& t = *params[i];
            if (jt.at("name").get<std::string>() != t.name ||
                jt.at("rows").get<Eigen::Index>() != t.value.rows() ||
                jt.at("cols").get<Eigen::Index>() != t.value.cols()) {
                throw InputError(
                    "checkpoint tensor does not match the model layout: " + t.name);
            }
            const auto& data = jt.at("data");
            if (static_cast<Eigen::Index>(data.size()) != t.value.size())
                throw InputError("checkpoint tensor has the wrong element count: " +
                                 t.name);
            std::size_t idx = 0;
            for (Eigen::Index r = 0; r < t.value.rows(); ++r) {
                for (Eigen::Index cidx = 0; cidx < t.value.cols(); ++cidx) {
                    t.value(r, cidx) = data[idx++].get<double>();
                }
            }
        }

        Normalizer norm;
        norm.mean = j.at("normalizer").at("mean").get<double>();
        norm.stddev = j.at("normalizer").at("stddev").get<double>();
        return std::make_unique<LstmPredictor>(std::move(model), norm);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed checkpoint: ") + e.what());
    }
}

} // namespace ifcast
