#include "qcf/probe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

namespace qcf {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

struct Activations {
    // layer_inputs[l] is the input vector to layer l; post[l] the rectified
    // (and possibly dropped) output of hidden layer l.
    std::vector<std::vector<double>> layer_inputs;
    double logit = 0.0;
};

double forward_one(const ProbeModel& model, const std::vector<double>& x,
                   Activations* acts, const std::vector<double>* masks_row) {
    std::vector<double> cur = x;
    if (acts) acts->layer_inputs.clear();
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        if (acts) acts->layer_inputs.push_back(cur);
        const std::size_t out_n = model.dims[l + 1];
        const std::size_t in_n = model.dims[l];
        std::vector<double> next(out_n);
        for (std::size_t o = 0; o < out_n; ++o) {
            double acc = model.biases[l][o];
            const double* w = &model.weights[l][o * in_n];
            for (std::size_t i = 0; i < in_n; ++i) acc += w[i] * cur[i];
            next[o] = acc;
        }
        const bool is_output = (l + 1 == model.layer_count());
        if (!is_output) {
            for (std::size_t o = 0; o < out_n; ++o) {
                next[o] = std::max(next[o], 0.0);
                if (masks_row) next[o] *= masks_row[l][o];
            }
        }
        cur = std::move(next);
    }
    if (acts) acts->logit = cur[0];
    return cur[0];
}

}  // namespace

std::size_t ProbeModel::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < layer_count(); ++l) {
        n += weights[l].size() + biases[l].size();
    }
    return n;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !(weight_decay >= 0.0) || step_every == 0 ||
        !(step_gamma > 0.0) || epochs == 0 || batch_size == 0 ||
        !(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0) ||
        !(eps_adam > 0.0)) {
        throw std::invalid_argument("non-positive training hyperparameter");
    }
    if (dropout < 0.0 || dropout >= 1.0) {
        throw std::invalid_argument("dropout must be in [0, 1)");
    }
}

std::pair<double, std::vector<double>> bce_loss(
    const std::vector<double>& logits, const std::vector<double>& labels) {
    if (logits.empty() || logits.size() != labels.size()) {
        throw std::invalid_argument("bce_loss needs equal-length non-empty inputs");
    }
    const double n = static_cast<double>(logits.size());
    double loss = 0.0;
    std::vector<double> grad(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double z = logits[i];
        const double y = labels[i];
        // softplus(z) - y*z == -[y log s(z) + (1-y) log(1-s(z))]
        loss += softplus(z) - y * z;
        grad[i] = (sigmoid(z) - y) / n;
    }
    return {loss / n, std::move(grad)};
}

void adamw_step(std::vector<std::vector<double>>& params,
                const std::vector<std::vector<double>>& grads,
                OptimizerState& state, const TrainConfig& cfg,
                double current_lr) {
    if (params.size() != grads.size()) {
        throw std::invalid_argument("param/grad block count mismatch");
    }
    if (state.m.empty()) {
        state.m.resize(params.size());
        state.v.resize(params.size());
        for (std::size_t b = 0; b < params.size(); ++b) {
            state.m[b].assign(params[b].size(), 0.0);
            state.v[b].assign(params[b].size(), 0.0);
        }
    }
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t b = 0; b < params.size(); ++b) {
        if (params[b].size() != grads[b].size()) {
            throw std::invalid_argument("param/grad shape mismatch in block " +
                                        std::to_string(b));
        }
        for (std::size_t i = 0; i < params[b].size(); ++i) {
            const double g = grads[b][i];
            state.m[b][i] = cfg.beta1 * state.m[b][i] + (1.0 - cfg.beta1) * g;
            state.v[b][i] = cfg.beta2 * state.v[b][i] + (1.0 - cfg.beta2) * g * g;
            const double m_hat = state.m[b][i] / bc1;
            const double v_hat = state.v[b][i] / bc2;
            params[b][i] -= current_lr * m_hat / (std::sqrt(v_hat) + cfg.eps_adam);
            params[b][i] -= current_lr * cfg.weight_decay * params[b][i];
        }
    }
}

double lr_at(std::size_t epoch, const TrainConfig& cfg) {
    return cfg.learning_rate *
           std::pow(cfg.step_gamma,
                    static_cast<double>(epoch / cfg.step_every));
}

ProbeModel init_probe(std::size_t input_dim, const TrainConfig& cfg) {
    ProbeModel model;
    model.dims.push_back(input_dim);
    for (std::size_t h : cfg.hidden) model.dims.push_back(h);
    model.dims.push_back(1);
    model.dropout = cfg.dropout;

    Rng rng(cfg.seed);
    for (std::size_t l = 0; l + 1 < model.dims.size(); ++l) {
        const std::size_t in_n = model.dims[l];
        const std::size_t out_n = model.dims[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(in_n));
        std::vector<double> w(in_n * out_n);
        for (double& v : w) v = rng.uniform(-bound, bound);
        model.weights.push_back(std::move(w));
        model.biases.emplace_back(out_n, 0.0);
    }
    return model;
}

double probe_loss_and_grads(const ProbeModel& model,
                            const std::vector<std::vector<double>>& batch_x,
                            const std::vector<double>& batch_y,
                            std::vector<std::vector<double>>& weight_grads,
                            std::vector<std::vector<double>>& bias_grads,
                            const std::vector<std::vector<double>>* dropout_masks) {
    const std::size_t L = model.layer_count();
    weight_grads.assign(L, {});
    bias_grads.assign(L, {});
    for (std::size_t l = 0; l < L; ++l) {
        weight_grads[l].assign(model.weights[l].size(), 0.0);
        bias_grads[l].assign(model.biases[l].size(), 0.0);
    }

    std::vector<double> logits(batch_x.size());
    std::vector<Activations> acts(batch_x.size());
    for (std::size_t s = 0; s < batch_x.size(); ++s) {
        const std::vector<double>* masks_row = nullptr;
        std::vector<std::vector<double>> sample_masks;
        if (dropout_masks) {
            // dropout_masks[l] holds batch-major masks for hidden layer l.
            sample_masks.resize(L - 1);
            for (std::size_t l = 0; l + 1 < L; ++l) {
                const std::size_t units = model.dims[l + 1];
                sample_masks[l].assign(
                    dropout_masks->at(l).begin() + s * units,
                    dropout_masks->at(l).begin() + (s + 1) * units);
            }
            masks_row = sample_masks.data();
        }
        logits[s] = forward_one(model, batch_x[s], &acts[s], masks_row);
    }

    auto [loss, dloss] = bce_loss(logits, batch_y);

    for (std::size_t s = 0; s < batch_x.size(); ++s) {
        // delta over the current layer's outputs, starting at the logit.
        std::vector<double> delta = {dloss[s]};
        for (std::size_t l = L; l-- > 0;) {
            const std::size_t in_n = model.dims[l];
            const std::size_t out_n = model.dims[l + 1];
            const std::vector<double>& input = acts[s].layer_inputs[l];
            std::vector<double> prev_delta(in_n, 0.0);
            for (std::size_t o = 0; o < out_n; ++o) {
                const double d = delta[o];
                bias_grads[l][o] += d;
                double* wg = &weight_grads[l][o * in_n];
                const double* w = &model.weights[l][o * in_n];
                for (std::size_t i = 0; i < in_n; ++i) {
                    wg[i] += d * input[i];
                    prev_delta[i] += d * w[i];
                }
            }
            if (l > 0) {
                // Through the rectifier (and mask): the stored input to layer
                // l is the post-activation of layer l-1; zero means the unit
                // was inactive or dropped, so no gradient flows.
                for (std::size_t i = 0; i < in_n; ++i) {
                    if (input[i] <= 0.0) {
                        prev_delta[i] = 0.0;
                    } else if (dropout_masks) {
                        const std::size_t units = model.dims[l];
                        prev_delta[i] *= dropout_masks->at(l - 1)[s * units + i];
                    }
                }
            }
            delta = std::move(prev_delta);
        }
    }
    return loss;
}

std::pair<ProbeModel, std::vector<EpochLog>> train_probe(
    const CuratedSplit& split, const TrainConfig& cfg) {
    cfg.validate();
    if (split.train_fake.empty() || split.train_real.empty()) {
        throw std::invalid_argument("training data must contain both classes");
    }
    if (split.train_fake.dim != split.train_real.dim) {
        throw std::invalid_argument("train fake/real dim mismatch");
    }
    const std::size_t d = split.train_fake.dim;

    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    for (const FeatureRecord& r : split.train_fake.records) {
        xs.emplace_back(r.vector.begin(), r.vector.end());
        ys.push_back(1.0);
    }
    for (const FeatureRecord& r : split.train_real.records) {
        xs.emplace_back(r.vector.begin(), r.vector.end());
        ys.push_back(0.0);
    }
    const std::size_t n = xs.size();

    ProbeModel model = init_probe(d, cfg);
    const std::size_t L = model.layer_count();

    OptimizerState state;
    Rng rng(cfg.seed ^ 0xa5a5a5a55a5a5a5aULL);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    std::vector<EpochLog> log;
    std::vector<std::vector<double>> wg, bg;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = lr_at(epoch, cfg);
        rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t end = std::min(start + cfg.batch_size, n);
            std::vector<std::vector<double>> bx;
            std::vector<double> by;
            for (std::size_t i = start; i < end; ++i) {
                bx.push_back(xs[order[i]]);
                by.push_back(ys[order[i]]);
            }

            std::vector<std::vector<double>> masks;
            const bool use_dropout = cfg.dropout > 0.0 && L > 1;
            if (use_dropout) {
                masks.resize(L - 1);
                const double keep = 1.0 - cfg.dropout;
                for (std::size_t l = 0; l + 1 < L; ++l) {
                    const std::size_t units = model.dims[l + 1];
                    masks[l].resize(bx.size() * units);
                    for (double& mv : masks[l]) {
                        mv = rng.uniform() < keep ? 1.0 / keep : 0.0;
                    }
                }
            }

            const double loss = probe_loss_and_grads(
                model, bx, by, wg, bg, use_dropout ? &masks : nullptr);
            loss_sum += loss;
            ++batches;

            std::vector<std::vector<double>> params;
            std::vector<std::vector<double>> grads;
            for (std::size_t l = 0; l < L; ++l) {
                params.push_back(std::move(model.weights[l]));
                params.push_back(std::move(model.biases[l]));
                grads.push_back(std::move(wg[l]));
                grads.push_back(std::move(bg[l]));
            }
            adamw_step(params, grads, state, cfg, lr);
            for (std::size_t l = 0; l < L; ++l) {
                model.weights[l] = std::move(params[2 * l]);
                model.biases[l] = std::move(params[2 * l + 1]);
            }
        }
        log.push_back({epoch, lr, loss_sum / static_cast<double>(batches)});
    }
    return {std::move(model), std::move(log)};
}

double predict_one(const ProbeModel& model, const std::vector<float>& x) {
    if (x.size() != model.dims.front()) {
        throw std::invalid_argument("input dim does not match probe");
    }
    std::vector<double> xd(x.begin(), x.end());
    return sigmoid(forward_one(model, xd, nullptr, nullptr));
}

std::vector<double> predict_scores(const ProbeModel& model,
                                   const FeatureSet& set) {
    if (set.dim != model.dims.front()) {
        throw std::invalid_argument("set dim does not match probe input dim");
    }
    std::vector<double> out;
    out.reserve(set.size());
    for (const FeatureRecord& r : set.records) {
        out.push_back(predict_one(model, r.vector));
    }
    return out;
}

double grad_check(const ProbeModel& model,
                  const std::vector<std::vector<double>>& batch_x,
                  const std::vector<double>& batch_y, double h) {
    std::vector<std::vector<double>> wg, bg;
    probe_loss_and_grads(model, batch_x, batch_y, wg, bg, nullptr);

    ProbeModel probe = model;
    double max_rel = 0.0;
    auto check_block = [&](std::vector<double>& block,
                           const std::vector<double>& analytic) {
        for (std::size_t i = 0; i < block.size(); ++i) {
            const double saved = block[i];
            std::vector<std::vector<double>> tw, tb;
            block[i] = saved + h;
            const double lp =
                probe_loss_and_grads(probe, batch_x, batch_y, tw, tb, nullptr);
            block[i] = saved - h;
            const double lm =
                probe_loss_and_grads(probe, batch_x, batch_y, tw, tb, nullptr);
            block[i] = saved;
            const double numeric = (lp - lm) / (2.0 * h);
            const double denom = std::max(std::abs(numeric) + std::abs(analytic[i]), 1e-6);
            max_rel = std::max(max_rel, std::abs(numeric - analytic[i]) / denom);
        }
    };
    for (std::size_t l = 0; l < probe.layer_count(); ++l) {
        check_block(probe.weights[l], wg[l]);
        check_block(probe.biases[l], bg[l]);
    }
    return max_rel;
}

std::string probe_to_json(const ProbeModel& model) {
    nlohmann::json j;
    j["dims"] = model.dims;
    j["weights"] = model.weights;
    j["biases"] = model.biases;
    j["dropout"] = model.dropout;
    return j.dump(2);
}

ProbeModel probe_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ProbeModel model;
    model.dims = j.at("dims").get<std::vector<std::size_t>>();
    model.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    model.biases = j.at("biases").get<std::vector<std::vector<double>>>();
    model.dropout = j.at("dropout").get<double>();
    if (model.dims.size() < 2 || model.weights.size() != model.dims.size() - 1 ||
        model.biases.size() != model.weights.size()) {
        throw std::invalid_argument("inconsistent probe shape");
    }
    return model;
}

void save_probe(const ProbeModel& model, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << probe_to_json(model) << "\n";
}

ProbeModel load_probe(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::string text((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
    return probe_from_json(text);
}

void write_training_log(const std::vector<EpochLog>& log,
                        const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "epoch,lr,mean_loss\n";
    f.precision(17);
    for (const EpochLog& e : log) {
        f << e.epoch << "," << e.lr << "," << e.mean_loss << "\n";
    }
}

}  // namespace qcf
