#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qcf/curation.hpp"
#include "qcf/feature_store.hpp"
#include "qcf/rng.hpp"

namespace qcf {

// Small feature-space classifier: input d -> optional rectified hidden
// layers -> 1 raw logit. Positive class is fake.
struct ProbeModel {
    std::vector<std::size_t> dims;  // {d, hidden..., 1}
    // Per layer: weights row-major (out x in) and biases (out).
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    double dropout = 0.0;  // on hidden activations, training only

    std::size_t layer_count() const { return weights.size(); }
    std::size_t parameter_count() const;
};

struct TrainConfig {
    double learning_rate = 1e-3;
    double weight_decay = 5e-5;
    std::size_t step_every = 5;  // epochs between lr drops
    double step_gamma = 0.1;
    std::size_t epochs = 30;
    std::size_t batch_size = 64;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_adam = 1e-8;
    double dropout = 0.1;
    std::vector<std::size_t> hidden = {64};
    std::uint64_t seed = 0;

    void validate() const;
};

struct OptimizerState {
    std::vector<std::vector<double>> m;  // first moments, per parameter block
    std::vector<std::vector<double>> v;  // second moments
    std::uint64_t step = 0;
};

struct EpochLog {
    std::size_t epoch = 0;
    double lr = 0.0;
    double mean_loss = 0.0;
};

// Mean binary cross-entropy in the numerically stable logit form and its
// gradient (sigma(z) - y) / n.
std::pair<double, std::vector<double>> bce_loss(
    const std::vector<double>& logits, const std::vector<double>& labels);

// Decoupled weight decay: theta -= lr * (m_hat / (sqrt(v_hat) + eps)) and
// separately theta -= lr * wd * theta.
void adamw_step(std::vector<std::vector<double>>& params,
                const std::vector<std::vector<double>>& grads,
                OptimizerState& state, const TrainConfig& cfg,
                double current_lr);

double lr_at(std::size_t epoch, const TrainConfig& cfg);

ProbeModel init_probe(std::size_t input_dim, const TrainConfig& cfg);

std::pair<ProbeModel, std::vector<EpochLog>> train_probe(
    const CuratedSplit& split, const TrainConfig& cfg);

// P(fake) per record, dropout off.
std::vector<double> predict_scores(const ProbeModel& model,
                                   const FeatureSet& set);
double predict_one(const ProbeModel& model, const std::vector<float>& x);

// Analytic gradients vs central finite differences (h = 1e-5 by default);
// returns the max relative error over all parameters.
double grad_check(const ProbeModel& model,
                  const std::vector<std::vector<double>>& batch_x,
                  const std::vector<double>& batch_y, double h = 1e-5);

// Forward/backward over a batch without dropout; used by training with an
// optional precomputed dropout mask. Returns mean loss, fills grads.
double probe_loss_and_grads(const ProbeModel& model,
                            const std::vector<std::vector<double>>& batch_x,
                            const std::vector<double>& batch_y,
                            std::vector<std::vector<double>>& weight_grads,
                            std::vector<std::vector<double>>& bias_grads,
                            const std::vector<std::vector<double>>* dropout_masks =
                                nullptr);

std::string probe_to_json(const ProbeModel& model);
ProbeModel probe_from_json(const std::string& text);
void save_probe(const ProbeModel& model, const std::string& path);
ProbeModel load_probe(const std::string& path);
void write_training_log(const std::vector<EpochLog>& log,
                        const std::string& path);

}  // namespace qcf
