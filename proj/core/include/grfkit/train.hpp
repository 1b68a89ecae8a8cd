#pragma once

#include "grfkit/augment.hpp"
#include "grfkit/model.hpp"

namespace grfkit::nn {

struct OptimizerConfig {
    double learning_rate = 3e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int batch_size = 64;

    void validate() const;
};

// Adam with bias correction over a model's parameter list.
class Adam {
public:
    Adam(const Model& model, OptimizerConfig cfg);
    void step(Model& model, const std::vector<TensorData<float>>& grads);
    int64_t steps() const { return t_; }

private:
    OptimizerConfig cfg_;
    std::vector<std::vector<float>> m_, v_;
    int64_t t_ = 0;
};

struct TrainConfig {
    int epochs = 50;
    int patience = 10;           // early stopping on validation loss
    std::uint64_t seed = 0;
    int64_t max_steps = -1;      // optional hard cap on optimizer steps
    bool verbose = false;        // per-epoch line on stderr
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0;
    double val_loss = 0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    int best_epoch = -1;
    double best_val_loss = 0;
    int64_t steps = 0;
};

// Thrown when a non-finite loss or gradient appears; carries the iteration
// index and first offending parameter name.
class TrainingDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Deterministic single-threaded reference loop: per-epoch regenerated
// augmentation stream, mean batch loss per variant (MSLE for vGRF heads, BCE
// for contact heads, their sum for dual), Adam updates, best-validation
// parameters retained. With no validation set the last epoch wins.
TrainHistory train(Model& model, const augment::WindowDataset& train_data,
                   const augment::WindowDataset* val_data, const OptimizerConfig& opt,
                   const TrainConfig& cfg);

// Mean eval-mode loss of the model over a dataset (no augmentation stream).
double evaluate_loss(const Model& model, const augment::WindowDataset& data, int64_t epoch = 0);

void write_history_csv(const TrainHistory& history, const std::filesystem::path& file);

}  // namespace grfkit::nn
