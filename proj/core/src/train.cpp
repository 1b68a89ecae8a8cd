#include "grfkit/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>

namespace grfkit::nn {

void OptimizerConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ValidationError("optimizer: learning_rate must be positive");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
        throw ValidationError("optimizer: betas must be in [0, 1)");
    if (!(eps > 0.0)) throw ValidationError("optimizer: eps must be positive");
    if (batch_size < 1) throw ValidationError("optimizer: batch_size must be >= 1");
}

Adam::Adam(const Model& model, OptimizerConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    for (const auto& p : model.params) {
        m_.emplace_back(p.value.v.size(), 0.f);
        v_.emplace_back(p.value.v.size(), 0.f);
    }
}

void Adam::step(Model& model, const std::vector<TensorData<float>>& grads) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (size_t p = 0; p < model.params.size(); ++p) {
        auto& theta = model.params[p].value.v;
        const auto& g = grads[p].v;
        auto& m = m_[p];
        auto& v = v_[p];
        for (size_t i = 0; i < theta.size(); ++i) {
            const double gi = g.empty() ? 0.0 : double(g[i]);
            m[i] = static_cast<float>(cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gi);
            v[i] = static_cast<float>(cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * gi * gi);
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            theta[i] -= static_cast<float>(cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.eps));
        }
    }
}

namespace {

// Forward + loss for one window on the shared batch tape.
int window_loss(Tape<float>& tape, const Model& model, const std::vector<int>& param_ids,
                const augment::WindowDataset::Sample& sample, const FootJoints& foot_joints,
                bool training, RngStream* dropout_rng) {
    const int input = tape.constant(
        assemble_features(model.config, sample.poses, foot_joints));
    const auto ids = build_forward(tape, model.config, param_ids, input, training, dropout_rng);

    std::vector<int> losses;
    if (ids.vgrf >= 0) {
        TensorData<float> target = tape.val(ids.vgrf);
        target.v = sample.vgrf;
        losses.push_back(msle_loss(tape, ids.vgrf, target));
    }
    if (ids.contact_logits >= 0) {
        TensorData<float> labels = tape.val(ids.contact_logits);
        for (size_t i = 0; i < sample.contacts.size(); ++i)
            labels.v[i] = static_cast<float>(sample.contacts[i]);
        losses.push_back(bce_logits_loss(tape, ids.contact_logits, labels));
    }
    return losses.size() == 1 ? losses.front() : add_scalars(tape, losses);
}

}  // namespace

double evaluate_loss(const Model& model, const augment::WindowDataset& data, int64_t epoch) {
    if (data.size() == 0) throw ValidationError("evaluate_loss: empty dataset");
    const FootJoints feet = data.foot_joints();
    double acc = 0.0;
    for (int64_t i = 0; i < data.size(); ++i) {
        const auto sample = data.get(epoch, i);
        Tape<float> tape;
        std::vector<int> param_ids;
        for (const auto& p : model.params) param_ids.push_back(tape.constant(p.value));
        const int loss = window_loss(tape, model, param_ids, sample, feet, false, nullptr);
        acc += tape.val(loss).v[0];
    }
    return acc / static_cast<double>(data.size());
}

TrainHistory train(Model& model, const augment::WindowDataset& train_data,
                   const augment::WindowDataset* val_data, const OptimizerConfig& opt,
                   const TrainConfig& cfg) {
    opt.validate();
    if (train_data.size() == 0) throw ValidationError("train: empty training dataset");

    Adam adam(model, opt);
    TrainHistory history;
    Model best = model;
    double best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;
    int64_t steps = 0;

    std::vector<int64_t> order(static_cast<size_t>(train_data.size()));
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int64_t>(i);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Deterministic per-epoch shuffle.
        RngStream shuffle_rng = RngStream::keyed(cfg.seed, 0xA1, epoch);
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);

        double epoch_loss = 0.0;
        int64_t batches = 0;
        for (size_t begin = 0; begin < order.size(); begin += opt.batch_size) {
            if (cfg.max_steps >= 0 && steps >= cfg.max_steps) break;
            const size_t end = std::min(order.size(), begin + opt.batch_size);

            Tape<float> tape;
            std::vector<int> param_ids;
            for (const auto& p : model.params) param_ids.push_back(tape.leaf(p.value));

            std::vector<int> losses;
            for (size_t k = begin; k < end; ++k) {
                const auto sample = train_data.get(epoch, order[k]);
                RngStream dropout_rng =
                    RngStream::keyed(cfg.seed, 0xD0, epoch, static_cast<std::uint64_t>(order[k]));
                losses.push_back(window_loss(tape, model, param_ids, sample,
                                             train_data.foot_joints(), true, &dropout_rng));
            }
            const int batch_loss = scale(tape, add_scalars(tape, losses),
                                         1.0 / static_cast<double>(losses.size()));
            const double loss_value = tape.val(batch_loss).v[0];
            if (!std::isfinite(loss_value))
                throw TrainingDiverged("non-finite loss at step " + std::to_string(steps));
            tape.backward(batch_loss);

            std::vector<TensorData<float>> grads(model.params.size());
            for (size_t p = 0; p < model.params.size(); ++p) {
                grads[p] = tape.grad(param_ids[p]);
                for (float g : grads[p].v)
                    if (!std::isfinite(g))
                        throw TrainingDiverged("non-finite gradient in parameter '" +
                                               model.params[p].name + "' at step " +
                                               std::to_string(steps));
            }
            adam.step(model, grads);
            ++steps;
            epoch_loss += loss_value;
            ++batches;
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = batches > 0 ? epoch_loss / batches : 0.0;
        stats.val_loss = val_data ? evaluate_loss(model, *val_data) : stats.train_loss;
        history.epochs.push_back(stats);
        if (cfg.verbose)
            std::cerr << "epoch " << epoch << " train " << stats.train_loss << " val "
                      << stats.val_loss << "\n";

        if (stats.val_loss < best_val) {
            best_val = stats.val_loss;
            best = model;
            history.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
        if (cfg.max_steps >= 0 && steps >= cfg.max_steps) break;
    }

    if (history.best_epoch >= 0) model = best;
    history.best_val_loss = best_val;
    history.steps = steps;
    return history;
}

void write_history_csv(const TrainHistory& history, const std::filesystem::path& file) {
    std::ofstream os(file, std::ios::trunc);
    if (!os) throw IoError("cannot write history: " + file.string());
    os << "epoch,train_loss,val_loss\n";
    for (const auto& e : history.epochs)
        os << e.epoch << "," << e.train_loss << "," << e.val_loss << "\n";
}

}  // namespace grfkit::nn
