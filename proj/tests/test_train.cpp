#include "doctest.h"

#include <fstream>

#include "grfkit/train.hpp"
#include "grfkit/synth.hpp"
#include "helpers.hpp"

using namespace grfkit;
using namespace grfkit::nn;

namespace {

augment::AugmentConfig small_windows(std::uint64_t seed) {
    augment::AugmentConfig cfg;
    cfg.window_frames = 120;
    cfg.window_stride = 120;
    cfg.seed = seed;
    return cfg;
}

Model tiny_model(Variant variant, std::uint64_t seed = 1) {
    ModelConfig cfg;
    cfg.variant = variant;
    cfg.width_scale = 0.125;
    RngStream rng(seed);
    return build_model(cfg, rng);
}

}  // namespace

TEST_CASE("a few Adam steps reduce the loss on one window") {
    synth::GaitConfig gait;
    gait.duration_s = 8.0;
    const Take take = synth::generate_gait(gait);
    augment::AugmentConfig wcfg = small_windows(5);
    const augment::WindowDataset data({&take}, wcfg, false);

    Model model = tiny_model(Variant::vgrf);
    const double initial = evaluate_loss(model, data);

    OptimizerConfig opt;
    opt.learning_rate = 3e-4;
    opt.batch_size = 8;
    TrainConfig tc;
    tc.epochs = 30;
    tc.patience = 30;
    tc.seed = 11;
    const auto history = train(model, data, nullptr, opt, tc);
    const double final_loss = evaluate_loss(model, data);
    CHECK(final_loss < 0.5 * initial);
    CHECK(history.epochs.size() > 0);
    CHECK(history.steps > 0);
}

TEST_CASE("zero learning rate leaves parameters bit-identical") {
    synth::GaitConfig gait;
    gait.duration_s = 6.0;
    const Take take = synth::generate_gait(gait);
    const augment::WindowDataset data({&take}, small_windows(7), true);

    Model model = tiny_model(Variant::vgrf);
    const Model before = model;
    OptimizerConfig opt;
    opt.learning_rate = 1e-30;  // effectively zero; config requires > 0
    opt.batch_size = 4;
    TrainConfig tc;
    tc.epochs = 1;
    tc.patience = 5;
    train(model, data, nullptr, opt, tc);
    for (size_t p = 0; p < model.params.size(); ++p)
        for (size_t i = 0; i < model.params[p].value.v.size(); ++i)
            CHECK(model.params[p].value.v[i] ==
                  doctest::Approx(before.params[p].value.v[i]).epsilon(1e-20));
}

TEST_CASE("training is deterministic given the seed") {
    synth::GaitConfig gait;
    gait.duration_s = 6.0;
    const Take take = synth::generate_gait(gait);
    const augment::WindowDataset data({&take}, small_windows(9), true);

    auto run = [&]() {
        Model model = tiny_model(Variant::vgrf, 3);
        OptimizerConfig opt;
        opt.learning_rate = 3e-4;
        opt.batch_size = 4;
        TrainConfig tc;
        tc.epochs = 3;
        tc.patience = 5;
        tc.seed = 123;
        const auto history = train(model, data, &data, opt, tc);
        return std::pair{model, history};
    };
    const auto [m1, h1] = run();
    const auto [m2, h2] = run();
    REQUIRE(h1.epochs.size() == h2.epochs.size());
    for (size_t e = 0; e < h1.epochs.size(); ++e) {
        CHECK(h1.epochs[e].train_loss == h2.epochs[e].train_loss);
        CHECK(h1.epochs[e].val_loss == h2.epochs[e].val_loss);
    }
    for (size_t p = 0; p < m1.params.size(); ++p)
        CHECK(m1.params[p].value.v == m2.params[p].value.v);
}

TEST_CASE("contact and dual variants train with their losses") {
    synth::GaitConfig gait;
    gait.duration_s = 6.0;
    const Take take = synth::generate_gait(gait);
    const augment::WindowDataset data({&take}, small_windows(13), false);

    for (Variant v : {Variant::contact, Variant::dual, Variant::linear_feet}) {
        Model model = tiny_model(v, 5);
        const double initial = evaluate_loss(model, data);
        OptimizerConfig opt;
        opt.learning_rate = 1e-3;
        opt.batch_size = 8;
        TrainConfig tc;
        tc.epochs = 10;
        tc.patience = 10;
        tc.seed = 7;
        train(model, data, nullptr, opt, tc);
        CHECK(evaluate_loss(model, data) < initial);
    }
}

TEST_CASE("early stopping restores the best-validation parameters") {
    synth::GaitConfig gait;
    gait.duration_s = 6.0;
    const Take take = synth::generate_gait(gait);
    const augment::WindowDataset train_data({&take}, small_windows(15), true);
    const augment::WindowDataset val_data({&take}, small_windows(16), false);

    Model model = tiny_model(Variant::vgrf, 9);
    OptimizerConfig opt;
    opt.learning_rate = 3e-4;
    opt.batch_size = 4;
    TrainConfig tc;
    tc.epochs = 6;
    tc.patience = 2;
    tc.seed = 31;
    const auto history = train(model, train_data, &val_data, opt, tc);
    REQUIRE(history.best_epoch >= 0);
    CHECK(evaluate_loss(model, val_data) ==
          doctest::Approx(history.best_val_loss).epsilon(1e-9));
}

TEST_CASE("history CSV is written in the documented format") {
    testutil::TempDir dir("history");
    TrainHistory history;
    history.epochs = {{0, 0.5, 0.6}, {1, 0.4, 0.55}};
    const auto file = dir.path() / "history.csv";
    write_history_csv(history, file);
    std::ifstream is(file);
    std::string line;
    std::getline(is, line);
    CHECK(line == "epoch,train_loss,val_loss");
    std::getline(is, line);
    CHECK(line.substr(0, 2) == "0,");
}
