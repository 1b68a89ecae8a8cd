#include <benchmark/benchmark.h>

#include "grfkit/grf.hpp"
#include "grfkit/kinematics.hpp"
#include "grfkit/model.hpp"
#include "grfkit/synth.hpp"

using namespace grfkit;

namespace {

const Take& sample_take() {
    static const Take take = [] {
        synth::GaitConfig cfg;
        cfg.duration_s = 30.0;
        return synth::generate_gait(cfg);
    }();
    return take;
}

void BM_ContactLabels(benchmark::State& state) {
    const Take& take = sample_take();
    const grf::ContactParams params;
    for (auto _ : state) {
        auto labels = grf::contact_labels(*take.vgrf, take.layout, params);
        benchmark::DoNotOptimize(labels.labels.data());
    }
    state.SetItemsProcessed(state.iterations() * take.vgrf->frames());
}
BENCHMARK(BM_ContactLabels);

void BM_ForwardKinematics(benchmark::State& state) {
    const Take& take = sample_take();
    for (auto _ : state) {
        auto poses = kin::forward_kinematics(take.skeleton, *take.local_motion);
        benchmark::DoNotOptimize(poses.positions.data());
    }
    state.SetItemsProcessed(state.iterations() * take.poses.frames());
}
BENCHMARK(BM_ForwardKinematics);

void BM_EstimatorForward(benchmark::State& state) {
    const Take& take = sample_take();
    nn::ModelConfig cfg;
    cfg.width_scale = state.range(0) / 100.0;
    RngStream rng(1);
    const nn::Model model = nn::build_model(cfg, rng);
    PoseSequence window;
    window.joints = take.poses.joints;
    window.rate_hz = take.poses.rate_hz;
    window.positions.assign(take.poses.positions.begin(),
                            take.poses.positions.begin() + 240 * take.poses.joints * 3);
    for (auto _ : state) {
        auto out = nn::forward(model, window, take.skeleton.foot_joints);
        benchmark::DoNotOptimize(out.vgrf->values.data());
    }
    state.SetItemsProcessed(state.iterations() * 240);
}
BENCHMARK(BM_EstimatorForward)->Arg(25)->Arg(100);

void BM_GaussianSmooth(benchmark::State& state) {
    std::vector<double> series(state.range(0));
    for (size_t i = 0; i < series.size(); ++i) series[i] = std::sin(i * 0.05);
    for (auto _ : state) {
        auto out = grf::gaussian_smooth(series, 5.0);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_GaussianSmooth)->Arg(6000);

}  // namespace

BENCHMARK_MAIN();
