#include "doctest.h"

#include <cmath>
#include <fstream>

#include "grfkit/model.hpp"
#include "grfkit/synth.hpp"
#include "helpers.hpp"

using namespace grfkit;
using namespace grfkit::nn;

namespace {

PoseSequence random_poses(RngStream& rng, int64_t frames, int joints = kDefaultJoints) {
    PoseSequence p;
    p.joints = joints;
    p.rate_hz = 100.f;
    p.positions.resize(frames * joints * 3);
    for (auto& x : p.positions) x = static_cast<float>(rng.uniform(-1.0, 1.0));
    return p;
}

Model make(Variant variant, double width_scale = 1.0, std::uint64_t seed = 1) {
    ModelConfig cfg;
    cfg.variant = variant;
    cfg.width_scale = width_scale;
    RngStream rng(seed);
    return build_model(cfg, rng);
}

}  // namespace

TEST_CASE("parameter counts") {
    SUBCASE("full-size vGRF estimator lands on the expected million-ish count") {
        const Model m = make(Variant::vgrf);
        CHECK(m.parameter_count() == 1005216);  // frozen regression value
        CHECK(m.parameter_count() >= 1000000);
        CHECK(m.parameter_count() <= 1200000);
    }
    SUBCASE("dual variant is strictly larger (duplicated FC stack)") {
        CHECK(make(Variant::dual).parameter_count() > make(Variant::vgrf).parameter_count());
    }
    SUBCASE("width_scale zero is rejected") {
        ModelConfig cfg;
        cfg.width_scale = 0.0;
        RngStream rng(1);
        CHECK_THROWS_AS(build_model(cfg, rng), ValidationError);
    }
    SUBCASE("even kernels are rejected") {
        ModelConfig cfg;
        cfg.kernel = 6;
        RngStream rng(1);
        CHECK_THROWS_AS(build_model(cfg, rng), ValidationError);
    }
}

TEST_CASE("forward output contracts") {
    const FootJoints feet = synth::make_humanoid_skeleton(1.75).foot_joints;
    RngStream rng(3);

    SUBCASE("vGRF outputs are nonnegative (softplus head)") {
        const Model m = make(Variant::vgrf, 0.25);
        const auto out = forward(m, random_poses(rng, 50), feet);
        REQUIRE(out.vgrf);
        CHECK(out.vgrf->frames() == 50);
        for (float v : out.vgrf->values) CHECK(v >= 0.f);
    }
    SUBCASE("output length equals input length down to one frame") {
        const Model m = make(Variant::vgrf, 0.25);
        for (int64_t frames : {1, 2, 7, 240}) {
            const auto out = forward(m, random_poses(rng, frames), feet);
            CHECK(out.vgrf->frames() == frames);
        }
    }
    SUBCASE("eval forward is deterministic") {
        const Model m = make(Variant::dual, 0.25);
        const auto poses = random_poses(rng, 30);
        const auto a = forward(m, poses, feet);
        const auto b = forward(m, poses, feet);
        CHECK(a.vgrf->values == b.vgrf->values);
        CHECK(a.contact_logits == b.contact_logits);
    }
    SUBCASE("contact variants emit logits; threshold at zero") {
        for (Variant v : {Variant::contact, Variant::mlp3, Variant::linear,
                          Variant::linear_feet}) {
            const Model m = make(v, 0.5);
            const auto out = forward(m, random_poses(rng, 20), feet);
            CHECK(!out.vgrf);
            REQUIRE(out.contact_logits.size() == 20 * 4);
            const auto labels = out.contacts_from_logits(100.f);
            for (size_t i = 0; i < labels.labels.size(); ++i)
                CHECK(labels.labels[i] == (out.contact_logits[i] > 0.f ? 1 : 0));
        }
    }
    SUBCASE("joint-count mismatch is rejected") {
        const Model m = make(Variant::vgrf, 0.25);
        CHECK_THROWS_AS(forward(m, random_poses(rng, 10, 17), feet), ValidationError);
    }
}

TEST_CASE("chunked estimation equals direct forward") {
    const FootJoints feet = synth::make_humanoid_skeleton(1.75).foot_joints;
    RngStream rng(5);
    const Model m = make(Variant::vgrf, 0.25);
    const auto poses = random_poses(rng, 700);
    const auto direct = forward(m, poses, feet);
    const auto chunked = estimate_vgrf(m, poses, feet, 256);
    REQUIRE(chunked.values.size() == direct.vgrf->values.size());
    for (size_t i = 0; i < chunked.values.size(); ++i)
        CHECK(chunked.values[i] == doctest::Approx(direct.vgrf->values[i]).epsilon(1e-6));
}

TEST_CASE("model files round-trip bit-exactly") {
    testutil::TempDir dir("model");
    const FootJoints feet = synth::make_humanoid_skeleton(1.75).foot_joints;
    RngStream rng(7);
    const auto poses = random_poses(rng, 25);

    for (Variant v : {Variant::vgrf, Variant::dual, Variant::mlp3}) {
        const Model m = make(v, 0.25, 11);
        const auto file = dir.path() / (variant_name(v) + ".upm");
        save_model(m, file);
        const Model loaded = load_model(file);
        CHECK(loaded.config.variant == m.config.variant);
        REQUIRE(loaded.params.size() == m.params.size());
        for (size_t i = 0; i < m.params.size(); ++i)
            CHECK(loaded.params[i].value.v == m.params[i].value.v);

        const auto a = forward(m, poses, feet);
        const auto b = forward(loaded, poses, feet);
        if (a.vgrf) CHECK(a.vgrf->values == b.vgrf->values);
        CHECK(a.contact_logits == b.contact_logits);
    }
}

TEST_CASE("model file validation") {
    testutil::TempDir dir("model_bad");
    const Model m = make(Variant::vgrf, 0.25);
    const auto file = dir.path() / "m.upm";
    save_model(m, file);

    SUBCASE("truncated blob is a size mismatch") {
        std::filesystem::resize_file(file, std::filesystem::file_size(file) - 64);
        CHECK_THROWS_AS(load_model(file), ValidationError);
    }
    SUBCASE("trailing bytes are rejected") {
        std::ofstream os(file, std::ios::binary | std::ios::app);
        os.write("xx", 2);
        os.close();
        CHECK_THROWS_AS(load_model(file), ValidationError);
    }
    SUBCASE("manifest inconsistent with config is rejected") {
        // A contact-shaped head under a vgrf variant header.
        Model broken = m;
        broken.params.back().value = TensorData<float>({4}, 0.f);
        save_model(broken, file);
        CHECK_THROWS_AS(load_model(file), ValidationError);
    }
}

TEST_CASE("derive_contacts is the contact function applied to the estimate") {
    synth::GaitConfig cfg;
    cfg.duration_s = 12.0;
    const Take take = synth::generate_gait(cfg);
    const grf::ContactParams params;
    SUBCASE("ground-truth forces reproduce ground-truth labels") {
        const auto labels = derive_contacts(*take.vgrf, take.layout, params);
        const auto direct = grf::contact_labels(*take.vgrf, take.layout, params);
        CHECK(labels.labels == direct.labels);
    }
    SUBCASE("all-zero estimate gives all-zero labels") {
        VgrfSequence zero;
        zero.rate_hz = 100.f;
        zero.values.assign(take.vgrf->values.size(), 0.f);
        const auto labels = derive_contacts(zero, take.layout, params);
        for (auto v : labels.labels) CHECK(v == 0);
    }
}
