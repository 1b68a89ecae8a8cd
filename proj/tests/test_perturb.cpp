#include "doctest.h"

#include <cmath>

#include "grfkit/augment.hpp"
#include "grfkit/kinematics.hpp"
#include "grfkit/metrics.hpp"
#include "grfkit/perturb.hpp"
#include "grfkit/synth.hpp"
#include "helpers.hpp"

using namespace grfkit;
using namespace grfkit::perturb;

TEST_CASE("Gaussian position noise") {
    const Take take = testutil::random_take(3, 40);
    SUBCASE("sigma zero is the identity") {
        RngStream rng(1);
        const auto out = add_noise(take.poses, 0.0, rng);
        CHECK(out.positions == take.poses.positions);
    }
    SUBCASE("same stream state gives identical output") {
        RngStream a(9), b(9);
        const auto o1 = add_noise(take.poses, 0.02, a);
        const auto o2 = add_noise(take.poses, 0.02, b);
        CHECK(o1.positions == o2.positions);
    }
    SUBCASE("sample std matches sigma over many draws") {
        PoseSequence big;
        big.joints = 23;
        big.rate_hz = 100.f;
        big.positions.assign(1500 * 23 * 3, 0.f);  // > 1e5 coordinates
        RngStream rng(5);
        const auto noisy = add_noise(big, 0.02, rng);
        double sum = 0, sum2 = 0;
        for (float v : noisy.positions) {
            sum += v;
            sum2 += double(v) * v;
        }
        const double n = static_cast<double>(noisy.positions.size());
        const double std = std::sqrt(sum2 / n - (sum / n) * (sum / n));
        CHECK(std >= 0.019);
        CHECK(std <= 0.021);
        // Law of large numbers: mean displacement shrinks like 3 sigma/sqrt(n).
        CHECK(std::abs(sum / n) < 3.0 * 0.02 / std::sqrt(n));
    }
}

TEST_CASE("blend pair mining") {
    synth::GaitConfig cfg;
    cfg.duration_s = 14.0;
    RngStream rng(21);
    const auto [a, b] = synth::generate_blend_ground_truth(cfg, rng);

    SUBCASE("takes built from one schedule pair up at aligned windows") {
        const auto pairs = mine_blend_pairs({&a, &b}, 80, 20);
        REQUIRE(!pairs.empty());
        int64_t cross_aligned = 0;
        for (const auto& p : pairs)
            cross_aligned += p.take_a != p.take_b && p.start_a == p.start_b;
        // Every aligned window with contact on the matched foot pairs across
        // the two takes.
        CHECK(cross_aligned >= 2 * ((a.contacts->frames() - 80) / 20) / 2);
    }
    SUBCASE("returned pairs satisfy the equality predicate") {
        const auto pairs = mine_blend_pairs({&a, &b}, 80, 40);
        for (const auto& p : pairs) {
            const Take* ta = p.take_a == 0 ? &a : &b;
            const Take* tb = p.take_b == 0 ? &a : &b;
            for (int64_t t = 0; t < 80; ++t)
                for (int loc = 0; loc < 2; ++loc)
                    CHECK(ta->contacts->at(p.start_a + t, p.foot, loc) ==
                          tb->contacts->at(p.start_b + t, p.foot, loc));
        }
    }
    SUBCASE("uncorrelated schedules pair far less than aligned ones") {
        synth::GaitConfig other = cfg;
        other.cycle_s = 1.07;
        other.duty_factor = 0.57;
        const Take c = synth::generate_gait(other);
        const auto aligned = mine_blend_pairs({&a, &b}, 80, 20);
        std::vector<BlendPair> cross;
        for (const auto& p : mine_blend_pairs({&a, &c}, 80, 20))
            if (p.take_a != p.take_b) cross.push_back(p);
        CHECK(cross.size() * 10 < aligned.size());
    }
}

TEST_CASE("motion blending") {
    synth::GaitConfig cfg;
    cfg.duration_s = 14.0;
    RngStream rng(31);
    const auto [a, b] = synth::generate_blend_ground_truth(cfg, rng);
    const auto wa = augment::slice_motion(*a.local_motion, 200, 80);
    const auto wb = augment::slice_motion(*b.local_motion, 200, 80);

    SUBCASE("weight zero returns the first motion, one returns the second") {
        const auto w0 = blend(wa, wb, std::vector<double>(80, 0.0));
        CHECK(w0.rotations == wa.rotations);
        CHECK(w0.root_translation == wa.root_translation);
        const auto w1 = blend(wa, wb, std::vector<double>(80, 1.0));
        CHECK(w1.root_translation == wb.root_translation);
        for (int64_t t = 0; t < 80; ++t)
            for (int j = 0; j < wb.joints; ++j)
                CHECK(Quat::angle_between(Quat::from(w1.quat(t, j)),
                                          Quat::from(wb.quat(t, j))) < 1e-6);
    }
    SUBCASE("blending a motion with itself is the identity up to sign") {
        const auto out = blend(wa, wa, smoothstep_weights(80));
        for (int64_t t = 0; t < 80; ++t)
            for (int j = 0; j < wa.joints; ++j)
                CHECK(Quat::angle_between(Quat::from(out.quat(t, j)),
                                          Quat::from(wa.quat(t, j))) < 1e-6);
    }
    SUBCASE("output rotations stay unit norm") {
        const auto out = blend(wa, wb, smoothstep_weights(80));
        for (size_t i = 0; i + 3 < out.rotations.size(); i += 4) {
            const double n = std::sqrt(double(out.rotations[i]) * out.rotations[i] +
                                       double(out.rotations[i + 1]) * out.rotations[i + 1] +
                                       double(out.rotations[i + 2]) * out.rotations[i + 2] +
                                       double(out.rotations[i + 3]) * out.rotations[i + 3]);
            CHECK(n == doctest::Approx(1.0).epsilon(1e-5));
        }
    }
    SUBCASE("length mismatch is rejected") {
        const auto bad = augment::slice_motion(*b.local_motion, 0, 60);
        CHECK_THROWS_AS(blend(wa, bad, smoothstep_weights(80)), ValidationError);
    }
}

TEST_CASE("blended gaits develop footskate well above the clean baseline") {
    synth::GaitConfig cfg;
    cfg.duration_s = 14.0;
    RngStream rng(41);
    const auto [a, b] = synth::generate_blend_ground_truth(cfg, rng);
    const auto pairs = mine_blend_pairs({&a, &b}, 80, 20);
    REQUIRE(pairs.size() >= 5);

    const double clean = std::max(
        1e-6, std::max(metrics::footskate(a.poses, *a.contacts, a.skeleton),
                       metrics::footskate(b.poses, *b.contacts, b.skeleton)));

    double blended_total = 0;
    int counted = 0;
    const Take* takes[2] = {&a, &b};
    for (size_t i = 0; i < pairs.size() && counted < 10; ++i) {
        const auto& p = pairs[i];
        if (p.take_a == p.take_b) continue;
        const auto wa = reroot_horizontal(
            augment::slice_motion(*takes[p.take_a]->local_motion, p.start_a, 80));
        const auto wb = reroot_horizontal(
            augment::slice_motion(*takes[p.take_b]->local_motion, p.start_b, 80));
        const auto mixed = blend(wa, wb, smoothstep_weights(80));
        const auto poses = kin::forward_kinematics(takes[p.take_a]->skeleton, mixed);

        ContactSequence pattern;
        pattern.rate_hz = 100.f;
        pattern.labels.assign(80 * 4, 0);
        for (int64_t t = 0; t < 80; ++t)
            for (int loc = 0; loc < 2; ++loc)
                pattern.at(t, p.foot, loc) =
                    takes[p.take_a]->contacts->at(p.start_a + t, p.foot, loc);
        blended_total += metrics::footskate(poses, pattern, takes[p.take_a]->skeleton);
        ++counted;
    }
    REQUIRE(counted > 0);
    CHECK(blended_total / counted > 5.0 * clean);
}
