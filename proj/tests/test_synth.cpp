#include "doctest.h"

#include <cmath>

#include "grfkit/grf.hpp"
#include "grfkit/kinematics.hpp"
#include "grfkit/metrics.hpp"
#include "grfkit/synth.hpp"
#include "helpers.hpp"

using namespace grfkit;
using namespace grfkit::synth;

namespace {

GaitConfig quick_config() {
    GaitConfig cfg;
    cfg.duration_s = 20.0;
    return cfg;
}

// Frames that disagree between two label sequences, over all channels.
int64_t disagreements(const ContactSequence& a, const ContactSequence& b) {
    int64_t n = 0;
    for (size_t i = 0; i < a.labels.size(); ++i) n += a.labels[i] != b.labels[i];
    return n;
}

int64_t transition_count(const ContactSequence& c) {
    int64_t n = 0;
    for (int ch = 0; ch < 4; ++ch)
        for (int64_t t = 1; t < c.frames(); ++t)
            n += c.labels[t * 4 + ch] != c.labels[(t - 1) * 4 + ch];
    return n;
}

}  // namespace

TEST_CASE("generated takes are valid and deterministic") {
    const GaitConfig cfg = quick_config();
    const Take a = generate_gait(cfg);
    const Take b = generate_gait(cfg);
    CHECK(validate_take(a).empty());
    CHECK(a.poses.positions == b.poses.positions);
    CHECK(a.vgrf->values == b.vgrf->values);
    CHECK(a.contacts->labels == b.contacts->labels);
    CHECK(a.local_motion->rotations == b.local_motion->rotations);
}

TEST_CASE("stance feet are pinned: clean footskate under 1 mm/s") {
    const Take take = generate_gait(quick_config());
    const double skate = metrics::footskate(take.poses, *take.contacts, take.skeleton);
    CHECK(skate < 1e-3);
}

TEST_CASE("swing frames carry no force and positive foot height") {
    const Take take = generate_gait(quick_config());
    const auto totals = grf::total_vgrf(*take.vgrf);
    const int64_t frames = take.poses.frames();
    int64_t checked = 0;
    for (int64_t t = 0; t < frames; ++t) {
        for (int foot = 0; foot < 2; ++foot) {
            if (take.contacts->at(t, foot, 0) || take.contacts->at(t, foot, 1)) continue;
            // Strictly force-free frames: mid-swing, away from label edges.
            bool edge = false;
            for (int64_t d = -3; d <= 3; ++d) {
                const int64_t k = std::clamp<int64_t>(t + d, 0, frames - 1);
                edge = edge || take.contacts->at(k, foot, 0) || take.contacts->at(k, foot, 1);
            }
            if (edge) continue;
            ++checked;
            CHECK(totals[t * 2 + foot] < 0.10);
            if (totals[t * 2 + foot] == 0.0) {
                const int ankle = take.skeleton.foot_joints.at(foot, 0);
                CHECK(take.poses.at(t, ankle)[1] > 0.0f);
            }
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("vGRF is nonnegative and integrates to about one body weight per cycle") {
    GaitConfig cfg = quick_config();
    cfg.duration_s = 24.0;
    const Take take = generate_gait(cfg);
    for (float v : take.vgrf->values) CHECK(v >= 0.f);
    // Average combined force over whole interior walking cycles.
    const auto totals = grf::total_vgrf(*take.vgrf);
    const int64_t cycle_frames = static_cast<int64_t>(cfg.cycle_s * cfg.rate_hz);
    const int64_t start = static_cast<int64_t>(1.1 * cfg.rate_hz);
    double mean = 0.0;
    for (int64_t t = start; t < start + 4 * cycle_frames; ++t)
        mean += totals[t * 2] + totals[t * 2 + 1];
    mean /= static_cast<double>(4 * cycle_frames);
    CHECK(mean > 0.8);
    CHECK(mean < 1.25);
}

TEST_CASE("closed loop: the contact function reproduces the construction schedule") {
    GaitConfig cfg = quick_config();
    cfg.duration_s = 30.0;
    const Take take = generate_gait(cfg);
    const auto derived = grf::contact_labels(*take.vgrf, take.layout, grf::ContactParams{});
    const int64_t diff = disagreements(*take.contacts, derived);
    const int64_t transitions = transition_count(*take.contacts);
    REQUIRE(transitions > 20);
    CHECK(diff <= 2 * transitions);
    const auto score = metrics::f1(derived, *take.contacts);
    CHECK(score.f1 >= 0.98);
}

TEST_CASE("per-cycle contact coverage matches the duty factor within a frame") {
    GaitConfig cfg;
    cfg.duration_s = 20.0;
    cfg.cycle_s = 1.2;
    cfg.duty_factor = 0.6;
    const Take take = generate_gait(cfg);
    const int64_t frames = take.poses.frames();
    const int64_t expected = static_cast<int64_t>(std::llround(0.72 * cfg.rate_hz));

    // Interior stance runs of (heel or toe). Runs merged with a standing
    // segment (walk boundaries) are far longer and are skipped; a systematic
    // schedule error of a few frames would still land inside the window and
    // trip the +-1 check.
    for (int foot = 0; foot < 2; ++foot) {
        std::vector<int64_t> runs;
        int64_t t = 0;
        while (t < frames) {
            const bool on = take.contacts->at(t, foot, 0) || take.contacts->at(t, foot, 1);
            if (!on) {
                ++t;
                continue;
            }
            int64_t end = t;
            while (end < frames &&
                   (take.contacts->at(end, foot, 0) || take.contacts->at(end, foot, 1)))
                ++end;
            if (std::abs((end - t) - expected) <= 4) runs.push_back(end - t);
            t = end;
        }
        REQUIRE(runs.size() >= 4);
        for (int64_t len : runs) CHECK(std::abs(len - expected) <= 1);
    }
}

TEST_CASE("schedule structure: heel leads, toe trails, both overlap mid-stance") {
    const Take take = generate_gait(quick_config());
    const int64_t frames = take.poses.frames();
    int64_t overlap = 0, heel_only = 0, toe_only = 0;
    for (int64_t t = 0; t < frames; ++t) {
        for (int foot = 0; foot < 2; ++foot) {
            const bool h = take.contacts->at(t, foot, 0), o = take.contacts->at(t, foot, 1);
            overlap += h && o;
            heel_only += h && !o;
            toe_only += !h && o;
        }
    }
    CHECK(overlap > 0);
    CHECK(heel_only > 0);
    CHECK(toe_only > 0);
}

TEST_CASE("blend ground truth shares the schedule but not the style") {
    GaitConfig cfg = quick_config();
    RngStream rng(17);
    const auto [a, b] = generate_blend_ground_truth(cfg, rng);
    CHECK(a.contacts->labels == b.contacts->labels);
    CHECK(a.vgrf->values == b.vgrf->values);

    REQUIRE(a.poses.frames() == b.poses.frames());
    double mean_dist = 0.0;
    for (int64_t t = 0; t < a.poses.frames(); ++t)
        for (int j = 0; j < a.poses.joints; ++j)
            mean_dist += (Vec3::from(a.poses.at(t, j)) - Vec3::from(b.poses.at(t, j))).norm();
    mean_dist /= double(a.poses.frames() * a.poses.joints);
    CHECK(mean_dist > 0.01);

    const auto ga = grf::contact_labels(*a.vgrf, a.layout, grf::ContactParams{});
    CHECK(metrics::f1(ga, *a.contacts).f1 >= 0.98);
}

TEST_CASE("randomized configs stay valid and vary") {
    const GaitConfig a = randomized_config(20.0, 1);
    const GaitConfig b = randomized_config(20.0, 2);
    CHECK_NOTHROW(a.validate());
    CHECK_NOTHROW(b.validate());
    CHECK(a.speed_mps != b.speed_mps);
    const Take take = generate_gait(a);
    CHECK(validate_take(take).empty());
}

TEST_CASE("config invariants are enforced") {
    GaitConfig cfg;
    SUBCASE("duration must cover two cycles") {
        cfg.duration_s = 1.0;
        CHECK_THROWS_AS(cfg.validate(), ValidationError);
    }
    SUBCASE("duty factor range") {
        cfg.duty_factor = 0.2;
        CHECK_THROWS_AS(cfg.validate(), ValidationError);
    }
    SUBCASE("stride must stay inside leg reach") {
        cfg.speed_mps = 3.0;
        cfg.cycle_s = 1.2;
        CHECK_THROWS_AS(cfg.validate(), ValidationError);
    }
}

TEST_CASE("jump markers produce a ballistic flight with zero force") {
    GaitConfig cfg = quick_config();
    cfg.jump_markers = true;
    const Take take = generate_gait(cfg);
    const auto totals = grf::total_vgrf(*take.vgrf);
    // First force-free gap after the take starts: the flight.
    int64_t flight_start = -1, flight_end = -1;
    for (int64_t t = 10; t < take.poses.frames(); ++t) {
        if (totals[t * 2] + totals[t * 2 + 1] < 1e-6) {
            if (flight_start < 0) flight_start = t;
            flight_end = t;
        } else if (flight_start >= 0) {
            break;
        }
    }
    REQUIRE(flight_start > 0);
    CHECK(flight_end - flight_start >= 20);  // ~0.29 s at 100 Hz
    const int64_t mid = (flight_start + flight_end) / 2;
    const int ankle = take.skeleton.foot_joints.left_ankle;
    CHECK(take.poses.at(mid, ankle)[1] > 0.03f);
}
