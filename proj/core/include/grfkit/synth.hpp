#pragma once

#include "grfkit/rng.hpp"
#include "grfkit/types.hpp"

namespace grfkit::synth {

// Procedural gait/jump generator. Produces takes whose poses, per-cell vGRFs,
// and contact labels are mutually consistent by construction: stance-foot
// joints are pinned at ground height during their contact phases, per-foot
// force follows a smooth double-hump loading profile transferred heel to toe,
// and the emitted labels are the threshold crossings of the same continuous
// force model that generates the samples. Not biomechanically validated.
struct GaitConfig {
    double duration_s = 60.0;
    double rate_hz = 100.0;
    double speed_mps = 0.9;
    double cycle_s = 1.15;
    double duty_factor = 0.60;  // stance fraction of the cycle
    double weight_kg = 75.0;
    double height_m = 1.75;     // skeleton scale
    bool jump_markers = false;  // in-place double-leg jumps at both ends
    std::uint64_t seed = 0;

    // Style parameters (vary per subject/seed; contact schedule unaffected).
    double lift_m = 0.05;        // swing foot clearance
    double sway_m = 0.015;       // lateral pelvis sway
    double bob_m = 0.025;        // vertical pelvis bob
    double arm_swing_rad = 0.25;
    int walk_cycles_per_segment = 4;  // out-and-back leg length

    void validate() const;
};

// 23-joint humanoid with "Left*"/"Right*" naming, Y-up, toes along +z.
Skeleton make_humanoid_skeleton(double height_m);

// Deterministic per config. The take carries local motion, poses, per-cell
// vGRF, pressure, insole IMU acceleration, and ground-truth contacts, all
// synchronized at cfg.rate_hz.
Take generate_gait(const GaitConfig& cfg);

// Style variation derived from a seed (speed, cadence, duty, subject size).
GaitConfig randomized_config(double duration_s, std::uint64_t seed, bool jump_markers = false);

// Two takes sharing one contact schedule (identical labels and vGRF) but
// different movement styles, for blending experiments.
std::pair<Take, Take> generate_blend_ground_truth(const GaitConfig& cfg, RngStream& rng);

}  // namespace grfkit::synth
