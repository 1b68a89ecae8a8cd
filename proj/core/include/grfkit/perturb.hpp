#pragma once

#include "grfkit/rng.hpp"
#include "grfkit/types.hpp"

namespace grfkit::perturb {

// i.i.d. zero-mean Gaussian noise with std sigma_m on every coordinate.
PoseSequence add_noise(const PoseSequence& poses, double sigma_m, RngStream& rng);

struct BlendPair {
    int take_a = 0, take_b = 0;
    int64_t start_a = 0, start_b = 0;
    int foot = 0;  // foot whose contact pattern matches exactly
};

// Pairs of distinct windows whose contact pattern matches exactly on the left
// foot or on the right foot (both locations, all window frames). Candidate
// window starts are taken every `stride` frames; matching is exact byte
// equality, re-verified before returning. Windows whose matched-foot pattern
// is constant are skipped (no phase information). Result is canonically
// ordered.
std::vector<BlendPair> mine_blend_pairs(const std::vector<const Take*>& takes,
                                        int window_frames = 80, int stride = 10);

// Per-frame mix: root translation lerped, joint rotations slerped with
// weights[t] in [0, 1].
LocalMotion blend(const LocalMotion& a, const LocalMotion& b, const std::vector<double>& weights);

// Default dynamic blending schedule: smoothstep 0 -> 1 over the window.
std::vector<double> smoothstep_weights(int64_t frames);
std::vector<double> linear_weights(int64_t frames);

// Shift a motion's root so its first frame sits at the horizontal origin.
// Blending corpora re-root both windows first so the blend mixes comparable
// trajectories rather than take-separation offsets.
LocalMotion reroot_horizontal(const LocalMotion& motion);

}  // namespace grfkit::perturb
