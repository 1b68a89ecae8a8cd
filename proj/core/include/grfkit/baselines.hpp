#pragma once

#include "grfkit/types.hpp"

namespace grfkit::ot {

// Height/velocity thresholds of the heuristic detector. ground_y is the
// per-take ground height estimate used by the height test.
struct OtThresholds {
    double height_m = 0.05;
    double speed_mps = 0.25;
    double ground_y = 0.0;
};

struct FitConfig {
    double height_max_m = 0.30;
    double speed_max_mps = 2.0;
    int grid = 17;    // points per axis per level
    int levels = 3;   // level 0 plus refinements around the incumbent
};

// 1st percentile of the two ankle-joint heights.
double estimate_ground_y(const PoseSequence& poses, const Skeleton& skeleton);

// label(t, foot, location) = (height - ground_y) < height_m AND
// |central-difference velocity| < speed_mps, evaluated at the ankle joint for
// heel and the toe joint for toe.
ContactSequence apply_ot(const PoseSequence& poses, const Skeleton& skeleton,
                         const OtThresholds& thresholds);

// Recursive grid search maximizing micro-F1 over the training takes: a
// grid x grid sweep over [0, height_max] x [0, speed_max], then repeated
// re-gridding over the +-1-cell neighborhood of the incumbent. Ties break
// toward (height, speed) lexicographically smaller. ground_y is estimated per
// take; the returned thresholds carry ground_y = 0.
struct FitResult {
    OtThresholds thresholds;
    double f1 = 0.0;
    std::vector<double> f1_per_level;  // incumbent F1 after each level
    bool degenerate = false;           // no positive ground-truth labels
};

FitResult fit_ot(const std::vector<const Take*>& takes, const FitConfig& cfg = {});

}  // namespace grfkit::ot
