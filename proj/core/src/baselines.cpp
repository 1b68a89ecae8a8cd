#include "grfkit/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "grfkit/kinematics.hpp"
#include "grfkit/metrics.hpp"

namespace grfkit::ot {

namespace {

// Precomputed per-channel height/speed features of one take.
struct TakeFeatures {
    std::vector<float> height;  // T*4, relative to ground estimate
    std::vector<float> speed;   // T*4
    const ContactSequence* truth = nullptr;
    int64_t frames = 0;
};

TakeFeatures compute_features(const Take& take) {
    const auto& poses = take.poses;
    const int64_t frames = poses.frames();
    if (frames < 3) throw ValidationError("apply_ot: needs at least 3 frames for velocities");
    const auto vel = kin::joint_velocities(poses);
    const double ground = estimate_ground_y(poses, take.skeleton);

    TakeFeatures f;
    f.frames = frames;
    f.height.resize(frames * 4);
    f.speed.resize(frames * 4);
    for (int64_t t = 0; t < frames; ++t) {
        for (int ch = 0; ch < 4; ++ch) {
            const int j = take.skeleton.foot_joints.all()[ch];
            const float* p = poses.at(t, j);
            const float* v = &vel[(t * poses.joints + j) * 3];
            f.height[t * 4 + ch] = static_cast<float>(p[1] - ground);
            f.speed[t * 4 + ch] =
                std::sqrt(float(v[0]) * v[0] + float(v[1]) * v[1] + float(v[2]) * v[2]);
        }
    }
    return f;
}

metrics::ConfusionCounts evaluate_point(const std::vector<TakeFeatures>& features,
                                        double height_m, double speed_mps) {
    metrics::ConfusionCounts c;
    for (const auto& f : features) {
        for (int64_t i = 0; i < f.frames * 4; ++i) {
            const bool p = f.height[i] < height_m && f.speed[i] < speed_mps;
            const bool t = f.truth->labels[i] != 0;
            c.tp += p && t;
            c.fp += p && !t;
            c.fn += !p && t;
        }
    }
    return c;
}

}  // namespace

double estimate_ground_y(const PoseSequence& poses, const Skeleton& skeleton) {
    const int64_t frames = poses.frames();
    std::vector<float> heights;
    heights.reserve(frames * 2);
    for (int64_t t = 0; t < frames; ++t) {
        heights.push_back(poses.at(t, skeleton.foot_joints.left_ankle)[1]);
        heights.push_back(poses.at(t, skeleton.foot_joints.right_ankle)[1]);
    }
    const size_t k = heights.size() / 100;  // 1st percentile
    std::nth_element(heights.begin(), heights.begin() + k, heights.end());
    return heights[k];
}

ContactSequence apply_ot(const PoseSequence& poses, const Skeleton& skeleton,
                         const OtThresholds& thresholds) {
    const int64_t frames = poses.frames();
    if (frames < 3) throw ValidationError("apply_ot: needs at least 3 frames for velocities");
    const auto vel = kin::joint_velocities(poses);

    ContactSequence out;
    out.rate_hz = poses.rate_hz;
    out.labels.assign(frames * 4, 0);
    for (int64_t t = 0; t < frames; ++t) {
        for (int foot = 0; foot < 2; ++foot) {
            for (int loc = 0; loc < 2; ++loc) {
                const int j = skeleton.foot_joints.at(foot, loc);
                const float* p = poses.at(t, j);
                const float* v = &vel[(t * poses.joints + j) * 3];
                const double speed =
                    std::sqrt(double(v[0]) * v[0] + double(v[1]) * v[1] + double(v[2]) * v[2]);
                const bool on = (p[1] - thresholds.ground_y) < thresholds.height_m &&
                                speed < thresholds.speed_mps;
                out.at(t, foot, loc) = on ? 1 : 0;
            }
        }
    }
    return out;
}

FitResult fit_ot(const std::vector<const Take*>& takes, const FitConfig& cfg) {
    if (takes.empty()) throw ValidationError("fit_ot: empty training set");

    std::vector<TakeFeatures> features;
    features.reserve(takes.size());
    bool any_positive = false;
    for (const Take* take : takes) {
        if (!take->contacts)
            throw ValidationError("fit_ot: training takes need ground-truth contacts");
        features.push_back(compute_features(*take));
        features.back().truth = &*take->contacts;
        for (auto v : take->contacts->labels) any_positive |= v != 0;
    }

    FitResult result;
    if (!any_positive) {
        // Tie-break toward smaller thresholds makes (0, 0) the argmax.
        result.thresholds = {0.0, 0.0, 0.0};
        result.f1 = 1.0;
        result.degenerate = true;
        result.f1_per_level.assign(cfg.levels, 1.0);
        return result;
    }

    double h_lo = 0.0, h_hi = cfg.height_max_m;
    double s_lo = 0.0, s_hi = cfg.speed_max_mps;
    double best_h = 0.0, best_s = 0.0, best_f1 = -1.0;

    for (int level = 0; level < cfg.levels; ++level) {
        const double h_step = (h_hi - h_lo) / (cfg.grid - 1);
        const double s_step = (s_hi - s_lo) / (cfg.grid - 1);
        for (int i = 0; i < cfg.grid; ++i) {
            for (int k = 0; k < cfg.grid; ++k) {
                const double h = h_lo + h_step * i;
                const double s = s_lo + s_step * k;
                const double f1 = metrics::f1_from_counts(evaluate_point(features, h, s)).f1;
                const bool better =
                    f1 > best_f1 + 1e-15 ||
                    (std::abs(f1 - best_f1) <= 1e-15 &&
                     (h < best_h - 1e-15 || (std::abs(h - best_h) <= 1e-15 && s < best_s - 1e-15)));
                if (better) {
                    best_f1 = f1;
                    best_h = h;
                    best_s = s;
                }
            }
        }
        result.f1_per_level.push_back(best_f1);
        // Re-grid over the +-1-cell neighborhood of the incumbent.
        h_lo = std::max(0.0, best_h - h_step);
        h_hi = best_h + h_step;
        s_lo = std::max(0.0, best_s - s_step);
        s_hi = best_s + s_step;
    }

    result.thresholds = {best_h, best_s, 0.0};
    result.f1 = best_f1;
    return result;
}

}  // namespace grfkit::ot
