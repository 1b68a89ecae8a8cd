#pragma once

#include <cmath>

#include "grfkit/rng.hpp"
#include "grfkit/types.hpp"

namespace grfkit::augment {

// Linear basis over flattened joint offsets (3J), from an SVD of the source
// skeletons. singular_values hold per-direction standard deviations (raw
// singular values over sqrt(n-1)), so sampling with unit-normal weights
// reproduces the source variation.
struct SkeletonBasis {
    std::vector<double> mean;                     // 3J
    std::vector<std::vector<double>> components;  // K x 3J, orthonormal
    std::vector<double> singular_values;          // K, >= 0
    Skeleton reference;                           // names/topology/foot joints
};

struct AugmentConfig {
    double translation_range_m = 5.0;       // +- horizontal (x, z)
    double rotation_max_rad = 2.0 * M_PI;   // vertical-axis rotation, uniform [0, max)
    double scale_min = 0.9, scale_max = 1.1;
    double mirror_prob = 0.5;
    double weight_std_multiplier = 1.0;
    double joint_jitter_std_m = 0.01;
    double bone_rescale_min = 0.95, bone_rescale_max = 1.05;
    int window_frames = 240;
    int window_stride = 60;
    std::uint64_t seed = 0;

    void validate() const;
};

// Requires >= 2 skeletons with identical topology (parents and names).
SkeletonBasis build_skeleton_basis(const std::vector<Skeleton>& skeletons);

// offsets = mean + sum_k w_k * sigma_k * component_k with w_k ~ N(0,
// multiplier), then per-joint jitter and per-bone length rescale.
// Deterministic given the stream state.
Skeleton sample_skeleton(const SkeletonBasis& basis, const AugmentConfig& cfg, RngStream& rng);

struct WindowRef {
    int take = 0;
    int64_t start = 0;
};

// Windows of cfg.window_frames every cfg.window_stride frames, never spanning
// take boundaries. Takes shorter than one window are skipped and counted.
std::vector<WindowRef> make_windows(const std::vector<const Take*>& takes,
                                    const AugmentConfig& cfg, int* skipped = nullptr);

LocalMotion slice_motion(const LocalMotion& motion, int64_t start, int64_t frames);

struct AugmentedWindow {
    PoseSequence poses;
    bool mirrored = false;
};

// FK of the window's joint angles on the given skeleton, then one random
// vGRF-invariant transform (horizontal translation, vertical-axis rotation,
// uniform scale) and mirroring with cfg.mirror_prob. Targets are not touched
// here; a mirrored window requires the caller to swap target foot channels.
AugmentedWindow augment_window(const LocalMotion& window, const Skeleton& skeleton,
                               const AugmentConfig& cfg, RngStream& rng);

// Swap the foot axis of vGRF / contact windows (mirror counterpart).
void swap_feet(std::vector<float>& vgrf_values);
void swap_feet_labels(std::vector<std::uint8_t>& labels);

// Deterministic training window source. Augmented samples are a pure
// function of (seed, epoch, window index); with augmentation disabled the
// sample is the plain FK of the take's own skeleton and motion.
class WindowDataset {
public:
    WindowDataset(std::vector<const Take*> takes, AugmentConfig cfg, bool augmented);

    int64_t size() const { return static_cast<int64_t>(windows_.size()); }
    int window_frames() const { return cfg_.window_frames; }
    int skipped_takes() const { return skipped_; }
    const AugmentConfig& config() const { return cfg_; }
    // Foot joints of the (shared) skeleton topology, for foot-subset features.
    FootJoints foot_joints() const { return takes_.front()->skeleton.foot_joints; }

    struct Sample {
        PoseSequence poses;
        std::vector<float> vgrf;           // T*2*16
        std::vector<std::uint8_t> contacts;  // T*2*2
        bool mirrored = false;
    };

    Sample get(int64_t epoch, int64_t index) const;

private:
    std::vector<const Take*> takes_;
    AugmentConfig cfg_;
    bool augmented_;
    std::vector<WindowRef> windows_;
    SkeletonBasis basis_;
    int skipped_ = 0;
};

}  // namespace grfkit::augment
