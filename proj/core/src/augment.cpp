#include "grfkit/augment.hpp"

#include <cmath>
#include <cstring>

#include <Eigen/Dense>

#include "grfkit/kinematics.hpp"

namespace grfkit::augment {

void AugmentConfig::validate() const {
    if (window_frames < 1) throw ValidationError("augment config: window_frames must be >= 1");
    if (window_stride < 1) throw ValidationError("augment config: window_stride must be >= 1");
    if (!(scale_max >= scale_min) || !(scale_min > 0.0))
        throw ValidationError("augment config: bad scale range");
    if (!(bone_rescale_max >= bone_rescale_min) || !(bone_rescale_min > 0.0))
        throw ValidationError("augment config: bad bone rescale range");
    if (mirror_prob < 0.0 || mirror_prob > 1.0)
        throw ValidationError("augment config: mirror_prob must be in [0, 1]");
}

SkeletonBasis build_skeleton_basis(const std::vector<Skeleton>& skeletons) {
    if (skeletons.size() < 2)
        throw ValidationError("build_skeleton_basis: needs at least two skeletons");
    const Skeleton& ref = skeletons.front();
    const int joints = ref.joint_count();
    for (const auto& s : skeletons)
        if (s.parent != ref.parent || s.names != ref.names)
            throw ValidationError("build_skeleton_basis: topology mismatch");

    const int n = static_cast<int>(skeletons.size());
    const int d = joints * 3;
    Eigen::MatrixXd data(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < joints; ++j)
            for (int k = 0; k < 3; ++k) data(i, j * 3 + k) = skeletons[i].offset[j][k];

    SkeletonBasis basis;
    basis.reference = ref;
    Eigen::RowVectorXd mean = data.colwise().mean();
    basis.mean.assign(mean.data(), mean.data() + d);
    data.rowwise() -= mean;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(data, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const auto& v = svd.matrixV();
    const double denom = std::sqrt(static_cast<double>(std::max(1, n - 1)));
    for (int k = 0; k < sv.size(); ++k) {
        basis.singular_values.push_back(sv(k) / denom);
        std::vector<double> comp(d);
        for (int i = 0; i < d; ++i) comp[i] = v(i, k);
        basis.components.push_back(std::move(comp));
    }
    return basis;
}

Skeleton sample_skeleton(const SkeletonBasis& basis, const AugmentConfig& cfg, RngStream& rng) {
    cfg.validate();
    const int joints = basis.reference.joint_count();
    std::vector<double> offsets = basis.mean;
    for (size_t k = 0; k < basis.components.size(); ++k) {
        const double w = rng.normal() * cfg.weight_std_multiplier * basis.singular_values[k];
        const auto& comp = basis.components[k];
        for (size_t i = 0; i < offsets.size(); ++i) offsets[i] += w * comp[i];
    }
    // Morphology edits: per-joint offset jitter, then per-bone length rescale.
    for (auto& o : offsets) o += rng.normal() * cfg.joint_jitter_std_m;
    Skeleton out = basis.reference;
    for (int j = 0; j < joints; ++j) {
        const double rescale = rng.uniform(cfg.bone_rescale_min, cfg.bone_rescale_max);
        for (int k = 0; k < 3; ++k)
            out.offset[j][k] = static_cast<float>(offsets[j * 3 + k] * rescale);
    }
    return out;
}

std::vector<WindowRef> make_windows(const std::vector<const Take*>& takes,
                                    const AugmentConfig& cfg, int* skipped) {
    cfg.validate();
    std::vector<WindowRef> windows;
    int skip_count = 0;
    for (size_t i = 0; i < takes.size(); ++i) {
        const Take* take = takes[i];
        if (!take->local_motion)
            throw ValidationError("make_windows: takes must carry local motion");
        const int64_t frames = take->local_motion->frames();
        if (frames < cfg.window_frames) {
            ++skip_count;
            continue;
        }
        for (int64_t start = 0; start + cfg.window_frames <= frames; start += cfg.window_stride)
            windows.push_back({static_cast<int>(i), start});
    }
    if (skipped) *skipped = skip_count;
    return windows;
}

LocalMotion slice_motion(const LocalMotion& motion, int64_t start, int64_t frames) {
    if (start < 0 || start + frames > motion.frames())
        throw ValidationError("slice_motion: window out of range");
    LocalMotion out;
    out.joints = motion.joints;
    out.rate_hz = motion.rate_hz;
    out.rotations.assign(motion.rotations.begin() + start * motion.joints * 4,
                         motion.rotations.begin() + (start + frames) * motion.joints * 4);
    out.root_translation.assign(motion.root_translation.begin() + start * 3,
                                motion.root_translation.begin() + (start + frames) * 3);
    return out;
}

AugmentedWindow augment_window(const LocalMotion& window, const Skeleton& skeleton,
                               const AugmentConfig& cfg, RngStream& rng) {
    AugmentedWindow out;
    out.poses = kin::forward_kinematics(skeleton, window);

    kin::RigidTransform xf;
    xf.translation = Vec3{rng.uniform(-cfg.translation_range_m, cfg.translation_range_m), 0.0,
                          rng.uniform(-cfg.translation_range_m, cfg.translation_range_m)};
    xf.rotation = Quat::axis_angle(Vec3{0, 1, 0},
                                   cfg.rotation_max_rad > 0.0
                                       ? rng.uniform(0.0, cfg.rotation_max_rad)
                                       : 0.0);
    xf.scale = rng.uniform(cfg.scale_min, cfg.scale_max);
    out.poses = kin::apply_rigid(out.poses, xf);

    if (rng.bernoulli(cfg.mirror_prob)) {
        out.poses = kin::mirror(out.poses, skeleton);
        out.mirrored = true;
    }
    return out;
}

void swap_feet(std::vector<float>& vgrf_values) {
    const int64_t frames = static_cast<int64_t>(vgrf_values.size()) / (2 * kCellsPerFoot);
    for (int64_t t = 0; t < frames; ++t)
        for (int c = 0; c < kCellsPerFoot; ++c)
            std::swap(vgrf_values[(t * 2 + 0) * kCellsPerFoot + c],
                      vgrf_values[(t * 2 + 1) * kCellsPerFoot + c]);
}

void swap_feet_labels(std::vector<std::uint8_t>& labels) {
    const int64_t frames = static_cast<int64_t>(labels.size()) / 4;
    for (int64_t t = 0; t < frames; ++t)
        for (int loc = 0; loc < 2; ++loc)
            std::swap(labels[(t * 2 + 0) * 2 + loc], labels[(t * 2 + 1) * 2 + loc]);
}

WindowDataset::WindowDataset(std::vector<const Take*> takes, AugmentConfig cfg, bool augmented)
    : takes_(std::move(takes)), cfg_(cfg), augmented_(augmented) {
    cfg_.validate();
    windows_ = make_windows(takes_, cfg_, &skipped_);
    for (const Take* take : takes_) {
        if (!take->vgrf || !take->contacts)
            throw ValidationError("dataset takes need vgrf and contact ground truth");
        if (!take->synchronized)
            throw ValidationError("dataset takes must be synchronized");
    }
    if (augmented_) {
        std::vector<Skeleton> skeletons;
        skeletons.reserve(takes_.size());
        for (const Take* take : takes_) skeletons.push_back(take->skeleton);
        if (skeletons.size() == 1) skeletons.push_back(skeletons.front());
        basis_ = build_skeleton_basis(skeletons);
    }
}

WindowDataset::Sample WindowDataset::get(int64_t epoch, int64_t index) const {
    const WindowRef& ref = windows_.at(static_cast<size_t>(index));
    const Take& take = *takes_[ref.take];
    const int64_t frames = cfg_.window_frames;
    const LocalMotion window = slice_motion(*take.local_motion, ref.start, frames);

    Sample sample;
    sample.vgrf.assign(take.vgrf->values.begin() + ref.start * 2 * kCellsPerFoot,
                       take.vgrf->values.begin() + (ref.start + frames) * 2 * kCellsPerFoot);
    sample.contacts.assign(take.contacts->labels.begin() + ref.start * 4,
                           take.contacts->labels.begin() + (ref.start + frames) * 4);

    if (!augmented_) {
        sample.poses = kin::forward_kinematics(take.skeleton, window);
        return sample;
    }
    RngStream rng = RngStream::keyed(cfg_.seed, static_cast<std::uint64_t>(epoch),
                                     static_cast<std::uint64_t>(index));
    const Skeleton skeleton = sample_skeleton(basis_, cfg_, rng);
    auto augmented = augment_window(window, skeleton, cfg_, rng);
    sample.poses = std::move(augmented.poses);
    sample.mirrored = augmented.mirrored;
    if (sample.mirrored) {
        swap_feet(sample.vgrf);
        swap_feet_labels(sample.contacts);
    }
    return sample;
}

}  // namespace grfkit::augment
