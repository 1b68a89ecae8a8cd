#pragma once

#include "grfkit/geometry.hpp"
#include "grfkit/types.hpp"

namespace grfkit::kin {

// Similarity transform applied to pose sequences. When used as training
// augmentation the rotation is restricted to the vertical axis; the functions
// here accept any unit quaternion.
struct RigidTransform {
    Quat rotation = Quat::identity();
    Vec3 translation;
    double scale = 1.0;
};

// Recursive pose composition: the root takes root_translation and its local
// rotation; child j sits at parent_position + parent_global_rotation *
// offset[j], with global rotations composed parent-first.
PoseSequence forward_kinematics(const Skeleton& skeleton, const LocalMotion& motion);

// Per-frame global joint rotations (same composition as forward_kinematics);
// T*J*4 layout. Used by the synthetic generator and tests.
std::vector<float> global_rotations(const Skeleton& skeleton, const LocalMotion& motion);

// Central differences in the interior, one-sided at the boundaries; output
// length equals input length. order 1 -> d/dt, order 2 -> d^2/dt^2.
std::vector<double> finite_difference(const std::vector<double>& series, int64_t frames,
                                      int width, int order, double rate_hz);

// Convenience: per-joint velocities of a pose sequence, T*J*3, m/s.
std::vector<float> joint_velocities(const PoseSequence& poses);

// Linear interpolation at target timestamps k/dst_hz; output length
// floor((T-1)*dst/src) + 1, first sample preserved, never extrapolates.
std::vector<float> resample_positions(const std::vector<float>& series, int64_t frames,
                                      int width, double src_hz, double dst_hz);

// Per-joint slerp at target timestamps; antipodal pairs take the shortest
// arc; outputs are unit quaternions. quats is T*J*4.
std::vector<float> resample_rotations(const std::vector<float>& quats, int64_t frames,
                                      int joints, double src_hz, double dst_hz);

LocalMotion resample_motion(const LocalMotion& motion, double dst_hz);
PoseSequence resample_poses(const PoseSequence& poses, double dst_hz);

// p' = scale * (R p) + t for every joint position; rate unchanged.
PoseSequence apply_rigid(const PoseSequence& poses, const RigidTransform& xf);

// Left-right mirroring: x negated, left/right joint channels swapped. The
// pairing is derived from the "Left*"/"Right*" naming convention; an
// unmatched side is a hard error. Involution.
PoseSequence mirror(const PoseSequence& poses, const Skeleton& skeleton);

// Index map used by mirror(); entry j is the mirrored joint for j.
std::vector<int> mirror_pairing(const Skeleton& skeleton);

}  // namespace grfkit::kin
