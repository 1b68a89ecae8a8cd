#include "grfkit/kinematics.hpp"

#include <cmath>
#include <map>

namespace grfkit::kin {

namespace {

void check_motion(const Skeleton& skeleton, const LocalMotion& motion) {
    if (motion.joints != skeleton.joint_count())
        throw ValidationError("forward_kinematics: motion has " + std::to_string(motion.joints) +
                              " joints, skeleton has " +
                              std::to_string(skeleton.joint_count()));
}

}  // namespace

PoseSequence forward_kinematics(const Skeleton& skeleton, const LocalMotion& motion) {
    check_motion(skeleton, motion);
    const int64_t frames = motion.frames();
    const int joints = skeleton.joint_count();

    PoseSequence out;
    out.joints = joints;
    out.rate_hz = motion.rate_hz;
    out.positions.resize(static_cast<size_t>(frames) * joints * 3);

    std::vector<Quat> gq(joints);
    std::vector<Vec3> gp(joints);
    for (int64_t t = 0; t < frames; ++t) {
        for (int j = 0; j < joints; ++j) {
            const Quat local = Quat::from(motion.quat(t, j));
            const int p = skeleton.parent[j];
            if (p < 0) {
                gq[j] = local;
                gp[j] = Vec3::from(motion.root(t));
            } else {
                gq[j] = gq[p] * local;
                gp[j] = gp[p] + gq[p].rotate(Vec3{skeleton.offset[j][0], skeleton.offset[j][1],
                                                  skeleton.offset[j][2]});
            }
            gp[j].store(out.at(t, j));
        }
    }
    return out;
}

std::vector<float> global_rotations(const Skeleton& skeleton, const LocalMotion& motion) {
    check_motion(skeleton, motion);
    const int64_t frames = motion.frames();
    const int joints = skeleton.joint_count();
    std::vector<float> out(static_cast<size_t>(frames) * joints * 4);
    std::vector<Quat> gq(joints);
    for (int64_t t = 0; t < frames; ++t) {
        for (int j = 0; j < joints; ++j) {
            const Quat local = Quat::from(motion.quat(t, j));
            const int p = skeleton.parent[j];
            gq[j] = p < 0 ? local : gq[p] * local;
            gq[j].store(&out[(t * joints + j) * 4]);
        }
    }
    return out;
}

std::vector<double> finite_difference(const std::vector<double>& series, int64_t frames,
                                      int width, int order, double rate_hz) {
    if (frames < 3) throw ValidationError("finite_difference: needs at least 3 frames");
    if (order != 1 && order != 2) throw ValidationError("finite_difference: order must be 1 or 2");
    std::vector<double> out(series.size());
    const double r = rate_hz;
    auto x = [&](int64_t t, int d) { return series[t * width + d]; };
    for (int d = 0; d < width; ++d) {
        if (order == 1) {
            out[0 * width + d] = (x(1, d) - x(0, d)) * r;
            out[(frames - 1) * width + d] = (x(frames - 1, d) - x(frames - 2, d)) * r;
            for (int64_t t = 1; t < frames - 1; ++t)
                out[t * width + d] = (x(t + 1, d) - x(t - 1, d)) * r * 0.5;
        } else {
            out[0 * width + d] = (x(2, d) - 2.0 * x(1, d) + x(0, d)) * r * r;
            out[(frames - 1) * width + d] =
                (x(frames - 1, d) - 2.0 * x(frames - 2, d) + x(frames - 3, d)) * r * r;
            for (int64_t t = 1; t < frames - 1; ++t)
                out[t * width + d] = (x(t + 1, d) - 2.0 * x(t, d) + x(t - 1, d)) * r * r;
        }
    }
    return out;
}

std::vector<float> joint_velocities(const PoseSequence& poses) {
    const int64_t frames = poses.frames();
    const int width = poses.joints * 3;
    std::vector<double> series(poses.positions.begin(), poses.positions.end());
    const auto vel = finite_difference(series, frames, width, 1, poses.rate_hz);
    return std::vector<float>(vel.begin(), vel.end());
}

std::vector<float> resample_positions(const std::vector<float>& series, int64_t frames,
                                      int width, double src_hz, double dst_hz) {
    if (!(src_hz > 0.0) || !(dst_hz > 0.0))
        throw ValidationError("resample: rates must be positive");
    if (src_hz == dst_hz) return series;
    if (frames < 2) throw ValidationError("resample: needs at least 2 frames when rates differ");

    const int64_t out_frames =
        static_cast<int64_t>(std::floor(static_cast<double>(frames - 1) * dst_hz / src_hz)) + 1;
    std::vector<float> out(static_cast<size_t>(out_frames) * width);
    for (int64_t k = 0; k < out_frames; ++k) {
        const double u = static_cast<double>(k) * src_hz / dst_hz;
        const int64_t lo = std::min<int64_t>(static_cast<int64_t>(u), frames - 1);
        const int64_t hi = std::min<int64_t>(lo + 1, frames - 1);
        const double f = u - static_cast<double>(lo);
        for (int d = 0; d < width; ++d) {
            const double a = series[lo * width + d];
            const double b = series[hi * width + d];
            out[k * width + d] = static_cast<float>(a + (b - a) * f);
        }
    }
    return out;
}

std::vector<float> resample_rotations(const std::vector<float>& quats, int64_t frames,
                                      int joints, double src_hz, double dst_hz) {
    if (!(src_hz > 0.0) || !(dst_hz > 0.0))
        throw ValidationError("resample: rates must be positive");
    for (size_t i = 0; i + 3 < quats.size(); i += 4) {
        const double n = std::sqrt(double(quats[i]) * quats[i] + double(quats[i + 1]) * quats[i + 1] +
                                   double(quats[i + 2]) * quats[i + 2] +
                                   double(quats[i + 3]) * quats[i + 3]);
        if (std::abs(n - 1.0) > 1e-5)
            throw ValidationError("resample_rotations: input quaternions must be unit norm");
    }
    if (src_hz == dst_hz) return quats;
    if (frames < 2) throw ValidationError("resample: needs at least 2 frames when rates differ");

    const int64_t out_frames =
        static_cast<int64_t>(std::floor(static_cast<double>(frames - 1) * dst_hz / src_hz)) + 1;
    std::vector<float> out(static_cast<size_t>(out_frames) * joints * 4);
    for (int64_t k = 0; k < out_frames; ++k) {
        const double u = static_cast<double>(k) * src_hz / dst_hz;
        const int64_t lo = std::min<int64_t>(static_cast<int64_t>(u), frames - 1);
        const int64_t hi = std::min<int64_t>(lo + 1, frames - 1);
        const double f = u - static_cast<double>(lo);
        for (int j = 0; j < joints; ++j) {
            const Quat a = Quat::from(&quats[(lo * joints + j) * 4]);
            const Quat b = Quat::from(&quats[(hi * joints + j) * 4]);
            Quat::slerp(a, b, f).store(&out[(k * joints + j) * 4]);
        }
    }
    return out;
}

LocalMotion resample_motion(const LocalMotion& motion, double dst_hz) {
    LocalMotion out;
    out.joints = motion.joints;
    out.rate_hz = static_cast<float>(dst_hz);
    out.rotations =
        resample_rotations(motion.rotations, motion.frames(), motion.joints, motion.rate_hz, dst_hz);
    out.root_translation =
        resample_positions(motion.root_translation, motion.frames(), 3, motion.rate_hz, dst_hz);
    return out;
}

PoseSequence resample_poses(const PoseSequence& poses, double dst_hz) {
    PoseSequence out;
    out.joints = poses.joints;
    out.rate_hz = static_cast<float>(dst_hz);
    out.positions =
        resample_positions(poses.positions, poses.frames(), poses.joints * 3, poses.rate_hz, dst_hz);
    return out;
}

PoseSequence apply_rigid(const PoseSequence& poses, const RigidTransform& xf) {
    if (!(xf.scale > 0.0)) throw ValidationError("apply_rigid: scale must be positive");
    PoseSequence out = poses;
    const int64_t n = static_cast<int64_t>(poses.positions.size()) / 3;
    for (int64_t i = 0; i < n; ++i) {
        const Vec3 p = Vec3::from(&poses.positions[i * 3]);
        (xf.rotation.rotate(p) * xf.scale + xf.translation).store(&out.positions[i * 3]);
    }
    return out;
}

std::vector<int> mirror_pairing(const Skeleton& skeleton) {
    const int joints = skeleton.joint_count();
    std::map<std::string, int> by_name;
    for (int j = 0; j < joints; ++j) by_name[skeleton.names[j]] = j;

    std::vector<int> pair(joints);
    for (int j = 0; j < joints; ++j) {
        const std::string& n = skeleton.names[j];
        std::string other;
        if (n.rfind("Left", 0) == 0)
            other = "Right" + n.substr(4);
        else if (n.rfind("Right", 0) == 0)
            other = "Left" + n.substr(5);
        if (other.empty()) {
            pair[j] = j;
        } else {
            auto it = by_name.find(other);
            if (it == by_name.end())
                throw ValidationError("mirror: no counterpart joint for '" + n + "'");
            pair[j] = it->second;
        }
    }
    return pair;
}

PoseSequence mirror(const PoseSequence& poses, const Skeleton& skeleton) {
    const auto pair = mirror_pairing(skeleton);
    PoseSequence out = poses;
    const int64_t frames = poses.frames();
    for (int64_t t = 0; t < frames; ++t) {
        for (int j = 0; j < poses.joints; ++j) {
            const float* src = poses.at(t, j);
            float* dst = out.at(t, pair[j]);
            dst[0] = -src[0];
            dst[1] = src[1];
            dst[2] = src[2];
        }
    }
    return out;
}

}  // namespace grfkit::kin
