#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>

#include "grfkit/geometry.hpp"
#include "grfkit/rng.hpp"
#include "grfkit/synth.hpp"
#include "grfkit/types.hpp"

namespace testutil {

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("grfkit_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

// Minimal three-joint chain for kinematics tests.
inline grfkit::Skeleton tiny_chain() {
    grfkit::Skeleton s;
    s.parent = {-1, 0, 1};
    s.offset = {{{0.f, 0.f, 0.f}}, {{0.f, -0.4f, 0.f}}, {{0.f, -0.35f, 0.f}}};
    s.names = {"Root", "Mid", "Tip"};
    s.foot_joints = {0, 1, 2, 0};  // unused in most tests
    return s;
}

// Random unit quaternion.
inline grfkit::Quat random_quat(grfkit::RngStream& rng) {
    grfkit::Quat q{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    return q.normalized();
}

// Small synthetic take for container round trips: random but valid payloads.
inline grfkit::Take random_take(std::uint64_t seed, int64_t frames = 10) {
    grfkit::RngStream rng(seed);
    grfkit::Take take;
    take.skeleton = grfkit::synth::make_humanoid_skeleton(1.75);
    const int joints = take.skeleton.joint_count();
    take.meta = {72.5f, 1.75f, "test-subject"};

    grfkit::LocalMotion motion;
    motion.joints = joints;
    motion.rate_hz = 100.f;
    motion.rotations.resize(frames * joints * 4);
    motion.root_translation.resize(frames * 3);
    for (int64_t t = 0; t < frames; ++t) {
        for (int d = 0; d < 3; ++d)
            motion.root(t)[d] = static_cast<float>(rng.uniform(-1.0, 1.0));
        for (int j = 0; j < joints; ++j) random_quat(rng).store(motion.quat(t, j));
    }
    take.local_motion = motion;

    take.poses.joints = joints;
    take.poses.rate_hz = 100.f;
    take.poses.positions.resize(frames * joints * 3);
    for (auto& p : take.poses.positions) p = static_cast<float>(rng.uniform(-2.0, 2.0));

    grfkit::VgrfSequence vgrf;
    vgrf.rate_hz = 100.f;
    vgrf.values.resize(frames * 2 * grfkit::kCellsPerFoot);
    for (auto& v : vgrf.values) v = static_cast<float>(rng.uniform(0.0, 0.2));
    take.vgrf = vgrf;

    grfkit::PressureSequence pressure;
    pressure.rate_hz = 100.f;
    pressure.values.resize(frames * 2 * grfkit::kCellsPerFoot);
    for (auto& v : pressure.values) v = static_cast<float>(rng.uniform(0.0, 3.0));
    take.pressure = pressure;

    grfkit::ContactSequence contacts;
    contacts.rate_hz = 100.f;
    contacts.labels.resize(frames * 4);
    for (auto& c : contacts.labels) c = rng.bernoulli(0.5) ? 1 : 0;
    take.contacts = contacts;

    grfkit::ImuSequence imu;
    imu.rate_hz = 100.f;
    imu.values.resize(frames * 6);
    for (auto& v : imu.values) v = static_cast<float>(rng.uniform(-20.0, 20.0));
    take.imu_accel = imu;

    take.synchronized = true;
    return take;
}

}  // namespace testutil
