#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace grfkit {

// Thrown when data violates a documented invariant (bad shapes, non-finite
// payloads, invalid configs). Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thrown on filesystem / format failures. Maps to CLI exit code 2.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kGravity = 9.81;  // m/s^2
inline constexpr int kCellsPerFoot = 16;
inline constexpr int kDefaultJoints = 23;

// Indices into Skeleton joints for the four contact-bearing joints.
// Order everywhere: (left,ankle) (left,toe) (right,ankle) (right,toe).
struct FootJoints {
    int left_ankle = -1;
    int left_toe = -1;
    int right_ankle = -1;
    int right_toe = -1;

    std::array<int, 4> all() const { return {left_ankle, left_toe, right_ankle, right_toe}; }
    // joint for (foot, location) with foot 0=L 1=R, location 0=heel 1=toe
    int at(int foot, int location) const { return all()[foot * 2 + location]; }
};

struct Skeleton {
    std::vector<int> parent;                    // parent[i] < i; root has -1
    std::vector<std::array<float, 3>> offset;   // meters, translation from parent
    std::vector<std::string> names;
    FootJoints foot_joints;

    int joint_count() const { return static_cast<int>(parent.size()); }
};

// Joint-angle representation: unit quaternions (w,x,y,z) local to parent.
struct LocalMotion {
    std::vector<float> root_translation;  // T*3, meters
    std::vector<float> rotations;         // T*J*4
    int joints = 0;
    float rate_hz = 100.f;

    int64_t frames() const {
        return joints > 0 ? static_cast<int64_t>(rotations.size()) / (4 * joints) : 0;
    }
    const float* quat(int64_t t, int j) const { return &rotations[(t * joints + j) * 4]; }
    float* quat(int64_t t, int j) { return &rotations[(t * joints + j) * 4]; }
    const float* root(int64_t t) const { return &root_translation[t * 3]; }
    float* root(int64_t t) { return &root_translation[t * 3]; }
};

// Global joint positions, Y-up, ground plane y = 0.
struct PoseSequence {
    std::vector<float> positions;  // T*J*3, meters
    int joints = 0;
    float rate_hz = 100.f;

    int64_t frames() const {
        return joints > 0 ? static_cast<int64_t>(positions.size()) / (3 * joints) : 0;
    }
    const float* at(int64_t t, int j) const { return &positions[(t * joints + j) * 3]; }
    float* at(int64_t t, int j) { return &positions[(t * joints + j) * 3]; }
};

enum class CellGroup : std::uint8_t { heel = 0, toe = 1, gray = 2 };

struct InsoleCell {
    float area_cm2 = 10.f;
    std::array<float, 2> position_m{0.f, 0.f};  // foot frame: x lateral, y longitudinal
    CellGroup group = CellGroup::gray;
};

// One insole; both feet share the cell indexing.
struct InsoleLayout {
    std::array<InsoleCell, kCellsPerFoot> cells;

    std::vector<int> group_cells(CellGroup g) const {
        std::vector<int> idx;
        for (int c = 0; c < kCellsPerFoot; ++c)
            if (cells[c].group == g) idx.push_back(c);
        return idx;
    }
};

// Documented approximation of the 16-cell insole: 4 rear heel cells, 8 front
// toe cells, 4 mid gray cells on a 0.25 m outline. The vendor's exact cell
// geometry is not published in usable form; treat positions as nominal.
InsoleLayout default_insole_layout();

struct PressureSequence {
    std::vector<float> values;  // T*2*16, N/cm^2
    float rate_hz = 100.f;
    bool raw_quantized = false;  // true when values are raw sensor multiples

    int64_t frames() const { return static_cast<int64_t>(values.size()) / (2 * kCellsPerFoot); }
    float at(int64_t t, int foot, int cell) const {
        return values[(t * 2 + foot) * kCellsPerFoot + cell];
    }
    float& at(int64_t t, int foot, int cell) {
        return values[(t * 2 + foot) * kCellsPerFoot + cell];
    }
};

// Per-cell vertical ground reaction force as body-weight fraction.
struct VgrfSequence {
    std::vector<float> values;  // T*2*16, BW
    float rate_hz = 100.f;

    int64_t frames() const { return static_cast<int64_t>(values.size()) / (2 * kCellsPerFoot); }
    float at(int64_t t, int foot, int cell) const {
        return values[(t * 2 + foot) * kCellsPerFoot + cell];
    }
    float& at(int64_t t, int foot, int cell) {
        return values[(t * 2 + foot) * kCellsPerFoot + cell];
    }
};

// Binary heel/toe labels; axes (frame, foot in {L,R}, location in {heel,toe}).
struct ContactSequence {
    std::vector<std::uint8_t> labels;  // T*2*2
    float rate_hz = 100.f;

    int64_t frames() const { return static_cast<int64_t>(labels.size()) / 4; }
    std::uint8_t at(int64_t t, int foot, int location) const {
        return labels[(t * 2 + foot) * 2 + location];
    }
    std::uint8_t& at(int64_t t, int foot, int location) {
        return labels[(t * 2 + foot) * 2 + location];
    }
};

// Insole IMU acceleration, m/s^2 (specific force, gravity included).
struct ImuSequence {
    std::vector<float> values;  // T*2*3
    float rate_hz = 100.f;

    int64_t frames() const { return static_cast<int64_t>(values.size()) / 6; }
    const float* at(int64_t t, int foot) const { return &values[(t * 2 + foot) * 3]; }
    float* at(int64_t t, int foot) { return &values[(t * 2 + foot) * 3]; }
};

struct SubjectMeta {
    float weight_kg = 75.f;  // weighed with full equipment
    float height_m = 1.75f;
    std::string id;
};

// One capture unit. Before synchronization the series may run at different
// rates; `synchronized` asserts a single rate and frame count across all
// present series.
struct Take {
    Skeleton skeleton;
    std::optional<LocalMotion> local_motion;
    PoseSequence poses;
    std::optional<PressureSequence> pressure;
    std::optional<VgrfSequence> vgrf;
    std::optional<ContactSequence> contacts;
    std::optional<ImuSequence> imu_accel;
    InsoleLayout layout = default_insole_layout();
    SubjectMeta meta;
    bool synchronized = false;
};

// Lists every violated invariant (empty when valid). Never throws, never
// mutates.
std::vector<std::string> validate_take(const Take& take);

std::vector<std::string> validate_skeleton(const Skeleton& skeleton);
std::vector<std::string> validate_layout(const InsoleLayout& layout);

}  // namespace grfkit
