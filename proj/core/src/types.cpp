#include "grfkit/types.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace grfkit {

namespace {

bool all_finite(const std::vector<float>& v) {
    for (float x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

template <class... Args>
std::string msg(Args&&... args) {
    std::ostringstream os;
    (os << ... << args);
    return os.str();
}

}  // namespace

InsoleLayout default_insole_layout() {
    // Nominal 0.25 m outline, foot frame: x lateral in [-0.04, 0.04],
    // y longitudinal in [0, 0.25] with the heel at low y.
    InsoleLayout layout;
    int c = 0;
    auto put = [&](float x, float y, float area, CellGroup g) {
        layout.cells[c++] = InsoleCell{area, {x, y}, g};
    };
    // 4 heel cells (2x2 rear block)
    for (int row = 0; row < 2; ++row)
        for (int col = 0; col < 2; ++col)
            put(-0.02f + 0.04f * col, 0.02f + 0.03f * row, 11.f, CellGroup::heel);
    // 4 gray midfoot cells (2x2)
    for (int row = 0; row < 2; ++row)
        for (int col = 0; col < 2; ++col)
            put(-0.02f + 0.04f * col, 0.09f + 0.03f * row, 9.f, CellGroup::gray);
    // 8 toe cells (2 cols x 4 rows front block)
    for (int row = 0; row < 4; ++row)
        for (int col = 0; col < 2; ++col)
            put(-0.02f + 0.04f * col, 0.15f + 0.025f * row, 10.f, CellGroup::toe);
    return layout;
}

std::vector<std::string> validate_skeleton(const Skeleton& s) {
    std::vector<std::string> report;
    const int j = s.joint_count();
    if (j == 0) {
        report.push_back("skeleton: no joints");
        return report;
    }
    if (s.offset.size() != static_cast<size_t>(j) || s.names.size() != static_cast<size_t>(j))
        report.push_back("skeleton: parent/offset/names sizes differ");
    int roots = 0;
    for (int i = 0; i < j; ++i) {
        if (s.parent[i] == -1) {
            ++roots;
        } else if (s.parent[i] < 0 || s.parent[i] >= i) {
            report.push_back(msg("skeleton: parent[", i, "]=", s.parent[i],
                                 " violates topological order"));
        }
    }
    if (roots != 1) report.push_back(msg("skeleton: expected exactly one root, found ", roots));
    for (size_t i = 0; i < s.offset.size(); ++i)
        for (float x : s.offset[i])
            if (!std::isfinite(x)) {
                report.push_back(msg("skeleton: offset[", i, "] not finite"));
                break;
            }
    std::set<int> feet;
    for (int f : s.foot_joints.all()) {
        if (f < 0 || f >= j)
            report.push_back(msg("skeleton: foot joint index ", f, " out of range"));
        else
            feet.insert(f);
    }
    if (feet.size() != 4) report.push_back("skeleton: foot joints are not four distinct joints");
    return report;
}

std::vector<std::string> validate_layout(const InsoleLayout& layout) {
    std::vector<std::string> report;
    int heel = 0, toe = 0;
    for (int c = 0; c < kCellsPerFoot; ++c) {
        const auto& cell = layout.cells[c];
        if (!(cell.area_cm2 > 0.f) || !std::isfinite(cell.area_cm2))
            report.push_back(msg("layout: cell ", c, " area must be positive"));
        if (!std::isfinite(cell.position_m[0]) || !std::isfinite(cell.position_m[1]))
            report.push_back(msg("layout: cell ", c, " position not finite"));
        heel += cell.group == CellGroup::heel;
        toe += cell.group == CellGroup::toe;
    }
    if (heel == 0) report.push_back("layout: heel group is empty");
    if (toe == 0) report.push_back("layout: toe group is empty");
    return report;
}

std::vector<std::string> validate_take(const Take& take) {
    std::vector<std::string> report = validate_skeleton(take.skeleton);
    for (auto& r : validate_layout(take.layout)) report.push_back(r);

    const int j = take.skeleton.joint_count();
    if (take.poses.joints != j)
        report.push_back(msg("poses: joint count ", take.poses.joints, " != skeleton ", j));
    if (take.poses.frames() < 1) report.push_back("poses: must hold at least one frame");
    if (!(take.poses.rate_hz > 0.f)) report.push_back("poses: rate_hz must be positive");
    if (!all_finite(take.poses.positions)) report.push_back("poses: non-finite entry");

    if (take.local_motion) {
        const auto& m = *take.local_motion;
        if (m.joints != j)
            report.push_back(msg("local_motion: joint count ", m.joints, " != skeleton ", j));
        if (m.frames() < 1) report.push_back("local_motion: must hold at least one frame");
        if (!(m.rate_hz > 0.f)) report.push_back("local_motion: rate_hz must be positive");
        if (m.root_translation.size() != static_cast<size_t>(m.frames() * 3))
            report.push_back("local_motion: root_translation shape mismatch");
        for (int64_t t = 0; t < m.frames(); ++t) {
            for (int q = 0; q < m.joints; ++q) {
                const float* p = m.quat(t, q);
                const double n2 = double(p[0]) * p[0] + double(p[1]) * p[1] +
                                  double(p[2]) * p[2] + double(p[3]) * p[3];
                if (std::abs(std::sqrt(n2) - 1.0) > 1e-6) {
                    report.push_back(msg("local_motion: quaternion at frame ", t, " joint ", q,
                                         " has norm ", std::sqrt(n2)));
                    t = m.frames();  // one report is enough
                    break;
                }
            }
        }
    }

    if (take.pressure) {
        if (!(take.pressure->rate_hz > 0.f)) report.push_back("pressure: rate_hz must be positive");
        for (float v : take.pressure->values)
            if (!(v >= 0.f) || !std::isfinite(v)) {
                report.push_back("pressure: negative or non-finite value");
                break;
            }
    }
    if (take.vgrf) {
        if (!(take.vgrf->rate_hz > 0.f)) report.push_back("vgrf: rate_hz must be positive");
        for (float v : take.vgrf->values)
            if (!(v >= 0.f) || !std::isfinite(v)) {
                report.push_back("vgrf: negative or non-finite value");
                break;
            }
    }
    if (take.contacts) {
        for (auto v : take.contacts->labels)
            if (v > 1) {
                report.push_back("contacts: labels must be 0 or 1");
                break;
            }
    }
    if (take.imu_accel && !all_finite(take.imu_accel->values))
        report.push_back("imu_accel: non-finite value");

    if (!(take.meta.weight_kg >= 20.f && take.meta.weight_kg <= 300.f))
        report.push_back(msg("meta: weight_kg ", take.meta.weight_kg, " outside [20, 300]"));
    if (!(take.meta.height_m >= 1.f && take.meta.height_m <= 2.5f))
        report.push_back(msg("meta: height_m ", take.meta.height_m, " outside [1.0, 2.5]"));

    if (take.synchronized) {
        const int64_t t = take.poses.frames();
        const float rate = take.poses.rate_hz;
        auto check = [&](const char* name, int64_t frames, float rate_hz) {
            if (frames != t)
                report.push_back(msg(name, ": frame count ", frames,
                                     " != poses frame count ", t, " in synchronized take"));
            if (rate_hz != rate)
                report.push_back(msg(name, ": rate ", rate_hz, " != poses rate ", rate,
                                     " in synchronized take"));
        };
        if (take.local_motion) check("local_motion", take.local_motion->frames(),
                                     take.local_motion->rate_hz);
        if (take.pressure) check("pressure", take.pressure->frames(), take.pressure->rate_hz);
        if (take.vgrf) check("vgrf", take.vgrf->frames(), take.vgrf->rate_hz);
        if (take.contacts) check("contacts", take.contacts->frames(), take.contacts->rate_hz);
        if (take.imu_accel) check("imu_accel", take.imu_accel->frames(), take.imu_accel->rate_hz);
    }
    return report;
}

}  // namespace grfkit
