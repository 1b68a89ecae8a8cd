#include "grfkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "grfkit/grf.hpp"
#include "grfkit/kinematics.hpp"

namespace grfkit::synth {

namespace {

// Stance-phase geometry: heel pivot until the foot is flat, flat support,
// then toe pivot from s_push until toe-off.
constexpr double kFlatAt = 0.18;       // toe touches down (fraction of stance)
constexpr double kPushAt = 0.72;       // ankle lifts (heel rise)
constexpr double kToeUpRad = 0.52;     // landing pitch (toe up)
constexpr double kHeelUpRad = 0.60;    // toe-off pitch (heel up)
constexpr double kStepLead = 0.20;     // plant ahead of the body, in strides

// Force model, in stance phase. Per-foot total follows a double-hump loading
// curve gated by sharp erf edges placed in absolute time so the labeled union
// hugs the stance window to within a frame; the heel share migrates to the
// toes mid-stance.
constexpr double kHumpEdgeAtS = 0.008, kHumpEdgeWS = 0.0040;  // seconds from boundary
constexpr double kShareMidAt = 0.445, kShareW = 0.132;
constexpr double kStandHeel = 0.26, kStandToe = 0.24;  // per-foot standing split
constexpr double kStandRampS = 0.04;                   // erf width at airborne edges, s

// Jump segment layout (seconds, within the segment).
constexpr double kJumpCrouch = 0.30, kJumpPush = 0.22, kJumpDecel = 0.15, kJumpRecover = 0.30;
constexpr double kJumpApex = 0.10;  // flight apex height, m

double smoothstep(double u) {
    u = std::clamp(u, 0.0, 1.0);
    return u * u * (3.0 - 2.0 * u);
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double hump_base(double s) { return 0.9 + 0.2 * std::cos(2.0 * M_PI * (s - 0.2) / 0.6); }

// s = stance phase, stance_s = stance duration in seconds.
double hump(double s, double stance_s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double into = s * stance_s, left = (1.0 - s) * stance_s;
    return hump_base(s) * norm_cdf((into - kHumpEdgeAtS) / kHumpEdgeWS) *
           norm_cdf((left - kHumpEdgeAtS) / kHumpEdgeWS);
}

double heel_share(double s) { return norm_cdf((kShareMidAt - s) / kShareW); }

// ---------------------------------------------------------------------------
// Timeline scripts

enum class Support { airborne, standing, stance, jump_push, jump_land };

struct KinPhase {
    double t0 = 0, t1 = 0;
    Support support = Support::standing;
    // grounded: anchor (ankle z at flat foot); swing: interpolation data
    double anchor_z = 0;
    double stance_t0 = 0, stance_dur = 0;  // stance only
    bool flat = false;                     // boundary stances keep pitch 0
    // swing/flight
    double from_z = 0, to_z = 0, from_y = 0, from_pitch = 0, to_pitch = 0;
    double flight_v0 = 0, flight_t0 = 0;  // ballistic feet during jumps
};

struct ForcePhase {
    double t0 = 0, t1 = 0;
    Support support = Support::airborne;
    double stance_t0 = 0, stance_dur = 0;
    bool entry_stand = false, exit_stand = false;  // bridge stance <-> standing
    bool entry_airborne = false, exit_airborne = false;
    double push_t1 = 0;  // jump push liftoff time
};

struct FootScript {
    std::vector<KinPhase> kin;
    std::vector<ForcePhase> force;
};

struct BodyKey {  // root z control points (piecewise smoothstep)
    double t = 0, z = 0;
};

struct WalkWindow {
    double t0 = 0, t1 = 0;  // for bob/sway/arm-swing envelopes
    double cycle = 0;
};

struct JumpWindow {
    double t0 = 0, t1 = 0;
    double support_end = 0, flight_end = 0, v0 = 0;
    double base_y_extra = 0;
};

struct Script {
    FootScript foot[2];
    std::vector<BodyKey> body_z;
    std::vector<WalkWindow> walks;
    std::vector<JumpWindow> jumps;
    double duration = 0;
};

struct LegDims {
    double thigh, shin, foot_len, hip_lateral, hip_drop, root_h;
};

LegDims leg_dims(double height_m) {
    const double s = height_m / 1.75;
    LegDims d;
    d.thigh = 0.42 * s;
    d.shin = 0.40 * s;
    d.foot_len = 0.16 * s;
    d.hip_lateral = 0.09 * s;
    d.hip_drop = 0.03 * s;
    // Flexed-knee hip height: leaves reach margin for the catch-up step at
    // segment ends (horizontal hip-ankle offsets up to ~0.4 stride).
    d.root_h = 0.80 * (d.thigh + d.shin) + d.hip_drop;
    return d;
}

// Builds the per-foot phase lists for one walk segment and appends body keys.
void append_walk(Script& script, double ts, int cycles, int dir, double z_entry,
                 const GaitConfig& cfg) {
    const double cycle = cfg.cycle_s;
    const double stance = cfg.duty_factor * cycle;
    const double stride = cfg.speed_mps * cycle;
    const double lead = kStepLead * stride;
    const double z_exit = z_entry + dir * cycles * stride;

    script.walks.push_back({ts, ts + cycles * cycle, cycle});

    for (int foot = 0; foot < 2; ++foot) {
        auto& kin = script.foot[foot].kin;
        auto& force = script.foot[foot].force;
        // Left foot leads (phase 0), right foot is half a cycle behind.
        if (foot == 0) {
            // Boundary stance continues the standing support, flat footed.
            kin.push_back({ts, ts + stance, Support::stance, z_entry, ts, stance, true, 0, 0, 0,
                           0, 0, 0, 0});
            ForcePhase f0{ts, ts + stance, Support::stance, ts, stance, true, false, false,
                          false, 0};
            force.push_back(f0);
            double prev_anchor = z_entry;
            double prev_pitch = 0.0;
            for (int k = 1; k <= cycles; ++k) {
                const bool last = k == cycles;
                const double anchor = last ? z_exit : z_entry + dir * (k * stride + lead);
                const double sw0 = ts + (k - 1) * cycle + stance;
                const double sw1 = ts + k * cycle;
                KinPhase sw{};
                sw.t0 = sw0;
                sw.t1 = sw1;
                sw.support = Support::airborne;
                sw.from_z = prev_anchor;
                sw.to_z = anchor;
                sw.from_pitch = prev_pitch;
                sw.to_pitch = last ? 0.0 : -kToeUpRad;
                kin.push_back(sw);
                force.push_back({sw0, sw1, Support::airborne, 0, 0, false, false, false, false, 0});
                if (!last) {
                    const double st0 = ts + k * cycle;
                    kin.push_back({st0, st0 + stance, Support::stance, anchor, st0, stance,
                                   false, 0, 0, 0, 0, 0, 0, 0});
                    force.push_back({st0, st0 + stance, Support::stance, st0, stance, false,
                                     false, false, false, 0});
                    prev_anchor = anchor;
                    prev_pitch = kHeelUpRad;
                }
            }
            // Landed flat at z_exit exactly at segment end; the following
            // standing phase is appended by the caller.
        } else {
            // Right foot: standing tail, then first swing at (duty-0.5)*C.
            const double first_swing = ts + (cfg.duty_factor - 0.5) * cycle;
            kin.push_back({ts, first_swing, Support::standing, z_entry, 0, 0, true, 0, 0, 0, 0,
                           0, 0, 0});
            ForcePhase stand{ts, first_swing, Support::standing, 0, 0, false, false, false, true,
                             0};
            force.push_back(stand);
            double prev_anchor = z_entry;
            double prev_pitch = 0.0;
            double sw0 = first_swing;
            for (int k = 0; k <= cycles - 1; ++k) {
                const bool last = k == cycles - 1;
                const double anchor =
                    last ? z_exit : z_entry + dir * ((k + 0.5) * stride + lead);
                const double sw1 = ts + (k + 0.5) * cycle;
                KinPhase sw{};
                sw.t0 = sw0;
                sw.t1 = sw1;
                sw.support = Support::airborne;
                sw.from_z = prev_anchor;
                sw.to_z = anchor;
                sw.from_pitch = prev_pitch;
                sw.to_pitch = last ? 0.0 : -kToeUpRad;
                kin.push_back(sw);
                force.push_back({sw0, sw1, Support::airborne, 0, 0, false, false, false, false, 0});
                if (!last) {
                    const double st0 = sw1;
                    kin.push_back({st0, st0 + stance, Support::stance, anchor, st0, stance,
                                   false, 0, 0, 0, 0, 0, 0, 0});
                    force.push_back({st0, st0 + stance, Support::stance, st0, stance, false,
                                     false, false, false, 0});
                    prev_anchor = anchor;
                    prev_pitch = kHeelUpRad;
                    sw0 = st0 + stance;
                } else {
                    // Grounded (pre-standing) tail until segment end.
                    const double tail0 = sw1;
                    kin.push_back({tail0, ts + cycles * cycle, Support::standing, z_exit, 0, 0,
                                   true, 0, 0, 0, 0, 0, 0, 0});
                    force.push_back({tail0, ts + cycles * cycle, Support::standing, 0, 0, false,
                                     false, true, false, 0});
                }
            }
        }
    }
    // Body progress keys: one per half step gives near-linear travel; the
    // root tracker below re-derives z from the feet instead, so only the
    // segment endpoints are recorded here.
    script.body_z.push_back({ts, z_entry});
    script.body_z.push_back({ts + cycles * cycle, z_exit});
}

void append_standing(Script& script, double t0, double t1, double z, bool entry_airborne_left,
                     bool entry_airborne_right) {
    const bool entry[2] = {entry_airborne_left, entry_airborne_right};
    for (int foot = 0; foot < 2; ++foot) {
        script.foot[foot].kin.push_back(
            {t0, t1, Support::standing, z, 0, 0, true, 0, 0, 0, 0, 0, 0, 0});
        ForcePhase f{t0, t1, Support::standing, 0, 0, false, false, entry[foot], false, 0};
        script.foot[foot].force.push_back(f);
    }
    script.body_z.push_back({t0, z});
    script.body_z.push_back({t1, z});
}

void append_jump(Script& script, double t0, double z, const GaitConfig&, double* t_end) {
    const double v0 = std::sqrt(2.0 * kGravity * kJumpApex);
    const double flight = 2.0 * v0 / kGravity;
    const double support_end = t0 + kJumpCrouch + kJumpPush;
    const double flight_end = support_end + flight;
    const double t1 = flight_end + kJumpDecel + kJumpRecover;

    for (int foot = 0; foot < 2; ++foot) {
        auto& kin = script.foot[foot].kin;
        auto& force = script.foot[foot].force;
        kin.push_back({t0, support_end, Support::jump_push, z, 0, 0, true, 0, 0, 0, 0, 0, 0, 0});
        KinPhase fl{};
        fl.t0 = support_end;
        fl.t1 = flight_end;
        fl.support = Support::airborne;
        fl.anchor_z = z;
        fl.flight_v0 = v0;
        fl.flight_t0 = support_end;
        kin.push_back(fl);
        kin.push_back({flight_end, t1, Support::jump_land, z, 0, 0, true, 0, 0, 0, 0, 0, 0, 0});

        ForcePhase push{t0, support_end, Support::jump_push, 0, 0, false, false, false, false,
                        support_end};
        force.push_back(push);
        force.push_back(
            {support_end, flight_end, Support::airborne, 0, 0, false, false, false, false, 0});
        force.push_back(
            {flight_end, t1, Support::jump_land, 0, 0, false, false, false, false, 0});
    }
    script.body_z.push_back({t0, z});
    script.body_z.push_back({t1, z});
    script.jumps.push_back({t0, t1, support_end, flight_end, v0, 0.0});
    *t_end = t1;
}

Script build_script(const GaitConfig& cfg) {
    Script script;
    const double jump_len = 1.6;
    double t = 0.0, z = 0.0;
    int dir = 1;

    if (cfg.jump_markers) {
        double t_end = 0;
        append_jump(script, t, z, cfg, &t_end);
        append_standing(script, t_end, t + jump_len, z, false, false);
        t += jump_len;
    }
    const double lead_in = 0.6;
    append_standing(script, t, t + lead_in, z, false, false);
    t += lead_in;

    const double reserve = 0.6 + (cfg.jump_markers ? jump_len : 0.0);
    const double walk_len = cfg.walk_cycles_per_segment * cfg.cycle_s;
    const double stand_len = 0.5;
    while (t + walk_len + stand_len + reserve <= cfg.duration_s) {
        append_walk(script, t, cfg.walk_cycles_per_segment, dir, z, cfg);
        z += dir * cfg.walk_cycles_per_segment * cfg.speed_mps * cfg.cycle_s;
        t += walk_len;
        // The left foot lands exactly at the segment end; the right foot has
        // been grounded since its catch-up step.
        append_standing(script, t, t + stand_len, z, true, false);
        t += stand_len;
        dir = -dir;
    }
    if (cfg.jump_markers) {
        const double jump_t0 = cfg.duration_s - jump_len;
        if (jump_t0 > t) append_standing(script, t, jump_t0, z, false, false);
        double t_end = 0;
        append_jump(script, jump_t0 > t ? jump_t0 : t, z, cfg, &t_end);
        t = std::max(t_end, cfg.duration_s);
    } else if (t < cfg.duration_s) {
        append_standing(script, t, cfg.duration_s, z, false, false);
        t = cfg.duration_s;
    }
    script.duration = std::max(t, cfg.duration_s);
    return script;
}

// ---------------------------------------------------------------------------
// Evaluation of the scripts

const KinPhase& kin_phase_at(const FootScript& fs, double t) {
    for (const auto& p : fs.kin)
        if (t < p.t1 || &p == &fs.kin.back()) return p;
    return fs.kin.back();
}

const ForcePhase& force_phase_at(const FootScript& fs, double t) {
    for (const auto& p : fs.force)
        if (t < p.t1 || &p == &fs.force.back()) return p;
    return fs.force.back();
}

struct FootState {
    Vec3 ankle;
    double pitch = 0;  // rotation about +x; negative = toe up
    bool grounded_heel = false, grounded_toe = false;
};

double stance_pitch(double s, bool flat) {
    if (flat) return 0.0;
    if (s < kFlatAt) return -kToeUpRad * (1.0 - smoothstep(s / kFlatAt));
    if (s <= kPushAt) return 0.0;
    return kHeelUpRad * smoothstep((s - kPushAt) / (1.0 - kPushAt));
}

FootState eval_foot(const FootScript& fs, double t, double lateral_x, double foot_len,
                    double lift) {
    const KinPhase& p = kin_phase_at(fs, t);
    FootState st;
    switch (p.support) {
        case Support::standing:
        case Support::jump_push:
        case Support::jump_land:
            st.ankle = {lateral_x, 0.0, p.anchor_z};
            st.pitch = 0.0;
            st.grounded_heel = st.grounded_toe = true;
            break;
        case Support::stance: {
            const double s = std::clamp((t - p.stance_t0) / p.stance_dur, 0.0, 1.0);
            st.pitch = stance_pitch(s, p.flat);
            if (s <= kPushAt || p.flat) {
                st.ankle = {lateral_x, 0.0, p.anchor_z};
            } else {
                // Toe pivot: ankle rises about the planted toe.
                st.ankle = {lateral_x, foot_len * std::sin(st.pitch),
                            p.anchor_z + foot_len * (1.0 - std::cos(st.pitch))};
            }
            st.grounded_heel = p.flat || s <= kPushAt;
            st.grounded_toe = p.flat || s >= kFlatAt;
            break;
        }
        case Support::airborne: {
            if (p.flight_v0 > 0.0) {  // ballistic jump flight
                const double tau = t - p.flight_t0;
                const double y = std::max(0.0, p.flight_v0 * tau - 0.5 * kGravity * tau * tau);
                st.ankle = {lateral_x, y, p.anchor_z};
                st.pitch = 0.0;
                break;
            }
            const double u = std::clamp((t - p.t0) / (p.t1 - p.t0), 0.0, 1.0);
            const double from_ankle_z =
                p.from_pitch > 0.0 ? p.from_z + foot_len * (1.0 - std::cos(p.from_pitch))
                                   : p.from_z;
            const double from_y = foot_len * std::sin(std::max(0.0, p.from_pitch));
            st.ankle = {lateral_x,
                        from_y * (1.0 - smoothstep(u)) + lift * std::sin(M_PI * u) *
                                                              std::sin(M_PI * u),
                        from_ankle_z + (p.to_z - from_ankle_z) * smoothstep(u)};
            st.pitch = p.from_pitch + (p.to_pitch - p.from_pitch) * smoothstep(u);
            break;
        }
    }
    return st;
}

// Continuous per-location force model, body-weight fraction.
double eval_force(const FootScript& fs, double t, int location) {
    const ForcePhase& p = force_phase_at(fs, t);
    const double stand_level = location == 0 ? kStandHeel : kStandToe;
    switch (p.support) {
        case Support::airborne:
            return 0.0;
        case Support::standing: {
            double v = stand_level;
            if (p.entry_airborne) v *= norm_cdf((t - p.t0 - 0.10) / kStandRampS);
            if (p.exit_airborne) v *= norm_cdf((p.t1 - 0.10 - t) / kStandRampS);
            return v;
        }
        case Support::stance: {
            const double s = (t - p.stance_t0) / p.stance_dur;
            const double total = hump(s, p.stance_dur);
            const double share = heel_share(s);
            double v = total * (location == 0 ? share : 1.0 - share);
            if (p.entry_stand) {
                const double b = norm_cdf((s - 0.12) / 0.05);
                v = stand_level * (1.0 - b) + v * b;
            }
            if (p.exit_stand) {
                const double b = norm_cdf((s - 0.88) / 0.04);
                v = v * (1.0 - b) + stand_level * b;
            }
            return v;
        }
        case Support::jump_push: {
            const double u = std::clamp((t - p.t0) / (p.push_t1 - p.t0), 0.0, 1.0);
            // stand level -> slight unload -> push peak -> zero at liftoff
            const double shape = stand_level + (-0.09) * std::exp(-std::pow((u - 0.35) / 0.15, 2)) +
                                 (1.05 - stand_level) * std::exp(-std::pow((u - 0.82) / 0.13, 2));
            return std::max(0.0, shape) * norm_cdf((0.97 - u) / 0.02);
        }
        case Support::jump_land: {
            const double tau = t - p.t0;
            const double peak = location == 0 ? 1.4 : 1.2;
            const double spike = peak * norm_cdf((tau - 0.03) / 0.012) *
                                 std::exp(-std::pow(tau / 0.16, 2));
            const double settle = stand_level * smoothstep(tau / 0.25);
            return spike + settle;
        }
    }
    return 0.0;
}

// Gaussian-smoothed force by Simpson quadrature over +-4 sigma of the
// continuous model; this is the generator's own reference smoothing, kept
// independent of the production discrete-kernel path.
double smoothed_force(const FootScript& fs, double t, int location, double sigma_s) {
    const int half = 32;  // 65 nodes
    const double h = 4.0 * sigma_s / half;
    double num = 0.0, den = 0.0;
    for (int i = -half; i <= half; ++i) {
        const double u = i * h;
        const double w = std::exp(-0.5 * (u / sigma_s) * (u / sigma_s)) *
                         ((i == -half || i == half) ? 1.0 : (i % 2 != 0 ? 4.0 : 2.0));
        num += w * eval_force(fs, t - u, location);
        den += w;
    }
    return num / den;
}

}  // namespace

void GaitConfig::validate() const {
    if (!(rate_hz > 0)) throw ValidationError("gait config: rate_hz must be positive");
    if (!(duty_factor > 0.0 && duty_factor < 1.0))
        throw ValidationError("gait config: duty_factor must be in (0, 1)");
    if (duty_factor < 0.52 || duty_factor > 0.70)
        throw ValidationError("gait config: duty_factor outside supported [0.52, 0.70]");
    if (duration_s < 2.0 * cycle_s)
        throw ValidationError("gait config: duration must cover at least two cycles");
    if (!(speed_mps > 0.05)) throw ValidationError("gait config: speed too small");
    if (speed_mps * cycle_s > 1.15 * (height_m / 1.75))
        throw ValidationError("gait config: stride exceeds leg reach");
    if (walk_cycles_per_segment < 2)
        throw ValidationError("gait config: walk segments need at least 2 cycles");
    if (!(weight_kg >= 20.0 && weight_kg <= 300.0))
        throw ValidationError("gait config: weight outside [20, 300] kg");
    if (!(height_m >= 1.0 && height_m <= 2.5))
        throw ValidationError("gait config: height outside [1.0, 2.5] m");
}

Skeleton make_humanoid_skeleton(double height_m) {
    const double s = height_m / 1.75;
    const LegDims d = leg_dims(height_m);
    Skeleton sk;
    auto add = [&](const char* name, int parent, double x, double y, double z) {
        sk.names.push_back(name);
        sk.parent.push_back(parent);
        sk.offset.push_back({static_cast<float>(x), static_cast<float>(y),
                             static_cast<float>(z)});
    };
    add("Hips", -1, 0, 0, 0);                      // 0
    add("Spine", 0, 0, 0.09 * s, 0);               // 1
    add("Spine1", 1, 0, 0.10 * s, 0);              // 2
    add("Spine2", 2, 0, 0.10 * s, 0);              // 3
    add("Spine3", 3, 0, 0.10 * s, 0);              // 4
    add("Neck", 4, 0, 0.08 * s, 0);                // 5
    add("Head", 5, 0, 0.12 * s, 0);                // 6
    add("LeftShoulder", 4, 0.05 * s, 0.04 * s, 0); // 7
    add("LeftArm", 7, 0.12 * s, 0, 0);             // 8
    add("LeftForeArm", 8, 0.26 * s, 0, 0);         // 9
    add("LeftHand", 9, 0.24 * s, 0, 0);            // 10
    add("RightShoulder", 4, -0.05 * s, 0.04 * s, 0);  // 11
    add("RightArm", 11, -0.12 * s, 0, 0);          // 12
    add("RightForeArm", 12, -0.26 * s, 0, 0);      // 13
    add("RightHand", 13, -0.24 * s, 0, 0);         // 14
    add("LeftUpLeg", 0, d.hip_lateral, -d.hip_drop, 0);   // 15
    add("LeftLeg", 15, 0, -d.thigh, 0);            // 16
    add("LeftFoot", 16, 0, -d.shin, 0);            // 17
    add("LeftToe", 17, 0, 0, d.foot_len);          // 18
    add("RightUpLeg", 0, -d.hip_lateral, -d.hip_drop, 0); // 19
    add("RightLeg", 19, 0, -d.thigh, 0);           // 20
    add("RightFoot", 20, 0, -d.shin, 0);           // 21
    add("RightToe", 21, 0, 0, d.foot_len);         // 22
    sk.foot_joints = {17, 18, 21, 22};
    return sk;
}

namespace {

struct LegSolution {
    Quat thigh_local, shin_local, ankle_local;
};

// Analytic two-bone leg IK. Bones rest along -y; the knee bends toward +z.
LegSolution solve_leg(const Vec3& hip, const Vec3& ankle_target, double pitch, double l1,
                      double l2) {
    const Vec3 delta = ankle_target - hip;
    const double dist = delta.norm();
    if (dist > 0.995 * (l1 + l2))
        throw ValidationError("synth: leg target out of reach; reduce stride or speed");
    const Vec3 dir = delta * (1.0 / dist);
    const double cos_alpha =
        std::clamp((l1 * l1 + dist * dist - l2 * l2) / (2.0 * l1 * dist), -1.0, 1.0);
    const double alpha = std::acos(cos_alpha);
    const Vec3 bend_axis = dir.cross(Vec3{0, 0, 1}).normalized();
    const Vec3 thigh_dir = Quat::axis_angle(bend_axis, alpha).rotate(dir);
    const Vec3 knee = hip + thigh_dir * l1;
    const Vec3 shin_dir = (ankle_target - knee).normalized();

    const Quat thigh_g = Quat::from_to(Vec3{0, -1, 0}, thigh_dir);
    const Quat shin_g = Quat::from_to(Vec3{0, -1, 0}, shin_dir);
    const Quat ankle_g = Quat::axis_angle(Vec3{1, 0, 0}, pitch);

    LegSolution out;
    out.thigh_local = thigh_g;  // root rotation is identity
    out.shin_local = (thigh_g.conj() * shin_g).normalized();
    out.ankle_local = (shin_g.conj() * ankle_g).normalized();
    return out;
}

double walk_envelope(const std::vector<WalkWindow>& walks, double t, double* phase,
                     double* cycle) {
    for (const auto& w : walks) {
        if (t < w.t0 - 0.3 || t > w.t1 + 0.3) continue;
        *phase = (t - w.t0) / w.cycle;
        *cycle = w.cycle;
        const double in = smoothstep((t - w.t0) / (0.5 * w.cycle));
        const double out = smoothstep((w.t1 - t) / (0.5 * w.cycle));
        return std::min(in, out);
    }
    *phase = 0;
    *cycle = 1;
    return 0.0;
}

double jump_root_dy(const std::vector<JumpWindow>& jumps, double t) {
    for (const auto& j : jumps) {
        if (t < j.t0 || t > j.t1 + 0.3) continue;
        const double crouch_end = j.t0 + kJumpCrouch;
        if (t < crouch_end) return -0.12 * smoothstep((t - j.t0) / kJumpCrouch);
        if (t < j.support_end) {
            const double tau = t - crouch_end;
            return -0.12 + j.v0 * tau * tau / (2.0 * kJumpPush);
        }
        const double liftoff_y = -0.12 + j.v0 * kJumpPush / 2.0;
        if (t < j.flight_end) {
            const double tau = t - j.support_end;
            return liftoff_y + j.v0 * tau - 0.5 * kGravity * tau * tau;
        }
        const double tau = t - j.flight_end;
        if (tau < kJumpDecel)
            return liftoff_y - j.v0 * tau * (1.0 - tau / (2.0 * kJumpDecel));
        const double dip = liftoff_y - j.v0 * kJumpDecel / 2.0;
        return dip * (1.0 - smoothstep((tau - kJumpDecel) / kJumpRecover));
    }
    return 0.0;
}

}  // namespace

Take generate_gait(const GaitConfig& cfg) {
    cfg.validate();
    const Script script = build_script(cfg);
    const LegDims dims = leg_dims(cfg.height_m);
    const Skeleton skeleton = make_humanoid_skeleton(cfg.height_m);
    const int joints = skeleton.joint_count();
    const int64_t frames = static_cast<int64_t>(std::llround(script.duration * cfg.rate_hz));
    const double dt = 1.0 / cfg.rate_hz;

    LocalMotion motion;
    motion.joints = joints;
    motion.rate_hz = static_cast<float>(cfg.rate_hz);
    motion.rotations.assign(static_cast<size_t>(frames) * joints * 4, 0.f);
    motion.root_translation.assign(static_cast<size_t>(frames) * 3, 0.f);

    VgrfSequence vgrf;
    vgrf.rate_hz = static_cast<float>(cfg.rate_hz);
    vgrf.values.assign(static_cast<size_t>(frames) * 2 * kCellsPerFoot, 0.f);
    ContactSequence contacts;
    contacts.rate_hz = static_cast<float>(cfg.rate_hz);
    contacts.labels.assign(static_cast<size_t>(frames) * 4, 0);

    const grf::ContactParams params;  // defaults define the emitted schedule
    const InsoleLayout layout = default_insole_layout();
    const auto heel_cells = layout.group_cells(CellGroup::heel);
    const auto toe_cells = layout.group_cells(CellGroup::toe);
    double heel_area = 0, toe_area = 0;
    for (int c : heel_cells) heel_area += layout.cells[c].area_cm2;
    for (int c : toe_cells) toe_area += layout.cells[c].area_cm2;

    const double lateral[2] = {dims.hip_lateral, -dims.hip_lateral};
    const int thigh_idx[2] = {15, 19}, shin_idx[2] = {16, 20}, ankle_idx[2] = {17, 21};
    const double min_phase_frames = std::ceil(params.min_phase_s * cfg.rate_hz);

    for (int64_t k = 0; k < frames; ++k) {
        const double t = k * dt;
        double phase = 0, cycle = 1;
        const double env = walk_envelope(script.walks, t, &phase, &cycle);

        FootState foot_state[2];
        for (int f = 0; f < 2; ++f)
            foot_state[f] = eval_foot(script.foot[f], t, lateral[f], dims.foot_len, cfg.lift_m);

        // Root: average foot progress in z, styled sway/bob, jump profile in y.
        const auto progress = [&](int f) {
            const KinPhase& p = kin_phase_at(script.foot[f], t);
            if (p.support != Support::airborne || p.flight_v0 > 0.0) return p.anchor_z;
            return p.from_z + (p.to_z - p.from_z) * smoothstep((t - p.t0) / (p.t1 - p.t0));
        };
        const double root_z = 0.5 * (progress(0) + progress(1));
        const double root_x = cfg.sway_m * env * std::sin(2.0 * M_PI * phase);
        const double bob = cfg.bob_m * env * 0.5 * (1.0 - std::cos(4.0 * M_PI * phase));
        const double root_y = dims.root_h - bob + jump_root_dy(script.jumps, t);
        const Vec3 root{root_x, root_y, root_z};
        root.store(motion.root(k));

        // Identity everywhere, then the articulated joints.
        for (int j = 0; j < joints; ++j) Quat::identity().store(motion.quat(k, j));

        const double arm = cfg.arm_swing_rad * env * std::sin(2.0 * M_PI * phase);
        Quat::axis_angle(Vec3{1, 0, 0}, arm).store(motion.quat(k, 8));    // LeftArm
        Quat::axis_angle(Vec3{1, 0, 0}, -arm).store(motion.quat(k, 12));  // RightArm
        Quat::axis_angle(Vec3{1, 0, 0}, 0.03 * env * std::sin(4.0 * M_PI * phase))
            .store(motion.quat(k, 2));  // Spine1

        for (int f = 0; f < 2; ++f) {
            const Vec3 hip = root + Vec3{lateral[f], -dims.hip_drop, 0.0};
            const LegSolution leg =
                solve_leg(hip, foot_state[f].ankle, foot_state[f].pitch, dims.thigh, dims.shin);
            leg.thigh_local.store(motion.quat(k, thigh_idx[f]));
            leg.shin_local.store(motion.quat(k, shin_idx[f]));
            leg.ankle_local.store(motion.quat(k, ankle_idx[f]));
        }

        // Forces: sample the continuous model; labels: threshold crossings of
        // the same model (smoothed per location, raw total gate).
        for (int f = 0; f < 2; ++f) {
            const double heel_force = eval_force(script.foot[f], t, 0);
            const double toe_force = eval_force(script.foot[f], t, 1);
            for (int c : heel_cells)
                vgrf.at(k, f, c) =
                    static_cast<float>(heel_force * layout.cells[c].area_cm2 / heel_area);
            for (int c : toe_cells)
                vgrf.at(k, f, c) =
                    static_cast<float>(toe_force * layout.cells[c].area_cm2 / toe_area);

            const double raw_total = heel_force + toe_force;
            const bool gate = raw_total >= params.gate_threshold_bw;
            const double sm_heel = smoothed_force(script.foot[f], t, 0, params.smooth_sigma_s);
            const double sm_toe = smoothed_force(script.foot[f], t, 1, params.smooth_sigma_s);
            contacts.at(k, f, 0) = gate && sm_heel >= params.raw_threshold_bw ? 1 : 0;
            contacts.at(k, f, 1) = gate && sm_toe >= params.raw_threshold_bw ? 1 : 0;
        }
    }
    // The schedule produces no short contact runs by construction; the
    // deletion pass still runs so the emitted labels follow the documented
    // definition exactly.
    grf::delete_short_runs(contacts.labels, frames, 4, static_cast<int>(min_phase_frames));

    Take take;
    take.skeleton = skeleton;
    take.meta.weight_kg = static_cast<float>(cfg.weight_kg);
    take.meta.height_m = static_cast<float>(cfg.height_m);
    take.meta.id = "synthetic";
    take.layout = layout;
    take.local_motion = motion;
    take.poses = kin::forward_kinematics(skeleton, motion);
    take.poses.rate_hz = static_cast<float>(cfg.rate_hz);
    take.vgrf = std::move(vgrf);
    take.contacts = std::move(contacts);

    // Pressure consistent with the vGRF samples: p = F_bw * W * g / area.
    PressureSequence pressure;
    pressure.rate_hz = static_cast<float>(cfg.rate_hz);
    pressure.values.resize(take.vgrf->values.size());
    const double newtons = cfg.weight_kg * kGravity;
    for (int64_t k = 0; k < frames; ++k)
        for (int f = 0; f < 2; ++f)
            for (int c = 0; c < kCellsPerFoot; ++c)
                pressure.at(k, f, c) = static_cast<float>(take.vgrf->at(k, f, c) * newtons /
                                                          layout.cells[c].area_cm2);
    take.pressure = std::move(pressure);

    // Insole IMU: specific force = ankle acceleration + g, by differentiating
    // the generated ankle trajectories.
    ImuSequence imu;
    imu.rate_hz = static_cast<float>(cfg.rate_hz);
    imu.values.assign(static_cast<size_t>(frames) * 6, 0.f);
    for (int f = 0; f < 2; ++f) {
        const int ankle = ankle_idx[f];
        std::vector<double> traj(static_cast<size_t>(frames) * 3);
        for (int64_t k = 0; k < frames; ++k)
            for (int d = 0; d < 3; ++d) traj[k * 3 + d] = take.poses.at(k, ankle)[d];
        const auto acc = kin::finite_difference(traj, frames, 3, 2, cfg.rate_hz);
        for (int64_t k = 0; k < frames; ++k) {
            imu.at(k, f)[0] = static_cast<float>(acc[k * 3 + 0]);
            imu.at(k, f)[1] = static_cast<float>(acc[k * 3 + 1] + kGravity);
            imu.at(k, f)[2] = static_cast<float>(acc[k * 3 + 2]);
        }
    }
    take.imu_accel = std::move(imu);
    take.synchronized = true;
    return take;
}

GaitConfig randomized_config(double duration_s, std::uint64_t seed, bool jump_markers) {
    RngStream rng = RngStream::keyed(seed, 0x5717);
    GaitConfig cfg;
    cfg.duration_s = duration_s;
    cfg.seed = seed;
    cfg.jump_markers = jump_markers;
    cfg.speed_mps = rng.uniform(0.75, 1.15);
    cfg.cycle_s = rng.uniform(1.05, 1.25);
    cfg.duty_factor = rng.uniform(0.56, 0.64);
    cfg.height_m = rng.uniform(1.62, 1.90);
    cfg.weight_kg = rng.uniform(58.0, 95.0);
    cfg.lift_m = rng.uniform(0.04, 0.07);
    cfg.sway_m = rng.uniform(0.008, 0.022);
    cfg.bob_m = rng.uniform(0.018, 0.032);
    cfg.arm_swing_rad = rng.uniform(0.15, 0.35);
    // Keep the stride inside leg reach for all sampled subjects.
    cfg.speed_mps = std::min(cfg.speed_mps, 1.10 * (cfg.height_m / 1.75) / cfg.cycle_s);
    return cfg;
}

std::pair<Take, Take> generate_blend_ground_truth(const GaitConfig& cfg, RngStream& rng) {
    GaitConfig a = cfg;
    GaitConfig b = cfg;  // identical schedule: same cycle/duty/segment plan
    b.speed_mps = std::max(0.25, cfg.speed_mps * rng.uniform(0.60, 0.75));
    b.lift_m = cfg.lift_m * rng.uniform(1.3, 1.7);
    b.sway_m = cfg.sway_m * rng.uniform(1.2, 1.8);
    b.bob_m = cfg.bob_m * rng.uniform(1.1, 1.5);
    b.arm_swing_rad = cfg.arm_swing_rad * rng.uniform(1.2, 1.6);
    return {generate_gait(a), generate_gait(b)};
}

}  // namespace grfkit::synth
