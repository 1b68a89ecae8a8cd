#include "grfkit/cleanup.hpp"

#include <algorithm>
#include <cmath>

#include "grfkit/kinematics.hpp"
#include "grfkit/metrics.hpp"

namespace grfkit::cleanup {

using namespace grfkit::nn;

void IkWeights::validate() const {
    if (w_constraint < 0 || w_pose < 0 || w_smooth < 0)
        throw ValidationError("ik weights: must be nonnegative");
    if (w_constraint + w_pose + w_smooth <= 0)
        throw ValidationError("ik weights: at least one weight must be positive");
    if (iterations < 1) throw ValidationError("ik weights: iterations must be >= 1");
    if (!(step_size > 0)) throw ValidationError("ik weights: step size must be positive");
}

std::vector<ContactConstraint> derive_constraints(const ContactSequence& contacts,
                                                  const PoseSequence& poses,
                                                  const VgrfSequence& estimate,
                                                  const Skeleton& skeleton,
                                                  const InsoleLayout& layout,
                                                  const grf::ContactParams& params) {
    if (contacts.frames() != poses.frames() || estimate.frames() != poses.frames())
        throw ValidationError("derive_constraints: sequences must be aligned");
    const auto location_sums = grf::rescaled_location_vgrf(estimate, layout, params);

    std::vector<ContactConstraint> out;
    for (int foot = 0; foot < 2; ++foot) {
        for (int loc = 0; loc < 2; ++loc) {
            const int joint = skeleton.foot_joints.at(foot, loc);
            int64_t t = 0;
            const int64_t frames = contacts.frames();
            while (t < frames) {
                if (contacts.at(t, foot, loc) == 0) {
                    ++t;
                    continue;
                }
                int64_t end = t;
                Vec3 weighted_sum{};
                double weight_sum = 0.0, vgrf_sum = 0.0;
                while (end < frames && contacts.at(end, foot, loc) == 1) {
                    const double w =
                        std::max(0.0, location_sums[(end * 2 + foot) * 2 + loc]);
                    weighted_sum += Vec3::from(poses.at(end, joint)) * w;
                    weight_sum += w;
                    vgrf_sum += location_sums[(end * 2 + foot) * 2 + loc];
                    ++end;
                }
                ContactConstraint c;
                c.foot = foot;
                c.location = loc;
                c.begin = t;
                c.end = end;
                if (weight_sum > 1e-12) {
                    c.anchor = weighted_sum * (1.0 / weight_sum);
                } else {
                    // Unweighted mean fallback for zero-force labeled runs.
                    Vec3 mean{};
                    for (int64_t k = t; k < end; ++k) mean += Vec3::from(poses.at(k, joint));
                    c.anchor = mean * (1.0 / double(end - t));
                }
                c.anchor.y = 0.0;  // clamp to ground
                c.weight = vgrf_sum / double(end - t);
                out.push_back(c);
                t = end;
            }
        }
    }
    return out;
}

template <class S>
std::vector<int> fk_positions(Tape<S>& tape, const Skeleton& skeleton, int rotations_id,
                              int root_id) {
    const int joints = skeleton.joint_count();
    std::vector<int> global_q(joints, -1), global_p(joints, -1);
    for (int j = 0; j < joints; ++j) {
        const int local = quat_normalize(tape, slice_joint(tape, rotations_id, j));
        const int parent = skeleton.parent[j];
        if (parent < 0) {
            global_q[j] = local;
            global_p[j] = root_id;
        } else {
            global_q[j] = quat_mul(tape, global_q[parent], local);
            const Vec3 offset{skeleton.offset[j][0], skeleton.offset[j][1],
                              skeleton.offset[j][2]};
            global_p[j] = add(tape, global_p[parent],
                              quat_rotate_vec(tape, global_q[parent], offset));
        }
    }
    return global_p;
}

template std::vector<int> fk_positions<float>(Tape<float>&, const Skeleton&, int, int);
template std::vector<int> fk_positions<double>(Tape<double>&, const Skeleton&, int, int);

template <class S>
int ik_energy(Tape<S>& tape, const Skeleton& skeleton, int rotations_id, int root_id,
              const std::vector<ContactConstraint>& constraints, const LocalMotion& original,
              const IkWeights& weights) {
    const int64_t frames = original.frames();
    const int joints = skeleton.joint_count();
    const auto positions = fk_positions(tape, skeleton, rotations_id, root_id);

    std::vector<int> terms;

    if (weights.w_constraint > 0 && !constraints.empty()) {
        // Merge runs per joint into one weight/anchor series. Each run is
        // tapered a few frames beyond its ends so the foot settles onto the
        // anchor before contact starts and releases after it ends; without
        // the taper the boundary frames inherit slide from their
        // unconstrained neighbors.
        constexpr int kTaper = 3;
        constexpr double kTaperFactor[kTaper] = {0.4, 0.15, 0.05};
        std::vector<std::vector<S>> anchors(joints), w(joints);
        for (const auto& c : constraints) {
            const int joint = skeleton.foot_joints.at(c.foot, c.location);
            if (anchors[joint].empty()) {
                anchors[joint].assign(frames * 3, S(0));
                w[joint].assign(frames, S(0));
            }
            auto pin = [&](int64_t t, double weight) {
                if (t < 0 || t >= frames) return;
                if (weight <= w[joint][t]) return;  // runs keep their full weight
                anchors[joint][t * 3 + 0] = static_cast<S>(c.anchor.x);
                anchors[joint][t * 3 + 1] = static_cast<S>(c.anchor.y);
                anchors[joint][t * 3 + 2] = static_cast<S>(c.anchor.z);
                w[joint][t] = static_cast<S>(weight);
            };
            for (int64_t t = c.begin; t < c.end; ++t) pin(t, c.weight);
            for (int k = 0; k < kTaper; ++k) {
                pin(c.begin - 1 - k, c.weight * kTaperFactor[k]);
                pin(c.end + k, c.weight * kTaperFactor[k]);
            }
        }
        std::vector<int> cterms;
        for (int j = 0; j < joints; ++j)
            if (!anchors[j].empty())
                cterms.push_back(weighted_sqdist(tape, positions[j], anchors[j], w[j]));
        if (!cterms.empty())
            terms.push_back(scale(tape, add_scalars(tape, cterms), weights.w_constraint));
    }

    if (weights.w_pose > 0) {
        std::vector<int> pterms;
        for (int j = 0; j < joints; ++j) {
            std::vector<S> reference(frames * 4);
            for (int64_t t = 0; t < frames; ++t)
                for (int k = 0; k < 4; ++k)
                    reference[t * 4 + k] = static_cast<S>(original.quat(t, j)[k]);
            const int q = quat_normalize(tape, slice_joint(tape, rotations_id, j));
            pterms.push_back(quat_deviation_sq(tape, q, reference));
        }
        terms.push_back(scale(tape, add_scalars(tape, pterms), weights.w_pose));
    }

    if (weights.w_smooth > 0 && frames >= 3) {
        std::vector<int> sterms;
        for (int j = 0; j < joints; ++j) sterms.push_back(second_diff_sq(tape, positions[j]));
        terms.push_back(scale(tape, add_scalars(tape, sterms), weights.w_smooth));
    }

    if (terms.empty()) {
        TensorData<S> zero({1});
        return tape.constant(zero);
    }
    return terms.size() == 1 ? terms.front() : add_scalars(tape, terms);
}

template int ik_energy<float>(Tape<float>&, const Skeleton&, int, int,
                              const std::vector<ContactConstraint>&, const LocalMotion&,
                              const IkWeights&);
template int ik_energy<double>(Tape<double>&, const Skeleton&, int, int,
                               const std::vector<ContactConstraint>&, const LocalMotion&,
                               const IkWeights&);

namespace {

void renormalize_rotations(std::vector<double>& rotations) {
    for (size_t i = 0; i + 3 < rotations.size(); i += 4) {
        const double n = std::sqrt(rotations[i] * rotations[i] +
                                   rotations[i + 1] * rotations[i + 1] +
                                   rotations[i + 2] * rotations[i + 2] +
                                   rotations[i + 3] * rotations[i + 3]);
        if (n > 0)
            for (int k = 0; k < 4; ++k) rotations[i + k] /= n;
    }
}

}  // namespace

LocalMotion solve_ik(const LocalMotion& motion, const Skeleton& skeleton,
                     const std::vector<ContactConstraint>& constraints, const IkWeights& weights,
                     IkReport* report) {
    weights.validate();
    const int64_t frames = motion.frames();
    const int joints = skeleton.joint_count();
    if (motion.joints != joints) throw ValidationError("solve_ik: joint count mismatch");
    for (const auto& c : constraints)
        if (c.begin < 0 || c.end > frames || c.begin > c.end ||
            c.foot < 0 || c.foot > 1 || c.location < 0 || c.location > 1)
            throw ValidationError("solve_ik: constraint references invalid frames");

    // Parameters in double: rotations [T, J, 4] and root [T, 3].
    std::vector<double> rot(motion.rotations.begin(), motion.rotations.end());
    std::vector<double> root(motion.root_translation.begin(), motion.root_translation.end());

    auto energy_and_grads = [&](const std::vector<double>& r, const std::vector<double>& p,
                                std::vector<double>* grad_r, std::vector<double>* grad_p) {
        Tape<double> tape;
        TensorData<double> rt({frames, joints, 4});
        rt.v = r;
        TensorData<double> pt({frames, 3});
        pt.v = p;
        const int rid = tape.leaf(std::move(rt));
        const int pid = tape.leaf(std::move(pt));
        const int e = ik_energy(tape, skeleton, rid, pid, constraints, motion, weights);
        const double value = tape.val(e).v[0];
        if (grad_r) {
            tape.backward(e);
            tape.ensure_grad(rid);
            tape.ensure_grad(pid);
            *grad_r = tape.grad(rid).v;
            *grad_p = tape.grad(pid).v;
        }
        return value;
    };

    // Adam state.
    std::vector<double> m_r(rot.size(), 0), v_r(rot.size(), 0);
    std::vector<double> m_p(root.size(), 0), v_p(root.size(), 0);
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    double step_scale = weights.step_size;

    IkReport local_report;
    double energy = energy_and_grads(rot, root, nullptr, nullptr);
    local_report.initial_energy = energy;
    local_report.energy_trace.push_back(energy);

    int accepted = 0, consecutive_rejects = 0, adam_t = 0, stalled = 0;
    int total = 0;
    while (accepted < weights.iterations && total < 4 * weights.iterations) {
        ++total;
        std::vector<double> grad_r, grad_p;
        energy_and_grads(rot, root, &grad_r, &grad_p);

        // Candidate Adam step (state updated only on acceptance).
        const int t_next = adam_t + 1;
        const double bc1 = 1.0 - std::pow(beta1, t_next);
        const double bc2 = 1.0 - std::pow(beta2, t_next);
        std::vector<double> rot_new = rot, root_new = root;
        std::vector<double> m_r_new = m_r, v_r_new = v_r, m_p_new = m_p, v_p_new = v_p;
        auto apply = [&](std::vector<double>& theta, const std::vector<double>& g,
                         std::vector<double>& m, std::vector<double>& v) {
            for (size_t i = 0; i < theta.size(); ++i) {
                m[i] = beta1 * m[i] + (1 - beta1) * g[i];
                v[i] = beta2 * v[i] + (1 - beta2) * g[i] * g[i];
                theta[i] -= step_scale * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
            }
        };
        apply(rot_new, grad_r, m_r_new, v_r_new);
        apply(root_new, grad_p, m_p_new, v_p_new);
        renormalize_rotations(rot_new);

        const double energy_new = energy_and_grads(rot_new, root_new, nullptr, nullptr);
        if (energy_new <= energy) {
            const double rel = energy > 0 ? (energy - energy_new) / energy : 0.0;
            rot = std::move(rot_new);
            root = std::move(root_new);
            m_r = std::move(m_r_new);
            v_r = std::move(v_r_new);
            m_p = std::move(m_p_new);
            v_p = std::move(v_p_new);
            adam_t = t_next;
            energy = energy_new;
            local_report.energy_trace.push_back(energy);
            ++accepted;
            consecutive_rejects = 0;
            step_scale = std::min(weights.step_size, step_scale * 1.5);
            // Adam's per-step progress fluctuates; stop only once the
            // relative decrease stays below 1e-6 for a stretch.
            stalled = rel < 1e-6 ? stalled + 1 : 0;
            if (stalled >= 10) break;
        } else {
            // Shrinking the step cannot rescue a momentum direction that
            // points uphill; restart the moments along with the backoff.
            step_scale *= 0.5;
            std::fill(m_r.begin(), m_r.end(), 0.0);
            std::fill(v_r.begin(), v_r.end(), 0.0);
            std::fill(m_p.begin(), m_p.end(), 0.0);
            std::fill(v_p.begin(), v_p.end(), 0.0);
            adam_t = 0;
            if (++consecutive_rejects >= 50)
                throw ValidationError("solve_ik: diverged (50 consecutive rejected steps)");
        }
    }

    local_report.iterations = accepted;
    local_report.final_energy = energy;
    if (report) *report = local_report;

    LocalMotion out = motion;
    for (size_t i = 0; i < rot.size(); ++i) out.rotations[i] = static_cast<float>(rot[i]);
    for (size_t i = 0; i < root.size(); ++i)
        out.root_translation[i] = static_cast<float>(root[i]);
    // Float rounding after the double-precision solve.
    for (int64_t t = 0; t < frames; ++t) {
        for (int j = 0; j < joints; ++j) {
            float* q = out.quat(t, j);
            const double n = std::sqrt(double(q[0]) * q[0] + double(q[1]) * q[1] +
                                       double(q[2]) * q[2] + double(q[3]) * q[3]);
            for (int k = 0; k < 4; ++k) q[k] = static_cast<float>(q[k] / n);
        }
    }
    return out;
}

namespace {

CleanupResult run_cleanup(const LocalMotion& motion, const Skeleton& skeleton,
                          const ContactSequence& contacts, const VgrfSequence& vgrf,
                          const InsoleLayout& layout, const grf::ContactParams& params,
                          const IkWeights& weights) {
    const PoseSequence poses = kin::forward_kinematics(skeleton, motion);
    const auto constraints = derive_constraints(contacts, poses, vgrf, skeleton, layout, params);

    CleanupResult result;
    result.report.constraints = static_cast<int>(constraints.size());
    result.report.footskate_before = metrics::footskate(poses, contacts, skeleton);

    result.motion = solve_ik(motion, skeleton, constraints, weights, &result.report.ik);

    const PoseSequence fixed = kin::forward_kinematics(skeleton, result.motion);
    result.report.footskate_after = metrics::footskate(fixed, contacts, skeleton);
    double dev = 0.0;
    for (size_t i = 0; i + 2 < poses.positions.size(); i += 3) {
        const double dx = double(fixed.positions[i]) - poses.positions[i];
        const double dy = double(fixed.positions[i + 1]) - poses.positions[i + 1];
        const double dz = double(fixed.positions[i + 2]) - poses.positions[i + 2];
        dev += std::sqrt(dx * dx + dy * dy + dz * dz);
    }
    result.report.mean_joint_deviation_m = dev / (poses.positions.size() / 3);
    return result;
}

}  // namespace

CleanupResult cleanup_pipeline(const Take& take, const nn::Model& model,
                               const InsoleLayout& layout, const grf::ContactParams& params,
                               const IkWeights& weights) {
    if (!nn::variant_outputs_vgrf(model.config.variant))
        throw ValidationError("cleanup_pipeline: model must estimate vGRF");
    if (!take.local_motion)
        throw ValidationError("cleanup_pipeline: take must carry local motion");
    const VgrfSequence estimate =
        nn::estimate_vgrf(model, take.poses, take.skeleton.foot_joints);
    const ContactSequence contacts = grf::contact_labels(estimate, layout, params);
    return run_cleanup(*take.local_motion, take.skeleton, contacts, estimate, layout, params,
                       weights);
}

CleanupResult cleanup_with_contacts(const LocalMotion& motion, const Skeleton& skeleton,
                                    const ContactSequence& contacts, const VgrfSequence& vgrf,
                                    const InsoleLayout& layout, const grf::ContactParams& params,
                                    const IkWeights& weights) {
    return run_cleanup(motion, skeleton, contacts, vgrf, layout, params, weights);
}

}  // namespace grfkit::cleanup
