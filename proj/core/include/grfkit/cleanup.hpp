#pragma once

#include "grfkit/autodiff.hpp"
#include "grfkit/grf.hpp"
#include "grfkit/model.hpp"
#include "grfkit/types.hpp"

namespace grfkit::cleanup {

using nn::Tape;

struct ContactConstraint {
    int foot = 0, location = 0;
    int64_t begin = 0, end = 0;  // frame interval [begin, end)
    Vec3 anchor;                 // meters, anchor.y clamped to ground (0)
    double weight = 0;           // mean per-location vGRF over the run, BW
};

struct IkWeights {
    double w_constraint = 3.0;
    double w_pose = 0.01;
    double w_smooth = 0.1;
    int iterations = 500;
    double step_size = 1e-2;  // Adam step; halved on energy increase

    void validate() const;
};

// One constraint per maximal contact run: anchor = vGRF-weighted mean of the
// contact joint's positions over the run (weights are the contact function's
// smoothed rescaled per-location sums), clamped to ground height; constraint
// weight = mean per-location vGRF over the run.
std::vector<ContactConstraint> derive_constraints(const ContactSequence& contacts,
                                                  const PoseSequence& poses,
                                                  const VgrfSequence& estimate,
                                                  const Skeleton& skeleton,
                                                  const InsoleLayout& layout,
                                                  const grf::ContactParams& params = {});

// Differentiable forward kinematics on the tape: rotations [T, J, 4] (not
// necessarily normalized; normalization is part of the graph) and root
// translation [T, 3] produce per-joint position ids [T, 3]. Shared by the IK
// energy and its gradient check.
template <class S>
std::vector<int> fk_positions(Tape<S>& tape, const Skeleton& skeleton, int rotations_id,
                              int root_id);

extern template std::vector<int> fk_positions<float>(Tape<float>&, const Skeleton&, int, int);
extern template std::vector<int> fk_positions<double>(Tape<double>&, const Skeleton&, int, int);

// IK energy on the tape (scalar id):
//   w_constraint * sum weight * |FK(joint) - anchor|^2 over constrained frames
// + w_pose       * sum squared-angle(q, q_original)
// + w_smooth     * sum |second temporal difference of joint positions|^2
template <class S>
int ik_energy(Tape<S>& tape, const Skeleton& skeleton, int rotations_id, int root_id,
              const std::vector<ContactConstraint>& constraints,
              const LocalMotion& original, const IkWeights& weights);

extern template int ik_energy<float>(Tape<float>&, const Skeleton&, int, int,
                                     const std::vector<ContactConstraint>&, const LocalMotion&,
                                     const IkWeights&);
extern template int ik_energy<double>(Tape<double>&, const Skeleton&, int, int,
                                      const std::vector<ContactConstraint>&, const LocalMotion&,
                                      const IkWeights&);

struct IkReport {
    int iterations = 0;       // accepted steps
    double initial_energy = 0;
    double final_energy = 0;
    std::vector<double> energy_trace;  // accepted energies, non-increasing
};

// Adam descent over joint rotations and root translation with step-halving
// backoff; stops at the iteration budget or relative decrease < 1e-6. Aborts
// after 50 consecutive rejected steps. Rotations are renormalized each step.
LocalMotion solve_ik(const LocalMotion& motion, const Skeleton& skeleton,
                     const std::vector<ContactConstraint>& constraints, const IkWeights& weights,
                     IkReport* report = nullptr);

struct CleanupReport {
    double footskate_before = 0;
    double footskate_after = 0;
    double mean_joint_deviation_m = 0;
    int constraints = 0;
    IkReport ik;
};

struct CleanupResult {
    LocalMotion motion;
    CleanupReport report;
};

// Full workflow: estimate vGRF with the model, derive contacts, build
// constraints, solve. contacts/vgrf overrides replace the model estimates
// (used with ground-truth labels).
CleanupResult cleanup_pipeline(const Take& take, const nn::Model& model,
                               const InsoleLayout& layout, const grf::ContactParams& params,
                               const IkWeights& weights);

CleanupResult cleanup_with_contacts(const LocalMotion& motion, const Skeleton& skeleton,
                                    const ContactSequence& contacts, const VgrfSequence& vgrf,
                                    const InsoleLayout& layout, const grf::ContactParams& params,
                                    const IkWeights& weights);

}  // namespace grfkit::cleanup
