#pragma once

#include "grfkit/grf.hpp"
#include "grfkit/types.hpp"

namespace grfkit::metrics {

struct F1Score {
    double f1 = 0;
    double precision = 0;
    double recall = 0;
};

// Micro-aggregated over all (frame, foot, location) entries. Conventions:
// no positives anywhere -> F1 = 1; P + R = 0 -> F1 = 0.
F1Score f1(const ContactSequence& pred, const ContactSequence& truth);

// Raw confusion counts, for cross-take micro aggregation.
struct ConfusionCounts {
    int64_t tp = 0, fp = 0, fn = 0;
    void operator+=(const ConfusionCounts& o) { tp += o.tp; fp += o.fp; fn += o.fn; }
};
ConfusionCounts confusion(const ContactSequence& pred, const ContactSequence& truth);
F1Score f1_from_counts(const ConfusionCounts& c);

// F1 per temporal tolerance k = 0..max_tol_frames: a positive matches if the
// other side has a positive of the same channel within |dt| <= k (both
// directions). Non-decreasing in k; entry 0 equals plain f1.
std::vector<double> f1_tolerance_curve(const ContactSequence& pred,
                                       const ContactSequence& truth, int max_tol_frames);

// False-positive rate binned over normalized truth off-contact phases: every
// maximal truth-off run is mapped to [0,1], predictions falling in each of
// `bins` equal sub-intervals are counted, and counts are normalized by the
// frames mapped into each bin. Errors if truth has no off-contact frames.
std::vector<double> offcontact_fp_profile(const ContactSequence& pred,
                                          const ContactSequence& truth, int bins);

// RMSE over frames of the per-foot 16-cell sums, body-weight fraction.
std::array<double, 2> vgrf_rmse(const VgrfSequence& estimate, const VgrfSequence& truth);

// Median Euclidean distance (millimeters) between predicted and true CoP over
// frames where both are defined (per-foot total >= gate_bw).
std::array<double, 2> cop_mad(const VgrfSequence& estimate, const VgrfSequence& truth,
                              const InsoleLayout& layout, double gate_bw = 0.10);

// Mean horizontal (x,z) speed of the contact-bearing joint over all labeled
// (frame, foot, location) entries; 0 when nothing is labeled. m/s.
double footskate(const PoseSequence& poses, const ContactSequence& contacts,
                 const Skeleton& skeleton);

}  // namespace grfkit::metrics
