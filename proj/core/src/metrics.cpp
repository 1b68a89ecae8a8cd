#include "grfkit/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "grfkit/kinematics.hpp"

namespace grfkit::metrics {

namespace {

void check_shapes(const ContactSequence& pred, const ContactSequence& truth) {
    if (pred.labels.size() != truth.labels.size())
        throw ValidationError("contact metrics: shape mismatch between prediction and truth");
}

void check_shapes(const VgrfSequence& a, const VgrfSequence& b) {
    if (a.values.size() != b.values.size())
        throw ValidationError("vgrf metrics: shape mismatch between estimate and truth");
}

}  // namespace

ConfusionCounts confusion(const ContactSequence& pred, const ContactSequence& truth) {
    check_shapes(pred, truth);
    ConfusionCounts c;
    for (size_t i = 0; i < pred.labels.size(); ++i) {
        const bool p = pred.labels[i] != 0;
        const bool t = truth.labels[i] != 0;
        c.tp += p && t;
        c.fp += p && !t;
        c.fn += !p && t;
    }
    return c;
}

F1Score f1_from_counts(const ConfusionCounts& c) {
    F1Score s;
    if (c.tp + c.fp + c.fn == 0) {
        s.f1 = s.precision = s.recall = 1.0;  // nothing predicted, nothing expected
        return s;
    }
    s.precision = (c.tp + c.fp) > 0 ? double(c.tp) / double(c.tp + c.fp) : 0.0;
    s.recall = (c.tp + c.fn) > 0 ? double(c.tp) / double(c.tp + c.fn) : 0.0;
    s.f1 = (s.precision + s.recall) > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    return s;
}

F1Score f1(const ContactSequence& pred, const ContactSequence& truth) {
    return f1_from_counts(confusion(pred, truth));
}

std::vector<double> f1_tolerance_curve(const ContactSequence& pred,
                                       const ContactSequence& truth, int max_tol_frames) {
    check_shapes(pred, truth);
    const int64_t frames = pred.frames();
    std::vector<double> curve;
    curve.reserve(max_tol_frames + 1);

    for (int k = 0; k <= max_tol_frames; ++k) {
        int64_t matched_pred = 0, total_pred = 0, matched_truth = 0, total_truth = 0;
        for (int ch = 0; ch < 4; ++ch) {
            for (int64_t t = 0; t < frames; ++t) {
                const bool p = pred.labels[t * 4 + ch] != 0;
                const bool tr = truth.labels[t * 4 + ch] != 0;
                if (p) {
                    ++total_pred;
                    for (int64_t d = std::max<int64_t>(0, t - k);
                         d <= std::min<int64_t>(frames - 1, t + k); ++d)
                        if (truth.labels[d * 4 + ch] != 0) {
                            ++matched_pred;
                            break;
                        }
                }
                if (tr) {
                    ++total_truth;
                    for (int64_t d = std::max<int64_t>(0, t - k);
                         d <= std::min<int64_t>(frames - 1, t + k); ++d)
                        if (pred.labels[d * 4 + ch] != 0) {
                            ++matched_truth;
                            break;
                        }
                }
            }
        }
        if (total_pred + total_truth == 0) {
            curve.push_back(1.0);
            continue;
        }
        const double precision = total_pred > 0 ? double(matched_pred) / total_pred : 0.0;
        const double recall = total_truth > 0 ? double(matched_truth) / total_truth : 0.0;
        curve.push_back(precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall)
                                                 : 0.0);
    }
    return curve;
}

std::vector<double> offcontact_fp_profile(const ContactSequence& pred,
                                          const ContactSequence& truth, int bins) {
    check_shapes(pred, truth);
    if (bins < 1) throw ValidationError("offcontact_fp_profile: bins must be >= 1");
    const int64_t frames = pred.frames();
    std::vector<double> fp(bins, 0.0), total(bins, 0.0);
    bool any_off = false;

    for (int ch = 0; ch < 4; ++ch) {
        int64_t t = 0;
        while (t < frames) {
            if (truth.labels[t * 4 + ch] != 0) {
                ++t;
                continue;
            }
            int64_t end = t;
            while (end < frames && truth.labels[end * 4 + ch] == 0) ++end;
            any_off = true;
            const int64_t len = end - t;
            for (int64_t f = t; f < end; ++f) {
                // Normalized position of this frame within the off run.
                const double u = len > 1 ? double(f - t) / double(len - 1) : 0.5;
                int b = std::min(bins - 1, static_cast<int>(u * bins));
                total[b] += 1.0;
                if (pred.labels[f * 4 + ch] != 0) fp[b] += 1.0;
            }
            t = end;
        }
    }
    if (!any_off) throw ValidationError("offcontact_fp_profile: truth has no off-contact phase");
    for (int b = 0; b < bins; ++b) fp[b] = total[b] > 0.0 ? fp[b] / total[b] : 0.0;
    return fp;
}

std::array<double, 2> vgrf_rmse(const VgrfSequence& estimate, const VgrfSequence& truth) {
    check_shapes(estimate, truth);
    const auto te = grf::total_vgrf(estimate);
    const auto tt = grf::total_vgrf(truth);
    const int64_t frames = estimate.frames();
    std::array<double, 2> out{0.0, 0.0};
    if (frames == 0) return out;
    for (int f = 0; f < 2; ++f) {
        double acc = 0.0;
        for (int64_t t = 0; t < frames; ++t) {
            const double d = te[t * 2 + f] - tt[t * 2 + f];
            acc += d * d;
        }
        out[f] = std::sqrt(acc / double(frames));
    }
    return out;
}

std::array<double, 2> cop_mad(const VgrfSequence& estimate, const VgrfSequence& truth,
                              const InsoleLayout& layout, double gate_bw) {
    check_shapes(estimate, truth);
    const auto ce = grf::center_of_pressure(estimate, layout, gate_bw);
    const auto ct = grf::center_of_pressure(truth, layout, gate_bw);
    std::array<double, 2> out{0.0, 0.0};
    for (int f = 0; f < 2; ++f) {
        std::vector<double> dist;
        for (int64_t t = 0; t < ce.frames; ++t) {
            if (!ce.is_valid(t, f) || !ct.is_valid(t, f)) continue;
            const double dx = ce.at(t, f)[0] - ct.at(t, f)[0];
            const double dy = ce.at(t, f)[1] - ct.at(t, f)[1];
            dist.push_back(std::sqrt(dx * dx + dy * dy) * 1000.0);  // mm
        }
        if (dist.empty())
            throw ValidationError("cop_mad: no frame where both CoPs are defined");
        const size_t mid = dist.size() / 2;
        std::nth_element(dist.begin(), dist.begin() + mid, dist.end());
        double m = dist[mid];
        if (dist.size() % 2 == 0) {
            std::nth_element(dist.begin(), dist.begin() + mid - 1, dist.end());
            m = 0.5 * (m + dist[mid - 1]);
        }
        out[f] = m;
    }
    return out;
}

double footskate(const PoseSequence& poses, const ContactSequence& contacts,
                 const Skeleton& skeleton) {
    if (poses.frames() != contacts.frames())
        throw ValidationError("footskate: contacts must be at the poses' rate");
    const auto vel = kin::joint_velocities(poses);
    const int64_t frames = poses.frames();
    double acc = 0.0;
    int64_t count = 0;
    for (int64_t t = 0; t < frames; ++t) {
        for (int foot = 0; foot < 2; ++foot) {
            for (int loc = 0; loc < 2; ++loc) {
                if (contacts.at(t, foot, loc) == 0) continue;
                const int j = skeleton.foot_joints.at(foot, loc);
                const float* v = &vel[(t * poses.joints + j) * 3];
                acc += std::sqrt(double(v[0]) * v[0] + double(v[2]) * v[2]);
                ++count;
            }
        }
    }
    return count > 0 ? acc / double(count) : 0.0;
}

}  // namespace grfkit::metrics
