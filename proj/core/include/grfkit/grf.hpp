#pragma once

#include <optional>

#include "grfkit/types.hpp"

namespace grfkit::grf {

// Parameters of the deterministic contact labeling pipeline.
struct ContactParams {
    double smooth_sigma_s = 0.05;   // Gaussian smoothing std, seconds
    double raw_threshold_bw = 0.05; // per-location threshold, body weight
    double gate_threshold_bw = 0.10;// per-foot total gate, body weight
    double min_phase_s = 0.1;       // contact phases shorter than this are deleted
};

// Gaussian smoothing along time with a truncated (4 sigma), renormalized
// kernel and reflective padding. Shared by contact labeling and sync.
std::vector<double> gaussian_smooth(const std::vector<double>& series, double sigma_samples);

// vgrf[t][f][c] = pressure * area / (weight * g); N/cm^2 * cm^2 = N.
VgrfSequence pressure_to_vgrf(const PressureSequence& pressure, const InsoleLayout& layout,
                              const SubjectMeta& meta);

// Per-frame per-foot sum over the 16 cells. Row-major T*2.
std::vector<double> total_vgrf(const VgrfSequence& vgrf);

// The contact function: per foot, (1) smooth each cell series, (2) sum the
// heel/toe/all groups, (3) rescale heel+toe sums so they account for the full
// (smoothed) total, which discounts the gray cells, (4) threshold the
// rescaled sums at raw_threshold_bw, (5) zero labels wherever the unsmoothed
// per-foot total is below gate_threshold_bw, (6) delete contact runs shorter
// than ceil(min_phase_s * rate) frames.
//
// Thresholds compare with >=. The gate intentionally uses the raw total: a
// smoothed gate stretches short force pulses past the minimum-phase length,
// so sub-0.1 s pulses would survive deletion.
ContactSequence contact_labels(const VgrfSequence& vgrf, const InsoleLayout& layout,
                               const ContactParams& params);

// Steps 1-3 of the pipeline in isolation: smoothed, rescaled per-location
// sums, T*2*2 (frame, foot, location). These weight the contact anchors in
// footskate cleanup.
std::vector<double> rescaled_location_vgrf(const VgrfSequence& vgrf, const InsoleLayout& layout,
                                           const ContactParams& params);

// Per-frame per-foot center of pressure in the foot frame (meters); entries
// are absent where the per-foot total is below gate_bw.
struct CopSequence {
    std::vector<double> position;     // T*2*2 (frame, foot, xy)
    std::vector<std::uint8_t> valid;  // T*2
    int64_t frames = 0;

    bool is_valid(int64_t t, int foot) const { return valid[t * 2 + foot] != 0; }
    const double* at(int64_t t, int foot) const { return &position[(t * 2 + foot) * 2]; }
};

CopSequence center_of_pressure(const VgrfSequence& vgrf, const InsoleLayout& layout,
                               double gate_bw);

// Step 6 in isolation: delete runs of 1s shorter than min_frames. Exposed for
// the idempotence property and reuse.
void delete_short_runs(std::vector<std::uint8_t>& labels, int64_t frames, int channels,
                       int min_frames);

}  // namespace grfkit::grf
