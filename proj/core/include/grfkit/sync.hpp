#pragma once

#include "grfkit/types.hpp"

namespace grfkit::sync {

// Second derivative of the mean foot-joint height, m/s^2. T entries.
std::vector<double> mocap_vertical_accel(const PoseSequence& poses, const Skeleton& skeleton);

// Mean insole acceleration magnitude minus its median baseline. T entries.
std::vector<double> insole_accel_signal(const ImuSequence& imu);

struct OffsetEstimate {
    int offset = 0;              // samples: moving[t + offset] aligns with reference[t]
    double peak_correlation = 0; // normalized cross-correlation at the argmax
    bool confident = false;      // peak_correlation >= 0.5
};

// Argmax over integer lags in [-max_lag, +max_lag] of the normalized
// cross-correlation between the two series (same rate). Ties break toward the
// smallest |lag|. Both series are Gaussian low-pass filtered (sigma 0.02 s)
// before correlating.
OffsetEstimate estimate_offset(const std::vector<double>& reference,
                               const std::vector<double>& moving, double rate_hz,
                               double max_lag_s);

struct TimeWindow {
    double begin_s = 0;
    double end_s = 0;
};

// Locates the first and last spike exceeding median + 6*MAD and returns
// +-0.5 s windows around them. Spikes closer than 0.5 s are one cluster;
// fewer than two clusters is an error.
std::pair<TimeWindow, TimeWindow> detect_jump_windows(const std::vector<double>& series,
                                                      double rate_hz);

// Shifts the insole-side series by `offset` samples, crops everything to the
// common overlap, removes the two jump-pattern windows (keeping the span
// strictly between them), resamples motion to the insole rate, and marks the
// take synchronized. Windows are in the post-shift common timeline.
Take align_and_trim(const Take& take, int offset,
                    const std::pair<TimeWindow, TimeWindow>& pattern_windows);

}  // namespace grfkit::sync
