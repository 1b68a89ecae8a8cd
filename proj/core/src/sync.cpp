#include "grfkit/sync.hpp"

#include <algorithm>
#include <cmath>

#include "grfkit/grf.hpp"
#include "grfkit/kinematics.hpp"

namespace grfkit::sync {

namespace {

constexpr double kFilterSigmaS = 0.02;

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
        m = 0.5 * (m + v[mid - 1]);
    }
    return m;
}

// Crop a flat series to frames [begin, end).
template <class T>
std::vector<T> crop(const std::vector<T>& v, int width, int64_t begin, int64_t end) {
    return std::vector<T>(v.begin() + begin * width, v.begin() + end * width);
}

}  // namespace

std::vector<double> mocap_vertical_accel(const PoseSequence& poses, const Skeleton& skeleton) {
    const int64_t frames = poses.frames();
    if (frames < 3) throw ValidationError("mocap_vertical_accel: needs at least 3 frames");
    const auto feet = skeleton.foot_joints.all();
    std::vector<double> height(frames);
    for (int64_t t = 0; t < frames; ++t) {
        double h = 0.0;
        for (int f : feet) h += poses.at(t, f)[1];
        height[t] = h / 4.0;
    }
    return kin::finite_difference(height, frames, 1, 2, poses.rate_hz);
}

std::vector<double> insole_accel_signal(const ImuSequence& imu) {
    const int64_t frames = imu.frames();
    std::vector<double> mag(frames);
    for (int64_t t = 0; t < frames; ++t) {
        double m = 0.0;
        for (int f = 0; f < 2; ++f) {
            const float* a = imu.at(t, f);
            m += std::sqrt(double(a[0]) * a[0] + double(a[1]) * a[1] + double(a[2]) * a[2]);
        }
        mag[t] = m / 2.0;
    }
    const double base = median(mag);
    for (double& m : mag) m -= base;
    return mag;
}

OffsetEstimate estimate_offset(const std::vector<double>& reference,
                               const std::vector<double>& moving, double rate_hz,
                               double max_lag_s) {
    const int64_t n_ref = static_cast<int64_t>(reference.size());
    const int64_t n_mov = static_cast<int64_t>(moving.size());
    const int64_t max_lag = static_cast<int64_t>(std::llround(max_lag_s * rate_hz));
    if (max_lag >= std::min(n_ref, n_mov))
        throw ValidationError("estimate_offset: max lag exceeds series length");

    const auto a = grf::gaussian_smooth(reference, kFilterSigmaS * rate_hz);
    const auto b = grf::gaussian_smooth(moving, kFilterSigmaS * rate_hz);

    OffsetEstimate best;
    best.peak_correlation = -2.0;
    for (int64_t lag = -max_lag; lag <= max_lag; ++lag) {
        // Overlap of a[t] with b[t + lag].
        const int64_t t0 = std::max<int64_t>(0, -lag);
        const int64_t t1 = std::min(n_ref, n_mov - lag);
        const int64_t n = t1 - t0;
        if (n < 2) continue;
        double ma = 0.0, mb = 0.0;
        for (int64_t t = t0; t < t1; ++t) {
            ma += a[t];
            mb += b[t + lag];
        }
        ma /= n;
        mb /= n;
        double sab = 0.0, saa = 0.0, sbb = 0.0;
        for (int64_t t = t0; t < t1; ++t) {
            const double da = a[t] - ma;
            const double db = b[t + lag] - mb;
            sab += da * db;
            saa += da * da;
            sbb += db * db;
        }
        if (saa <= 0.0 || sbb <= 0.0) continue;
        const double r = sab / std::sqrt(saa * sbb);
        const bool better = r > best.peak_correlation + 1e-12 ||
                            (std::abs(r - best.peak_correlation) <= 1e-12 &&
                             std::abs(lag) < std::abs(int64_t(best.offset)));
        if (better) {
            best.offset = static_cast<int>(lag);
            best.peak_correlation = r;
        }
    }
    if (best.peak_correlation < -1.5)
        throw ValidationError("estimate_offset: degenerate (zero-variance) input");
    best.confident = best.peak_correlation >= 0.5;
    return best;
}

std::pair<TimeWindow, TimeWindow> detect_jump_windows(const std::vector<double>& series,
                                                      double rate_hz) {
    const int64_t n = static_cast<int64_t>(series.size());
    if (n < static_cast<int64_t>(2.0 * rate_hz))
        throw ValidationError("detect_jump_windows: series shorter than 2 s");

    std::vector<double> absdev(n);
    const double med = median(series);
    for (int64_t t = 0; t < n; ++t) absdev[t] = std::abs(series[t] - med);
    const double mad = median(absdev);
    const double threshold = med + 6.0 * mad;

    // Cluster exceedances separated by < 0.5 s; keep each cluster's peak.
    const int64_t gap = static_cast<int64_t>(std::llround(0.5 * rate_hz));
    std::vector<int64_t> peaks;
    int64_t t = 0;
    while (t < n) {
        if (series[t] <= threshold || mad <= 0.0) {
            ++t;
            continue;
        }
        int64_t best = t, end = t;
        while (end < n && (end - best) <= gap) {
            if (series[end] > threshold && series[end] > series[best]) best = end;
            if (series[end] > threshold) t = end;
            ++end;
        }
        peaks.push_back(best);
        t = best + gap;
    }
    if (peaks.size() < 2)
        throw ValidationError("detect_jump_windows: fewer than two spikes");

    auto window = [&](int64_t peak) {
        const double ts = static_cast<double>(peak) / rate_hz;
        return TimeWindow{ts - 0.5, ts + 0.5};
    };
    return {window(peaks.front()), window(peaks.back())};
}

Take align_and_trim(const Take& take, int offset,
                    const std::pair<TimeWindow, TimeWindow>& pattern_windows) {
    // Insole-side rate is the target rate.
    double insole_rate = take.poses.rate_hz;
    if (take.pressure) insole_rate = take.pressure->rate_hz;
    else if (take.vgrf) insole_rate = take.vgrf->rate_hz;
    else if (take.imu_accel) insole_rate = take.imu_accel->rate_hz;

    Take out = take;
    if (take.poses.rate_hz != insole_rate) out.poses = kin::resample_poses(take.poses, insole_rate);
    if (take.local_motion && take.local_motion->rate_hz != insole_rate)
        out.local_motion = kin::resample_motion(*take.local_motion, insole_rate);

    // moving[t + offset] aligns with reference[t]: drop `offset` leading
    // insole samples (or -offset leading mocap samples).
    const int64_t mocap_skip = std::max<int64_t>(0, -static_cast<int64_t>(offset));
    const int64_t insole_skip = std::max<int64_t>(0, static_cast<int64_t>(offset));

    int64_t mocap_frames = out.poses.frames() - mocap_skip;
    int64_t insole_frames = mocap_frames;
    auto insole_len = [&](const auto& opt) {
        if (opt) insole_frames = std::min(insole_frames, opt->frames() - insole_skip);
    };
    insole_len(out.pressure);
    insole_len(out.vgrf);
    insole_len(out.contacts);
    insole_len(out.imu_accel);
    const int64_t overlap = std::min(mocap_frames, insole_frames);
    if (overlap < 1) throw ValidationError("align_and_trim: empty overlap");

    // Keep the span strictly between the two pattern windows.
    const auto& [w1, w2] = pattern_windows;
    int64_t begin = 0, end = overlap;
    if (w1.end_s > w1.begin_s || w2.end_s > w2.begin_s) {
        begin = std::max<int64_t>(0, static_cast<int64_t>(std::ceil(w1.end_s * insole_rate)));
        end = std::min<int64_t>(overlap,
                                static_cast<int64_t>(std::floor(w2.begin_s * insole_rate)));
    }
    if (end <= begin) throw ValidationError("align_and_trim: empty overlap after trimming");

    out.poses.positions = crop(out.poses.positions, out.poses.joints * 3, mocap_skip + begin,
                               mocap_skip + end);
    if (out.local_motion) {
        auto& m = *out.local_motion;
        m.rotations = crop(m.rotations, m.joints * 4, mocap_skip + begin, mocap_skip + end);
        m.root_translation = crop(m.root_translation, 3, mocap_skip + begin, mocap_skip + end);
    }
    if (out.pressure)
        out.pressure->values =
            crop(out.pressure->values, 2 * kCellsPerFoot, insole_skip + begin, insole_skip + end);
    if (out.vgrf)
        out.vgrf->values =
            crop(out.vgrf->values, 2 * kCellsPerFoot, insole_skip + begin, insole_skip + end);
    if (out.contacts)
        out.contacts->labels = crop(out.contacts->labels, 4, insole_skip + begin, insole_skip + end);
    if (out.imu_accel)
        out.imu_accel->values = crop(out.imu_accel->values, 6, insole_skip + begin, insole_skip + end);

    out.synchronized = true;
    return out;
}

}  // namespace grfkit::sync
