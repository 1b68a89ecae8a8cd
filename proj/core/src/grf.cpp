#include "grfkit/grf.hpp"

#include <cmath>

namespace grfkit::grf {

namespace {

constexpr double kRescaleEps = 1e-8;  // BW; below this both group sums are zeroed

// Reflect an index into [0, n): mirror about the edge samples (n == 1 maps
// everything to 0).
int64_t reflect_index(int64_t i, int64_t n) {
    if (n == 1) return 0;
    const int64_t period = 2 * (n - 1);
    i = std::abs(i) % period;
    return i < n ? i : period - i;
}

}  // namespace

std::vector<double> gaussian_smooth(const std::vector<double>& series, double sigma_samples) {
    if (sigma_samples <= 0.0) return series;
    const int64_t n = static_cast<int64_t>(series.size());
    if (n == 0) return series;

    const int64_t radius = std::max<int64_t>(1, static_cast<int64_t>(std::ceil(4.0 * sigma_samples)));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int64_t k = -radius; k <= radius; ++k) {
        const double w = std::exp(-0.5 * (k / sigma_samples) * (k / sigma_samples));
        kernel[k + radius] = w;
        sum += w;
    }
    for (double& w : kernel) w /= sum;

    std::vector<double> out(n);
    for (int64_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int64_t k = -radius; k <= radius; ++k)
            acc += kernel[k + radius] * series[reflect_index(i + k, n)];
        out[i] = acc;
    }
    return out;
}

VgrfSequence pressure_to_vgrf(const PressureSequence& pressure, const InsoleLayout& layout,
                              const SubjectMeta& meta) {
    if (!(meta.weight_kg > 0.f)) throw ValidationError("pressure_to_vgrf: weight must be positive");
    const auto layout_report = validate_layout(layout);
    if (!layout_report.empty())
        throw ValidationError("pressure_to_vgrf: " + layout_report.front());

    VgrfSequence out;
    out.rate_hz = pressure.rate_hz;
    out.values.resize(pressure.values.size());
    const double inv_bw = 1.0 / (static_cast<double>(meta.weight_kg) * kGravity);
    const int64_t frames = pressure.frames();
    for (int64_t t = 0; t < frames; ++t) {
        for (int f = 0; f < 2; ++f) {
            for (int c = 0; c < kCellsPerFoot; ++c) {
                const double p = pressure.at(t, f, c);
                if (p < 0.0) throw ValidationError("pressure_to_vgrf: negative pressure");
                out.at(t, f, c) = static_cast<float>(p * layout.cells[c].area_cm2 * inv_bw);
            }
        }
    }
    return out;
}

std::vector<double> total_vgrf(const VgrfSequence& vgrf) {
    const int64_t frames = vgrf.frames();
    std::vector<double> out(static_cast<size_t>(frames) * 2, 0.0);
    for (int64_t t = 0; t < frames; ++t)
        for (int f = 0; f < 2; ++f) {
            double s = 0.0;
            for (int c = 0; c < kCellsPerFoot; ++c) s += vgrf.at(t, f, c);
            out[t * 2 + f] = s;
        }
    return out;
}

void delete_short_runs(std::vector<std::uint8_t>& labels, int64_t frames, int channels,
                       int min_frames) {
    for (int ch = 0; ch < channels; ++ch) {
        int64_t t = 0;
        while (t < frames) {
            if (labels[t * channels + ch] == 0) {
                ++t;
                continue;
            }
            int64_t end = t;
            while (end < frames && labels[end * channels + ch] == 1) ++end;
            if (end - t < min_frames)
                for (int64_t k = t; k < end; ++k) labels[k * channels + ch] = 0;
            t = end;
        }
    }
}

std::vector<double> rescaled_location_vgrf(const VgrfSequence& vgrf, const InsoleLayout& layout,
                                           const ContactParams& params) {
    const int64_t frames = vgrf.frames();
    const double sigma = params.smooth_sigma_s * vgrf.rate_hz;
    const auto heel_cells = layout.group_cells(CellGroup::heel);
    const auto toe_cells = layout.group_cells(CellGroup::toe);

    std::vector<double> out(static_cast<size_t>(frames) * 4, 0.0);
    std::vector<double> cell_series(frames);
    for (int f = 0; f < 2; ++f) {
        // Smooth each of the 16 cell components along time.
        std::vector<std::vector<double>> smoothed(kCellsPerFoot);
        for (int c = 0; c < kCellsPerFoot; ++c) {
            for (int64_t t = 0; t < frames; ++t) cell_series[t] = vgrf.at(t, f, c);
            smoothed[c] = gaussian_smooth(cell_series, sigma);
        }
        for (int64_t t = 0; t < frames; ++t) {
            double s_heel = 0.0, s_toe = 0.0, s_all = 0.0;
            for (int c : heel_cells) s_heel += smoothed[c][t];
            for (int c : toe_cells) s_toe += smoothed[c][t];
            for (int c = 0; c < kCellsPerFoot; ++c) s_all += smoothed[c][t];
            // Rescale so heel+toe carry the full total; discounts gray cells.
            const double denom = s_heel + s_toe;
            if (denom > kRescaleEps) {
                const double r = s_all / denom;
                s_heel *= r;
                s_toe *= r;
            } else {
                s_heel = 0.0;
                s_toe = 0.0;
            }
            out[(t * 2 + f) * 2 + 0] = s_heel;
            out[(t * 2 + f) * 2 + 1] = s_toe;
        }
    }
    return out;
}

ContactSequence contact_labels(const VgrfSequence& vgrf, const InsoleLayout& layout,
                               const ContactParams& params) {
    if (!(vgrf.rate_hz > 0.f)) throw ValidationError("contact_labels: rate must be positive");
    const int64_t frames = vgrf.frames();
    const auto location_sums = rescaled_location_vgrf(vgrf, layout, params);
    const auto raw_totals = total_vgrf(vgrf);

    ContactSequence out;
    out.rate_hz = vgrf.rate_hz;
    out.labels.assign(static_cast<size_t>(frames) * 4, 0);
    for (int64_t t = 0; t < frames; ++t) {
        for (int f = 0; f < 2; ++f) {
            // Gate on the unsmoothed per-foot total (all 16 cells).
            const bool gated = raw_totals[t * 2 + f] < params.gate_threshold_bw;
            for (int loc = 0; loc < 2; ++loc) {
                const bool on =
                    !gated && location_sums[(t * 2 + f) * 2 + loc] >= params.raw_threshold_bw;
                out.at(t, f, loc) = on ? 1 : 0;
            }
        }
    }

    const int min_frames =
        static_cast<int>(std::ceil(params.min_phase_s * static_cast<double>(vgrf.rate_hz)));
    delete_short_runs(out.labels, frames, 4, min_frames);
    return out;
}

CopSequence center_of_pressure(const VgrfSequence& vgrf, const InsoleLayout& layout,
                               double gate_bw) {
    if (gate_bw < 0.0) throw ValidationError("center_of_pressure: gate must be nonnegative");
    const int64_t frames = vgrf.frames();
    CopSequence out;
    out.frames = frames;
    out.position.assign(static_cast<size_t>(frames) * 4, 0.0);
    out.valid.assign(static_cast<size_t>(frames) * 2, 0);
    for (int64_t t = 0; t < frames; ++t) {
        for (int f = 0; f < 2; ++f) {
            double total = 0.0, cx = 0.0, cy = 0.0;
            for (int c = 0; c < kCellsPerFoot; ++c) {
                const double v = vgrf.at(t, f, c);
                total += v;
                cx += v * layout.cells[c].position_m[0];
                cy += v * layout.cells[c].position_m[1];
            }
            if (total >= gate_bw && total > 0.0) {
                out.valid[t * 2 + f] = 1;
                out.position[(t * 2 + f) * 2 + 0] = cx / total;
                out.position[(t * 2 + f) * 2 + 1] = cy / total;
            }
        }
    }
    return out;
}

}  // namespace grfkit::grf
