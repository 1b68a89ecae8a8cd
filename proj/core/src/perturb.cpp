#include "grfkit/perturb.hpp"

#include <algorithm>
#include <cstring>
#include <map>

#include "grfkit/geometry.hpp"

namespace grfkit::perturb {

PoseSequence add_noise(const PoseSequence& poses, double sigma_m, RngStream& rng) {
    if (sigma_m < 0.0) throw ValidationError("add_noise: sigma must be nonnegative");
    PoseSequence out = poses;
    if (sigma_m == 0.0) return out;
    for (auto& p : out.positions) p = static_cast<float>(p + rng.normal() * sigma_m);
    return out;
}

namespace {

// Contact pattern of one foot over a window, packed for map keys.
std::string foot_pattern(const ContactSequence& contacts, int64_t start, int frames, int foot) {
    std::string key(static_cast<size_t>(frames) * 2, '\0');
    for (int64_t t = 0; t < frames; ++t) {
        key[t * 2 + 0] = static_cast<char>(contacts.at(start + t, foot, 0));
        key[t * 2 + 1] = static_cast<char>(contacts.at(start + t, foot, 1));
    }
    return key;
}

}  // namespace

std::vector<BlendPair> mine_blend_pairs(const std::vector<const Take*>& takes,
                                        int window_frames, int stride) {
    if (window_frames < 1 || stride < 1)
        throw ValidationError("mine_blend_pairs: window and stride must be positive");
    struct WindowId {
        int take;
        int64_t start;
    };
    std::vector<BlendPair> pairs;
    for (int foot = 0; foot < 2; ++foot) {
        std::map<std::string, std::vector<WindowId>> buckets;
        for (size_t i = 0; i < takes.size(); ++i) {
            const Take* take = takes[i];
            if (!take->contacts) throw ValidationError("mine_blend_pairs: contacts required");
            const int64_t frames = take->contacts->frames();
            for (int64_t start = 0; start + window_frames <= frames; start += stride)
                buckets[foot_pattern(*take->contacts, start, window_frames, foot)].push_back(
                    {static_cast<int>(i), start});
        }
        for (const auto& [key, windows] : buckets) {
            // Skip constant patterns (all-off or all-on): they carry no phase
            // information, and an all-off match gives no footskate ground
            // truth for the foot at all.
            if (key.find(char(1)) == std::string::npos ||
                key.find(char(0)) == std::string::npos)
                continue;
            for (size_t a = 0; a < windows.size(); ++a) {
                for (size_t b = a + 1; b < windows.size(); ++b) {
                    pairs.push_back({windows[a].take, windows[b].take, windows[a].start,
                                     windows[b].start, foot});
                }
            }
        }
    }
    // Postcondition audit: re-check the equality predicate.
    for (const auto& p : pairs) {
        const auto pa = foot_pattern(*takes[p.take_a]->contacts, p.start_a, window_frames, p.foot);
        const auto pb = foot_pattern(*takes[p.take_b]->contacts, p.start_b, window_frames, p.foot);
        if (pa != pb) throw ValidationError("mine_blend_pairs: internal pattern mismatch");
    }
    std::sort(pairs.begin(), pairs.end(), [](const BlendPair& x, const BlendPair& y) {
        return std::tie(x.foot, x.take_a, x.start_a, x.take_b, x.start_b) <
               std::tie(y.foot, y.take_a, y.start_a, y.take_b, y.start_b);
    });
    return pairs;
}

LocalMotion blend(const LocalMotion& a, const LocalMotion& b, const std::vector<double>& weights) {
    if (a.frames() != b.frames() || a.joints != b.joints)
        throw ValidationError("blend: length or topology mismatch");
    if (weights.size() != static_cast<size_t>(a.frames()))
        throw ValidationError("blend: weight count mismatch");
    LocalMotion out = a;
    const int64_t frames = a.frames();
    for (int64_t t = 0; t < frames; ++t) {
        const double w = std::clamp(weights[t], 0.0, 1.0);
        for (int d = 0; d < 3; ++d)
            out.root(t)[d] = static_cast<float>(a.root(t)[d] + (b.root(t)[d] - a.root(t)[d]) * w);
        for (int j = 0; j < a.joints; ++j) {
            const Quat qa = Quat::from(a.quat(t, j));
            const Quat qb = Quat::from(b.quat(t, j));
            Quat::slerp(qa, qb, w).store(out.quat(t, j));
        }
    }
    return out;
}

std::vector<double> smoothstep_weights(int64_t frames) {
    std::vector<double> w(frames);
    for (int64_t t = 0; t < frames; ++t) {
        const double u = frames > 1 ? double(t) / double(frames - 1) : 0.0;
        w[t] = u * u * (3.0 - 2.0 * u);
    }
    return w;
}

std::vector<double> linear_weights(int64_t frames) {
    std::vector<double> w(frames);
    for (int64_t t = 0; t < frames; ++t)
        w[t] = frames > 1 ? double(t) / double(frames - 1) : 0.0;
    return w;
}

LocalMotion reroot_horizontal(const LocalMotion& motion) {
    LocalMotion out = motion;
    if (motion.frames() == 0) return out;
    const float x0 = motion.root(0)[0], z0 = motion.root(0)[2];
    for (int64_t t = 0; t < motion.frames(); ++t) {
        out.root(t)[0] -= x0;
        out.root(t)[2] -= z0;
    }
    return out;
}

}  // namespace grfkit::perturb
