#pragma once

#include "grfkit/autodiff.hpp"
#include "grfkit/rng.hpp"

namespace grfkit::nn {

// Compares reverse-mode gradients against central finite differences.
//
// The builder constructs a scalar function on a fresh tape from the given
// leaf values and must be precision-generic:
//
//   auto build = []<class S>(Tape<S>& tape, const std::vector<TensorData<S>>& leaves,
//                            std::vector<int>& leaf_ids) -> int { ... };
//
// Finite differences always run in f64 (h = 1e-5); reverse-mode gradients run
// in the requested precision. Up to `samples_per_leaf` randomly chosen
// components per leaf are probed. Returns the max relative error with
// denominator max(|ad|, |fd|, 1e-3).
struct GradCheckResult {
    double max_rel_error = 0.0;
    int probes = 0;
};

namespace detail {

template <class Builder, class S>
std::vector<TensorData<S>> run_backward(Builder&& build,
                                        const std::vector<TensorData<S>>& leaves) {
    Tape<S> tape;
    std::vector<int> ids;
    const int loss = build(tape, leaves, ids);
    tape.backward(loss);
    std::vector<TensorData<S>> grads;
    grads.reserve(ids.size());
    for (int id : ids) {
        tape.ensure_grad(id);
        grads.push_back(tape.grad(id));
    }
    return grads;
}

template <class Builder>
double eval_scalar(Builder&& build, const std::vector<TensorData<double>>& leaves) {
    Tape<double> tape;
    std::vector<int> ids;
    const int loss = build(tape, leaves, ids);
    return tape.val(loss).v[0];
}

}  // namespace detail

template <class Builder>
GradCheckResult grad_check(Builder&& build, const std::vector<TensorData<double>>& base_leaves,
                           bool f32_reverse_mode, int samples_per_leaf, RngStream& rng,
                           double fd_step = 1e-5) {
    // Reverse-mode gradients in the requested precision.
    std::vector<TensorData<double>> ad_grads;
    if (f32_reverse_mode) {
        std::vector<TensorData<float>> leaves32;
        leaves32.reserve(base_leaves.size());
        for (const auto& l : base_leaves) leaves32.push_back(l.template cast<float>());
        for (auto& g : detail::run_backward(build, leaves32))
            ad_grads.push_back(g.template cast<double>());
    } else {
        ad_grads = detail::run_backward(build, base_leaves);
    }

    GradCheckResult result;
    for (size_t leaf = 0; leaf < base_leaves.size(); ++leaf) {
        const int64_t n = base_leaves[leaf].size();
        const int samples = static_cast<int>(std::min<int64_t>(samples_per_leaf, n));
        for (int s = 0; s < samples; ++s) {
            const int64_t idx = static_cast<int64_t>(rng.below(static_cast<std::uint64_t>(n)));
            auto plus = base_leaves;
            auto minus = base_leaves;
            plus[leaf].v[idx] += fd_step;
            minus[leaf].v[idx] -= fd_step;
            const double fd =
                (detail::eval_scalar(build, plus) - detail::eval_scalar(build, minus)) /
                (2.0 * fd_step);
            const double ad = ad_grads[leaf].v[idx];
            const double denom = std::max({std::abs(ad), std::abs(fd), 1e-3});
            result.max_rel_error = std::max(result.max_rel_error, std::abs(ad - fd) / denom);
            ++result.probes;
        }
    }
    return result;
}

}  // namespace grfkit::nn
