#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "grfkit/geometry.hpp"
#include "grfkit/rng.hpp"
#include "grfkit/types.hpp"

namespace grfkit::nn {

// Minimal tape-based reverse-mode autodiff over dense tensors, templated on
// the scalar type: float is the training precision, double serves gradient
// checking and the IK solve. The op set is exactly what the estimator
// variants and the IK energy need. Matrix products are implemented
// out-of-line (Eigen) and explicitly instantiated for float/double.

template <class S>
struct TensorData {
    std::vector<int64_t> shape;
    std::vector<S> v;

    TensorData() = default;
    explicit TensorData(std::vector<int64_t> s, S fill = S(0))
        : shape(std::move(s)),
          v(static_cast<size_t>(std::accumulate(shape.begin(), shape.end(), int64_t(1),
                                                std::multiplies<int64_t>())),
            fill) {}

    int64_t size() const { return static_cast<int64_t>(v.size()); }
    int64_t dim(int i) const { return shape[static_cast<size_t>(i)]; }

    template <class T>
    TensorData<T> cast() const {
        TensorData<T> out;
        out.shape = shape;
        out.v.assign(v.begin(), v.end());
        return out;
    }
};

namespace detail {
// c[m,n] (+)= op(a) * op(b); row-major buffers.
template <class S>
void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k, const S* a, const S* b,
          S* c, bool accumulate);
}  // namespace detail

template <class S>
class Tape {
public:
    struct Node {
        TensorData<S> val;
        TensorData<S> grad;  // allocated on demand during backward
        bool needs_grad = false;
        std::function<void(Tape&)> back;  // pulls this node's grad into its parents
    };

    int constant(TensorData<S> t) { return push(std::move(t), false); }
    int leaf(TensorData<S> t) { return push(std::move(t), true); }

    const TensorData<S>& val(int id) const { return nodes_[id].val; }
    TensorData<S>& grad(int id) { return nodes_[id].grad; }
    bool needs_grad(int id) const { return nodes_[id].needs_grad; }

    void ensure_grad(int id) {
        auto& n = nodes_[id];
        if (n.grad.v.empty()) n.grad = TensorData<S>(n.val.shape, S(0));
    }

    int push(TensorData<S> val, bool needs_grad) {
        nodes_.push_back(Node{std::move(val), {}, needs_grad, nullptr});
        return static_cast<int>(nodes_.size()) - 1;
    }

    void set_back(int id, std::function<void(Tape&)> back) { nodes_[id].back = std::move(back); }

    bool any_needs(std::initializer_list<int> ids) const {
        for (int id : ids)
            if (nodes_[id].needs_grad) return true;
        return false;
    }

    // Reverse sweep from a scalar root. Nodes were created in topological
    // order, so one reverse pass suffices.
    void backward(int root) {
        if (nodes_[root].val.size() != 1)
            throw ValidationError("backward: root must be a scalar");
        ensure_grad(root);
        nodes_[root].grad.v[0] = S(1);
        for (int id = root; id >= 0; --id) {
            auto& n = nodes_[id];
            if (n.back && n.needs_grad && !n.grad.v.empty()) n.back(*this);
        }
    }

    size_t node_count() const { return nodes_.size(); }

private:
    std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Elementwise and reduction ops

template <class S>
int add(Tape<S>& tape, int a, int b) {
    if (tape.val(a).shape != tape.val(b).shape) throw ValidationError("add: shape mismatch");
    TensorData<S> out = tape.val(a);
    const auto& bv = tape.val(b).v;
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += bv[i];
    const int id = tape.push(std::move(out), tape.any_needs({a, b}));
    if (tape.needs_grad(id))
        tape.set_back(id, [a, b, id](Tape<S>& t) {
            const auto& g = t.grad(id).v;
            for (int p : {a, b}) {
                if (!t.needs_grad(p)) continue;
                t.ensure_grad(p);
                auto& gp = t.grad(p).v;
                for (size_t i = 0; i < g.size(); ++i) gp[i] += g[i];
            }
        });
    return id;
}

template <class S>
int sub(Tape<S>& tape, int a, int b) {
    if (tape.val(a).shape != tape.val(b).shape) throw ValidationError("sub: shape mismatch");
    TensorData<S> out = tape.val(a);
    const auto& bv = tape.val(b).v;
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] -= bv[i];
    const int id = tape.push(std::move(out), tape.any_needs({a, b}));
    if (tape.needs_grad(id))
        tape.set_back(id, [a, b, id](Tape<S>& t) {
            const auto& g = t.grad(id).v;
            if (t.needs_grad(a)) {
                t.ensure_grad(a);
                auto& ga = t.grad(a).v;
                for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
            }
            if (t.needs_grad(b)) {
                t.ensure_grad(b);
                auto& gb = t.grad(b).v;
                for (size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
            }
        });
    return id;
}

template <class S>
int mul(Tape<S>& tape, int a, int b) {
    if (tape.val(a).shape != tape.val(b).shape) throw ValidationError("mul: shape mismatch");
    TensorData<S> out = tape.val(a);
    const auto& bv = tape.val(b).v;
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] *= bv[i];
    const int id = tape.push(std::move(out), tape.any_needs({a, b}));
    if (tape.needs_grad(id))
        tape.set_back(id, [a, b, id](Tape<S>& t) {
            const auto& g = t.grad(id).v;
            if (t.needs_grad(a)) {
                t.ensure_grad(a);
                auto& ga = t.grad(a).v;
                const auto& bv2 = t.val(b).v;
                for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv2[i];
            }
            if (t.needs_grad(b)) {
                t.ensure_grad(b);
                auto& gb = t.grad(b).v;
                const auto& av = t.val(a).v;
                for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
            }
        });
    return id;
}

template <class S>
int scale(Tape<S>& tape, int x, double factor) {
    TensorData<S> out = tape.val(x);
    const S f = static_cast<S>(factor);
    for (auto& e : out.v) e *= f;
    const int id = tape.push(std::move(out), tape.needs_grad(x));
    if (tape.needs_grad(id))
        tape.set_back(id, [x, id, f](Tape<S>& t) {
            const auto& g = t.grad(id).v;
            t.ensure_grad(x);
            auto& gx = t.grad(x).v;
            for (size_t i = 0; i < g.size(); ++i) gx[i] += f * g[i];
        });
    return id;
}

template <class S>
int sum_all(Tape<S>& tape, int x) {
    TensorData<S> out({1});
    S acc = S(0);
    for (S e : tape.val(x).v) acc += e;
    out.v[0] = acc;
    const int id = tape.push(std::move(out), tape.needs_grad(x));
    if (tape.needs_grad(id))
        tape.set_back(id, [x, id](Tape<S>& t) {
            const S g = t.grad(id).v[0];
            t.ensure_grad(x);
            for (auto& e : t.grad(x).v) e += g;
        });
    return id;
}

template <class S>
int mean_all(Tape<S>& tape, int x) {
    const int64_t n = tape.val(x).size();
    return scale(tape, sum_all(tape, x), 1.0 / static_cast<double>(n));
}

template <class S>
int add_scalars(Tape<S>& tape, const std::vector<int>& ids) {
    if (ids.empty()) throw ValidationError("add_scalars: empty list");
    TensorData<S> out({1});
    bool ng = false;
    for (int i : ids) {
        out.v[0] += tape.val(i).v[0];
        ng = ng || tape.needs_grad(i);
    }
    const int id = tape.push(std::move(out), ng);
    if (ng)
        tape.set_back(id, [ids, id](Tape<S>& t) {
            const S g = t.grad(id).v[0];
            for (int i : ids) {
                if (!t.needs_grad(i)) continue;
                t.ensure_grad(i);
                t.grad(i).v[0] += g;
            }
        });
    return id;
}

// ---------------------------------------------------------------------------
// Activations

template <class S>
int elu(Tape<S>& tape, int x) {
    TensorData<S> out = tape.val(x);
    for (auto& e : out.v) e = e > S(0) ? e : std::expm1(e);
    const int id = tape.push(std::move(out), tape.needs_grad(x));
    if (tape.needs_grad(id))
        tape.set_back(id, [x, id](Tape<S>& t) {
            const auto& g = t.grad(id).v;
            const auto& y = t.val(id).v;
            t.ensure_grad(x);
            auto& gx = t.grad(x).v;
            for (size_t i = 0; i < g.size(); ++i)
                gx[i] += g[i] * (y[i] > S(0) ? S(1) : y[i] + S(1));
        });
    return id;
}

template <class S>
int relu(Tape<S>& tape, int x) {
    TensorData<S> out = tape.val(x);
    for (auto& e : out.v) e = e > S(0) ? e : S(0);
    const int id = tape.push(std::move(out), tape.needs_grad(x));
    if (tape.needs_grad(id))
        tape.set_back(id, [x, id](Tape<S>& t) {
            const auto& g = t.grad(id).v;
            const auto& xv = t.val(x).v;
            t.ensure_grad(x);
            auto& gx = t.grad(x).v;
            for (size_t i = 0; i < g.size(); ++i)
                if (xv[i] > S(0)) gx[i] += g[i];
        });
    return id;
}

template <class S>
S stable_sigmoid(S x) {
    if (x >= S(0)) return S(1) / (S(1) + std::exp(-x));
    const S e = std::exp(x);
    return e / (S(1) + e);
}

template <class S>
int softplus(Tape<S>& tape, int x) {
    TensorData<S> out = tape.val(x);
    for (auto& e : out.v) {
        const S m = e > S(0) ? e : S(0);
        e = m + std::log1p(std::exp(-std::abs(e)));
    }
    const int id = tape.push(std::move(out), tape.needs_grad(x));
    if (tape.needs_grad(id))
        tape.set_back(id, [x, id](Tape<S>& t) {
            const auto& g = t.grad(id).v;
            const auto& xv = t.val(x).v;
            t.ensure_grad(x);
            auto& gx = t.grad(x).v;
            for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * stable_sigmoid(xv[i]);
        });
    return id;
}

// Inverted dropout: keeps eval forwards rescale-free. Train-mode only; the
// mask is drawn from the provided stream at build time.
template <class S>
int dropout(Tape<S>& tape, int x, double p, RngStream& rng) {
    if (p < 0.0 || p >= 1.0) throw ValidationError("dropout: p must be in [0, 1)");
    if (p == 0.0) return x;
    std::vector<S> mask(tape.val(x).v.size());
    const S keep_scale = static_cast<S>(1.0 / (1.0 - p));
    for (auto& m : mask) m = rng.uniform() < p ? S(0) : keep_scale;
    TensorData<S> out = tape.val(x);
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] *= mask[i];
    const int id = tape.push(std::move(out), tape.needs_grad(x));
    if (tape.needs_grad(id))
        tape.set_back(id, [x, id, mask = std::move(mask)](Tape<S>& t) {
            const auto& g = t.grad(id).v;
            t.ensure_grad(x);
            auto& gx = t.grad(x).v;
            for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * mask[i];
        });
    return id;
}

// ---------------------------------------------------------------------------
// Dense layers

// x [T, Ci] * w [Ci, Co] + b [Co] -> [T, Co]
template <class S>
int linear(Tape<S>& tape, int x, int w, int b) {
    const auto& xv = tape.val(x);
    const auto& wv = tape.val(w);
    const auto& bv = tape.val(b);
    if (xv.shape.size() != 2 || wv.shape.size() != 2 || xv.dim(1) != wv.dim(0) ||
        bv.size() != wv.dim(1))
        throw ValidationError("linear: shape mismatch");
    const int64_t rows = xv.dim(0), ci = xv.dim(1), co = wv.dim(1);

    TensorData<S> out({rows, co});
    detail::gemm<S>(false, false, rows, co, ci, xv.v.data(), wv.v.data(), out.v.data(), false);
    for (int64_t t = 0; t < rows; ++t)
        for (int64_t c = 0; c < co; ++c) out.v[t * co + c] += bv.v[c];

    const int id = tape.push(std::move(out), tape.any_needs({x, w, b}));
    if (tape.needs_grad(id))
        tape.set_back(id, [x, w, b, id, rows, ci, co](Tape<S>& t) {
            const auto& g = t.grad(id).v;
            if (t.needs_grad(w)) {
                t.ensure_grad(w);
                detail::gemm<S>(true, false, ci, co, rows, t.val(x).v.data(), g.data(),
                                t.grad(w).v.data(), true);
            }
            if (t.needs_grad(b)) {
                t.ensure_grad(b);
                auto& gb = t.grad(b).v;
                for (int64_t r = 0; r < rows; ++r)
                    for (int64_t c = 0; c < co; ++c) gb[c] += g[r * co + c];
            }
            if (t.needs_grad(x)) {
                t.ensure_grad(x);
                detail::gemm<S>(false, true, rows, ci, co, g.data(), t.val(w).v.data(),
                                t.grad(x).v.data(), true);
            }
        });
    return id;
}

namespace detail {

// Gather replicate-padded frame patches: out [T, K*Ci].
template <class S>
void im2col_replicate(const S* x, int64_t frames, int64_t ci, int kernel, S* out) {
    const int radius = kernel / 2;
    for (int64_t t = 0; t < frames; ++t) {
        for (int k = 0; k < kernel; ++k) {
            int64_t src = t + k - radius;
            src = src < 0 ? 0 : (src >= frames ? frames - 1 : src);
            const S* row = x + src * ci;
            S* dst = out + (t * kernel + k) * ci;
            for (int64_t c = 0; c < ci; ++c) dst[c] = row[c];
        }
    }
}

}  // namespace detail

// Temporal convolution preserving length: x [T, Ci], w [K*Ci, Co], b [Co]
// -> [T, Co], replicate padding of K/2 frames per side.
template <class S>
int conv1d(Tape<S>& tape, int x, int w, int b, int kernel) {
    const auto& xv = tape.val(x);
    const auto& wv = tape.val(w);
    const auto& bv = tape.val(b);
    if (kernel < 1 || kernel % 2 == 0) throw ValidationError("conv1d: kernel must be odd");
    if (xv.shape.size() != 2 || wv.shape.size() != 2 || wv.dim(0) != kernel * xv.dim(1) ||
        bv.size() != wv.dim(1))
        throw ValidationError("conv1d: shape mismatch");
    const int64_t frames = xv.dim(0), ci = xv.dim(1), co = wv.dim(1);

    std::vector<S> patches(static_cast<size_t>(frames) * kernel * ci);
    detail::im2col_replicate(xv.v.data(), frames, ci, kernel, patches.data());

    TensorData<S> out({frames, co});
    detail::gemm<S>(false, false, frames, co, kernel * ci, patches.data(), wv.v.data(),
                    out.v.data(), false);
    for (int64_t t = 0; t < frames; ++t)
        for (int64_t c = 0; c < co; ++c) out.v[t * co + c] += bv.v[c];

    const int id = tape.push(std::move(out), tape.any_needs({x, w, b}));
    if (tape.needs_grad(id))
        tape.set_back(id, [x, w, b, id, frames, ci, co, kernel](Tape<S>& t) {
            const auto& g = t.grad(id).v;
            const int radius = kernel / 2;
            if (t.needs_grad(w)) {
                // Rebuild patches rather than retaining them across the step.
                std::vector<S> patches(static_cast<size_t>(frames) * kernel * ci);
                detail::im2col_replicate(t.val(x).v.data(), frames, ci, kernel, patches.data());
                t.ensure_grad(w);
                detail::gemm<S>(true, false, kernel * ci, co, frames, patches.data(), g.data(),
                                t.grad(w).v.data(), true);
            }
            if (t.needs_grad(b)) {
                t.ensure_grad(b);
                auto& gb = t.grad(b).v;
                for (int64_t r = 0; r < frames; ++r)
                    for (int64_t c = 0; c < co; ++c) gb[c] += g[r * co + c];
            }
            if (t.needs_grad(x)) {
                std::vector<S> gpatch(static_cast<size_t>(frames) * kernel * ci);
                detail::gemm<S>(false, true, frames, kernel * ci, co, g.data(),
                                t.val(w).v.data(), gpatch.data(), false);
                t.ensure_grad(x);
                auto& gx = t.grad(x).v;
                for (int64_t r = 0; r < frames; ++r) {
                    for (int k = 0; k < kernel; ++k) {
                        int64_t src = r + k - radius;
                        src = src < 0 ? 0 : (src >= frames ? frames - 1 : src);
                        const S* sp = gpatch.data() + (r * kernel + k) * ci;
                        S* dp = gx.data() + src * ci;
                        for (int64_t c = 0; c < ci; ++c) dp[c] += sp[c];
                    }
                }
            }
        });
    return id;
}

// ---------------------------------------------------------------------------
// Losses

// Mean over elements of (log1p(pred) - log1p(target))^2. Requires pred and
// target >= 0 (the +1 keeps the loss defined as components go to zero).
template <class S>
int msle_loss(Tape<S>& tape, int pred, const TensorData<S>& target) {
    const auto& pv = tape.val(pred);
    if (pv.shape != target.shape) throw ValidationError("msle_loss: shape mismatch");
    const int64_t n = pv.size();
    if (n == 0) throw ValidationError("msle_loss: empty input");
    double acc = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        if (pv.v[i] < S(0) || target.v[i] < S(0))
            throw ValidationError("msle_loss: negative input");
        const double d = std::log1p(double(pv.v[i])) - std::log1p(double(target.v[i]));
        acc += d * d;
    }
    TensorData<S> out({1});
    out.v[0] = static_cast<S>(acc / double(n));
    const int id = tape.push(std::move(out), tape.needs_grad(pred));
    if (tape.needs_grad(id))
        tape.set_back(id, [pred, id, target, n](Tape<S>& t) {
            const S g = t.grad(id).v[0];
            const auto& pv2 = t.val(pred).v;
            t.ensure_grad(pred);
            auto& gp = t.grad(pred).v;
            for (int64_t i = 0; i < n; ++i) {
                const S d = std::log1p(pv2[i]) - std::log1p(target.v[i]);
                gp[i] += g * S(2) * d / (S(n) * (S(1) + pv2[i]));
            }
        });
    return id;
}

// Numerically stable binary cross-entropy with logits; labels in {0,1}.
template <class S>
int bce_logits_loss(Tape<S>& tape, int logits, const TensorData<S>& labels) {
    const auto& zv = tape.val(logits);
    if (zv.shape != labels.shape) throw ValidationError("bce_logits_loss: shape mismatch");
    const int64_t n = zv.size();
    if (n == 0) throw ValidationError("bce_logits_loss: empty input");
    double acc = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        const double z = zv.v[i], c = labels.v[i];
        acc += std::max(z, 0.0) - z * c + std::log1p(std::exp(-std::abs(z)));
    }
    TensorData<S> out({1});
    out.v[0] = static_cast<S>(acc / double(n));
    const int id = tape.push(std::move(out), tape.needs_grad(logits));
    if (tape.needs_grad(id))
        tape.set_back(id, [logits, id, labels, n](Tape<S>& t) {
            const S g = t.grad(id).v[0];
            const auto& zv2 = t.val(logits).v;
            t.ensure_grad(logits);
            auto& gz = t.grad(logits).v;
            for (int64_t i = 0; i < n; ++i)
                gz[i] += g * (stable_sigmoid(zv2[i]) - labels.v[i]) / S(n);
        });
    return id;
}

// ---------------------------------------------------------------------------
// Quaternion / rigid-chain ops (used by the differentiable FK in cleanup)

// x [T, J, D] -> [T, D] picking joint j.
template <class S>
int slice_joint(Tape<S>& tape, int x, int j) {
    const auto& xv = tape.val(x);
    if (xv.shape.size() != 3) throw ValidationError("slice_joint: rank-3 input required");
    const int64_t frames = xv.dim(0), joints = xv.dim(1), d = xv.dim(2);
    if (j < 0 || j >= joints) throw ValidationError("slice_joint: index out of range");
    TensorData<S> out({frames, d});
    for (int64_t t = 0; t < frames; ++t)
        for (int64_t k = 0; k < d; ++k) out.v[t * d + k] = xv.v[(t * joints + j) * d + k];
    const int id = tape.push(std::move(out), tape.needs_grad(x));
    if (tape.needs_grad(id))
        tape.set_back(id, [x, id, j, frames, joints, d](Tape<S>& t) {
            const auto& g = t.grad(id).v;
            t.ensure_grad(x);
            auto& gx = t.grad(x).v;
            for (int64_t r = 0; r < frames; ++r)
                for (int64_t k = 0; k < d; ++k) gx[(r * joints + j) * d + k] += g[r * d + k];
        });
    return id;
}

// q [T, 4] -> q / |q| per frame.
template <class S>
int quat_normalize(Tape<S>& tape, int q) {
    const auto& qv = tape.val(q);
    if (qv.shape.back() != 4) throw ValidationError("quat_normalize: last dim must be 4");
    const int64_t frames = qv.size() / 4;
    TensorData<S> out = qv;
    for (int64_t t = 0; t < frames; ++t) {
        S* p = out.v.data() + t * 4;
        const S n = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3]);
        for (int k = 0; k < 4; ++k) p[k] /= n;
    }
    const int id = tape.push(std::move(out), tape.needs_grad(q));
    if (tape.needs_grad(id))
        tape.set_back(id, [q, id, frames](Tape<S>& t) {
            const auto& g = t.grad(id).v;
            const auto& y = t.val(id).v;
            const auto& xq = t.val(q).v;
            t.ensure_grad(q);
            auto& gq = t.grad(q).v;
            for (int64_t r = 0; r < frames; ++r) {
                const S* yr = y.data() + r * 4;
                const S* gr = g.data() + r * 4;
                const S* xr = xq.data() + r * 4;
                const S n = std::sqrt(xr[0] * xr[0] + xr[1] * xr[1] + xr[2] * xr[2] +
                                      xr[3] * xr[3]);
                const S dot = gr[0] * yr[0] + gr[1] * yr[1] + gr[2] * yr[2] + gr[3] * yr[3];
                for (int k = 0; k < 4; ++k) gq[r * 4 + k] += (gr[k] - dot * yr[k]) / n;
            }
        });
    return id;
}

// Hamilton product per frame: a, b [T, 4] -> [T, 4].
template <class S>
int quat_mul(Tape<S>& tape, int a, int b) {
    const auto& av = tape.val(a);
    const auto& bv = tape.val(b);
    if (av.shape != bv.shape || av.shape.back() != 4)
        throw ValidationError("quat_mul: [T,4] inputs required");
    const int64_t frames = av.size() / 4;
    TensorData<S> out(av.shape);
    for (int64_t t = 0; t < frames; ++t) {
        const S* p = av.v.data() + t * 4;
        const S* q = bv.v.data() + t * 4;
        S* o = out.v.data() + t * 4;
        o[0] = p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3];
        o[1] = p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2];
        o[2] = p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1];
        o[3] = p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0];
    }
    const int id = tape.push(std::move(out), tape.any_needs({a, b}));
    if (tape.needs_grad(id))
        tape.set_back(id, [a, b, id, frames](Tape<S>& t) {
            const auto& g = t.grad(id).v;
            const auto& av2 = t.val(a).v;
            const auto& bv2 = t.val(b).v;
            if (t.needs_grad(a)) t.ensure_grad(a);
            if (t.needs_grad(b)) t.ensure_grad(b);
            for (int64_t r = 0; r < frames; ++r) {
                const S* p = av2.data() + r * 4;
                const S* q = bv2.data() + r * 4;
                const S* gr = g.data() + r * 4;
                if (t.needs_grad(a)) {
                    S* ga = t.grad(a).v.data() + r * 4;
                    ga[0] += gr[0] * q[0] + gr[1] * q[1] + gr[2] * q[2] + gr[3] * q[3];
                    ga[1] += -gr[0] * q[1] + gr[1] * q[0] - gr[2] * q[3] + gr[3] * q[2];
                    ga[2] += -gr[0] * q[2] + gr[1] * q[3] + gr[2] * q[0] - gr[3] * q[1];
                    ga[3] += -gr[0] * q[3] - gr[1] * q[2] + gr[2] * q[1] + gr[3] * q[0];
                }
                if (t.needs_grad(b)) {
                    S* gb = t.grad(b).v.data() + r * 4;
                    gb[0] += gr[0] * p[0] + gr[1] * p[1] + gr[2] * p[2] + gr[3] * p[3];
                    gb[1] += -gr[0] * p[1] + gr[1] * p[0] + gr[2] * p[3] - gr[3] * p[2];
                    gb[2] += -gr[0] * p[2] - gr[1] * p[3] + gr[2] * p[0] + gr[3] * p[1];
                    gb[3] += -gr[0] * p[3] + gr[1] * p[2] - gr[2] * p[1] + gr[3] * p[0];
                }
            }
        });
    return id;
}

// Rotate one constant offset by each frame's quaternion:
// r = v + 2 u x (u x v + w v) with u the vector part. Matches the expanded
// Hamilton form exactly, so gradients are exact even off the unit sphere.
template <class S>
int quat_rotate_vec(Tape<S>& tape, int q, const Vec3& offset) {
    const auto& qv = tape.val(q);
    if (qv.shape.back() != 4) throw ValidationError("quat_rotate_vec: [T,4] input required");
    const int64_t frames = qv.size() / 4;
    const S vx = static_cast<S>(offset.x), vy = static_cast<S>(offset.y),
            vz = static_cast<S>(offset.z);
    TensorData<S> out({frames, 3});
    for (int64_t t = 0; t < frames; ++t) {
        const S* p = qv.v.data() + t * 4;
        const S w = p[0], ux = p[1], uy = p[2], uz = p[3];
        const S cx = uy * vz - uz * vy + w * vx;
        const S cy = uz * vx - ux * vz + w * vy;
        const S cz = ux * vy - uy * vx + w * vz;
        out.v[t * 3 + 0] = vx + S(2) * (uy * cz - uz * cy);
        out.v[t * 3 + 1] = vy + S(2) * (uz * cx - ux * cz);
        out.v[t * 3 + 2] = vz + S(2) * (ux * cy - uy * cx);
    }
    const int id = tape.push(std::move(out), tape.needs_grad(q));
    if (tape.needs_grad(id))
        tape.set_back(id, [q, id, vx, vy, vz, frames](Tape<S>& t) {
            const auto& g = t.grad(id).v;
            const auto& qv2 = t.val(q).v;
            t.ensure_grad(q);
            auto& gq = t.grad(q).v;
            for (int64_t r = 0; r < frames; ++r) {
                const S* p = qv2.data() + r * 4;
                const S w = p[0], ux = p[1], uy = p[2], uz = p[3];
                const S gx = g[r * 3 + 0], gy = g[r * 3 + 1], gz = g[r * 3 + 2];
                // c = u x v + w v
                const S cx = uy * vz - uz * vy + w * vx;
                const S cy = uz * vx - ux * vz + w * vy;
                const S cz = ux * vy - uy * vx + w * vz;
                // gw = 2 g . (u x v)
                gq[r * 4 + 0] += S(2) * (gx * (uy * vz - uz * vy) + gy * (uz * vx - ux * vz) +
                                         gz * (ux * vy - uy * vx));
                // gu = 2 (c x g) + 2 (u . v) g - 2 (g . v) u
                const S uv = ux * vx + uy * vy + uz * vz;
                const S gv = gx * vx + gy * vy + gz * vz;
                gq[r * 4 + 1] += S(2) * ((cy * gz - cz * gy) + uv * gx - gv * ux);
                gq[r * 4 + 2] += S(2) * ((cz * gx - cx * gz) + uv * gy - gv * uy);
                gq[r * 4 + 3] += S(2) * ((cx * gy - cy * gx) + uv * gz - gv * uz);
            }
        });
    return id;
}

// sum_t w[t] * |x[t] - anchor[t]|^2 for x [T, 3].
template <class S>
int weighted_sqdist(Tape<S>& tape, int x, const std::vector<S>& anchors,
                    const std::vector<S>& weights) {
    const auto& xv = tape.val(x);
    const int64_t frames = xv.dim(0);
    if (xv.shape.size() != 2 || xv.dim(1) != 3 ||
        anchors.size() != static_cast<size_t>(frames) * 3 ||
        weights.size() != static_cast<size_t>(frames))
        throw ValidationError("weighted_sqdist: shape mismatch");
    double acc = 0.0;
    for (int64_t t = 0; t < frames; ++t) {
        double d2 = 0.0;
        for (int k = 0; k < 3; ++k) {
            const double d = double(xv.v[t * 3 + k]) - double(anchors[t * 3 + k]);
            d2 += d * d;
        }
        acc += double(weights[t]) * d2;
    }
    TensorData<S> out({1});
    out.v[0] = static_cast<S>(acc);
    const int id = tape.push(std::move(out), tape.needs_grad(x));
    if (tape.needs_grad(id))
        tape.set_back(id, [x, id, anchors, weights, frames](Tape<S>& t) {
            const S g = t.grad(id).v[0];
            const auto& xv2 = t.val(x).v;
            t.ensure_grad(x);
            auto& gx = t.grad(x).v;
            for (int64_t r = 0; r < frames; ++r)
                for (int k = 0; k < 3; ++k)
                    gx[r * 3 + k] +=
                        g * S(2) * weights[r] * (xv2[r * 3 + k] - anchors[r * 3 + k]);
        });
    return id;
}

// Squared-angle deviation from reference rotations, summed over frames:
// 4 * (1 - <q, q0>^2) per frame, which equals the squared geodesic angle to
// fourth order and is smooth at zero deviation. Both inputs unit-norm.
template <class S>
int quat_deviation_sq(Tape<S>& tape, int q, const std::vector<S>& reference) {
    const auto& qv = tape.val(q);
    const int64_t frames = qv.size() / 4;
    if (reference.size() != static_cast<size_t>(frames) * 4)
        throw ValidationError("quat_deviation_sq: shape mismatch");
    double acc = 0.0;
    for (int64_t t = 0; t < frames; ++t) {
        double d = 0.0;
        for (int k = 0; k < 4; ++k) d += double(qv.v[t * 4 + k]) * double(reference[t * 4 + k]);
        acc += 4.0 * (1.0 - d * d);
    }
    TensorData<S> out({1});
    out.v[0] = static_cast<S>(acc);
    const int id = tape.push(std::move(out), tape.needs_grad(q));
    if (tape.needs_grad(id))
        tape.set_back(id, [q, id, reference, frames](Tape<S>& t) {
            const S g = t.grad(id).v[0];
            const auto& qv2 = t.val(q).v;
            t.ensure_grad(q);
            auto& gq = t.grad(q).v;
            for (int64_t r = 0; r < frames; ++r) {
                S d = S(0);
                for (int k = 0; k < 4; ++k) d += qv2[r * 4 + k] * reference[r * 4 + k];
                for (int k = 0; k < 4; ++k)
                    gq[r * 4 + k] += g * S(-8) * d * reference[r * 4 + k];
            }
        });
    return id;
}

// sum_t |x[t+1] - 2 x[t] + x[t-1]|^2 over interior frames, x [T, D].
template <class S>
int second_diff_sq(Tape<S>& tape, int x) {
    const auto& xv = tape.val(x);
    if (xv.shape.size() != 2) throw ValidationError("second_diff_sq: rank-2 input required");
    const int64_t frames = xv.dim(0), d = xv.dim(1);
    double acc = 0.0;
    for (int64_t t = 1; t + 1 < frames; ++t)
        for (int64_t k = 0; k < d; ++k) {
            const double dd = double(xv.v[(t + 1) * d + k]) - 2.0 * double(xv.v[t * d + k]) +
                              double(xv.v[(t - 1) * d + k]);
            acc += dd * dd;
        }
    TensorData<S> out({1});
    out.v[0] = static_cast<S>(acc);
    const int id = tape.push(std::move(out), tape.needs_grad(x));
    if (tape.needs_grad(id))
        tape.set_back(id, [x, id, frames, d](Tape<S>& t) {
            const S g = t.grad(id).v[0];
            const auto& xv2 = t.val(x).v;
            t.ensure_grad(x);
            auto& gx = t.grad(x).v;
            for (int64_t r = 1; r + 1 < frames; ++r)
                for (int64_t k = 0; k < d; ++k) {
                    const S dd = xv2[(r + 1) * d + k] - S(2) * xv2[r * d + k] +
                                 xv2[(r - 1) * d + k];
                    gx[(r + 1) * d + k] += g * S(2) * dd;
                    gx[r * d + k] += g * S(-4) * dd;
                    gx[(r - 1) * d + k] += g * S(2) * dd;
                }
        });
    return id;
}

}  // namespace grfkit::nn
