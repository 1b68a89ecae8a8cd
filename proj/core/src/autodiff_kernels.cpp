#include <Eigen/Dense>

#include "grfkit/autodiff.hpp"

namespace grfkit::nn::detail {

template <class S>
using RowMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using ConstMap = Eigen::Map<const RowMat<S>>;
template <class S>
using Map = Eigen::Map<RowMat<S>>;

template <class S>
void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k, const S* a, const S* b,
          S* c, bool accumulate) {
    Map<S> cm(c, m, n);
    const auto run = [&](const auto& am, const auto& bm) {
        if (accumulate)
            cm.noalias() += am * bm;
        else
            cm.noalias() = am * bm;
    };
    if (!trans_a && !trans_b)
        run(ConstMap<S>(a, m, k), ConstMap<S>(b, k, n));
    else if (trans_a && !trans_b)
        run(ConstMap<S>(a, k, m).transpose(), ConstMap<S>(b, k, n));
    else if (!trans_a && trans_b)
        run(ConstMap<S>(a, m, k), ConstMap<S>(b, n, k).transpose());
    else
        run(ConstMap<S>(a, k, m).transpose(), ConstMap<S>(b, n, k).transpose());
}

template void gemm<float>(bool, bool, int64_t, int64_t, int64_t, const float*, const float*,
                          float*, bool);
template void gemm<double>(bool, bool, int64_t, int64_t, int64_t, const double*, const double*,
                           double*, bool);

}  // namespace grfkit::nn::detail
