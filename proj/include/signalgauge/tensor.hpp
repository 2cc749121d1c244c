#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"

#ifdef SG_USE_CBLAS
#include <cblas.h>
#endif

namespace sg {

// Dense row-major float tensor.
struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        data.assign(numel(), 0.0f);
    }

    std::size_t numel() const {
        std::size_t n = 1;
        for (int d : shape)
            n *= static_cast<std::size_t>(d);
        return n;
    }

    int dim(std::size_t i) const { return shape[i]; }

    void zero() { std::fill(data.begin(), data.end(), 0.0f); }

    static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

inline std::string shape_str(const std::vector<int>& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i)
        out += (i ? "," : "") + std::to_string(s[i]);
    return out + "]";
}

// C = alpha * op(A) * op(B) + beta * C, row-major.
// A is m x k after transposition, B is k x n, C is m x n.
inline void gemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha, const float* a,
                 int lda, const float* b, int ldb, float beta, float* c, int ldc) {
#ifdef SG_USE_CBLAS
    cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
                trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b, ldb, beta, c,
                ldc);
#else
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            float acc = 0.0f;
            for (int p = 0; p < k; ++p) {
                const float av = trans_a ? a[p * lda + i] : a[i * lda + p];
                const float bv = trans_b ? b[j * ldb + p] : b[p * ldb + j];
                acc += av * bv;
            }
            c[i * ldc + j] = alpha * acc + beta * c[i * ldc + j];
        }
    }
#endif
}

} // namespace sg
