#include "atomarray/kernels.hpp"

namespace atomarray::kern {
namespace {

cplx dotu_scalar(const cplx* a, const cplx* b, std::size_t n) {
    // two accumulators to break the dependency chain
    cplx s0 = 0.0, s1 = 0.0;
    std::size_t i = 0;
    for (; i + 1 < n; i += 2) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
    }
    if (i < n) s0 += a[i] * b[i];
    return s0 + s1;
}

cplx dotc_scalar(const cplx* a, const cplx* b, std::size_t n) {
    cplx s0 = 0.0, s1 = 0.0;
    std::size_t i = 0;
    for (; i + 1 < n; i += 2) {
        s0 += std::conj(a[i]) * b[i];
        s1 += std::conj(a[i + 1]) * b[i + 1];
    }
    if (i < n) s0 += std::conj(a[i]) * b[i];
    return s0 + s1;
}

void axpy_scalar(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void csr_apply_scalar(const Csr& a, const cplx* x, cplx* y) {
    for (std::size_t r = 0; r < a.rows; ++r) {
        cplx s = 0.0;
        const auto begin = a.row_ptr[r], end = a.row_ptr[r + 1];
        for (auto k = begin; k < end; ++k) s += a.val[k] * x[a.col[k]];
        y[r] = s;
    }
}

void gemv_transu_scalar(const cplx* a, std::size_t n, std::size_t m, const cplx* x, cplx* out) {
    for (std::size_t j = 0; j < m; ++j) out[j] = dotu_scalar(a + j * n, x, n);
}

void gemv_minus_scalar(const cplx* a, std::size_t n, std::size_t m, const cplx* c, cplx* y) {
    for (std::size_t j = 0; j < m; ++j) axpy_scalar(-c[j], a + j * n, y, n);
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable t{dotu_scalar, dotc_scalar,       axpy_scalar,
                               csr_apply_scalar, gemv_transu_scalar, gemv_minus_scalar,
                               "scalar"};
    return t;
}

}  // namespace atomarray::kern
