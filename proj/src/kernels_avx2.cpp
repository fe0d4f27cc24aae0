// AVX2+FMA kernel variants.  This translation unit is compiled with
// -mavx2 -mfma; callers reach it only through the dispatch table after the
// CPU has been probed, so no AVX instruction leaks into generic code paths.

#include "atomarray/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

namespace atomarray::kern {
namespace {

// A __m256d holds two complex doubles as [re0, im0, re1, im1].

inline __m256d cmul(__m256d a, __m256d b) {
    // (ar*br - ai*bi, ar*bi + ai*br)
    const __m256d ar = _mm256_unpacklo_pd(a, a);   // [ar0, ar0, ar1, ar1]
    const __m256d ai = _mm256_unpackhi_pd(a, a);   // [ai0, ai0, ai1, ai1]
    const __m256d bswap = _mm256_shuffle_pd(b, b, 0x5);  // [bi, br, ...]
    return _mm256_fmaddsub_pd(ar, b, _mm256_mul_pd(ai, bswap));
}

inline __m256d cmul_conj_a(__m256d a, __m256d b) {
    // conj(a) * b = (ar*br + ai*bi, ar*bi - ai*br)
    const __m256d ar = _mm256_unpacklo_pd(a, a);
    const __m256d ai = _mm256_unpackhi_pd(a, a);
    const __m256d bswap = _mm256_shuffle_pd(b, b, 0x5);
    return _mm256_fmsubadd_pd(ar, b, _mm256_mul_pd(ai, bswap));
}

inline cplx hsum(__m256d acc) {
    alignas(32) double buf[4];
    _mm256_store_pd(buf, acc);
    return {buf[0] + buf[2], buf[1] + buf[3]};
}

cplx dotu_avx2(const cplx* a, const cplx* b, std::size_t n) {
    const double* pa = reinterpret_cast<const double*>(a);
    const double* pb = reinterpret_cast<const double*>(b);
    __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_add_pd(acc0, cmul(_mm256_loadu_pd(pa + 2 * i), _mm256_loadu_pd(pb + 2 * i)));
        acc1 = _mm256_add_pd(acc1, cmul(_mm256_loadu_pd(pa + 2 * i + 4), _mm256_loadu_pd(pb + 2 * i + 4)));
    }
    cplx s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

cplx dotc_avx2(const cplx* a, const cplx* b, std::size_t n) {
    const double* pa = reinterpret_cast<const double*>(a);
    const double* pb = reinterpret_cast<const double*>(b);
    __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_add_pd(acc0, cmul_conj_a(_mm256_loadu_pd(pa + 2 * i), _mm256_loadu_pd(pb + 2 * i)));
        acc1 = _mm256_add_pd(acc1, cmul_conj_a(_mm256_loadu_pd(pa + 2 * i + 4), _mm256_loadu_pd(pb + 2 * i + 4)));
    }
    cplx s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += std::conj(a[i]) * b[i];
    return s;
}

void axpy_avx2(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
    const double* px = reinterpret_cast<const double*>(x);
    double* py = reinterpret_cast<double*>(y);
    const __m256d ar = _mm256_set1_pd(alpha.real());
    const __m256d ai = _mm256_set1_pd(alpha.imag());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = _mm256_loadu_pd(px + 2 * i);
        const __m256d xswap = _mm256_shuffle_pd(xv, xv, 0x5);
        const __m256d prod = _mm256_fmaddsub_pd(ar, xv, _mm256_mul_pd(ai, xswap));
        _mm256_storeu_pd(py + 2 * i, _mm256_add_pd(_mm256_loadu_pd(py + 2 * i), prod));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void csr_apply_avx2(const Csr& a, const cplx* x, cplx* y) {
    const double* px = reinterpret_cast<const double*>(x);
    for (std::size_t r = 0; r < a.rows; ++r) {
        const auto begin = a.row_ptr[r], end = a.row_ptr[r + 1];
        __m256d acc = _mm256_setzero_pd();
        auto k = begin;
        for (; k + 2 <= end; k += 2) {
            const __m256d v = _mm256_loadu_pd(reinterpret_cast<const double*>(a.val.data() + k));
            const __m256d xv = _mm256_set_pd(px[2 * a.col[k + 1] + 1], px[2 * a.col[k + 1]],
                                             px[2 * a.col[k] + 1], px[2 * a.col[k]]);
            acc = _mm256_add_pd(acc, cmul(v, xv));
        }
        cplx s = hsum(acc);
        for (; k < end; ++k) s += a.val[k] * x[a.col[k]];
        y[r] = s;
    }
}

void gemv_transu_avx2(const cplx* a, std::size_t n, std::size_t m, const cplx* x, cplx* out) {
    for (std::size_t j = 0; j < m; ++j) out[j] = dotu_avx2(a + j * n, x, n);
}

void gemv_minus_avx2(const cplx* a, std::size_t n, std::size_t m, const cplx* c, cplx* y) {
    for (std::size_t j = 0; j < m; ++j) axpy_avx2(-c[j], a + j * n, y, n);
}

const KernelTable avx2_table{dotu_avx2, dotc_avx2,        axpy_avx2,
                             csr_apply_avx2, gemv_transu_avx2, gemv_minus_avx2,
                             "avx2"};

}  // namespace

const KernelTable* avx2_kernels() { return &avx2_table; }

}  // namespace atomarray::kern

#else

namespace atomarray::kern {
const KernelTable* avx2_kernels() { return nullptr; }
}  // namespace atomarray::kern

#endif
