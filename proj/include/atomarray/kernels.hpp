#pragma once

// Low-level complex arithmetic kernels used by the Lanczos and propagation
// paths.  Every kernel has a scalar reference implementation and, on x86-64
// with AVX2+FMA, a vectorized variant.  The active set is chosen once at
// runtime; ATOMARRAY_SIMD=scalar|avx2 overrides the automatic choice.
// Scalar and SIMD variants are equivalence-tested against each other.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace atomarray::kern {

using cplx = std::complex<double>;

// Compressed sparse row storage for complex matrices.
struct Csr {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::int64_t> row_ptr;  // size rows+1
    std::vector<std::int32_t> col;      // size nnz
    std::vector<cplx> val;              // size nnz
};

struct KernelTable {
    // sum_i a_i * b_i (bilinear, no conjugation)
    cplx (*dotu)(const cplx* a, const cplx* b, std::size_t n);
    // sum_i conj(a_i) * b_i
    cplx (*dotc)(const cplx* a, const cplx* b, std::size_t n);
    // y += alpha * x
    void (*axpy)(cplx alpha, const cplx* x, cplx* y, std::size_t n);
    // y = A * x for CSR A
    void (*csr_apply)(const Csr& a, const cplx* x, cplx* y);
    // out_j = sum_i A_ij * x_i (unconjugated transpose; A column-major n x m)
    void (*gemv_transu)(const cplx* a, std::size_t n, std::size_t m, const cplx* x, cplx* out);
    // y -= A * c (A column-major n x m); used to subtract projections
    void (*gemv_minus)(const cplx* a, std::size_t n, std::size_t m, const cplx* c, cplx* y);
    const char* name;
};

// Active kernel table (selected on first use).
const KernelTable& kernels();

// Individual tables, exposed for equivalence tests.
const KernelTable& scalar_kernels();
bool avx2_available();
const KernelTable* avx2_kernels();  // nullptr when unsupported at build time

inline cplx dotu(const cplx* a, const cplx* b, std::size_t n) { return kernels().dotu(a, b, n); }
inline cplx dotc(const cplx* a, const cplx* b, std::size_t n) { return kernels().dotc(a, b, n); }
inline void axpy(cplx alpha, const cplx* x, cplx* y, std::size_t n) { kernels().axpy(alpha, x, y, n); }
inline void csr_apply(const Csr& a, const cplx* x, cplx* y) { kernels().csr_apply(a, x, y); }
inline void gemv_transu(const cplx* a, std::size_t n, std::size_t m, const cplx* x, cplx* out) {
    kernels().gemv_transu(a, n, m, x, out);
}
inline void gemv_minus(const cplx* a, std::size_t n, std::size_t m, const cplx* c, cplx* y) {
    kernels().gemv_minus(a, n, m, c, y);
}

}  // namespace atomarray::kern
