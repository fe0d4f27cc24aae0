#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "atomarray/kernels.hpp"

using namespace atomarray;
using kern::cplx;

namespace {

std::vector<cplx> random_vec(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<cplx> v(n);
    for (auto& x : v) x = cplx(u(rng), u(rng));
    return v;
}

kern::Csr random_csr(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> cols(0, static_cast<int>(n) - 1);
    kern::Csr m;
    m.rows = m.cols = n;
    m.row_ptr.push_back(0);
    for (std::size_t r = 0; r < n; ++r) {
        const int nnz = 1 + static_cast<int>(rng() % 7);
        std::vector<int> cs;
        for (int k = 0; k < nnz; ++k) cs.push_back(cols(rng));
        std::sort(cs.begin(), cs.end());
        cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
        for (int c : cs) {
            m.col.push_back(c);
            m.val.push_back(cplx(u(rng), u(rng)));
        }
        m.row_ptr.push_back(static_cast<std::int64_t>(m.col.size()));
    }
    return m;
}

}  // namespace

TEST_CASE("scalar and simd kernel variants agree") {
    const auto& scalar = kern::scalar_kernels();
    const kern::KernelTable* simd = kern::avx2_kernels();
    if (!simd || !kern::avx2_available()) {
        MESSAGE("AVX2 unavailable; dispatch falls back to scalar");
        CHECK(std::string(kern::kernels().name) == "scalar");
        return;
    }
    for (std::size_t n : {1u, 2u, 3u, 7u, 64u, 257u, 1000u}) {
        const auto a = random_vec(n, 11 + n), b = random_vec(n, 23 + n);
        const cplx du_s = scalar.dotu(a.data(), b.data(), n);
        const cplx du_v = simd->dotu(a.data(), b.data(), n);
        CHECK(std::abs(du_s - du_v) < 1e-12 * (1.0 + std::abs(du_s)));
        const cplx dc_s = scalar.dotc(a.data(), b.data(), n);
        const cplx dc_v = simd->dotc(a.data(), b.data(), n);
        CHECK(std::abs(dc_s - dc_v) < 1e-12 * (1.0 + std::abs(dc_s)));

        auto y1 = random_vec(n, 31), y2 = y1;
        const cplx alpha(0.37, -1.21);
        scalar.axpy(alpha, a.data(), y1.data(), n);
        simd->axpy(alpha, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) < 1e-13);
    }
}

TEST_CASE("csr matvec matches dense accumulation") {
    const auto& scalar = kern::scalar_kernels();
    const kern::KernelTable* simd = kern::avx2_kernels();
    const std::size_t n = 300;
    const kern::Csr m = random_csr(n, 5);
    const auto x = random_vec(n, 6);
    std::vector<cplx> y1(n), y2(n);
    scalar.csr_apply(m, x.data(), y1.data());
    if (simd && kern::avx2_available()) {
        simd->csr_apply(m, x.data(), y2.data());
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) < 1e-12);
    }
    std::vector<cplx> ref(n, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (auto k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) ref[r] += m.val[k] * x[m.col[k]];
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - ref[i]) < 1e-12);
}

TEST_CASE("gemv kernels agree with dot/axpy composition") {
    const auto& scalar = kern::scalar_kernels();
    const kern::KernelTable* simd = kern::avx2_kernels();
    const std::size_t n = 97, m = 15;
    const auto a = random_vec(n * m, 2);
    const auto x = random_vec(n, 3);
    std::vector<cplx> out_s(m), out_v(m);
    scalar.gemv_transu(a.data(), n, m, x.data(), out_s.data());
    for (std::size_t j = 0; j < m; ++j) {
        const cplx ref = scalar.dotu(a.data() + j * n, x.data(), n);
        CHECK(std::abs(out_s[j] - ref) < 1e-13);
    }
    if (simd && kern::avx2_available()) {
        simd->gemv_transu(a.data(), n, m, x.data(), out_v.data());
        for (std::size_t j = 0; j < m; ++j) CHECK(std::abs(out_s[j] - out_v[j]) < 1e-12);
        auto y1 = random_vec(n, 9), y2 = y1;
        scalar.gemv_minus(a.data(), n, m, out_s.data(), y1.data());
        simd->gemv_minus(a.data(), n, m, out_s.data(), y2.data());
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) < 1e-11);
    }
}
