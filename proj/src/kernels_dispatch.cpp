#include "atomarray/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace atomarray::kern {

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

const KernelTable* select() {
    const char* env = std::getenv("ATOMARRAY_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return &scalar_kernels();
    const KernelTable* avx2 = avx2_kernels();
    if (env && std::strcmp(env, "avx2") == 0 && avx2 && avx2_available()) return avx2;
    if (!env && avx2 && avx2_available()) return avx2;
    return &scalar_kernels();
}

}  // namespace

const KernelTable& kernels() {
    static const KernelTable* table = select();
    return *table;
}

}  // namespace atomarray::kern
