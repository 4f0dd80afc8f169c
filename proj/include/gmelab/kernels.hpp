#pragma once
// Dense float-64 kernels behind every hot loop in the project.
//
// Each kernel has a portable scalar reference in `kernels::scalar` and, on
// x86-64, an AVX2+FMA variant in `kernels::avx2`.  `kernels::active()` picks
// one table at first use from the CPU feature bits; the environment variable
// GMELAB_SIMD=scalar forces the reference path.  Both paths are deterministic
// for a fixed input, but they round differently (FMA), so results are only
// bit-reproducible within one dispatch choice.
//
// All matrices are row-major with an explicit leading dimension.

#include <cstddef>
#include <string_view>

namespace gmelab::kernels {

enum class Transpose : bool { no = false, yes = true };

// C[M x N] = op(A) * op(B)   (C is overwritten, not accumulated)
// op(A) is M x K, op(B) is K x N.
using GemmFn = void (*)(Transpose ta, Transpose tb, std::size_t m, std::size_t n, std::size_t k,
                        const double* a, std::size_t lda, const double* b, std::size_t ldb,
                        double* c, std::size_t ldc);

using DotFn = double (*)(const double* x, const double* y, std::size_t n);

// y += alpha * x
using AxpyFn = void (*)(double alpha, const double* x, double* y, std::size_t n);

// out[i * k + j] = || a_i - b_j ||^2 for rows a_i of A (n x dim) and b_j of B (k x dim)
using PairwiseSqdistFn = void (*)(const double* a, std::size_t n, const double* b, std::size_t k,
                                  std::size_t dim, double* out);

struct KernelTable {
  std::string_view name;
  GemmFn gemm;
  DotFn dot;
  AxpyFn axpy;
  PairwiseSqdistFn pairwise_sqdist;
};

namespace scalar {
const KernelTable& table();
}

#if defined(__x86_64__) || defined(_M_X64)
#define GMELAB_HAVE_AVX2_KERNELS 1
namespace avx2 {
const KernelTable& table();
}
#else
#define GMELAB_HAVE_AVX2_KERNELS 0
#endif

// True when the AVX2 table was compiled in and the CPU reports avx2+fma.
bool avx2_supported();

// Table chosen at first call; stable for the lifetime of the process.
const KernelTable& active();

}  // namespace gmelab::kernels
