// Compiled with -mavx2 -mfma; only reached through kernels::active() after a
// CPU feature check.
#include "gmelab/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace gmelab::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s = std::fma(x[i], y[i], s);
  return s;
}

// crow[0..n) = sum_p coef(p) * B[p, 0..n), with coef(p) = a[p * astride].
// Columns are processed in register blocks so the accumulators never leave
// the register file during the reduction over p.
inline void row_times_matrix(const double* a, std::size_t astride, std::size_t k, const double* b,
                             std::size_t ldb, std::size_t n, double* crow) {
  std::size_t j = 0;
  for (; j + 16 <= n; j += 16) {
    __m256d c0 = _mm256_setzero_pd(), c1 = _mm256_setzero_pd();
    __m256d c2 = _mm256_setzero_pd(), c3 = _mm256_setzero_pd();
    for (std::size_t p = 0; p < k; ++p) {
      const __m256d av = _mm256_broadcast_sd(a + p * astride);
      const double* brow = b + p * ldb + j;
      c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow), c0);
      c1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 4), c1);
      c2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 8), c2);
      c3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + 12), c3);
    }
    _mm256_storeu_pd(crow + j, c0);
    _mm256_storeu_pd(crow + j + 4, c1);
    _mm256_storeu_pd(crow + j + 8, c2);
    _mm256_storeu_pd(crow + j + 12, c3);
  }
  for (; j + 4 <= n; j += 4) {
    __m256d c0 = _mm256_setzero_pd();
    for (std::size_t p = 0; p < k; ++p) {
      c0 = _mm256_fmadd_pd(_mm256_broadcast_sd(a + p * astride), _mm256_loadu_pd(b + p * ldb + j),
                           c0);
    }
    _mm256_storeu_pd(crow + j, c0);
  }
  for (; j < n; ++j) {
    double s = 0.0;
    for (std::size_t p = 0; p < k; ++p) s = std::fma(a[p * astride], b[p * ldb + j], s);
    crow[j] = s;
  }
}

void gemm(Transpose ta, Transpose tb, std::size_t m, std::size_t n, std::size_t k, const double* a,
          std::size_t lda, const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  if (tb == Transpose::no) {
    for (std::size_t i = 0; i < m; ++i) {
      if (ta == Transpose::no) {
        row_times_matrix(a + i * lda, 1, k, b, ldb, n, c + i * ldc);
      } else {
        row_times_matrix(a + i, lda, k, b, ldb, n, c + i * ldc);
      }
    }
    return;
  }
  if (ta == Transpose::no) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) c[i * ldc + j] = dot(a + i * lda, b + j * ldb, k);
    }
    return;
  }
  // op(A) = A^T, op(B) = B^T: strided on both sides, never hot.
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s = std::fma(a[p * lda + i], b[j * ldb + p], s);
      c[i * ldc + j] = s;
    }
  }
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void pairwise_sqdist(const double* a, std::size_t n, const double* b, std::size_t k,
                     std::size_t dim, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* ai = a + i * dim;
    for (std::size_t j = 0; j < k; ++j) {
      const double* bj = b + j * dim;
      __m256d acc = _mm256_setzero_pd();
      std::size_t t = 0;
      for (; t + 4 <= dim; t += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(ai + t), _mm256_loadu_pd(bj + t));
        acc = _mm256_fmadd_pd(d, d, acc);
      }
      double s = hsum(acc);
      for (; t < dim; ++t) {
        const double d = ai[t] - bj[t];
        s = std::fma(d, d, s);
      }
      out[i * k + j] = s;
    }
  }
}

}  // namespace

const KernelTable& table() {
  static const KernelTable t{"avx2", &gemm, &dot, &axpy, &pairwise_sqdist};
  return t;
}

}  // namespace gmelab::kernels::avx2
