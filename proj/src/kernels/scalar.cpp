#include "gmelab/kernels.hpp"

namespace gmelab::kernels::scalar {
namespace {

void gemm(Transpose ta, Transpose tb, std::size_t m, std::size_t n, std::size_t k, const double* a,
          std::size_t lda, const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * ldc;
    for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
  }
  if (ta == Transpose::no && tb == Transpose::no) {
    for (std::size_t i = 0; i < m; ++i) {
      double* crow = c + i * ldc;
      for (std::size_t p = 0; p < k; ++p) {
        const double av = a[i * lda + p];
        const double* brow = b + p * ldb;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  } else if (ta == Transpose::yes && tb == Transpose::no) {
    for (std::size_t i = 0; i < m; ++i) {
      double* crow = c + i * ldc;
      for (std::size_t p = 0; p < k; ++p) {
        const double av = a[p * lda + i];
        const double* brow = b + p * ldb;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  } else if (ta == Transpose::no && tb == Transpose::yes) {
    for (std::size_t i = 0; i < m; ++i) {
      const double* arow = a + i * lda;
      for (std::size_t j = 0; j < n; ++j) {
        const double* brow = b + j * ldb;
        double s = 0.0;
        for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
        c[i * ldc + j] = s;
      }
    }
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t p = 0; p < k; ++p) s += a[p * lda + i] * b[j * ldb + p];
        c[i * ldc + j] = s;
      }
    }
  }
}

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void pairwise_sqdist(const double* a, std::size_t n, const double* b, std::size_t k,
                     std::size_t dim, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* ai = a + i * dim;
    for (std::size_t j = 0; j < k; ++j) {
      const double* bj = b + j * dim;
      double s = 0.0;
      for (std::size_t t = 0; t < dim; ++t) {
        const double d = ai[t] - bj[t];
        s += d * d;
      }
      out[i * k + j] = s;
    }
  }
}

}  // namespace

const KernelTable& table() {
  static const KernelTable t{"scalar", &gemm, &dot, &axpy, &pairwise_sqdist};
  return t;
}

}  // namespace gmelab::kernels::scalar
