#include <gtest/gtest.h>

#include <cmath>
#include <tuple>
#include <vector>

#include "gmelab/kernels.hpp"
#include "gmelab/rng.hpp"

using gmelab::Rng;
namespace k = gmelab::kernels;

namespace {

std::vector<double> random(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

// Naive triple loop, independent of both kernel tables.
std::vector<double> naive_gemm(bool ta, bool tb, std::size_t m, std::size_t n, std::size_t kk,
                               const std::vector<double>& a, std::size_t lda,
                               const std::vector<double>& b, std::size_t ldb) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      long double s = 0.0L;
      for (std::size_t p = 0; p < kk; ++p) {
        const double av = ta ? a[p * lda + i] : a[i * lda + p];
        const double bv = tb ? b[j * ldb + p] : b[p * ldb + j];
        s += static_cast<long double>(av) * bv;
      }
      c[i * n + j] = static_cast<double>(s);
    }
  }
  return c;
}

void expect_close(const std::vector<double>& got, const std::vector<double>& want, double tol) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_NEAR(got[i], want[i], tol * (1.0 + std::abs(want[i]))) << "at " << i;
  }
}

std::vector<const k::KernelTable*> tables() {
  std::vector<const k::KernelTable*> out{&k::scalar::table()};
#if GMELAB_HAVE_AVX2_KERNELS
  if (k::avx2_supported()) out.push_back(&k::avx2::table());
#endif
  return out;
}

}  // namespace

class GemmShapes : public ::testing::TestWithParam<std::tuple<int, int, int, bool, bool>> {};

TEST_P(GemmShapes, EveryTableMatchesNaiveProduct) {
  const auto [mi, ni, ki, ta, tb] = GetParam();
  const std::size_t m = mi, n = ni, kk = ki;
  Rng rng(17 + m * 31 + n * 7 + kk);
  const std::size_t lda = ta ? m : kk;
  const std::size_t ldb = tb ? kk : n;
  const auto a = random((ta ? kk : m) * lda, rng);
  const auto b = random((tb ? n : kk) * ldb, rng);
  const auto want = naive_gemm(ta, tb, m, n, kk, a, lda, b, ldb);
  for (const auto* t : tables()) {
    std::vector<double> c(m * n, 42.0);
    t->gemm(ta ? k::Transpose::yes : k::Transpose::no, tb ? k::Transpose::yes : k::Transpose::no, m, n,
            kk, a.data(), lda, b.data(), ldb, c.data(), n);
    SCOPED_TRACE(std::string(t->name));
    expect_close(c, want, 1e-13);
  }
}

INSTANTIATE_TEST_SUITE_P(Kernels, GemmShapes,
                         ::testing::Combine(::testing::Values(1, 5, 16), ::testing::Values(1, 3, 17, 128),
                                            ::testing::Values(1, 2, 9, 100), ::testing::Bool(),
                                            ::testing::Bool()));

TEST(Kernels, DotAxpyAndDistancesAgreeAcrossTables) {
  Rng rng(5);
  for (std::size_t n : {0, 1, 3, 4, 7, 8, 13, 100, 257}) {
    const auto x = random(n, rng);
    const auto y = random(n, rng);
    long double ref = 0.0L;
    for (std::size_t i = 0; i < n; ++i) ref += static_cast<long double>(x[i]) * y[i];
    for (const auto* t : tables()) {
      EXPECT_NEAR(t->dot(x.data(), y.data(), n), static_cast<double>(ref), 1e-12 * (1.0 + n));
      std::vector<double> z = y;
      t->axpy(0.75, x.data(), z.data(), n);
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(z[i], y[i] + 0.75 * x[i], 1e-15 * (1 + std::abs(z[i])));
    }
  }
  for (std::size_t dim : {1, 2, 5, 100}) {
    const auto a = random(6 * dim, rng);
    const auto b = random(4 * dim, rng);
    for (const auto* t : tables()) {
      std::vector<double> d(24);
      t->pairwise_sqdist(a.data(), 6, b.data(), 4, dim, d.data());
      for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
          double s = 0.0;
          for (std::size_t q = 0; q < dim; ++q) s += (a[i * dim + q] - b[j * dim + q]) * (a[i * dim + q] - b[j * dim + q]);
          EXPECT_NEAR(d[i * 4 + j], s, 1e-12 * (1.0 + s));
        }
      }
    }
  }
}

TEST(Kernels, SelfDistanceIsExactlyZero) {
  Rng rng(9);
  const auto a = random(5 * 100, rng);
  for (const auto* t : tables()) {
    std::vector<double> d(25);
    t->pairwise_sqdist(a.data(), 5, a.data(), 5, 100, d.data());
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(d[i * 5 + i], 0.0);
  }
}

TEST(Kernels, ActiveTableIsStable) {
  const auto& first = k::active();
  EXPECT_EQ(&first, &k::active());
  if (!k::avx2_supported()) {
    EXPECT_EQ(first.name, "scalar");
  }
}
