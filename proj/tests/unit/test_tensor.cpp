#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gitnet/flops.hpp"
#include "gitnet/linalg.hpp"
#include "gitnet/tensor.hpp"
#include "test_util.hpp"

using namespace gitnet;
using gitnet::test::naive_matmul;
using gitnet::test::random_tensor;

TEST(Tensor, ConstructionKeepsSizeEqualToShapeProduct) {
  Tensor t({2, 3, 4});
  EXPECT_EQ(t.size(), 24u);
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>(3)), ShapeError);
  EXPECT_THROW((void)t.reshaped({5, 5}), ShapeError);
}

TEST(Tensor, MatmulIdentity) {
  const auto c = matmul(Tensor::identity(2), Tensor::matrix({{5, 6}, {7, 8}}));
  EXPECT_EQ(c, Tensor::matrix({{5, 6}, {7, 8}}));
}

TEST(Tensor, MatmulDot) { EXPECT_EQ(matmul(Tensor::matrix({{1, 2}}), Tensor::matrix({{3}, {4}})), Tensor::matrix({{11}})); }

TEST(Tensor, MatmulBitIdenticalToTripleLoop) {
  const auto a = random_tensor({7, 5}, 1), b = random_tensor({5, 3}, 2);
  EXPECT_EQ(matmul(a, b), naive_matmul(a, b));
}

TEST(Tensor, MatmulShapeErrorNamesBothShapes) {
  try {
    (void)matmul(Tensor({2, 3}), Tensor({4, 5}));
    FAIL();
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2x3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("4x5"), std::string::npos) << msg;
  }
}

TEST(Tensor, TransposedProductsMatchExplicitTranspose) {
  const auto a = random_tensor({6, 4}, 3), b = random_tensor({6, 5}, 4), c = random_tensor({3, 4}, 5);
  EXPECT_EQ(matmul_tn(a, b), naive_matmul(transpose(a), b));
  EXPECT_EQ(matmul_nt(a, c), naive_matmul(a, transpose(c)));
}

TEST(Tensor, MatmulAssociativity) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto a = random_tensor({4, 6}, 10 + s), b = random_tensor({6, 5}, 20 + s), c = random_tensor({5, 3}, 30 + s);
    EXPECT_LT(test::rel_frobenius(matmul(matmul(a, b), c), matmul(a, matmul(b, c))), 1e-12);
  }
}

TEST(Tensor, BatchedKernelsMatchPerSampleOracle) {
  const auto m = random_tensor({3, 4}, 6), x = random_tensor({5, 4, 2}, 7), g = random_tensor({5, 3, 2}, 8);
  const auto y = left_multiply_batched(m, x);
  Tensor outer({3, 4});
  for (std::size_t b = 0; b < 5; ++b) {
    Tensor xb({4, 2}), gb({3, 2});
    for (std::size_t i = 0; i < 8; ++i) xb[i] = x[b * 8 + i];
    for (std::size_t i = 0; i < 6; ++i) gb[i] = g[b * 6 + i];
    const auto yb = naive_matmul(m, xb);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(y[b * 6 + i], yb[i]);
    outer = outer + naive_matmul(gb, transpose(xb));
  }
  EXPECT_LT(max_abs_diff(sum_outer_batched(g, x), outer), 1e-12);
}

TEST(Tensor, GeluValues) {
  EXPECT_EQ(gelu(0.0), 0.0);
  EXPECT_EQ(gelu(1.0), 0.8413447460685429);
  EXPECT_LT(std::abs(gelu(-10.0)), 1e-20);
  EXPECT_LT(gelu(-10.0), 0.0);
  EXPECT_LT(test::rel_diff(gelu(-10.0), -7.619853024160526e-23), 1e-12);
}

TEST(Tensor, GeluGradValues) {
  EXPECT_EQ(gelu_grad(0.0), 0.5);
  EXPECT_NEAR(gelu_grad(1.0), 1.0833154705876864, 1e-15);
}

TEST(Tensor, GeluGradMatchesCentralDifferences) {
  Rng rng(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 30; ++i) {
    const double x = u(rng), h = 1e-5;
    const double fd = (gelu(x + h) - gelu(x - h)) / (2 * h);
    EXPECT_LT(test::rel_diff(fd, gelu_grad(x)), 1e-8) << x;
  }
}

TEST(Tensor, FlopCounterChargesTwoPerMultiplyAdd) {
  FlopScope outer;
  {
    FlopScope inner;
    (void)matmul(Tensor({3, 4}), Tensor({4, 5}));
    EXPECT_EQ(inner.count(), 2u * 3 * 4 * 5);
  }
  EXPECT_EQ(outer.count(), 0u);
  (void)gelu(Tensor({7}));
  EXPECT_EQ(outer.count(), 7 * kGeluFlops);
}

TEST(Tensor, RequireFiniteRejectsNaN) {
  Tensor t({2});
  t[1] = std::nan("");
  EXPECT_FALSE(t.all_finite());
  EXPECT_THROW(require_finite(t, "t"), NumericError);
}

// --- SVD ---------------------------------------------------------------------

namespace {

double orthonormal_columns_error(const Tensor& u) {
  return max_abs_diff(matmul_tn(u, u), Tensor::identity(u.cols()));
}

}  // namespace

TEST(DenseSvd, PermutationMatrix) {
  const auto svd = dense_svd(Tensor::matrix({{0, 1}, {1, 0}}));
  EXPECT_NEAR(svd.s[0], 1.0, 1e-15);
  EXPECT_NEAR(svd.s[1], 1.0, 1e-15);
}

TEST(DenseSvd, Scalar) {
  const auto svd = dense_svd(Tensor::matrix({{2}}));
  EXPECT_EQ(std::abs(svd.u(0, 0)), 1.0);
  EXPECT_EQ(svd.s[0], 2.0);
}

TEST(DenseSvd, RandomResiduals) {
  for (const auto& shape : std::vector<Shape>{{8, 5}, {5, 8}, {6, 6}, {40, 3}}) {
    const auto m = random_tensor(shape, 12);
    const auto svd = dense_svd(m);
    EXPECT_LT(orthonormal_columns_error(svd.u), 1e-10);
    EXPECT_LT(orthonormal_columns_error(transpose(svd.vt)), 1e-10);
    EXPECT_LT(test::rel_frobenius(svd_reconstruct(svd), m), 1e-10);
    for (std::size_t i = 1; i < svd.s.size(); ++i) EXPECT_GE(svd.s[i - 1], svd.s[i]);
  }
}

TEST(DenseSvd, RankDeficientStillOrthonormal) {
  const auto m = matmul(random_tensor({10, 2}, 1), random_tensor({2, 6}, 2));
  const auto svd = dense_svd(m);
  EXPECT_LT(orthonormal_columns_error(svd.u), 1e-10);
  EXPECT_LT(test::rel_frobenius(svd_reconstruct(svd), m), 1e-10);
  EXPECT_LT(svd.s[2], 1e-12 * svd.s[0]);
}

TEST(DenseSvd, SizeGuard) {
  EXPECT_THROW((void)dense_svd(Tensor({kDenseSvdMaxEntries / 1000 + 1, 1000})), std::invalid_argument);
}

TEST(RandomizedSvd, DiagonalMatrix) {
  Tensor m({5, 5});
  m(0, 0) = 3;
  m(1, 1) = 2;
  m(2, 2) = 1;
  const auto svd = randomized_svd(m, 3);
  ASSERT_EQ(svd.s.size(), 3u);
  EXPECT_NEAR(svd.s[0], 3.0, 1e-10);
  EXPECT_NEAR(svd.s[1], 2.0, 1e-10);
  EXPECT_NEAR(svd.s[2], 1.0, 1e-10);
}

TEST(RandomizedSvd, RecoversExactLowRank) {
  const auto m = matmul(random_tensor({50, 4}, 3), random_tensor({4, 40}, 4));
  const auto svd = randomized_svd(m, 4);
  EXPECT_LT(frobenius_norm(svd_reconstruct(svd) - m), 1e-9);
  EXPECT_LT(orthonormal_columns_error(svd.u), 1e-10);
  EXPECT_LT(orthonormal_columns_error(transpose(svd.vt)), 1e-10);
}

// Largest rank the default oversampling admits on a 30x20 matrix.
TEST(RandomizedSvd, AgreesWithDenseOnRandomMatrices) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto m = random_tensor({30, 20}, 100 + s);
    const auto exact = dense_svd(m);
    const auto approx = randomized_svd(m, 10, {.oversample = 10, .power_iters = 2, .seed = s});
    for (std::size_t i = 0; i < 10; ++i) EXPECT_LT(test::rel_diff(approx.s[i], exact.s[i]), 1e-8) << i;
  }
}

TEST(RandomizedSvd, GappedSpectrumWithinOneInAMillion) {
  // Singular values 2^-i with a factor-of-two gap after every index.
  Tensor s_diag({40, 40});
  for (std::size_t i = 0; i < 30; ++i) s_diag(i, i) = std::pow(0.5, static_cast<double>(i));
  const auto q1 = householder_qr(random_tensor({60, 40}, 7)).q, q2 = householder_qr(random_tensor({50, 40}, 8)).q;
  const auto m = matmul_nt(matmul(q1, s_diag), q2);
  const auto exact = dense_svd(m);
  const auto approx = randomized_svd(m, 6);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_LT(test::rel_diff(approx.s[i], exact.s[i]), 1e-6);
}

TEST(RandomizedSvd, BitReproducible) {
  const auto m = random_tensor({25, 18}, 9);
  const auto a = randomized_svd(m, 4, {.seed = 42}), b = randomized_svd(m, 4, {.seed = 42});
  EXPECT_EQ(a.u, b.u);
  EXPECT_EQ(a.s, b.s);
  EXPECT_EQ(a.vt, b.vt);
}

TEST(RandomizedSvd, Errors) {
  EXPECT_THROW((void)randomized_svd(Tensor({4, 3}), 4), std::invalid_argument);
  EXPECT_THROW((void)randomized_svd(Tensor({4, 3}), 0), std::invalid_argument);
  Tensor bad({4, 3});
  bad[0] = std::numeric_limits<double>::infinity();
  EXPECT_THROW((void)randomized_svd(bad, 2), NumericError);
}
