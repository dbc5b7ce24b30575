#include <gtest/gtest.h>

#include <cmath>

#include "gitnet/gitnet.hpp"
#include "gitnet/pcanet.hpp"
#include "test_util.hpp"

using namespace gitnet;
using gitnet::test::naive_matmul;
using gitnet::test::random_tensor;

namespace {

GitLayerParams random_layer(std::size_t c, std::size_t k, std::uint64_t seed, Activation act = Activation::identity) {
  return {random_tensor({c, c}, seed), random_tensor({k, k}, seed + 1), random_tensor({c, c, k}, seed + 2),
          random_tensor({k, k}, seed + 3), act};
}

// (C·K)×(C·K) matrix of the identity-activation layer on row-major vec(α).
Tensor materialize_layer(const GitLayerParams& p) {
  const std::size_t c = p.t.rows(), k = p.p.rows(), n = c * k;
  Tensor mt({n, n}), mp({n, n}), md({n, n}), mq({n, n});
  for (std::size_t a = 0; a < c; ++a)
    for (std::size_t b = 0; b < c; ++b)
      for (std::size_t j = 0; j < k; ++j) {
        mt(a * k + j, b * k + j) = p.t(a, b);
        md(a * k + j, b * k + j) = p.d(b, a, j);
      }
  for (std::size_t a = 0; a < c; ++a)
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        mp(a * k + j, a * k + i) = p.p(i, j);
        mq(a * k + j, a * k + i) = p.q(i, j);
      }
  return mt + naive_matmul(mq, naive_matmul(md, mp));
}

Tensor apply_dense(const Tensor& m, const Tensor& alpha) {
  const Tensor v = naive_matmul(m, alpha.reshaped({alpha.size(), 1}));
  return v.reshaped(alpha.shape());
}

// Trivial basis: mean 0, components = I.
PcaBasis identity_basis(std::size_t n) {
  PcaBasis b;
  b.n_points = n;
  b.mean = Tensor({n});
  b.components = Tensor::identity(n);
  b.singular_values = Tensor({n}, 1.0);
  return b;
}

}  // namespace

TEST(HybridProduct, ScalarPerFrequency) {
  const auto d = Tensor({1, 1, 2}, {3, 4});
  EXPECT_EQ(hybrid_product(Tensor::matrix({{1, 2}}), d), Tensor::matrix({{3, 8}}));
}

TEST(HybridProduct, IdentityMixer) {
  Tensor d({3, 3, 4});
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < 4; ++k) d(c, c, k) = 1.0;
  const auto a = random_tensor({3, 4}, 1);
  EXPECT_EQ(hybrid_product(a, d), a);
}

TEST(HybridProduct, TwoByTwoExample) {
  Tensor d({2, 2, 2});
  // D[:,:,0] = [[1,0],[2,1]], D[:,:,1] = [[0,1],[1,1]] with (d, c) indexing.
  d(0, 0, 0) = 1; d(0, 1, 0) = 0; d(1, 0, 0) = 2; d(1, 1, 0) = 1;
  d(0, 0, 1) = 0; d(0, 1, 1) = 1; d(1, 0, 1) = 1; d(1, 1, 1) = 1;
  EXPECT_EQ(hybrid_product(Tensor::matrix({{1, 2}, {3, 4}}), d), Tensor::matrix({{7, 4}, {3, 6}}));
}

TEST(HybridProduct, FrequencyLocality) {
  const auto d = random_tensor({3, 3, 5}, 2);
  auto a = random_tensor({3, 5}, 3);
  const auto before = hybrid_product(a, d);
  for (std::size_t c = 0; c < 3; ++c) a(c, 2) = 0.0;
  const auto after = hybrid_product(a, d);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < 5; ++k)
      if (k != 2) EXPECT_EQ(before(c, k), after(c, k));
}

TEST(HybridProduct, ShapeMismatch) {
  EXPECT_THROW((void)hybrid_product(Tensor({2, 3}), Tensor({2, 2, 4})), ShapeError);
}

TEST(GitLayer, Annihilation) {
  auto p = random_layer(2, 3, 4);
  p.t.fill(0.0);
  p.d.fill(0.0);
  EXPECT_EQ(frobenius_norm(git_layer_forward(p, random_tensor({2, 3}, 5), Variant::standard)), 0.0);
}

TEST(GitLayer, PureSkip) {
  GitLayerParams p{Tensor::identity(2), Tensor::identity(3), Tensor({2, 2, 3}), Tensor::identity(3),
                   Activation::identity};
  const auto a = random_tensor({2, 3}, 6);
  EXPECT_EQ(git_layer_forward(p, a, Variant::standard), a);
}

TEST(GitLayer, MatchesMaterializedLinearMap) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto p = random_layer(2, 3, 100 + 4 * s);
    const auto a = random_tensor({2, 3}, 900 + s);
    EXPECT_LT(max_abs_diff(git_layer_forward(p, a, Variant::standard), apply_dense(materialize_layer(p), a)), 1e-12);
  }
}

TEST(GitLayer, VariantsCoincideForIdentityActivation) {
  const auto p = random_layer(3, 4, 7);
  const auto a = random_tensor({3, 4}, 8);
  EXPECT_LT(max_abs_diff(git_layer_forward(p, a, Variant::standard), git_layer_forward(p, a, Variant::pre_residual)),
            1e-12);
}

TEST(GitLayer, VariantsDifferWithGelu) {
  const auto p = random_layer(3, 4, 7, Activation::gelu);
  const auto a = random_tensor({3, 4}, 8);
  const auto std_out = git_layer_forward(p, a, Variant::standard);
  const auto pre_out = git_layer_forward(p, a, Variant::pre_residual);
  const auto skip = naive_matmul(p.t, a);
  const auto k_alpha = naive_matmul(hybrid_product(naive_matmul(a, p.p), p.d), p.q);
  EXPECT_LT(max_abs_diff(std_out, gelu(skip + k_alpha)), 1e-12);
  EXPECT_LT(max_abs_diff(pre_out, skip + gelu(k_alpha)), 1e-12);
}

TEST(GitLayer, SingleChannelReduction) {
  // v ↦ t·v + v·(P·diag(D)·Q)
  const auto p = random_layer(1, 5, 9);
  Tensor diag({5, 5});
  for (std::size_t k = 0; k < 5; ++k) diag(k, k) = p.d(0, 0, k);
  Tensor m = naive_matmul(naive_matmul(p.p, diag), p.q);
  for (std::size_t k = 0; k < 5; ++k) m(k, k) += p.t(0, 0);
  const auto v = random_tensor({1, 5}, 10);
  EXPECT_LT(max_abs_diff(git_layer_forward(p, v, Variant::standard), naive_matmul(v, m)), 1e-12);
}

TEST(GitLayer, BatchedMatchesSingle) {
  const auto p = random_layer(2, 4, 11, Activation::gelu);
  const auto batch = random_tensor({3, 2, 4}, 12);
  const auto out = git_layer_forward(p, batch, Variant::standard);
  for (std::size_t b = 0; b < 3; ++b) {
    Tensor a({2, 4});
    std::copy_n(batch.raw() + b * 8, 8, a.raw());
    const auto single = git_layer_forward(p, a, Variant::standard);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(out[b * 8 + i], single[i]);
  }
}

TEST(LiftProject, IdentityAndZero) {
  GitNetShape s{2, 2, 3, 3, 2, 3, 1};
  auto m = init_params(s, Variant::standard, 1);
  m.lift_left = Tensor::identity(2);
  m.lift_right = Tensor::identity(3);
  m.proj_left = Tensor::identity(2);
  m.proj_right = Tensor::identity(3);
  const auto a = random_tensor({2, 3}, 2);
  EXPECT_EQ(lift(m, a), a);
  EXPECT_EQ(project(m, a), a);
  EXPECT_EQ(frobenius_norm(lift(m, Tensor({2, 3}))), 0.0);
  m.proj_left.fill(0.0);
  EXPECT_EQ(frobenius_norm(project(m, a)), 0.0);
}

TEST(LiftProject, MatchTwoStepOracle) {
  GitNetShape s{2, 3, 5, 4, 3, 6, 2};
  const auto m = init_params(s, Variant::standard, 3);
  const auto a = random_tensor({2, 5}, 4), z = random_tensor({3, 6}, 5);
  EXPECT_LT(max_abs_diff(lift(m, a), naive_matmul(naive_matmul(m.lift_left, a), m.lift_right)), 1e-12);
  EXPECT_LT(max_abs_diff(project(m, z), naive_matmul(naive_matmul(m.proj_left, z), m.proj_right)), 1e-12);
}

TEST(GitNet, ZeroProjectionGivesOutputMean) {
  GitNetShape s{1, 1, 4, 3, 2, 4, 2};
  auto m = init_params(s, Variant::standard, 6);
  m.proj_left.fill(0.0);
  PcaBasis bu = identity_basis(4), bv;
  bv.n_points = 6;
  bv.mean = random_tensor({6}, 7);
  bv.components = Tensor({3, 6});
  for (std::size_t k = 0; k < 3; ++k) bv.components(k, k) = 1.0;
  bv.singular_values = Tensor({3}, 1.0);
  const auto out = gitnet_forward(m, bu, bv, random_tensor({1, 4}, 8));
  for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(out[j], bv.mean[j]);
}

TEST(GitNet, OneLayerLinearNetworkMatchesDenseComposition) {
  const std::size_t k = 5;
  GitNetShape s{1, 1, k, k, 1, k, 1};
  auto m = init_params(s, Variant::standard, 9, Activation::identity);
  m.lift_left = Tensor::matrix({{1.0}});
  m.proj_left = Tensor::matrix({{1.0}});
  const auto& layer = m.layers[0];
  Tensor diag({k, k});
  for (std::size_t i = 0; i < k; ++i) diag(i, i) = layer.d(0, 0, i);
  Tensor core = naive_matmul(naive_matmul(layer.p, diag), layer.q);
  for (std::size_t i = 0; i < k; ++i) core(i, i) += layer.t(0, 0);
  const Tensor full = naive_matmul(naive_matmul(m.lift_right, core), m.proj_right);
  const auto f = random_tensor({1, k}, 10);
  const auto bu = identity_basis(k), bv = identity_basis(k);
  EXPECT_LT(max_abs_diff(gitnet_forward(m, bu, bv, f), naive_matmul(f, full)), 1e-12);
}

TEST(GitNet, ForwardIsDeterministicAndBatchConsistent) {
  GitNetShape s{1, 1, 4, 4, 3, 5, 3};
  const auto m = init_params(s, Variant::standard, 11);
  const auto bu = identity_basis(4), bv = identity_basis(4);
  const auto f = random_tensor({6, 1, 4}, 12);
  const auto a = gitnet_forward_batch(m, bu, bv, f), b = gitnet_forward_batch(m, bu, bv, f);
  EXPECT_EQ(a, b);
  for (std::size_t i = 0; i < 6; ++i) {
    const Tensor fi({1, 4}, std::vector<double>(f.raw() + 4 * i, f.raw() + 4 * i + 4));
    const auto single = gitnet_forward(m, bu, bv, fi);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(single[j], a[4 * i + j]);
  }
}

TEST(GitNet, SmallPerturbationGivesProportionalChange) {
  GitNetShape s{1, 1, 4, 4, 2, 4, 2};
  auto m = init_params(s, Variant::standard, 13);
  const auto bu = identity_basis(4), bv = identity_basis(4);
  const auto f = random_tensor({1, 4}, 14);
  const auto base = gitnet_forward(m, bu, bv, f);
  Rng rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    auto tensors = parameter_tensors(m);
    Tensor& t = *tensors[rng() % tensors.size()];
    const std::size_t i = rng() % t.size();
    const double saved = t[i];
    t[i] = saved + 1e-6;
    const double d1 = max_abs_diff(gitnet_forward(m, bu, bv, f), base);
    t[i] = saved + 2e-6;
    const double d2 = max_abs_diff(gitnet_forward(m, bu, bv, f), base);
    t[i] = saved;
    EXPECT_LT(d1, 1e-3);
    if (d1 > 1e-12) EXPECT_NEAR(d2 / d1, 2.0, 1e-3);
  }
}

TEST(GitNet, ParamCountLayer) {
  EXPECT_EQ(2 * 16 * 16 + 16 * 2 * 2, 576);
  EXPECT_EQ(param_count_layer(2, 16), 580u);
  EXPECT_EQ(param_count_layer(1, 1), 4u);
}

TEST(GitNet, InitParams) {
  GitNetShape s{2, 3, 5, 7, 4, 64, 3};
  const auto a = init_params(s, Variant::standard, 42), b = init_params(s, Variant::standard, 42);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, init_params(s, Variant::standard, 43));
  const double bound = std::sqrt(6.0 / 128.0);
  double max_p = 0.0;
  for (double v : a.layers[0].p.data()) max_p = std::max(max_p, std::abs(v));
  EXPECT_LE(max_p, bound);
  EXPECT_GT(max_p, 0.9 * bound);
  EXPECT_EQ(parameter_count(a), 4 * 2 + 5 * 64 + 3 * (2 * 64 * 64 + 64 * 16 + 16) + 3 * 4 + 64 * 7);
  EXPECT_EQ(parameter_count(a), param_count(s));
  EXPECT_EQ(a.layers.back().activation, Activation::identity);
  EXPECT_EQ(a.layers.front().activation, Activation::gelu);
}

TEST(GitNet, ValidateRejectsNonlinearLastLayer) {
  auto m = init_params({1, 1, 2, 2, 2, 2, 2}, Variant::standard, 1);
  EXPECT_NO_THROW(validate(m));
  m.layers.back().activation = Activation::gelu;
  EXPECT_THROW(validate(m), std::invalid_argument);
}

// --- PCA-Net ----------------------------------------------------------------

TEST(PcaNet, ZeroWeightsGiveOutputMean) {
  auto m = init_pcanet(1, 3, 1, 3, pcanet_widths(1, 3, 1, 3, 8), 1);
  for (Tensor* t : parameter_tensors(m)) t->fill(0.0);
  PcaBasis b = identity_basis(3);
  b.mean = Tensor::vector({1, 2, 3});
  EXPECT_EQ(pcanet_forward(m, b, b, random_tensor({1, 3}, 2)), Tensor::matrix({{1, 2, 3}}));
}

TEST(PcaNet, SingleLinearLayerIsAnyLinearMap) {
  auto m = init_pcanet(1, 4, 1, 3, {4, 3}, 1);
  const auto w = random_tensor({4, 3}, 3);
  m.weights[0] = w;
  const auto x = random_tensor({5, 4}, 4);
  EXPECT_EQ(pcanet_coefficients(m, x), naive_matmul(x, w));
}

TEST(PcaNet, TwoHiddenLayersMatchSequentialOracle) {
  for (Activation act : {Activation::relu, Activation::gelu}) {
    auto m = init_pcanet(1, 4, 1, 3, {4, 6, 5, 3}, 5, act);
    for (auto& b : m.biases) b = random_tensor(b.shape(), 6);
    const auto x = random_tensor({1, 4}, 7);
    Tensor h = x;
    for (std::size_t l = 0; l < 3; ++l) {
      h = naive_matmul(h, m.weights[l]);
      for (std::size_t j = 0; j < h.cols(); ++j) h(0, j) += m.biases[l][j];
      if (l < 2) h = activate(act, h);
    }
    EXPECT_LT(max_abs_diff(pcanet_coefficients(m, x), h), 1e-12);
  }
}

TEST(PcaNet, WidthsAndCounts) {
  const auto w = pcanet_widths(2, 10, 1, 7, 32, 4);
  EXPECT_EQ(w, (std::vector<std::size_t>{20, 32, 32, 32, 7}));
  const auto m = init_pcanet(2, 10, 1, 7, w, 0);
  EXPECT_EQ(parameter_count(m), 20 * 32 + 32 + 2 * (32 * 32 + 32) + 32 * 7 + 7);
}
