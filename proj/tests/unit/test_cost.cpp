#include <gtest/gtest.h>

#include <cmath>

#include "gitnet/cost.hpp"
#include "test_util.hpp"

using namespace gitnet;
using gitnet::test::random_tensor;

namespace {

// Hand count from the stage list: encode, lift, layers, project, decode.
std::uint64_t oracle_gitnet(std::uint64_t np, std::uint64_t di, std::uint64_t dout, std::uint64_t pu,
                            std::uint64_t pv, std::uint64_t c, std::uint64_t k, std::uint64_t layers,
                            std::uint64_t gelu_layers) {
  std::uint64_t total = 2 * di * pu * np;
  total += 2 * c * di * pu + 2 * c * pu * k;
  for (std::uint64_t l = 0; l < layers; ++l) {
    total += 2 * c * k * k;  // αP
    total += 2 * c * c * k;  // ⊗D
    total += 2 * c * k * k;  // ·Q
    total += 2 * c * c * k;  // Tα
    total += c * k;          // add
  }
  total += 15 * c * k * gelu_layers;
  total += 2 * dout * c * k + 2 * dout * k * pv;
  total += 2 * dout * pv * np;
  return total;
}

PcaBasis basis(std::size_t n, std::size_t p, std::uint64_t seed) {
  PcaOptions opt;
  opt.p_cap = p;
  opt.energy_threshold = 1.0;
  auto b = fit_pca(random_tensor({3 * p, n}, seed), opt);
  EXPECT_EQ(b.size(), p);
  return b;
}

}  // namespace

TEST(Cost, DegenerateTwelveFlops) {
  const auto r = flops_gitnet_exact(1, 1, 1, 1, 1, 1, 1, 0);
  EXPECT_EQ(r.flops, 12u);
  EXPECT_EQ(r.breakdown, (CostBreakdown{2, 4, 0, 4, 2}));
}

TEST(Cost, MatchesHandCount) {
  for (std::size_t layers : {1u, 2u, 3u, 5u}) {
    const auto r = flops_gitnet_exact(300, 2, 3, 17, 11, 5, 9, layers);
    EXPECT_EQ(r.flops, oracle_gitnet(300, 2, 3, 17, 11, 5, 9, layers, layers - 1));
    EXPECT_EQ(r.flops, r.breakdown.total());
    const auto lin = flops_gitnet_exact(300, 2, 3, 17, 11, 5, 9, layers, Activation::identity);
    EXPECT_EQ(lin.flops, oracle_gitnet(300, 2, 3, 17, 11, 5, 9, layers, 0));
  }
}

TEST(Cost, LinearInPointCount) {
  const auto a = flops_gitnet_exact(100, 2, 3, 8, 6, 4, 16, 3), b = flops_gitnet_exact(200, 2, 3, 8, 6, 4, 16, 3);
  EXPECT_EQ(b.flops - a.flops, 2u * (2 * 8 + 3 * 6) * 100);
}

TEST(Cost, InstrumentedEqualsExactForListedShape) {
  const auto bu = basis(256, 32, 1), bv = basis(256, 32, 2);
  const auto m = init_params({1, 1, 32, 32, 4, 32, 3}, Variant::standard, 3);
  const auto exact = flops_gitnet_exact(256, 1, 1, 32, 32, 4, 32, 3);
  EXPECT_EQ(instrumented_flops(m, bu, bv), exact.flops);
  EXPECT_EQ(flops_gitnet_exact(m, 256, 256), exact);
}

TEST(Cost, InstrumentedEqualsExactAcrossVariantsAndShapes) {
  const auto bu = basis(40, 6, 4), bv = basis(30, 5, 5);
  for (Variant v : {Variant::standard, Variant::pre_residual}) {
    for (Activation act : {Activation::gelu, Activation::relu, Activation::identity}) {
      const auto m = init_params({2, 3, 6, 5, 3, 7, 2}, v, 6, act);
      const auto in_u = PcaBasis(bu), in_v = PcaBasis(bv);
      const std::uint64_t got = instrumented_flops(m, in_u, in_v);
      EXPECT_EQ(got, flops_gitnet_exact(m, 40, 30).flops);
      if (act != Activation::relu) EXPECT_EQ(got, flops_gitnet_exact(40, 2, 3, 6, 5, 3, 7, 2, act).flops + 2 * 3 * 5 * 30 - 2 * 3 * 5 * 40);
    }
  }
}

TEST(Cost, PcaNetSingleLinearLayer) {
  const auto r = flops_pcanet_exact(50, 1, 1, 7, 9, {7, 9});
  EXPECT_EQ(r.breakdown.layers, 2u * 7 * 9);
  EXPECT_EQ(r.flops, 2u * 7 * 50 + 2 * 7 * 9 + 2 * 9 * 50);
}

TEST(Cost, PcaNetInstrumentedEqualsExact) {
  const auto bu = basis(64, 8, 7), bv = basis(64, 6, 8);
  const auto widths = pcanet_widths(1, 8, 1, 6, 20, 4);
  for (Activation act : {Activation::relu, Activation::gelu}) {
    const auto m = init_pcanet(1, 8, 1, 6, widths, 9, act);
    EXPECT_EQ(instrumented_flops(m, bu, bv), flops_pcanet_exact(64, 1, 1, 8, 6, widths, act).flops);
  }
}

TEST(Cost, PcaNetMlpScalesQuadraticallyInWidth) {
  std::vector<double> xs, ys;
  for (std::size_t k = 64; k <= 1024; k *= 2) {
    const auto r = flops_pcanet_exact(128, 1, 1, 2, 2, pcanet_widths(1, 2, 1, 2, k, 4));
    xs.push_back(std::log(static_cast<double>(k)));
    ys.push_back(std::log(static_cast<double>(r.breakdown.layers)));
  }
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  EXPECT_NEAR(slope, 2.0, 0.05);
  // With wide PCA ends the linear term 4·P·K lingers, but local slopes still climb towards 2.
  double prev = 0.0;
  for (std::size_t k = 64; k <= 1024; k *= 2) {
    auto mlp = [](std::size_t w) {
      return static_cast<double>(flops_pcanet_exact(128, 1, 1, 32, 32, pcanet_widths(1, 32, 1, 32, w, 4)).breakdown.layers);
    };
    const double local = std::log2(mlp(2 * k) / mlp(k));
    EXPECT_GT(local, prev);
    EXPECT_LT(local, 2.0);
    prev = local;
  }
}

TEST(Cost, FnoExamples) {
  EXPECT_EQ(flops_fno_scaling(1, 4, 3, 12), 3.0 * 2.0 * 16.0);
  const double np = 512, c = 8;
  const double fft = [&](double n) { return kFftFlopsPerPoint * c * n * std::log2(n) * 2.0; }(np);
  EXPECT_DOUBLE_EQ(flops_fno_scaling(512, 8, 2, 16), 2.0 * (fft + 2.0 * np * c * c));
  // FFT term alone: ratio between 2N and N tends to 2·log2(2N)/log2(N).
  auto fft_only = [](std::size_t n) { return flops_fno_scaling(n, 1000, 1, 1) - 2.0 * n * 1e6; };
  for (std::size_t n : {1u << 8, 1u << 12, 1u << 16})
    EXPECT_NEAR(fft_only(2 * n) / fft_only(n), 2.0 * std::log2(2.0 * n) / std::log2(static_cast<double>(n)), 1e-9);
  EXPECT_LT(flops_fno_scaling(64, 4, 2, 8), flops_fno_scaling(128, 4, 2, 8));
  EXPECT_LT(flops_fno_scaling(64, 4, 2, 8), flops_fno_scaling(64, 5, 2, 8));
  EXPECT_LT(flops_fno_scaling(64, 4, 2, 8), flops_fno_scaling(64, 4, 3, 8));
}

TEST(Cost, PodDeepOnetFormula) {
  EXPECT_EQ(flops_pod_deeponet_scaling(10, 3, 4, 2), 2.0 * 2 * 10 * 9 + 2.0 * 3 * 4 * 10 + 10);
}

TEST(Cost, GitNetRatioBoundedOverTwoDecades) {
  double lo = INFINITY, hi = 0.0;
  for (std::size_t np = 64; np <= 6400; np *= 10) {
    for (std::size_t k = 8; k <= 800; k *= 10) {
      const double c = 4;
      const double r = static_cast<double>(flops_gitnet_exact(np, 1, 1, 16, 16, 4, k, 3).flops) /
                       (static_cast<double>(np) + c * static_cast<double>(k) * (c + static_cast<double>(k)));
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  }
  EXPECT_GT(lo, 0.5);
  EXPECT_LT(hi, 200.0);
}

TEST(Cost, CsvRoundTrip) {
  const auto a = flops_gitnet_exact(128, 1, 1, 30, 28, 8, 64, 3);
  const auto b = scaling_report("fno", flops_fno_scaling(128, 8, 3, 16), 128, 8, 16, 3);
  for (bool inst : {false, true}) {
    std::string text = cost_csv_header(inst) + "\n";
    text += cost_csv_row(a, inst ? std::optional<std::uint64_t>(a.flops) : std::nullopt) + "\n";
    text += cost_csv_row(b) + (inst ? "," : "") + "\n";
    const auto rows = parse_cost_csv(text);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].report, a);
    EXPECT_EQ(rows[1].report, b);
    EXPECT_EQ(rows[0].instrumented.has_value(), inst);
    EXPECT_FALSE(rows[1].instrumented.has_value());
  }
  std::string bad = cost_csv_header(false) + "\n" + cost_csv_row(a) + "\n";
  bad.replace(bad.rfind(std::to_string(a.flops)), std::to_string(a.flops).size(), "1");
  EXPECT_THROW((void)parse_cost_csv(bad), std::invalid_argument);
}
