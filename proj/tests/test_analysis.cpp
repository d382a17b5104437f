#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "bridge.hpp"
#include "wtconv/analysis.hpp"

using namespace wtconv;
namespace ref = wtconv_reference;

TEST(Flops, WorkedValuesAt512) {
  EXPECT_EQ(flops_depthwise(1, 7, 7, 512, 512), 12'845'056);
  EXPECT_EQ(flops_depthwise(1, 31, 31, 512, 512), 251'920'384);
  EXPECT_EQ(flops_wtconv_convs(1, 5, 512, 512, 3), 15'155'200);
  EXPECT_EQ(flops_wtconv_convs(2, 5, 512, 512, 3), 30'310'400);
  const WaveletFlops wf = flops_wt_iwt(1, 512, 512, 3);
  EXPECT_EQ(wf.wt, 1'376'256);
  EXPECT_EQ(wf.wt + wf.iwt, 2'752'512);
  EXPECT_EQ(flop_report(1, 5, 512, 512, 3).total, 17'907'712);
}

TEST(Flops, SmallCases) {
  EXPECT_EQ(flops_depthwise(1, 1, 1, 1, 1), 1);
  EXPECT_EQ(flops_depthwise(3, 3, 3, 8, 8, 2, 2), 3 * 9 * 16);
  EXPECT_EQ(flops_wtconv_convs(4, 3, 16, 16, 0), flops_depthwise(4, 3, 3, 16, 16));
  EXPECT_EQ(flops_wt_iwt(1, 16, 16, 0).wt, 0);
  EXPECT_THROW(flops_depthwise(1, 3, 3, 7, 8, 2, 1), ParamError);
  EXPECT_THROW(flops_depthwise(0, 3, 3, 8, 8), ParamError);
  EXPECT_THROW(flops_wtconv_convs(1, 3, 12, 12, 3), ShapeError);
  EXPECT_THROW(flops_depthwise(std::int64_t{1} << 40, 1 << 20, 1 << 20, 1, 1), ParamError);
}

TEST(Flops, ReportBreakdown) {
  const FlopReport r = flop_report(1, 5, 512, 512, 3);
  EXPECT_EQ(r.base_flops, 6'553'600);
  ASSERT_EQ(r.per_level.size(), 3u);
  EXPECT_EQ(r.per_level[0], 4 * 25 * 256 * 256);
  EXPECT_EQ(r.conv_flops, 15'155'200);
  EXPECT_EQ(r.wt_flops, r.iwt_flops);
}

TEST(Flops, HumanRendering) {
  EXPECT_EQ(human_flops(12'845'056), "12.8M");
  EXPECT_EQ(human_flops(251'920'384), "252M");
  EXPECT_EQ(human_flops(2'752'512), "2.8M");
  EXPECT_EQ(human_flops(17'907'712), "17.9M");
  // Nearest rounding; 15.1552M is 15.2M, not a truncated 15.1M.
  EXPECT_EQ(human_flops(15'155'200), "15.2M");
  EXPECT_EQ(human_flops(999), "999");
  EXPECT_EQ(human_flops(1'500), "1.5K");
  EXPECT_EQ(human_flops(99'960'000), "100M");
  EXPECT_EQ(human_flops(3'000'000'000), "3.0G");
}

TEST(Flops, MeasuredMacsMatchFormulas) {
  for (int levels : {0, 1, 2, 3}) {
    const auto p = init_params<double>(2, 5, levels, 0);
    const MacCounter m = measured_mac_count(p, 1, 32, 32);
    EXPECT_EQ(m.conv, flops_wtconv_convs(2, 5, 32, 32, levels)) << levels;
    const WaveletFlops wf = flops_wt_iwt(2, 32, 32, levels);
    EXPECT_EQ(m.wt, wf.wt);
    EXPECT_EQ(m.iwt, wf.iwt);
    EXPECT_EQ(m.total(), flop_report(2, 5, 32, 32, levels).total);
  }
}

namespace {

ErfMap impulse_erf(const WTConvParams<double>& p, std::int64_t n) {
  return erf_map<double>({p}, {Tensor4d(1, p.c, n, n)});
}

}  // namespace

TEST(Erf, PlainKernelCoversExactlyItsWindow) {
  const auto p = ref::random_layer(1, 5, 0, 1);
  const ErfMap m = impulse_erf(p, 32);
  const SupportBox box = support_box(m);
  EXPECT_EQ(box.y0, 14);
  EXPECT_EQ(box.y1, 18);
  EXPECT_EQ(box.x0, 14);
  EXPECT_EQ(box.x1, 18);
  EXPECT_EQ(support_size(m), 25);
  EXPECT_EQ(m.values.maxCoeff(), 1.0);
}

TEST(Erf, WaveletLevelsGrowSupportWithinBound) {
  const std::int64_t n = 128;
  const auto wt = ref::random_layer(1, 5, 3, 2);
  const ErfMap m = impulse_erf(wt, n);
  const SupportBox box = support_box(m);
  EXPECT_GT(box.height(), 5);
  EXPECT_GT(box.width(), 5);
  EXPECT_GE(box.y0, n / 2 - 40);
  EXPECT_LT(box.y1, n / 2 + 40);
  EXPECT_GE(box.x0, n / 2 - 40);
  EXPECT_LT(box.x1, n / 2 + 40);
  EXPECT_EQ(receptive_field(5, 3), 40);
}

TEST(Erf, SupportGrowsWithLevels) {
  std::int64_t prev = 0;
  for (int levels : {0, 1, 2, 3}) {
    const std::int64_t s = support_size(impulse_erf(ref::random_layer(1, 3, levels, 3), 64));
    EXPECT_GT(s, prev) << levels;
    prev = s;
  }
}

TEST(Erf, WaveletSupportContainsPlainSupport) {
  for (std::uint64_t seed = 10; seed < 13; ++seed) {
    const ErfMap plain = impulse_erf(ref::random_layer(2, 5, 0, seed), 64);
    const ErfMap wt = impulse_erf(ref::random_layer(2, 5, 3, seed), 64);
    EXPECT_TRUE(support_contains(wt, plain));
    EXPECT_FALSE(support_contains(plain, wt));
  }
}

TEST(Erf, StackedLayersWidenSupport) {
  const auto a = ref::random_layer(1, 3, 1, 20);
  const auto b = ref::random_layer(1, 3, 1, 21);
  const Tensor4d img(1, 1, 64, 64);
  EXPECT_GT(support_size(erf_map<double>({a, b}, {img})), support_size(erf_map<double>({a}, {img})));
}

TEST(Erf, SymmetricKernelGivesMirroredMap) {
  // A kernel equal to its own flip with a centered odd-sized probe.
  auto p = init_params<double>(1, 3, 0, 0, InitScheme::Zeros);
  p.w0.values() << 1, 2, 1, 2, 4, 2, 1, 2, 1;
  const ErfMap m = impulse_erf(p, 15);
  EXPECT_TRUE((m.values == m.values.rowwise().reverse()).all());
  EXPECT_TRUE((m.values == m.values.colwise().reverse()).all());
}

TEST(Erf, Errors) {
  const auto p = ref::random_layer(1, 3, 0, 30);
  EXPECT_THROW(erf_map<double>({p}, {}), ParamError);
  EXPECT_THROW(erf_map<double>({}, {Tensor4d(1, 1, 8, 8)}), ParamError);
  EXPECT_THROW(erf_map<double>({p}, {Tensor4d(1, 1, 8, 8), Tensor4d(1, 1, 8, 6)}), ShapeError);
  const auto zero = init_params<double>(1, 3, 0, 0, InitScheme::Zeros);
  EXPECT_THROW(erf_map<double>({zero}, {Tensor4d(1, 1, 8, 8)}), ParamError);
}

TEST(Erf, CsvAndPgm) {
  ErfMap m;
  m.h = 2;
  m.w = 3;
  m.values = ErfMap::Grid::Zero(2, 3);
  m.values(0, 1) = 1.0;
  m.values(1, 2) = 0.5;
  EXPECT_EQ(erf_to_csv(m), "0,1,0\n0,0,0.5\n");
  const std::string pgm = erf_to_pgm(m);
  const std::string header = "P5\n3 2\n255\n";
  ASSERT_EQ(pgm.size(), header.size() + 6);
  EXPECT_EQ(pgm.substr(0, header.size()), header);
  EXPECT_EQ(static_cast<unsigned char>(pgm[header.size() + 1]), 255);
  EXPECT_EQ(static_cast<unsigned char>(pgm[header.size() + 5]), 128);
  EXPECT_EQ(pgm[header.size()], '\0');
}
