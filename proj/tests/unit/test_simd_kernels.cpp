#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "pronk/simd/kernels.hpp"

using namespace pronk::simd;

namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> d(-scale, scale);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

class SimdEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!avx2_available()) GTEST_SKIP() << "AVX2 kernels not available on this machine";
    vp = &avx2_kernels();
  }
  const KernelTable& s = scalar_kernels();
  const KernelTable* vp = nullptr;
  std::mt19937_64 rng{42};
};

}  // namespace

TEST_F(SimdEquivalence, BezierMatchesScalarBitForBit) {
  for (int n_cols = 1; n_cols <= kMaxBezierOrder + 1; ++n_cols) {
    const auto cols = random_vector(static_cast<std::size_t>(n_cols) * kLanes, rng, 2.0);
    for (double t : {0.0, 0.13, 0.5, 0.77, 1.0}) {
      double a[kLanes], b[kLanes];
      s.bezier4(cols.data(), n_cols, t, a);
      vp->bezier4(cols.data(), n_cols, t, b);
      for (int l = 0; l < kLanes; ++l) EXPECT_EQ(a[l], b[l]) << n_cols << " " << t;
      s.bezier_derivative4(cols.data(), n_cols, t, a);
      vp->bezier_derivative4(cols.data(), n_cols, t, b);
      for (int l = 0; l < kLanes; ++l) EXPECT_EQ(a[l], b[l]) << n_cols << " " << t;
    }
  }
}

TEST_F(SimdEquivalence, IirMatchesScalarBitForBit) {
  for (int order = 1; order <= kMaxFilterOrder; ++order) {
    auto b = random_vector(order + 1, rng, 0.1);
    auto a = random_vector(order + 1, rng, 0.1);
    a[0] = 1.0;
    const std::size_t n = 257;
    const auto x = random_vector(n * kLanes, rng);
    std::vector<double> ya(n * kLanes), yb(n * kLanes);
    auto za = random_vector(static_cast<std::size_t>(order) * kLanes, rng);
    auto zb = za;
    s.iir4(b.data(), a.data(), order, x.data(), ya.data(), n, za.data());
    vp->iir4(b.data(), a.data(), order, x.data(), yb.data(), n, zb.data());
    EXPECT_EQ(ya, yb) << "order " << order;
    EXPECT_EQ(za, zb) << "order " << order;
  }
}

TEST_F(SimdEquivalence, AffineAndBlendMatchScalarBitForBit) {
  const std::size_t n = 201;
  const auto base = random_vector(n * kLanes, rng, 30.0);
  const auto e = random_vector(n * kLanes, rng, 0.3);
  const auto ed = random_vector(n * kLanes, rng, 5.0);
  const auto kp = random_vector(kLanes, rng, 100.0);
  const auto kd = random_vector(kLanes, rng, 10.0);
  std::vector<double> oa(n * kLanes), ob(n * kLanes);
  s.affine4(base.data(), e.data(), ed.data(), kp.data(), kd.data(), oa.data(), n);
  vp->affine4(base.data(), e.data(), ed.data(), kp.data(), kd.data(), ob.data(), n);
  EXPECT_EQ(oa, ob);
  s.blend4(base.data(), e.data(), 0.3, 0.7, oa.data(), n);
  vp->blend4(base.data(), e.data(), 0.3, 0.7, ob.data(), n);
  EXPECT_EQ(oa, ob);
}

TEST(SimdDispatch, BackendCanBeForcedToScalar) {
  const Backend before = active_backend();
  set_backend(Backend::kScalar);
  EXPECT_EQ(active_backend(), Backend::kScalar);
  EXPECT_EQ(&active_kernels(), &scalar_kernels());
  set_backend(before);
  EXPECT_EQ(active_backend(), before);
}

TEST(SimdDispatch, BackendNames) {
  EXPECT_STREQ(name(Backend::kScalar), "scalar");
  EXPECT_STREQ(name(Backend::kAvx2), "avx2");
}
