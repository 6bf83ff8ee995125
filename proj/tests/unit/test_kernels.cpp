#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cartcredit/kernels.hpp"

using namespace cartcredit::kernels;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

double tolerance(const std::vector<double>& a, const std::vector<double>& b) {
  double mag = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mag += std::abs(a[i] * b[i]);
  return 1e-13 * std::max(1.0, mag);
}

}  // namespace

TEST(Kernels, ScalarAlwaysAvailable) {
  EXPECT_TRUE(backend_available(Backend::Scalar));
  EXPECT_NE(table_for(Backend::Scalar), nullptr);
}

TEST(Kernels, ScalarReference) {
  std::vector<double> a{1, 2, 3}, b{4, 5, 6}, w{1, 0, 2};
  const auto* t = table_for(Backend::Scalar);
  EXPECT_EQ(t->dot(a.data(), b.data(), 3), 32.0);
  EXPECT_EQ(t->weighted_dot(w.data(), a.data(), b.data(), 3), 40.0);
  EXPECT_EQ(t->sum(a.data(), 3), 6.0);
  EXPECT_EQ(t->centered_dot(a.data(), 2.0, b.data(), 5.0, 3), 2.0);
}

TEST(Kernels, VectorBackendsMatchScalar) {
  const auto* ref = table_for(Backend::Scalar);
  for (Backend backend : {Backend::Avx2, Backend::Neon}) {
    if (!backend_available(backend)) continue;
    const auto* t = table_for(backend);
    ASSERT_NE(t, nullptr);
    std::mt19937_64 rng(1);
    // Lengths around the vector width exercise the remainder loops.
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 100u, 1023u, 4000u}) {
      const auto a = random_vector(rng, n);
      const auto b = random_vector(rng, n);
      const auto w = random_vector(rng, n);
      const double tol = tolerance(a, b) * 4.0;
      EXPECT_NEAR(t->dot(a.data(), b.data(), n), ref->dot(a.data(), b.data(), n), tol) << n;
      EXPECT_NEAR(t->weighted_dot(w.data(), a.data(), b.data(), n),
                  ref->weighted_dot(w.data(), a.data(), b.data(), n), tol * 3.0) << n;
      EXPECT_NEAR(t->sum(a.data(), n), ref->sum(a.data(), n), 1e-13 * std::max<double>(1.0, n)) << n;
      EXPECT_NEAR(t->centered_dot(a.data(), 0.3, b.data(), -0.2, n),
                  ref->centered_dot(a.data(), 0.3, b.data(), -0.2, n), tol * 4.0) << n;
    }
  }
}

TEST(Kernels, SwitchingBackends) {
  const Backend original = active_backend();
  EXPECT_TRUE(set_backend(Backend::Scalar));
  EXPECT_EQ(active_backend(), Backend::Scalar);
  std::vector<double> a{1.5, 2.5};
  EXPECT_EQ(dot(a, a), 1.5 * 1.5 + 2.5 * 2.5);
  if (!backend_available(Backend::Neon)) {
    EXPECT_FALSE(set_backend(Backend::Neon));
    EXPECT_EQ(active_backend(), Backend::Scalar);
  }
  set_backend(original);
}
