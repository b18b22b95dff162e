#include <doctest.h>

#include <cmath>
#include <random>

#include "kaf/core_math.hpp"

using namespace kaf;

TEST_CASE("gamma_fn reference values") {
  // reference values computed with 40-digit arithmetic
  const struct {
    double x, g;
  } table[] = {
      {0.5, 1.7724538509055160273},
      {1.0, 1.0},
      {1.5, 0.88622692545275801365},
      {2.0, 1.0},
      {2.5, 1.3293403881791370205},
      {3.0, 2.0},
      {5.0, 24.0},
      {7.3, 1271.4236336639092731},
      {10.0, 362880.0},
      {13.7, 2861595499.0660198538},
      {20.0, 121645100408832000.0},
      {29.9, 6.304174488373751511e+30},
      {50.0, 6.0828186403426756087e+62},
      {0.1, 9.5135076986687318363},
      {0.01, 99.432585119150603714},
      {0.9, 1.0686287021193193549},
      {1.4616, 0.88560319485364803632},
  };
  for (const auto& t : table)
    CHECK(std::abs(gamma_fn(t.x) - t.g) <= 1e-12 * t.g);

  // beyond the tight-contract range, still sane
  CHECK(gamma_fn(99.5) == doctest::Approx(9.3678021146559965913e+154).epsilon(1e-10));
  CHECK(gamma_fn(171.0) == doctest::Approx(7.2574156153079989674e+306).epsilon(1e-10));

  CHECK_THROWS_AS(gamma_fn(0.0), std::domain_error);
  CHECK_THROWS_AS(gamma_fn(-1.5), std::domain_error);
  CHECK_THROWS_AS(gamma_fn(171.5), std::domain_error);
}

TEST_CASE("ggd_density examples and bound") {
  const GGDParams p21(2.0, 1.0);
  CHECK(ggd_density(0.0, p21) == doctest::Approx(0.56418958354775628695).epsilon(1e-14));
  CHECK(ggd_density(1.0, p21) == doctest::Approx(0.20755374871029735167).epsilon(1e-14));

  // peak value alpha/(2 beta Gamma(1/alpha)) attained at e = 0
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> par(0.2, 5.0), err(-4.0, 4.0);
  for (int i = 0; i < 200; ++i) {
    const GGDParams p(par(g), par(g));
    const double peak = p.alpha / (2.0 * p.beta * gamma_fn(1.0 / p.alpha));
    CHECK(ggd_density(0.0, p) == doctest::Approx(peak).epsilon(1e-14));
    const double e = err(g);
    CHECK(ggd_density(e, p) <= peak);
    if (e != 0.0) CHECK(ggd_density(e, p) < peak);
    CHECK(ggd_density(e, p) == ggd_density(-e, p));  // even
  }
}

TEST_CASE("ggd with alpha=2, beta=sqrt(2) sigma equals the Gaussian form") {
  std::mt19937_64 g(12);
  std::uniform_real_distribution<double> sig(0.3, 3.0), err(-5.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    const double s = sig(g), e = err(g);
    const GGDParams p(2.0, std::sqrt(2.0) * s);
    const double gauss = kInvSqrt2Pi / s * std::exp(-e * e / (2.0 * s * s));
    CHECK(ggd_density(e, p) == doctest::Approx(gauss).epsilon(1e-12));
    CHECK(gauss_fn(e, s) == doctest::Approx(gauss).epsilon(1e-14));
  }
}

TEST_CASE("gaussian_kernel examples") {
  const KernelParams k1(1.0);
  std::vector<double> x{0.2, -0.4, 1.0}, y{0.2, -0.4, 1.0};
  CHECK(gaussian_kernel(x, y, k1) == doctest::Approx(0.39894228040143267794).epsilon(1e-14));

  // ||x-y|| = sqrt(2), sigma = 1
  std::vector<double> a{0.0, 0.0}, b{1.0, 1.0};
  CHECK(gaussian_kernel(a, b, k1) == doctest::Approx(0.14676266317373989989).epsilon(1e-14));

  std::mt19937_64 g(13);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> u{d(g), d(g), d(g)}, v{d(g), d(g), d(g)};
    const KernelParams k(0.5 + std::abs(d(g)));
    CHECK(gaussian_kernel(u, v, k) == gaussian_kernel(v, u, k));  // symmetry
    CHECK(gaussian_kernel(u, u, k) == doctest::Approx(kInvSqrt2Pi / k.sigma));
  }

  std::vector<double> short_v{1.0};
  CHECK_THROWS_AS(gaussian_kernel(x, short_v, k1), std::invalid_argument);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(GGDParams(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(GGDParams(1.0, -2.0), std::invalid_argument);
  CHECK_THROWS_AS(KernelParams(0.0), std::invalid_argument);
}
