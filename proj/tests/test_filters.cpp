#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "kaf/core_math.hpp"
#include "kaf/filters.hpp"
#include "kaf/linalg.hpp"
#include "kaf/signals.hpp"

using namespace kaf;

namespace {

FilterConfig make_cfg(FilterVariant v, double sigma = 1.0, double alpha = 2.0,
                      double beta = 1.0, double gamma = 0.0, double reg = 1.0,
                      double mee_sigma = 1.0, double lambda = 1.0,
                      int window = 50) {
  CriterionParams cp(GGDParams(alpha, beta), mee_sigma, lambda, window);
  return FilterConfig(v, KernelParams(sigma), cp, gamma, reg);
}

Dataset mg_data(int n, double noise, std::uint64_t seed) {
  MGConfig mg;
  mg.n_train = n;
  mg.n_test = 0;
  mg.transient = 100;
  Embedding emb;
  mg.extra = emb.dim + emb.horizon - 1;
  Dataset ds = embed(mackey_glass(mg), emb);
  if (noise > 0.0) {
    Rng rng = Rng::stream(seed, 3);
    for (double& d : ds.desired) d += noise * rng.normal();
  }
  return ds;
}

} // namespace

TEST_CASE("init examples") {
  std::vector<double> u{0.4, -0.2};

  // sigma=1, theta2=1, alpha=2, beta=1, d1=1: Q1 = 1/(1 + 1/sqrt(2 pi))
  KernelFilter f(u, 1.0, make_cfg(FilterVariant::qkrgmee));
  CHECK(f.size() == 1);
  CHECK(f.coeffs()[0] == doctest::Approx(0.71482577516568129946).epsilon(1e-14));
  CHECK(f.predict(u) ==
        doctest::Approx(0.71482577516568129946 * kInvSqrt2Pi).epsilon(1e-13));

  // d1 = 0 gives A1 = 0
  KernelFilter z(u, 0.0, make_cfg(FilterVariant::qkrgmee));
  CHECK(z.coeffs()[0] == 0.0);
  CHECK(z.predict(u) == 0.0);

  // KRLS and QKRGMEE agree at n=1 when beta^alpha reg matches the KRLS ridge
  KernelFilter krls(u, 1.0, make_cfg(FilterVariant::krls));
  KernelFilter qk(u, 1.0, make_cfg(FilterVariant::qkrgmee, 1.0, 2.0, 1.0));
  CHECK(krls.coeffs()[0] == qk.coeffs()[0]);
}

TEST_CASE("predict is a plain kernel expansion") {
  std::vector<double> u1{0.3}, u2{0.9}, q{0.5};
  const FilterConfig cfg = make_cfg(FilterVariant::krls);
  KernelFilter f(u1, 1.0, cfg);
  f.update(u2, 0.5);
  REQUIRE(f.size() == 2);
  const double manual =
      f.coeffs()[0] * gaussian_kernel(q, u1, cfg.kernel) +
      f.coeffs()[1] * gaussian_kernel(q, u2, cfg.kernel);
  CHECK(f.predict(q) == doctest::Approx(manual).epsilon(1e-14));

  std::vector<double> wrong_dim{0.5, 0.1};
  CHECK_THROWS_AS(f.predict(wrong_dim), std::invalid_argument);
}

TEST_CASE("n=2 hand trace: Q2 is the direct 2x2 inverse") {
  std::vector<double> u1{0.3}, u2{0.9};
  const FilterConfig cfg = make_cfg(FilterVariant::qkrgmee, 1.0, 2.0, 1.3, 0.0, 0.7);
  KernelFilter f(u1, 1.0, cfg);
  f.update(u2, 0.5);

  const auto th = f.theta_trace();
  const double ridge = cfg.ridge_scale() * cfg.reg;
  const double a = gaussian_kernel(u1, u1, cfg.kernel) + ridge / th[0];
  const double b = gaussian_kernel(u1, u2, cfg.kernel);
  const double c = gaussian_kernel(u2, u2, cfg.kernel) + ridge / th[1];
  const double det = a * c - b * b;

  const auto q = f.q_full();
  CHECK(q[0] == doctest::Approx(c / det).epsilon(1e-12));
  CHECK(q[1] == doctest::Approx(-b / det).epsilon(1e-12));
  CHECK(q[3] == doctest::Approx(a / det).epsilon(1e-12));
}

TEST_CASE("unquantized variants force gamma to zero") {
  const FilterConfig a = make_cfg(FilterVariant::krgmee, 1.0, 2.0, 1.0, 0.9);
  CHECK(a.gamma == 0.0);
  const FilterConfig b = make_cfg(FilterVariant::krmee, 1.0, 2.0, 1.0, 0.4);
  CHECK(b.gamma == 0.0);
  const FilterConfig c = make_cfg(FilterVariant::qkrgmee, 1.0, 2.0, 1.0, 0.4);
  CHECK(c.gamma == 0.4);
}

TEST_CASE("growth, window discipline and determinism") {
  const Dataset ds = mg_data(120, 0.1, 5);
  const FilterConfig cfg =
      make_cfg(FilterVariant::qkrgmee, 0.5, 2.0, 1.4, 0.04, 1.0, 1.0, 1.0, 30);
  KernelFilter f(ds.inputs[0], ds.desired[0], cfg);
  for (std::size_t i = 1; i < ds.inputs.size(); ++i) {
    f.update(ds.inputs[i], ds.desired[i]);
    CHECK(f.size() == i + 1);
    CHECK(f.window_size() <= 30);
    CHECK(f.codebook().total_count() == static_cast<std::size_t>(f.window_size()));
  }
  CHECK(f.h_mean() > 0.0);
  CHECK(f.counters().mults > 0);

  // identical stream, bit-identical coefficients
  KernelFilter g(ds.inputs[0], ds.desired[0], cfg);
  for (std::size_t i = 1; i < ds.inputs.size(); ++i)
    g.update(ds.inputs[i], ds.desired[i]);
  for (std::size_t i = 0; i < f.size(); ++i)
    CHECK(f.coeffs()[i] == g.coeffs()[i]);
}

TEST_CASE("incremental and rebuild codebook modes agree at gamma=0") {
  const Dataset ds = mg_data(150, 0.1, 6);
  FilterConfig inc = make_cfg(FilterVariant::krgmee, 1.0, 2.0, 1.4, 0.0, 1.0);
  FilterConfig reb = inc;
  reb.codebook_mode = CodebookMode::rebuild;

  KernelFilter fi(ds.inputs[0], ds.desired[0], inc);
  KernelFilter fr(ds.inputs[0], ds.desired[0], reb);
  for (std::size_t i = 1; i < ds.inputs.size(); ++i) {
    const double yi = fi.predict(ds.inputs[i]);
    const double yr = fr.predict(ds.inputs[i]);
    CHECK(yi == yr);  // bit-exact on an all-distinct error stream
    fi.update(ds.inputs[i], ds.desired[i]);
    fr.update(ds.inputs[i], ds.desired[i]);
  }
}

TEST_CASE("KRLS reduction: QKRGMEE with theta=1 and dtilde=d") {
  // with a single newest-error codebook, theta depends on the window, so
  // instead check KRLS against the closed form with theta frozen to 1
  const Dataset ds = mg_data(40, 0.05, 7);
  const FilterConfig cfg = make_cfg(FilterVariant::krls, 0.8);
  KernelFilter f(ds.inputs[0], ds.desired[0], cfg);
  std::vector<std::vector<double>> inputs{ds.inputs[0]};
  for (std::size_t i = 1; i < ds.inputs.size(); ++i) {
    f.update(ds.inputs[i], ds.desired[i]);
    inputs.push_back(ds.inputs[i]);
  }
  const std::vector<double> theta(f.size(), 1.0);
  const std::vector<double> dtilde(ds.desired.begin(),
                                   ds.desired.begin() + static_cast<std::ptrdiff_t>(f.size()));
  const std::vector<double> batch = batch_solve_frozen(inputs, dtilde, theta, cfg);
  double scale = 0.0;
  for (double v : f.coeffs()) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < f.size(); ++i)
    CHECK(std::abs(f.coeffs()[i] - batch[i]) <= 1e-9 * scale);
}

TEST_CASE("batch_solve examples") {
  // n = 1 reduces to init
  std::vector<std::vector<double>> one{{0.4, -0.2}};
  const FilterConfig cfg = make_cfg(FilterVariant::qkrgmee);
  const std::vector<double> a1 =
      batch_solve(one, std::vector<double>{1.0}, std::vector<double>{}, cfg);
  CHECK(a1[0] == doctest::Approx(0.71482577516568129946).epsilon(1e-14));

  // ridge limit: with theta = 1 and large reg, A -> d / reg elementwise
  std::mt19937_64 g(44);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<std::vector<double>> inputs(6);
  std::vector<double> desired(6);
  for (std::size_t i = 0; i < 6; ++i) {
    inputs[i] = {d(g), d(g)};
    desired[i] = d(g);
  }
  const std::vector<double> theta(6, 1.0);
  double prev_max = 1e300;
  for (double reg : {1e2, 1e4, 1e6}) {
    const FilterConfig c = make_cfg(FilterVariant::krls, 1.0, 2.0, 1.0, 0.0, reg);
    const std::vector<double> a = batch_solve_frozen(inputs, desired, theta, c);
    double mx = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
      mx = std::max(mx, std::abs(a[i]));
      CHECK(a[i] * reg == doctest::Approx(desired[i]).epsilon(1e-2));
    }
    CHECK(mx < prev_max);  // monotone shrinkage
    prev_max = mx;
  }
}

TEST_CASE("recursive coefficients match the batch replay from raw errors (n=30)") {
  const Dataset ds = mg_data(30, 0.1, 8);
  const FilterConfig cfg =
      make_cfg(FilterVariant::qkrmee, 0.7, 2.0, 1.0, 0.05, 1.0, 0.8, 1.0, 15);
  KernelFilter f(ds.inputs[0], ds.desired[0], cfg);
  std::vector<std::vector<double>> inputs{ds.inputs[0]};
  for (std::size_t i = 1; i < ds.inputs.size(); ++i) {
    f.update(ds.inputs[i], ds.desired[i]);
    inputs.push_back(ds.inputs[i]);
  }
  const auto errs = f.error_trace();
  const std::vector<double> batch =
      batch_solve(inputs, ds.desired, errs.subspan(1), cfg);
  double scale = 0.0;
  for (double v : f.coeffs()) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < f.size(); ++i)
    CHECK(std::abs(f.coeffs()[i] - batch[i]) <= 1e-8 * scale);
}

TEST_CASE("singular theta events are flagged, not thrown") {
  // alpha < 2 at gamma = 0: the newest error is its own codeword, so the
  // |e - c|^(alpha-2) clamp fires on every update
  const Dataset ds = mg_data(20, 0.1, 9);
  const FilterConfig cfg = make_cfg(FilterVariant::qkrgmee, 1.0, 1.5, 2.0, 0.0);
  KernelFilter f(ds.inputs[0], ds.desired[0], cfg);
  for (std::size_t i = 1; i < ds.inputs.size(); ++i)
    f.update(ds.inputs[i], ds.desired[i]);
  CHECK(f.singular_events() > 0);
  for (double v : f.coeffs()) CHECK(std::isfinite(v));
}

TEST_CASE("snapshot round trip") {
  const Dataset ds = mg_data(12, 0.1, 10);
  const FilterConfig cfg =
      make_cfg(FilterVariant::qkrgmee, 0.9, 2.0, 1.2, 0.05, 1.0, 1.0, 1.0, 8);
  KernelFilter f(ds.inputs[0], ds.desired[0], cfg);
  for (std::size_t i = 1; i < ds.inputs.size(); ++i)
    f.update(ds.inputs[i], ds.desired[i]);

  std::stringstream ss;
  f.write_snapshot(ss);
  const FilterSnapshot snap = read_snapshot(ss);
  CHECK(snap.variant == "QKRGMEE");
  CHECK(snap.dim == 7);
  CHECK(snap.n == f.size());
  CHECK(snap.gamma == 0.05);
  const auto q = f.q_full();
  for (std::size_t i = 0; i < snap.n * snap.n; ++i) CHECK(snap.q[i] == q[i]);
  for (std::size_t i = 0; i < snap.n; ++i) CHECK(snap.a[i] == f.coeffs()[i]);
  for (std::size_t j = 0; j < snap.n; ++j) {
    const auto p = f.dictionary_point(j);
    for (std::size_t k = 0; k < snap.dim; ++k)
      CHECK(snap.dictionary[j * snap.dim + k] == p[k]);
  }
  const Codebook& cb = f.codebook();
  REQUIRE(snap.codewords.size() == cb.size());
  for (std::size_t h = 0; h < cb.size(); ++h) {
    CHECK(snap.codewords[h] == cb.codeword(h));
    CHECK(snap.counts[h] == cb.count(h));
  }

  std::stringstream bad("not a snapshot\n");
  CHECK_THROWS_AS(read_snapshot(bad), std::runtime_error);
}

TEST_CASE("variant names round trip") {
  for (FilterVariant v : {FilterVariant::krls, FilterVariant::krmee,
                          FilterVariant::krgmee, FilterVariant::qkrmee,
                          FilterVariant::qkrgmee})
    CHECK(variant_from_name(variant_name(v)) == v);
  CHECK_THROWS_AS(variant_from_name("KLMS"), std::invalid_argument);
}
