#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "kaf/signals.hpp"

using namespace kaf;

TEST_CASE("rng streams are deterministic and independent") {
  Rng a = Rng::stream(42, 1);
  Rng b = Rng::stream(42, 1);
  Rng c = Rng::stream(42, 2);
  bool any_differ = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    if (x != c.uniform()) any_differ = true;
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  CHECK(any_differ);
}

TEST_CASE("mackey_glass: fixed point at zero and rhs value") {
  CHECK(mackey_glass_rhs(1.2, 1.2) ==
        doctest::Approx(-0.08662836540387167346).epsilon(1e-14));

  MGConfig cfg;
  cfg.s0 = 0.0;
  cfg.n_train = 50;
  cfg.n_test = 0;
  cfg.transient = 10;
  for (double v : mackey_glass(cfg)) CHECK(v == 0.0);
}

TEST_CASE("mackey_glass: tau=30 trajectory stays bounded in (0, 1.5)") {
  MGConfig cfg;  // defaults: tau 30, dt 0.1, subsample 6, s0 1.2
  cfg.n_train = 2000;
  cfg.n_test = 0;
  cfg.transient = 0;
  const std::vector<double> s = mackey_glass(cfg);
  REQUIRE(s.size() == 2000);  // 12000 integration steps
  for (double v : s) {
    CHECK(v > 0.0);
    CHECK(v < 1.5);
  }
}

TEST_CASE("mackey_glass: halving dt changes the series by < 1e-6 RMS") {
  MGConfig a;
  a.tau = 13.0;
  a.dt = 0.02;
  a.subsample = 30;
  a.n_train = 500;
  a.n_test = 0;
  a.transient = 0;
  MGConfig b = a;
  b.dt = 0.01;
  b.subsample = 60;
  const std::vector<double> sa = mackey_glass(a);
  const std::vector<double> sb = mackey_glass(b);
  REQUIRE(sa.size() == sb.size());
  double rms = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i)
    rms += (sa[i] - sb[i]) * (sa[i] - sb[i]);
  rms = std::sqrt(rms / static_cast<double>(sa.size()));
  CHECK(rms < 1e-6);
}

TEST_CASE("mackey_glass config validation") {
  MGConfig bad;
  bad.tau = 0.35;  // tau/dt = 3.5, not an integer
  CHECK_THROWS_AS(mackey_glass(bad), std::invalid_argument);
}

TEST_CASE("mixed-Gaussian moments over 1e6 draws") {
  const MixedGaussianNoise m{0.95, 0.0, 0.0, 0.01, 64.0};
  Rng rng = Rng::stream(7, 1);
  const NoiseModel nm = m;
  double sum = 0.0, sq = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const double v = sample_noise(nm, rng);
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(var - 3.2095) <= 0.03 * 3.2095);
  CHECK(std::abs(mean) <= 0.01);
}

TEST_CASE("rayleigh mean over 1e6 draws and centering") {
  Rng rng = Rng::stream(8, 1);
  const NoiseModel nm = RayleighNoise{3.0};
  double sum = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) sum += sample_noise(nm, rng);
  CHECK(std::abs(sum / n - 3.7599424119465007536) <= 0.01 * 3.7599424119465);

  Rng rng2 = Rng::stream(8, 2);
  const NoiseModel cm = RayleighNoise{3.0, true};
  double csum = 0.0;
  for (int i = 0; i < n; ++i) csum += sample_noise(cm, rng2);
  CHECK(std::abs(csum / n) <= 0.05);
}

TEST_CASE("mixture collapse: varsigma = 1 is N(a1, mu1)") {
  const MixedGaussianNoise m{1.0, 0.4, 99.0, 0.25, 1e6};
  Rng rng = Rng::stream(9, 1);
  const NoiseModel nm = m;
  double sum = 0.0, sq = 0.0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) {
    const double v = sample_noise(nm, rng);
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  CHECK(mean == doctest::Approx(0.4).epsilon(0.01));
  CHECK(sq / n - mean * mean == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("scenario_noise definitions") {
  const NoiseModel s1 = scenario_noise(1);
  REQUIRE(std::holds_alternative<RayleighNoise>(s1));
  CHECK(std::get<RayleighNoise>(s1).chi == 3.0);

  const NoiseModel s2 = scenario_noise(2);
  REQUIRE(std::holds_alternative<MixedGaussianNoise>(s2));
  const auto& m2 = std::get<MixedGaussianNoise>(s2);
  CHECK(m2.varsigma == 0.95);
  CHECK(m2.mu1 == 0.01);
  CHECK(m2.mu2 == 64.0);

  const NoiseModel s3 = scenario_noise(3);
  REQUIRE(std::holds_alternative<GaussianNoise>(s3));
  CHECK(std::get<GaussianNoise>(s3).a == 0.0);
  CHECK(std::get<GaussianNoise>(s3).mu == 0.01);

  const NoiseModel s4 = scenario_noise(4);
  REQUIRE(std::holds_alternative<MixtureNoise>(s4));
  const auto& m4 = std::get<MixtureNoise>(s4);
  CHECK(m4.weight_rayleigh == 0.2);
  CHECK(m4.rayleigh.chi == 3.0);
  CHECK(m4.mixed.varsigma == 0.8);

  CHECK_THROWS_AS(scenario_noise(0), std::invalid_argument);
  CHECK_THROWS_AS(scenario_noise(5), std::invalid_argument);
}

TEST_CASE("embed examples") {
  std::vector<double> s{1, 2, 3, 4};
  const Dataset ds = embed(s, Embedding{2, 1});
  REQUIRE(ds.inputs.size() == 2);
  CHECK(ds.inputs[0] == std::vector<double>{1, 2});
  CHECK(ds.inputs[1] == std::vector<double>{2, 3});
  CHECK(ds.desired == std::vector<double>{3, 4});

  const Dataset d1 = embed(s, Embedding{1, 1});
  REQUIRE(d1.inputs.size() == 3);
  CHECK(d1.inputs[0] == std::vector<double>{1});
  CHECK(d1.desired == std::vector<double>{2, 3, 4});

  std::vector<double> c(10, 7.0);
  for (double v : embed(c, Embedding{3, 2}).desired) CHECK(v == 7.0);

  CHECK_THROWS_AS(embed(std::vector<double>{1, 2, 3}, Embedding{2, 1}),
                  std::invalid_argument);
}

TEST_CASE("embed round trip offset property") {
  MGConfig cfg;
  cfg.n_train = 100;
  cfg.n_test = 0;
  cfg.transient = 5;
  const std::vector<double> s = mackey_glass(cfg);
  const Embedding emb{5, 2};
  const Dataset ds = embed(s, emb);
  for (std::size_t i = 0; i < ds.inputs.size(); ++i) {
    for (int k = 0; k < emb.dim; ++k)
      CHECK(ds.inputs[i][static_cast<std::size_t>(k)] == s[i + static_cast<std::size_t>(k)]);
    CHECK(ds.desired[i] == s[i + static_cast<std::size_t>(emb.dim) +
                             static_cast<std::size_t>(emb.horizon) - 1]);
  }
}

TEST_CASE("load_series parses headers, columns and errors") {
  const std::string dir = std::filesystem::temp_directory_path().string();
  const std::string path = dir + "/kaf_test_series.csv";
  {
    std::ofstream f(path);
    f << "t,FP1,FP2\n0,1.5,9\n1,2.5,9\n2,-3.25,9\n";
  }
  const std::vector<double> s = load_series(path, "FP1");
  CHECK(s == std::vector<double>{1.5, 2.5, -3.25});

  // numeric index addressing also works
  CHECK(load_series(path, "2") == std::vector<double>{9, 9, 9});

  // missing column error names the available columns
  try {
    load_series(path, "FP9");
    CHECK(false);
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("FP1") != std::string::npos);
  }

  // header-only file: no data rows
  const std::string hdr = dir + "/kaf_test_hdr.csv";
  {
    std::ofstream f(hdr);
    f << "a,b\n";
  }
  CHECK_THROWS_AS(load_series(hdr, "a"), std::runtime_error);

  // non-numeric cell is rejected with its row number
  const std::string badp = dir + "/kaf_test_bad.csv";
  {
    std::ofstream f(badp);
    f << "a,b\n1,2\nx,3\n";
  }
  try {
    load_series(badp, "a");
    CHECK(false);
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }

  // tab-separated, no header
  const std::string tabp = dir + "/kaf_test_tab.tsv";
  {
    std::ofstream f(tabp);
    f << "1\t10\n2\t20\n";
  }
  CHECK(load_series(tabp, "1") == std::vector<double>{10, 20});

  CHECK_THROWS_AS(load_series(dir + "/kaf_no_such_file.csv", "a"),
                  std::runtime_error);

  // dump then reload round trip
  const std::string dump = dir + "/kaf_test_dump.csv";
  std::vector<double> orig{0.25, -1.75, 3.0};
  dump_series(dump, "col", orig);
  CHECK(load_series(dump, "col") == orig);
}
