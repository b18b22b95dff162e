#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "kaf/quantizer.hpp"

using namespace kaf;

TEST_CASE("insert: empty codebook, duplicates at gamma=0, nearest within gamma") {
  Codebook cb(0.0);
  CHECK(cb.insert(0.3) == 0);
  CHECK(cb.size() == 1);
  CHECK(cb.codeword(0) == 0.3);
  CHECK(cb.count(0) == 1);

  // gamma=0: only exact duplicates collapse
  Codebook dup(0.0);
  dup.insert(0.1);
  dup.insert(0.2);
  dup.insert(0.1);
  CHECK(dup.size() == 2);
  CHECK(dup.codeword(0) == 0.1);
  CHECK(dup.count(0) == 2);
  CHECK(dup.count(1) == 1);

  Codebook near(0.15);
  near.insert(0.0);
  CHECK(near.insert(0.1) == 0);  // |0.1 - 0| <= 0.15
  CHECK(near.size() == 1);
  CHECK(near.count(0) == 2);
}

TEST_CASE("ties at equal distance go to the lower index") {
  Codebook cb(0.5);
  cb.insert(0.0);
  cb.insert(1.0);
  CHECK(cb.insert(0.5) == 0);  // equidistant to both codewords
  CHECK(cb.count(0) == 2);
  CHECK(cb.count(1) == 1);
}

TEST_CASE("remove decrements and erases at zero") {
  Codebook cb(0.0);
  cb.insert(1.0);
  cb.insert(1.0);
  cb.insert(2.0);
  CHECK_FALSE(cb.remove(0));
  CHECK(cb.count(0) == 1);
  CHECK(cb.remove(0));
  CHECK(cb.size() == 1);
  CHECK(cb.codeword(0) == 2.0);
  CHECK(cb.remove(0));
  CHECK(cb.empty());
  CHECK_THROWS_AS(cb.remove(0), std::out_of_range);
}

TEST_CASE("insert-then-remove of a fresh codeword restores the codebook") {
  Codebook cb(0.1);
  cb.insert(0.0);
  cb.insert(0.5);
  const Codebook before = cb;
  const std::size_t idx = cb.insert(3.0);  // far: creates a new codeword
  CHECK(idx == 2);
  cb.remove(idx);
  CHECK(cb == before);
}

TEST_CASE("build_codebook examples") {
  // gamma=0, distinct errors: H = L, all counts 1
  std::vector<double> distinct{0.4, -1.2, 0.9, 2.2, -0.1};
  Codebook a = build_codebook(distinct, 0.0);
  CHECK(a.size() == distinct.size());
  for (std::size_t h = 0; h < a.size(); ++h) {
    CHECK(a.count(h) == 1);
    CHECK(a.codeword(h) == distinct[h]);
  }

  // gamma at least the max pairwise distance: H = 1
  Codebook b = build_codebook(distinct, 10.0);
  CHECK(b.size() == 1);
  CHECK(b.count(0) == distinct.size());

  // hand trace: {-1, -0.9, 1} at gamma 0.2 -> codewords {-1, 1}, counts {2, 1}
  std::vector<double> tr{-1.0, -0.9, 1.0};
  Codebook c = build_codebook(tr, 0.2);
  REQUIRE(c.size() == 2);
  CHECK(c.codeword(0) == -1.0);
  CHECK(c.count(0) == 2);
  CHECK(c.codeword(1) == 1.0);
  CHECK(c.count(1) == 1);
}

TEST_CASE("count conservation and fold equivalence") {
  std::mt19937_64 g(21);
  std::uniform_real_distribution<double> err(-2.0, 2.0), gam(0.0, 0.5);
  for (int rep = 0; rep < 50; ++rep) {
    const double gamma = rep % 4 == 0 ? 0.0 : gam(g);
    std::vector<double> errors(1 + g() % 60);
    for (double& e : errors) e = err(g);

    const Codebook batch = build_codebook(errors, gamma);
    Codebook fold(gamma);
    for (double e : errors) fold.insert(e);
    CHECK(batch == fold);  // exact structural equality
    CHECK(batch.total_count() == errors.size());

    // determinism: rebuilding gives bit-identical state
    CHECK(build_codebook(errors, gamma) == batch);

    // removal keeps the running total consistent
    Codebook dyn = batch;
    std::size_t expected = errors.size();
    while (!dyn.empty()) {
      dyn.remove(g() % dyn.size());
      CHECK(dyn.total_count() == --expected);
    }
  }
}

TEST_CASE("no two codewords within gamma of each other at insertion") {
  std::mt19937_64 g(22);
  std::uniform_real_distribution<double> err(-2.0, 2.0);
  const double gamma = 0.3;
  std::vector<double> errors(200);
  for (double& e : errors) e = err(g);
  const Codebook cb = build_codebook(errors, gamma);
  for (std::size_t i = 0; i < cb.size(); ++i)
    for (std::size_t j = i + 1; j < cb.size(); ++j)
      CHECK(std::abs(cb.codeword(i) - cb.codeword(j)) > gamma);
}

TEST_CASE("from_parts validates") {
  const Codebook cb = Codebook::from_parts({0.0, 1.0}, {3, 2}, 0.1);
  CHECK(cb.total_count() == 5);
  CHECK_THROWS_AS(Codebook::from_parts({0.0}, {1, 2}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Codebook::from_parts({0.0}, {0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Codebook(-0.1), std::invalid_argument);
}
