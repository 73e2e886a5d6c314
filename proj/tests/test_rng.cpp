// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "handball/rng.hpp"

using handball::Rng;

TEST_CASE("identical seeds reproduce the full draw sequence") {
  Rng a(12345), b(12345);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.uniform() == b.uniform());
    CHECK(a.gaussian() == b.gaussian());
    CHECK(a.complex_gaussian() == b.complex_gaussian());
  }
}

TEST_CASE("derived streams are deterministic and distinct") {
  Rng a = Rng::stream(7, 2, 5);
  Rng b = Rng::stream(7, 2, 5);
  Rng c = Rng::stream(7, 2, 6);
  Rng d = Rng::stream(7, 3, 5);
  const double ax = a.uniform();
  CHECK(ax == b.uniform());
  CHECK(ax != c.uniform());
  CHECK(ax != d.uniform());
}

TEST_CASE("uniform stays in [0, 1) and matches its moments") {
  Rng rng(99);
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sum2 += u * u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sum2 / n == doctest::Approx(1.0 / 3.0).epsilon(0.01));
}

TEST_CASE("gaussian moments") {
  Rng rng(4);
  double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    sum += g;
    sum2 += g * g;
    sum4 += g * g * g * g;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(sum4 / n == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("complex gaussian has unit power split across rails") {
  Rng rng(11);
  double p = 0.0, pre = 0.0, pim = 0.0;
  std::complex<double> mean{};
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const auto z = rng.complex_gaussian();
    p += std::norm(z);
    pre += z.real() * z.real();
    pim += z.imag() * z.imag();
    mean += z;
  }
  CHECK(p / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(pre / n == doctest::Approx(0.5).epsilon(0.03));
  CHECK(pim / n == doctest::Approx(0.5).epsilon(0.03));
  CHECK(std::abs(mean / static_cast<double>(n)) < 0.01);
}
