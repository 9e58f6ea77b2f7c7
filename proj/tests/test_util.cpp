#include <cmath>
#include <vector>

#include "doctest.h"
#include "sectorial/util/parallel.hpp"
#include "sectorial/util/rng.hpp"
#include "sectorial/util/stats.hpp"

using namespace sectorial::util;

TEST_CASE("philox4x32-10 known-answer vectors") {
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) ==
        std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
  RandomStream a(7, 3, 1), b(7, 3, 1), c(7, 4, 1), d(7, 3, 2);
  for (int i = 0; i < 10; ++i) {
    const double x = a.normal();
    CHECK(x == b.normal());
    CHECK(x != c.normal());
    CHECK(x != d.normal());
  }
  RandomStream e(7, 3, 1);
  CHECK(e.normal_at(5) == RandomStream(7, 3, 1).normal_at(5));
  CHECK(e.normal_at(4) != e.normal_at(5));
}

TEST_CASE("normal moments") {
  RandomStream s(11, 0);
  const int n = 200000;
  std::vector<double> v(n), w(n);
  for (int i = 0; i < n; ++i) {
    v[i] = s.normal();
    w[i] = s.normal_at(static_cast<std::uint64_t>(i));
  }
  for (const auto* x : {&v, &w}) {
    CHECK(std::abs(mean(*x)) < 4.0 / std::sqrt(n));
    CHECK(std::abs(sample_variance(*x) - 1.0) < 4.0 * std::sqrt(2.0 / n));
  }
  RandomStream u(12, 0);
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += u.below(10) == 3;
  CHECK(std::abs(hits / double(n) - 0.1) < 4 * std::sqrt(0.09 / n));
}

TEST_CASE("line fit and quantiles") {
  std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const auto f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.slope_stderr == doctest::Approx(0.0));
  CHECK(quantile({3, 1, 2, 4}, 0.5) == doctest::Approx(2.5));
  CHECK(quantile({5}, 0.9) == 5);
}

TEST_CASE("parallel_for fills every slot") {
  std::vector<int> out(1000, 0);
  parallel_for(out.size(), 4, [&](std::size_t i) { out[i] = static_cast<int>(i) * 2; });
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i) * 2);
}
