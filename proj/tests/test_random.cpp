#include <doctest.h>

#include <set>

#include "paretoscope/random.hpp"

using paretoscope::RandomStream;

TEST_CASE("streams with the same seed are identical") {
  RandomStream a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("derived streams depend on the seed and key, not on consumption") {
  RandomStream a(7);
  const auto child_before = a.derive("pool").next_u64();
  for (int i = 0; i < 10; ++i) a.next_u64();
  CHECK(a.derive("pool").next_u64() == child_before);
  CHECK(a.derive("pool").next_u64() != a.derive("forest").next_u64());
  CHECK(a.split(0).next_u64() != a.split(1).next_u64());
}

TEST_CASE("uniform_index stays in range and hits every value") {
  RandomStream r(1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = r.uniform_index(7);
    REQUIRE(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
  CHECK(r.uniform_index(1) == 0);
}

TEST_CASE("uniform01 lies in [0, 1) with mean near one half") {
  RandomStream r(3);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // sd of the mean is 1/sqrt(12 * 1e5) ~ 9e-4
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.005));
}
