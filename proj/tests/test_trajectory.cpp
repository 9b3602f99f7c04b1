#include <doctest.h>

#include <cmath>

#include "paretoscope/error.hpp"
#include "paretoscope/random.hpp"
#include "paretoscope/trajectory.hpp"
#include "test_helpers.hpp"

using namespace paretoscope;

namespace {

Trajectory line(std::size_t n, double t0 = 0.0, double dt = 0.1) {
  std::vector<Pose> poses;
  for (std::size_t i = 0; i < n; ++i) poses.push_back({t0 + dt * double(i), {0.1 * double(i), 0.0, 0.05 * double(i)}});
  return Trajectory(poses);
}

Trajectory random_walk(RandomStream& rng, std::size_t n) {
  std::vector<Pose> poses;
  Vec3 p{0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& c : p) c += rng.uniform01() - 0.5;
    poses.push_back({0.033 * double(i), p});
  }
  return Trajectory(poses);
}

Trajectory shift_time(const Trajectory& t, double dt) {
  auto poses = t.poses();
  for (auto& p : poses) p.timestamp += dt;
  return Trajectory(poses);
}

}  // namespace

TEST_CASE("trajectory invariants") {
  CHECK_THROWS_AS(Trajectory({Pose{1.0}, Pose{1.0}}), Error);
  CHECK_THROWS_AS(Trajectory({Pose{1.0}, Pose{0.5}}), Error);
  CHECK_THROWS_AS(Trajectory({Pose{0.0, {}, {0, 0, 0, 2}}}), Error);
  CHECK_NOTHROW(Trajectory({Pose{0.0, {}, {0, 0, std::sqrt(0.5), std::sqrt(0.5)}}}));
}

TEST_CASE("association") {
  const double tol = 0.02;
  const auto a = line(20);
  SUBCASE("identical timestamps pair by identity") {
    const auto assoc = associate(a, a, tol);
    REQUIRE(assoc.pairs.size() == 20);
    for (std::size_t i = 0; i < 20; ++i) CHECK(assoc.pairs[i] == std::pair<std::size_t, std::size_t>{i, i});
    CHECK(assoc.unmatched_a == 0);
    CHECK(assoc.unmatched_b == 0);
  }
  SUBCASE("offset by half the tolerance pairs fully") {
    const auto assoc = associate(a, shift_time(a, tol / 2), tol);
    CHECK(assoc.pairs.size() == 20);
  }
  SUBCASE("offset by twice the tolerance pairs nothing") {
    const auto assoc = associate(a, shift_time(a, 2 * tol), tol);
    CHECK(assoc.pairs.empty());
    CHECK(assoc.unmatched_a == 20);
    CHECK(assoc.unmatched_b == 20);
  }
  SUBCASE("each reference sample is used once") {
    // Two estimate samples both nearest to one reference sample.
    const Trajectory est({Pose{1.000}, Pose{1.004}});
    const Trajectory gt({Pose{1.002}});
    const auto assoc = associate(est, gt, tol);
    REQUIRE(assoc.pairs.size() == 1);
    CHECK(assoc.pairs[0].first == 0);
    CHECK(assoc.unmatched_a == 1);
  }
  SUBCASE("denser reference") {
    const auto gt = line(200, 0.0, 0.01);
    const auto assoc = associate(a, gt, tol);
    REQUIRE(assoc.pairs.size() == 20);
    for (const auto& [i, j] : assoc.pairs) CHECK(j == 10 * i);
    CHECK(assoc.unmatched_b == 180);
  }
  CHECK_THROWS_AS(associate(a, a, 0.0), Error);
}

TEST_CASE("absolute trajectory error") {
  const auto gt = line(30);
  SUBCASE("identical trajectories") {
    const auto d = ate(gt, gt);
    CHECK(d.mean == 0.0);
    CHECK(d.errors.size() == 30);
  }
  SUBCASE("constant shift") {
    const auto est = gt.translated({0.3, 0.0, 0.4});
    const auto d = ate(est, gt);
    for (double e : d.errors) CHECK(std::abs(e - 0.5) < 1e-12);
    CHECK(std::abs(d.mean - 0.5) < 1e-12);
    CHECK(std::abs(d.rmse - 0.5) < 1e-12);
    CHECK(std::abs(ate(est, gt, {Alignment::first_pose, 0.02}).mean) < 1e-12);
  }
  SUBCASE("translation invariance under first-pose alignment") {
    RandomStream rng(8);
    for (int trial = 0; trial < 50; ++trial) {
      const auto a = random_walk(rng, 40), b = random_walk(rng, 40);
      const Vec3 off{rng.uniform01() * 10 - 5, rng.uniform01() * 10 - 5, rng.uniform01() * 10 - 5};
      const AteOptions opt{Alignment::first_pose, 0.02};
      CHECK(ate(a.translated(off), b, opt).mean == doctest::Approx(ate(a, b, opt).mean).epsilon(1e-9));
    }
  }
  SUBCASE("statistics") {
    const auto d = error_distribution({0.3, 0.1, 0.2, 0.4});
    CHECK(d.mean == doctest::Approx(0.25));
    CHECK(d.median == doctest::Approx(0.25));
    CHECK(d.max == 0.4);
    CHECK(d.rmse == doctest::Approx(std::sqrt((0.09 + 0.01 + 0.04 + 0.16) / 4)));
  }
  SUBCASE("unmatched samples are reported") {
    const auto d = ate(line(10, 0.0), line(5, 0.0));
    CHECK(d.errors.size() == 5);
    CHECK(d.unmatched == 5);
  }
  CHECK_THROWS_AS(ate(gt, shift_time(gt, 100.0)), Error);
}

TEST_CASE("error histogram") {
  const auto dist = error_distribution({0.1, 0.1, 0.3});
  const auto h = error_histogram(dist, 2, std::pair{0.0, 0.4});
  CHECK(h.counts == std::vector<std::uint64_t>{2, 1});
  CHECK(h.mean == doctest::Approx(0.1667).epsilon(1e-3));
  CHECK(h.bin_width() == doctest::Approx(0.2));

  const auto single = error_histogram(error_distribution({0.7}), 5);
  std::size_t nonzero = 0;
  for (auto c : single.counts) nonzero += c != 0;
  CHECK(nonzero == 1);

  const auto equal = error_histogram(error_distribution({0.2, 0.2, 0.2, 0.2}), 4);
  CHECK(*std::max_element(equal.counts.begin(), equal.counts.end()) == 4);

  const auto clipped = error_histogram(error_distribution({-1.0, 0.5, 9.0}), 2, std::pair{0.0, 1.0});
  CHECK(clipped.counts == std::vector<std::uint64_t>{1, 2});

  CHECK_THROWS_AS(error_histogram(dist, 0), Error);
  CHECK_THROWS_AS(error_histogram(dist, 2, std::pair{1.0, 0.0}), Error);
}

TEST_CASE("TUM format") {
  const auto t = parse_tum("# timestamp tx ty tz qx qy qz qw\n"
                           "1.0 0 0 0 0 0 0 1\n"
                           "\n"
                           "1.5 1 2 3 0 0 0.7071 0.7071\n");
  REQUIRE(t.size() == 2);
  CHECK(t.poses()[1].position == Vec3{1, 2, 3});
  const auto& q = t.poses()[1].orientation;
  CHECK(std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(parse_tum("1.0 0 0 0 0 0 0\n"), Error);
  CHECK_THROWS_AS(parse_tum("1.0 0 0 0 0 0 0 2\n"), Error);
  CHECK_THROWS_AS(parse_tum("x 0 0 0 0 0 0 1\n"), Error);
  CHECK_THROWS_AS(parse_tum("2.0 0 0 0 0 0 0 1\n1.0 0 0 0 0 0 0 1\n"), Error);

  TempDir dir;
  RandomStream rng(3);
  const auto walk = random_walk(rng, 25);
  write_tum(dir / "walk.txt", walk);
  const auto back = read_tum(dir / "walk.txt");
  REQUIRE(back.size() == walk.size());
  for (std::size_t i = 0; i < walk.size(); ++i) {
    CHECK(back.poses()[i].timestamp == walk.poses()[i].timestamp);
    CHECK(back.poses()[i].position == walk.poses()[i].position);
  }
}
