#include "doctest.h"

#include "cran/beamforming.hpp"
#include "cran/errors.hpp"
#include "cran/network.hpp"
#include "support/instances.hpp"

using namespace cran;
using cran::testing::placed_instance;
using cran::testing::random_instance;

TEST_SUITE("network") {
  TEST_CASE("positions stay inside the square") {
    const Topology t = generate_topology(3, 10, 15, 1000.0);
    REQUIRE(t.rrhs.size() == 10);
    REQUIRE(t.users.size() == 15);
    for (const auto& set : {t.rrhs, t.users})
      for (const Point& p : set) {
        CHECK(std::abs(p.x) <= 1000.0);
        CHECK(std::abs(p.y) <= 1000.0);
      }
  }

  TEST_CASE("topology is seeded") {
    const Topology a = generate_topology(5, 4, 4, 1000.0);
    const Topology b = generate_topology(5, 4, 4, 1000.0);
    const Topology c = generate_topology(6, 4, 4, 1000.0);
    for (int i = 0; i < 4; ++i) {
      CHECK(a.users[i].x == b.users[i].x);
      CHECK(a.users[i].y == b.users[i].y);
      CHECK(a.users[i].x != c.users[i].x);
    }
  }

  TEST_CASE("co-located rrh dominates the user's gains") {
    const NetworkInstance inst =
        placed_instance({{0, 0}, {800, 0}, {0, -900}, {-700, 700}}, {{0, 5}, {790, 10}}, 1, 21);
    Eigen::Index best = -1;
    inst.large_scale.row(0).maxCoeff(&best);
    CHECK(best == 0);
    inst.large_scale.row(1).maxCoeff(&best);
    CHECK(best == 1);
  }

  TEST_CASE("small scale fading has unit mean power") {
    Mat g(1, 1);
    g(0, 0) = 2.5;
    double sum = 0.0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) sum += std::norm(small_scale_channel(g, {1}, static_cast<std::uint64_t>(i))(0, 0));
    CHECK(sum / draws / g(0, 0) == doctest::Approx(1.0).epsilon(0.05));
  }

  TEST_CASE("channels are reproducible bitwise") {
    const NetworkInstance a = random_instance(9, 3, 2, 4);
    const NetworkInstance b = random_instance(9, 3, 2, 4);
    CHECK(a.H == b.H);
    CHECK(a.large_scale == b.large_scale);
  }

  TEST_CASE("matched filter sinr for one user") {
    CMat H(1, 3);
    H << std::complex<double>(1, 2), std::complex<double>(-0.5, 0.3), std::complex<double>(0, 1);
    const double p = 0.7;
    const double sigma2 = 0.2;
    const CMat V = std::sqrt(p) * H.row(0).transpose() / H.norm();
    const Vec sinr = evaluate_sinr(H, V, Vec::Constant(1, sigma2));
    CHECK(sinr[0] == doctest::Approx(H.squaredNorm() * p / sigma2));
  }

  TEST_CASE("zero beamformers give zero sinr") {
    const NetworkInstance inst = random_instance(2, 2, 2, 3);
    const Vec sinr = evaluate_sinr(inst.H, CMat::Zero(4, 3), inst.noise_power);
    CHECK(sinr.isZero());
  }

  TEST_CASE("network power arithmetic") {
    NetworkInstance inst = random_instance(1, 2, 1, 1);
    inst.power.fronthaul_w << 6.0, 7.0;
    CHECK(network_power(CMat::Zero(2, 1), {}, inst) == 0.0);
    CMat V = CMat::Zero(2, 1);
    V(0, 0) = std::sqrt(2.0);
    CHECK(network_power(V, {0}, inst) == doctest::Approx(8.0));
    CHECK_THROWS_AS(network_power(V, {1}, inst), InvalidArgument);
    CHECK(group_power(V, inst.antennas)[0] == doctest::Approx(2.0));
  }

  TEST_CASE("default fronthaul powers") {
    const NetworkInstance inst = random_instance(0, 10, 2, 15);
    CHECK(inst.power.fronthaul_w.sum() == doctest::Approx(105.0));
    CHECK(inst.power.fronthaul_w[0] == 6.0);
  }

  TEST_CASE("power minimization meets every target") {
    BeamformingDesigner d;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const NetworkInstance inst = random_instance(seed, 3, 2, 3, 2.0);
      const PowerMinResult r = d.powermin(inst, {0, 1, 2});
      if (r.status != DesignStatus::Solved) continue;
      const Vec sinr = evaluate_sinr(inst.H, r.V, inst.noise_power);
      for (int k = 0; k < inst.num_users(); ++k) CHECK(sinr[k] >= inst.target_sinr[k] - 1e-3);
    }
  }

  TEST_CASE("invalid configs are rejected") {
    NetworkConfig c;
    c.num_rrhs = 0;
    CHECK_THROWS_AS(make_instance(c, 0), InvalidArgument);
    c = {};
    c.fronthaul_w = {1.0};
    CHECK_THROWS_AS(make_instance(c, 0), InvalidArgument);
  }

  TEST_CASE("decibel conversions") {
    CHECK(db_to_linear(10.0) == doctest::Approx(10.0));
    CHECK(linear_to_db(100.0) == doctest::Approx(20.0));
  }
}
