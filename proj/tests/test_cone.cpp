#include "doctest.h"

#include "cran/cone.hpp"
#include "cran/errors.hpp"
#include "cran/rng.hpp"

using namespace cran;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

ConeSpec spec(int zero, int nonneg, std::vector<int> soc) {
  ConeSpec s;
  s.zero_dim = zero;
  s.nonneg_dim = nonneg;
  s.soc_dims = std::move(soc);
  return s;
}

Vec random_vec(Rng& rng, int n, double scale) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal(0.0, scale);
  return v;
}

}  // namespace

TEST_SUITE("cone") {
  TEST_CASE("projection examples") {
    CHECK(project_cone(vec({2, 1, 0}), spec(0, 0, {3})).isApprox(vec({2, 1, 0})));
    CHECK((project_cone(vec({0, 1}), spec(0, 0, {2})) - vec({0.5, 0.5})).norm() < 1e-15);
    CHECK(project_cone(vec({-3, 4}), spec(0, 2, {})) == vec({0, 4}));
  }

  TEST_CASE("dual projection examples") {
    CHECK(project_dual_cone(vec({-5, 7}), spec(2, 0, {})) == vec({-5, 7}));
    CHECK((project_dual_cone(vec({0, 1}), spec(0, 0, {2})) - vec({0.5, 0.5})).norm() < 1e-15);
    CHECK(project_dual_cone(vec({-1, -1}), spec(1, 1, {})) == vec({-1, 0}));
  }

  TEST_CASE("zero cone projects to the origin") {
    CHECK(project_cone(vec({3, -2}), spec(2, 0, {})) == vec({0, 0}));
  }

  TEST_CASE("soc below the polar cone maps to zero") {
    CHECK(project_cone(vec({-5, 1, 1}), spec(0, 0, {3})).norm() == 0.0);
  }

  TEST_CASE("dimension one soc is the nonnegative ray") {
    CHECK(project_cone(vec({-2}), spec(0, 0, {1}))[0] == 0.0);
    CHECK(project_cone(vec({2}), spec(0, 0, {1}))[0] == 2.0);
  }

  TEST_CASE("invalid specs and sizes are rejected") {
    CHECK_THROWS_AS(spec(-1, 0, {}).validate(), InvalidArgument);
    CHECK_THROWS_AS(spec(0, 0, {0}).validate(), InvalidArgument);
    CHECK_THROWS_AS(project_cone(vec({1, 2, 3}), spec(0, 2, {})), InvalidArgument);
  }

  TEST_CASE("moreau decomposition, idempotence and membership") {
    Rng rng = Rng::stream(11, "cone-properties");
    const ConeSpec k = spec(2, 3, {1, 2, 4, 7});
    for (int trial = 0; trial < 2000; ++trial) {
      const Vec x = random_vec(rng, k.total_dim(), trial % 2 ? 1.0 : 1e3);
      const Vec p = project_cone(x, k);
      const Vec d = project_dual_cone(-x, k);
      const double scale = std::max(1.0, x.lpNorm<Eigen::Infinity>());
      CHECK((x - (p - d)).lpNorm<Eigen::Infinity>() <= 1e-12 * scale);
      CHECK(std::abs(p.dot(d)) <= 1e-12 * scale * scale);
      CHECK((project_cone(p, k) - p).lpNorm<Eigen::Infinity>() <= 1e-12 * scale);
      CHECK(in_cone(p, k, 1e-12 * scale));
      CHECK(in_cone(d, k, 1e-12 * scale, /*dual=*/true));
    }
  }

  TEST_CASE("distance vanishes inside and is positive outside") {
    const ConeSpec k = spec(0, 1, {3});
    CHECK(cone_distance(vec({1, 3, 0, 0}), k) == 0.0);
    CHECK(cone_distance(vec({-1, 3, 0, 0}), k) == doctest::Approx(1.0));
  }
}
