#include <doctest.h>

#include <algorithm>
#include <set>

#include "activegp/design.hpp"

using namespace activegp;

TEST_CASE("one point sits at the centre") {
  LhdConfig c;
  c.n = 1;
  c.q = 2;
  c.bounds = Bounds::uniform(2);
  const DesignMatrix d = maximin_lhd(c);
  REQUIRE(d.rows() == 1);
  CHECK(d(0, 0) == 0.0);
  CHECK(d(0, 1) == 0.0);
}

TEST_CASE("one-dimensional design is the bin midpoints") {
  LhdConfig c;
  c.n = 5;
  c.q = 1;
  c.bounds = Bounds::uniform(1, 0.0, 1.0);
  DesignMatrix d = maximin_lhd(c);
  std::vector<double> v(d.data(), d.data() + d.size());
  std::sort(v.begin(), v.end());
  const double expect[] = {0.1, 0.3, 0.5, 0.7, 0.9};
  for (int i = 0; i < 5; ++i) CHECK(v[i] == doctest::Approx(expect[i]).epsilon(1e-14));
}

TEST_CASE("Latin property and maximin improvement") {
  for (int n : {1, 5, 11, 200}) {
    for (int q : {1, 2, 10}) {
      for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        LhdConfig c;
        c.n = n;
        c.q = q;
        c.bounds = Bounds::uniform(q);
        c.seed = seed;
        c.sweeps = n == 200 ? 200 : 2000;
        const DesignMatrix d = maximin_lhd(c);
        CAPTURE(n);
        CAPTURE(q);
        CHECK(d.rows() == n);
        CHECK(d.cols() == q);
        CHECK(is_latin(d, c.bounds));
        CHECK(d.maxCoeff() <= 450.0);
        CHECK(d.minCoeff() >= -450.0);
        const Eigen::MatrixXi bins = bin_indices(d, c.bounds);
        for (int col = 0; col < q; ++col) {
          std::set<int> seen(bins.col(col).data(), bins.col(col).data() + n);
          CHECK(static_cast<int>(seen.size()) == n);
          CHECK(*seen.begin() == 0);
          CHECK(*seen.rbegin() == n - 1);
        }
        CHECK(min_pairwise_distance(d, c.bounds) >= min_pairwise_distance(random_lhd(c), c.bounds));
      }
    }
  }
}

TEST_CASE("same seed gives the same design, different seeds differ") {
  LhdConfig c;
  c.n = 11;
  c.q = 10;
  c.seed = 7;
  const DesignMatrix a = maximin_lhd(c);
  const DesignMatrix b = maximin_lhd(c);
  CHECK(a == b);
  c.seed = 8;
  CHECK_FALSE(a == maximin_lhd(c));
}

TEST_CASE("minimum pairwise distance in unit coordinates") {
  const Bounds b = Bounds::uniform(2, 0.0, 10.0);
  DesignMatrix d(3, 2);
  d << 0.0, 0.0, 3.0, 4.0, 10.0, 10.0;
  CHECK(min_pairwise_distance(d, b) == doctest::Approx(0.5));
  CHECK(std::isinf(min_pairwise_distance(d.topRows(1), b)));
}
