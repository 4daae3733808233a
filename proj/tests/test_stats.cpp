#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "ishap/rng.hpp"
#include "ishap/stats.hpp"

using namespace ishap;

TEST_CASE("log_gamma against reference values") {
  // Reference values computed with scipy.special.gammaln.
  CHECK(std::fabs(log_gamma(0.5) - 0.5723649429247004) < 1e-13);
  CHECK(std::fabs(log_gamma(10.0) - 12.801827480081467) < 1e-12);
  CHECK(std::fabs(log_gamma(1.0)) < 1e-14);
  CHECK(std::fabs(log_gamma(2.0)) < 1e-14);
  // Recurrence Gamma(x+1) = x Gamma(x).
  for (double x : {0.3, 1.7, 4.2, 25.0}) {
    CHECK(std::fabs(log_gamma(x + 1.0) - (log_gamma(x) + std::log(x))) < 1e-12);
  }
}

TEST_CASE("regularized incomplete beta against reference grid") {
  // scipy.special.betainc, frozen.
  struct Row {
    double a, b, x, expected;
  };
  const Row rows[] = {
      {0.5, 0.5, 0.25, 0.33333333333333337},
      {2, 3, 0.5, 0.6875},
      {3, 0.5, 0.6, 0.09242631153167512},
      {5, 5, 0.1, 0.0008909200000000001},
      {10, 2, 0.9, 0.6973568802000002},
      {0.5, 8, 0.03, 0.5081155031473389},
      {50, 50, 0.5, 0.5000000000000004},
      {1, 1, 0.7, 0.7},
      {2.5, 0.5, 0.999, 0.9463423453081866},
  };
  for (const Row& r : rows) {
    CAPTURE(r.a);
    CAPTURE(r.b);
    CAPTURE(r.x);
    CHECK(std::fabs(regularized_incomplete_beta(r.a, r.b, r.x) - r.expected) < 1e-10);
  }
}

TEST_CASE("regularized incomplete beta edge cases") {
  CHECK(regularized_incomplete_beta(4, 6, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(4, 6, 1.0) == 1.0);
  CHECK(regularized_incomplete_beta(4, 6, -0.5) == 0.0);
  CHECK(regularized_incomplete_beta(4, 6, 1.5) == 1.0);
  CHECK_THROWS_AS(regularized_incomplete_beta(0.0, 1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(regularized_incomplete_beta(1.0, -2.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(regularized_incomplete_beta(1.0, 1.0, std::nan("")), std::invalid_argument);
}

TEST_CASE("regularized incomplete beta symmetry I_x(a,b) = 1 - I_{1-x}(b,a)") {
  const double as[] = {0.5, 1.0, 2.5, 7.0, 40.0};
  const double xs[] = {0.01, 0.2, 0.5, 0.77, 0.99};
  for (double a : as)
    for (double b : as)
      for (double x : xs) {
        double lhs = regularized_incomplete_beta(a, b, x);
        double rhs = 1.0 - regularized_incomplete_beta(b, a, 1.0 - x);
        CHECK(std::fabs(lhs - rhs) < 1e-10);
      }
}

TEST_CASE("regularized incomplete beta is monotone in x") {
  double prev = 0.0;
  for (int k = 0; k <= 100; ++k) {
    double x = static_cast<double>(k) / 100.0;
    double v = regularized_incomplete_beta(3.0, 2.0, x);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(prev == 1.0);
}

TEST_CASE("student t two-sided p-value") {
  CHECK(student_t_two_sided_p(0.0, 5.0) == 1.0);
  CHECK(student_t_two_sided_p(std::numeric_limits<double>::infinity(), 5.0) == 0.0);
  // p(t, nu) = I_{nu/(nu+t^2)}(nu/2, 1/2); t = 2, nu = 6 gives I_{0.6}(3, 0.5).
  CHECK(std::fabs(student_t_two_sided_p(2.0, 6.0) - 0.09242631153167512) < 1e-10);
  // Even in t.
  for (double t : {0.5, 1.3, 2.9}) {
    CHECK(student_t_two_sided_p(t, 7.0) == student_t_two_sided_p(-t, 7.0));
  }
  // Strictly decreasing in |t|.
  double prev = 1.0;
  for (double t = 0.25; t < 6.0; t += 0.25) {
    double p = student_t_two_sided_p(t, 4.0);
    CHECK(p < prev);
    prev = p;
  }
  CHECK_THROWS_AS(student_t_two_sided_p(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(student_t_two_sided_p(1.0, -3.0), std::invalid_argument);
}

TEST_CASE("summarize computes mean and unbiased variance") {
  std::vector<double> empty;
  GroupStats g0 = summarize(empty);
  CHECK(g0.count == 0);
  CHECK(g0.mean == 0.0);
  CHECK(g0.variance == 0.0);

  std::vector<double> one = {3.5};
  GroupStats g1 = summarize(one);
  CHECK(g1.count == 1);
  CHECK(g1.mean == 3.5);
  CHECK(g1.variance == 0.0);

  std::vector<double> a = {4, 5, 6};
  GroupStats ga = summarize(a);
  CHECK(ga.count == 3);
  CHECK(ga.mean == 5.0);
  CHECK(ga.variance == doctest::Approx(1.0).epsilon(1e-15));

  std::vector<double> flat = {2, 2, 2};
  GroupStats gf = summarize(flat);
  CHECK(gf.mean == 2.0);
  CHECK(gf.variance == 0.0);
}

TEST_CASE("welch contrast on the four-group example") {
  // Groups {4,5,6}, {0,1,2}, {1,2,3}, {2,2,2} with coefficients +1,+1,-1,-1:
  // contrast 2, se^2 = 1, Welch-Satterthwaite nu = 6, t = 2.
  std::vector<double> a = {4, 5, 6}, b = {0, 1, 2}, c = {1, 2, 3}, d = {2, 2, 2};
  std::vector<GroupStats> groups = {summarize(a), summarize(b), summarize(c), summarize(d)};
  std::vector<double> coefs = {1, 1, -1, -1};
  double p = welch_contrast_p(groups, coefs);
  CHECK(std::fabs(p - 0.092426311531675) < 1e-9);
}

TEST_CASE("welch contrast degenerate rules") {
  std::vector<double> a = {4, 5, 6}, single = {7.0};
  std::vector<GroupStats> with_tiny = {summarize(a), summarize(single)};
  std::vector<double> coefs2 = {1, -1};
  CHECK(welch_contrast_p(with_tiny, coefs2) == 1.0);

  // All groups constant: se = 0. Equal means -> 1, different means -> 0.
  std::vector<double> c1 = {2, 2, 2}, c2 = {2, 2}, c3 = {5, 5, 5, 5};
  std::vector<GroupStats> same = {summarize(c1), summarize(c2)};
  CHECK(welch_contrast_p(same, coefs2) == 1.0);
  std::vector<GroupStats> diff = {summarize(c1), summarize(c3)};
  CHECK(welch_contrast_p(diff, coefs2) == 0.0);

  std::vector<double> coefs3 = {1, -1, 1};
  CHECK_THROWS_AS(welch_contrast_p(same, coefs3), std::invalid_argument);
  std::vector<GroupStats> none;
  std::vector<double> nocoef;
  CHECK_THROWS_AS(welch_contrast_p(none, nocoef), std::invalid_argument);
}

TEST_CASE("welch contrast p stays in [0,1] on random inputs") {
  Rng rng(99);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<GroupStats> groups;
    std::vector<double> coefs;
    int g = 2 + rng.index(4);
    for (int k = 0; k < g; ++k) {
      std::vector<double> vals;
      int n = 2 + rng.index(10);
      for (int i = 0; i < n; ++i) vals.push_back(rng.normal(rng.uniform(-2, 2), 0.5 + rng.uniform01()));
      groups.push_back(summarize(vals));
      coefs.push_back(rng.coin() ? 1.0 : -1.0);
    }
    double p = welch_contrast_p(groups, coefs);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("pearson correlation") {
  std::vector<double> x = {1, 2, 3, 4, 5};
  std::vector<double> y = {2, 4, 6, 8, 10};
  CHECK(pearson(x, y) == doctest::Approx(1.0).epsilon(1e-14));
  std::vector<double> yn = {10, 8, 6, 4, 2};
  CHECK(pearson(x, yn) == doctest::Approx(-1.0).epsilon(1e-14));
  std::vector<double> flat = {3, 3, 3, 3, 3};
  CHECK(pearson(x, flat) == 0.0);
  std::vector<double> short1 = {1.0}, short2 = {2.0};
  CHECK(pearson(short1, short2) == 0.0);
  std::vector<double> bad = {1, 2};
  CHECK_THROWS_AS(pearson(x, bad), std::invalid_argument);
  // Bounded by 1 in magnitude on arbitrary data.
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> u, v;
    for (int i = 0; i < 20; ++i) {
      u.push_back(rng.normal());
      v.push_back(rng.normal());
    }
    double r = pearson(u, v);
    CHECK(std::fabs(r) <= 1.0 + 1e-12);
  }
}

TEST_CASE("rng determinism and stream separation") {
  Rng a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 64; ++i) {
    std::uint64_t va = a.u64();
    all_equal = all_equal && (va == b.u64());
    any_diff = any_diff || (va != c.u64());
  }
  CHECK(all_equal);
  CHECK(any_diff);

  CHECK(stream_seed(7, Stream::MaskSample) != stream_seed(7, Stream::Value));
  CHECK(stream_seed(7, Stream::Value) != stream_seed(8, Stream::Value));
  CHECK(stream_seed(7, Stream::Value) == stream_seed(7, Stream::Value));

  std::vector<int> s1 = {0, 2}, s2 = {0, 3}, s3 = {0, 2};
  CHECK(stream_seed(7, Stream::Value, s1) == stream_seed(7, Stream::Value, s3));
  CHECK(stream_seed(7, Stream::Value, s1) != stream_seed(7, Stream::Value, s2));
  CHECK(stream_seed(7, Stream::Trial, 0) != stream_seed(7, Stream::Trial, 1));
}

TEST_CASE("rng transforms have the documented ranges") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    int k = rng.index(7);
    CHECK(k >= 0);
    CHECK(k < 7);
    double w = rng.uniform(2.0, 5.0);
    CHECK(w >= 2.0);
    CHECK(w < 5.0);
  }
}

TEST_CASE("rng shuffle produces a permutation") {
  Rng rng(5);
  std::vector<int> v(30);
  std::iota(v.begin(), v.end(), 0);
  rng.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 30; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("rng sample moments are plausible") {
  Rng rng(11);
  const int n = 20000;
  double sum = 0.0, ss = 0.0;
  for (int i = 0; i < n; ++i) {
    double z = rng.normal();
    sum += z;
    ss += z * z;
  }
  double mean = sum / n;
  double var = ss / n - mean * mean;
  CHECK(std::fabs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::fabs(var - 1.0) < 0.05);

  double psum = 0.0;
  for (int i = 0; i < n; ++i) psum += rng.poisson(1.5);
  CHECK(std::fabs(psum / n - 1.5) < 0.05);
}
