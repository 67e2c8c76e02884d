#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "treepoly/conductance.hpp"
#include "treepoly/environment.hpp"
#include "treepoly/errors.hpp"

using namespace treepoly;

namespace {

// Kolmogorov-Smirnov statistic of samples against a CDF; ties (atom laws)
// are compared on both sides of the jump.
template <class Cdf>
double ks_statistic(std::vector<double> xs, Cdf&& cdf_fn) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < xs.size()) {
    std::size_t j = i;
    while (j + 1 < xs.size() && xs[j + 1] == xs[i]) ++j;
    const double left = cdf_fn(std::nextafter(xs[i], -INFINITY));
    const double right = cdf_fn(xs[i]);
    d = std::max({d, std::abs(i / n - left), std::abs((j + 1) / n - right)});
    i = j + 1;
  }
  return d;
}

std::vector<double> sample_many(const Environment& env, int count) {
  // Distinct depth-3 codes on a wide tree: 200 * 199 * 199 paths available.
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(count));
  for (int i = 0; xs.size() < static_cast<std::size_t>(count); ++i) {
    const int path[] = {i % env.ell, (i / env.ell) % (env.ell - 1),
                        (i / (env.ell * (env.ell - 1))) % (env.ell - 1)};
    xs.push_back(sample_edge(env, edge_code(path, env.ell)));
  }
  return xs;
}

}  // namespace

TEST_CASE("laplace examples") {
  CHECK(laplace(make_constant(1.0), 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  for (const auto& law : {make_constant(3.0), make_gaussian(1.0, 2.0), make_exponential(0.5),
                          make_two_point(-1.0, 4.0, 0.3),
                          make_discrete({0.0, 1.0, 2.0}, {0.2, 0.3, 0.5})}) {
    CHECK(laplace(law, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK(laplace(make_two_point(0.0, 1.0, 0.5), 1.0) ==
        doctest::Approx((1.0 + std::exp(-1.0)) / 2.0).epsilon(1e-15));
  CHECK(laplace(make_gaussian(0.5, 2.0), 1.5) ==
        doctest::Approx(std::exp(-0.75 + 1.5 * 1.5 * 4.0 / 2.0)).epsilon(1e-14));
  CHECK(laplace(make_exponential(2.0), 1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("exponential transform diverges at beta <= -rate") {
  const auto law = make_exponential(2.0);
  CHECK(laplace_exists(law, -1.9));
  CHECK_FALSE(laplace_exists(law, -2.0));
  CHECK_THROWS_AS(laplace(law, -2.0), DomainError);
  CHECK_THROWS_AS(laplace(law, -3.0), DomainError);
  CHECK_THROWS_AS(laplace_derivatives(law, -2.5), DomainError);
}

TEST_CASE("laplace derivative examples") {
  const double c = 1.7, beta = 0.6;
  const auto d = laplace_derivatives(make_constant(c), beta);
  CHECK(d.first == doctest::Approx(c * std::exp(-beta * c)).epsilon(1e-15));
  CHECK(d.second == doctest::Approx(c * c * std::exp(-beta * c)).epsilon(1e-15));
  const auto g = laplace_derivatives(make_gaussian(0.0, 1.0), 0.0);
  CHECK(std::abs(g.first) < 1e-15);
  CHECK(g.second == doctest::Approx(1.0).epsilon(1e-15));
  const auto t = laplace_derivatives(make_two_point(0.0, 1.0, 0.5), 1.0);
  CHECK(t.first == doctest::Approx(std::exp(-1.0) / 2.0).epsilon(1e-15));
  CHECK(t.second == doctest::Approx(std::exp(-1.0) / 2.0).epsilon(1e-15));
}

TEST_CASE("derivatives match finite differences of the transform") {
  const double h = 1e-5;
  for (const auto& law : {make_gaussian(0.3, 1.2), make_exponential(1.5),
                          make_discrete({-1.0, 0.5, 2.0}, {0.25, 0.25, 0.5})}) {
    for (double beta : {0.0, 0.4, 1.3}) {
      const auto d = laplace_derivatives(law, beta);
      const double fd1 = -(laplace(law, beta + h) - laplace(law, beta - h)) / (2 * h);
      const double fd2 =
          (laplace(law, beta + h) - 2 * laplace(law, beta) + laplace(law, beta - h)) / (h * h);
      CHECK(d.first == doctest::Approx(fd1).epsilon(1e-7));
      CHECK(d.second == doctest::Approx(fd2).epsilon(1e-4));
    }
  }
}

TEST_CASE("tilted moments agree with the raw derivatives") {
  const auto law = make_two_point(0.0, 1.0, 0.5);
  for (double beta : {0.0, 1.0, 30.0}) {
    const auto t = tilted_moments(law, beta);
    const auto d = laplace_derivatives(law, beta);
    const double lambda = laplace(law, beta);
    CHECK(t.log_lambda == doctest::Approx(std::log(lambda)).epsilon(1e-14));
    CHECK(t.mean == doctest::Approx(d.first / lambda).epsilon(1e-13));
    CHECK(t.variance ==
          doctest::Approx(d.second / lambda - t.mean * t.mean).epsilon(1e-10));
  }
  // Large beta stays finite for atom laws.
  const auto far = tilted_moments(law, 2000.0);
  CHECK(std::isfinite(far.log_lambda));
  CHECK(far.log_lambda == doctest::Approx(std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("laplace is positive and log-convex on grids") {
  const std::vector<ConductanceLaw> laws = {
      make_gaussian(0.0, 1.0), make_exponential(1.0), make_two_point(0.0, 1.0, 0.5),
      make_discrete({-2.0, 0.0, 3.0}, {0.1, 0.6, 0.3}), make_constant(-0.5)};
  for (const auto& law : laws) {
    for (double b1 = -0.9; b1 < 4.0; b1 += 0.37) {
      for (double b2 = b1 + 0.05; b2 < 4.0; b2 += 0.61) {
        const double mid = laplace(law, 0.5 * (b1 + b2));
        const double geo = std::sqrt(laplace(law, b1) * laplace(law, b2));
        CHECK(mid > 0.0);
        CHECK(mid <= geo * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("law validation") {
  CHECK_THROWS_AS(make_two_point(0.0, 1.0, 1.5), ConfigError);
  CHECK_THROWS_AS(make_two_point(0.0, 1.0, -0.1), ConfigError);
  CHECK_THROWS_AS(make_discrete({0.0, 1.0}, {0.5, 0.49}), ConfigError);
  CHECK_NOTHROW(make_discrete({0.0, 1.0}, {0.5, 0.5 + 5e-13}));
  CHECK_THROWS_AS(make_discrete({0.0}, {0.5, 0.5}), ConfigError);
  CHECK_THROWS_AS(make_gaussian(0.0, -1.0), ConfigError);
  CHECK_NOTHROW(make_gaussian(0.0, 0.0));
  CHECK_THROWS_AS(make_exponential(0.0), ConfigError);
  CHECK_THROWS_AS(make_exponential(-1.0), ConfigError);
}

TEST_CASE("law spec grammar round-trips") {
  for (const char* spec : {"twopoint:0,1,0.5", "discrete:0:0.2,1.5:0.3,-2:0.5", "gaussian:0,1",
                           "exponential:2.5", "constant:1"}) {
    const auto law = parse_law(spec);
    CHECK(parse_law(format_law(law)) == law);
  }
  const auto law = parse_law("gaussian:0.1,0.7");
  CHECK(std::get<Gaussian>(law).mean == 0.1);
  CHECK(std::get<Gaussian>(law).stdev == 0.7);
  for (const char* bad : {"", "gaussian", "gaussian:0", "gaussian:0,1,2", "poisson:1",
                          "twopoint:0,1,x", "discrete:0:0.5,1", "constant:", "exponential:-1"}) {
    CHECK_THROWS_AS(parse_law(bad), ConfigError);
  }
}

TEST_CASE("normal quantile accuracy against boost") {
  boost::math::normal_distribution<double> nd;
  double worst = 0.0;
  for (int i = 1; i < 20000; ++i) {
    const double u = i / 20000.0;
    worst = std::max(worst, std::abs(normal_quantile(u) - boost::math::quantile(nd, u)));
  }
  for (double u : {1e-300, 1e-100, 1e-20, 1e-10, 1e-5, 1 - 1e-10, 1 - 1e-5}) {
    const double ref = boost::math::quantile(nd, u);
    worst = std::max(worst, std::abs(normal_quantile(u) - ref) / std::max(1.0, std::abs(ref)));
  }
  CHECK(worst < 1e-9);
  CHECK(normal_quantile(0.5) == 0.0);
}

TEST_CASE("quantile and cdf are consistent") {
  const auto tp = make_two_point(2.0, -1.0, 0.3);  // P(X=2)=0.3
  CHECK(quantile(tp, 0.1) == -1.0);
  CHECK(quantile(tp, 0.69) == -1.0);
  CHECK(quantile(tp, 0.71) == 2.0);
  CHECK(cdf(tp, 0.0) == doctest::Approx(0.7));
  const auto ex = make_exponential(2.0);
  CHECK(cdf(ex, quantile(ex, 0.3)) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(quantile(make_constant(4.0), 0.9) == 4.0);
  const auto at = atoms(make_discrete({3.0, 1.0, 2.0}, {0.5, 0.25, 0.25}));
  CHECK(at.values == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(atom_count(make_gaussian(0, 1)) == 0);
  CHECK(atom_count(make_constant(0)) == 1);
}

TEST_CASE("edge codes") {
  CHECK_THROWS_AS(EdgeCode::from_path(std::span<const int>{}, 3), std::out_of_range);
  const int a[] = {0}, b[] = {1}, c[] = {2};
  CHECK(edge_code(c, 3).depth() == 1);
  CHECK_FALSE(edge_code(c, 3) == edge_code(a, 3));
  CHECK_FALSE(edge_code(c, 3) == edge_code(b, 3));
  const int p[] = {0, 1}, q[] = {1, 0};
  CHECK_FALSE(edge_code(p, 3) == edge_code(q, 3));
  const int bad_root[] = {3}, bad_child[] = {0, 2};
  CHECK_THROWS_AS(edge_code(bad_root, 3), std::out_of_range);
  CHECK_THROWS_AS(edge_code(bad_child, 3), std::out_of_range);
  // Prefix-free: a code is never a prefix of a longer one.
  const int longer[] = {0, 1, 0};
  const auto shorter_code = edge_code(p, 3);
  const auto longer_code = edge_code(longer, 3);
  const auto s = shorter_code.bytes();
  const auto l = longer_code.bytes();
  CHECK_FALSE(std::equal(s.begin(), s.end(), l.begin()));
}

TEST_CASE("environment validation") {
  CHECK_THROWS(Environment(make_gaussian(0, 1), 1, 1));
  CHECK_THROWS(Environment(make_gaussian(0, 1), 1, 256));
  CHECK_NOTHROW(Environment(make_gaussian(0, 1), 1, 2));
}

TEST_CASE("sample_edge is a pure function of seed and code") {
  const Environment env(make_gaussian(0.0, 1.0), 42, 3);
  const int path[] = {1, 0, 1, 1};
  const auto code = edge_code(path, 3);
  CHECK(sample_edge(env, code) == sample_edge(env, code));
  const Environment again(make_gaussian(0.0, 1.0), 42, 3);
  CHECK(sample_edge(again, code) == sample_edge(env, code));
  const Environment constant(make_constant(2.5), 7, 3);
  CHECK(sample_edge(constant, code) == 2.5);
}

TEST_CASE("changing the seed changes samples") {
  const Environment e1(make_gaussian(0.0, 1.0), 1, 4);
  const Environment e2(make_gaussian(0.0, 1.0), 2, 4);
  int changed = 0;
  for (int i = 0; i < 100; ++i) {
    const int path[] = {i % 4, (i / 4) % 3, (i / 12) % 3, (i / 36) % 3};
    changed += sample_edge(e1, edge_code(path, 4)) != sample_edge(e2, edge_code(path, 4));
  }
  CHECK(changed >= 1);
  CHECK(changed == 100);
}

TEST_CASE("two-point sample mean over 10^6 codes") {
  const Environment env(make_two_point(0.0, 1.0, 0.5), 3, 200);
  const auto xs = sample_many(env, 1000000);
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  CHECK(std::abs(mean - 0.5) < 3.0 * 0.5 / 1000.0);
}

TEST_CASE("empirical CDFs pass Kolmogorov-Smirnov at 1%") {
  const int n = 100000;
  const double critical = 1.6276 / std::sqrt(static_cast<double>(n));
  for (const auto& law : {make_gaussian(0.5, 2.0), make_exponential(1.5),
                          make_discrete({-1.0, 0.0, 2.0}, {0.2, 0.5, 0.3})}) {
    const Environment env(law, 17, 60);
    const auto xs = sample_many(env, n);
    const double d = ks_statistic(xs, [&](double x) { return cdf(law, x); });
    CAPTURE(format_law(law));
    CHECK(d < critical);
  }
}

TEST_CASE("hash output is uniform") {
  // Raw 53-bit uniforms behind the transform, binned.
  std::vector<int> bins(64, 0);
  const int n = 640000;
  for (int i = 0; i < n; ++i) {
    const int path[] = {i % 200, (i / 200) % 199, (i / 39800) % 199};
    const auto code = edge_code(path, 200);
    const double u = hashing::to_unit_open(hash_code(9, code));
    CHECK_UNARY(u > 0.0);
    CHECK_UNARY(u < 1.0);
    ++bins[static_cast<std::size_t>(u * 64)];
  }
  double chi2 = 0.0;
  for (int b : bins) chi2 += (b - n / 64.0) * (b - n / 64.0) / (n / 64.0);
  CHECK(chi2 < 98.0);  // chi-square, 63 dof, 0.999 quantile ~ 103
}
