#include <doctest.h>

#include <cmath>
#include <set>

#include "treepoly/engine.hpp"
#include "treepoly/errors.hpp"
#include "treepoly/oracle.hpp"
#include "treepoly/theory.hpp"

using namespace treepoly;
using namespace treepoly::oracle;

TEST_CASE("walk enumeration") {
  CHECK(enumerate_saws(3, 1).paths.size() == 3);
  CHECK(enumerate_saws(3, 2).paths.size() == 6);
  CHECK(enumerate_saws(2, 5).paths.size() == 2);
  CHECK(enumerate_saws(4, 0).paths.size() == 1);
  for (int ell = 2; ell <= 5; ++ell) {
    for (int n = 0; n <= 8; ++n) {
      const auto set = enumerate_saws(ell, n);
      CHECK(static_cast<double>(set.paths.size()) == theory::saw_count(ell, n));
      std::set<std::vector<int>> distinct(set.paths.begin(), set.paths.end());
      CHECK(distinct.size() == set.paths.size());
      for (const auto& p : set.paths) CHECK(p.size() == static_cast<std::size_t>(n));
    }
  }
  CHECK_THROWS_AS(enumerate_saws(3, 30), BudgetExceeded);
  CHECK_THROWS_AS(enumerate_saws(3, 5, 10), BudgetExceeded);
}

TEST_CASE("naive Z_n") {
  const Environment g(make_gaussian(0, 1), 3, 3);
  CHECK(naive_Zn(g, 0.0, 6) == doctest::Approx(1.0).epsilon(1e-14));
  const Environment c(make_constant(2.0), 3, 4);
  CHECK(naive_Zn(c, 1.3, 5) == doctest::Approx(1.0).epsilon(1e-14));
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Environment env(make_two_point(0.0, 1.0, 0.5), seed, 3);
    const auto p = engine::compute_profile(env, 1.0, 10);
    for (int n = 0; n <= 10; ++n) {
      CHECK(std::abs(naive_Zn(env, 1.0, n) / p.z[static_cast<std::size_t>(n)] - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("edges within depth n") {
  CHECK(edges_within(3, 1) == 3);
  CHECK(edges_within(3, 3) == 21);
  CHECK(edges_within(4, 2) == 16);
}

TEST_CASE("exact expectation of Z_n is 1") {
  for (double beta : {0.3, 1.0, 4.0}) {
    for (int n = 1; n <= 3; ++n) {
      CHECK(std::abs(exact_expectation(make_two_point(0, 1, 0.5), beta, 3, n, MeanZn{}) - 1.0) <
            1e-12);
    }
  }
  CHECK(std::abs(exact_expectation(make_discrete({-1.0, 0.0, 2.0}, {0.2, 0.3, 0.5}), 0.7, 3, 2,
                                   MeanZn{}) -
                 1.0) < 1e-12);
  CHECK(std::abs(exact_expectation(make_two_point(0, 1, 0.5), 1.0, 4, 2, MeanZn{}) - 1.0) < 1e-12);
}

TEST_CASE("exact second moments against frozen values") {
  // mpmath, 20 significant digits.
  const auto tp = make_two_point(0.0, 1.0, 0.5);
  CHECK(std::abs(exact_expectation(tp, 1.0, 3, 1, SecondMoment{}) - 1.07118408901135753) < 1e-13);
  CHECK(std::abs(exact_expectation(tp, 1.0, 3, 2, SecondMoment{}) - 1.1143768953096016027) < 1e-13);
  CHECK(std::abs(exact_expectation(tp, 0.5, 3, 1, SecondMoment{}) - 1.0199950503978740146) < 1e-13);
  CHECK(std::abs(exact_expectation(tp, 0.5, 3, 2, SecondMoment{}) - 1.0305922786574313045) < 1e-13);
  CHECK(std::abs(exact_expectation(tp, 1.0, 3, 2, FractionalMoment{0.5}) -
                 0.98533567593104720918) < 1e-13);
}

TEST_CASE("closed-form second moment matches exhaustion") {
  const auto tp = make_two_point(0.0, 1.0, 0.5);
  for (double beta : {0.5, 1.0}) {
    for (int n = 1; n <= 3; ++n) {
      const double exact = exact_expectation(tp, beta, 3, n, SecondMoment{});
      CHECK(std::abs(theory::second_moment_closed_form(tp, beta, n, 3) - exact) < 1e-10);
      CHECK(std::abs(theory::second_moment_overlap_only_form(tp, beta, n, 3) - exact) > 0.1);
    }
  }
  const auto d = make_discrete({-0.5, 0.0, 1.0}, {0.3, 0.3, 0.4});
  const double exact = exact_expectation(d, 0.9, 3, 2, SecondMoment{});
  CHECK(std::abs(theory::second_moment_closed_form(d, 0.9, 2, 3) - exact) < 1e-10);
  const double wide = exact_expectation(tp, 0.8, 4, 2, SecondMoment{});
  CHECK(std::abs(theory::second_moment_closed_form(tp, 0.8, 2, 4) - wide) < 1e-10);
}

TEST_CASE("Jensen and the fractional-moment bound") {
  const auto tp = make_two_point(0.0, 1.0, 0.5);
  for (double beta : {0.5, 1.0, 3.0}) {
    for (int n = 1; n <= 3; ++n) {
      const std::vector<Functional> fs = {SecondMoment{}, FractionalMoment{0.25},
                                          FractionalMoment{0.5}, FractionalMoment{0.75}};
      const auto v = exact_expectations(tp, beta, 3, n, fs);
      CHECK(v[0] >= 1.0);
      for (std::size_t k = 1; k < fs.size(); ++k) {
        const double theta = std::get<FractionalMoment>(fs[k]).theta;
        CHECK(v[k] <= 1.0 + 1e-15);
        CHECK(v[k] <= theory::fractional_moment_bound(tp, beta, theta, n, 3));
      }
    }
  }
}

TEST_CASE("indicator functional") {
  const auto tp = make_two_point(0.0, 1.0, 0.5);
  CHECK(exact_expectation(tp, 1.0, 3, 2, Exceeds{0.0}) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(exact_expectation(tp, 1.0, 3, 2, Exceeds{1e9}) == 0.0);
  const double p = exact_expectation(tp, 1.0, 3, 2, Exceeds{1.0});
  CHECK(p > 0.0);
  CHECK(p < 1.0);
}

TEST_CASE("oracle errors") {
  CHECK_THROWS_AS(exact_expectation(make_gaussian(0, 1), 1.0, 3, 1, MeanZn{}), DomainError);
  CHECK_THROWS_AS(exact_expectation(make_two_point(0, 1, 0.5), 1.0, 3, 4, MeanZn{}),
                  BudgetExceeded);
  CHECK_THROWS_AS(exact_expectation(make_two_point(0, 1, 0.5), 1.0, 3, 3, MeanZn{}, 1000),
                  BudgetExceeded);
}
