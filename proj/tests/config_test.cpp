#include <doctest.h>

#include "treepoly/config.hpp"
#include "treepoly/errors.hpp"

using namespace treepoly;
using namespace treepoly::cli;

TEST_CASE("defaults") {
  const RunConfig c;
  CHECK(c.ell == 3);
  CHECK(c.depth == 10);
  CHECK(c.replicas == 1000);
  CHECK(c.threads == 0);
  CHECK(c.work_budget == (std::uint64_t{1} << 31));
  CHECK_FALSE(c.eps.has_value());
}

TEST_CASE("text round trip") {
  RunConfig c;
  c.command = "moments";
  c.law = "discrete:0:0.25,1:0.75";
  c.ell = 4;
  c.beta = "0:3:0.05";
  c.theta = 0.1;
  c.delta = 1.0 / 3.0;
  c.eps = 0.123456789012345678;
  c.h = -0.5;
  c.seed = 18446744073709551615ULL;
  c.threads = 7;
  c.output_dir = "/tmp/x y";
  c.mode = "forward";
  CHECK(from_text(to_text(c)) == c);
  CHECK(from_text(to_text(RunConfig{})) == RunConfig{});
}

TEST_CASE("comments, blanks and later lines win") {
  const auto c = from_text("# run\n\nlaw = gaussian:0,1  # inline\nell=4\nell=5\n");
  CHECK(c.law == "gaussian:0,1");
  CHECK(c.ell == 5);
}

TEST_CASE("bad input") {
  CHECK_THROWS_AS(from_text("nonsense=1"), ConfigError);
  CHECK_THROWS_AS(from_text("ell"), ConfigError);
  CHECK_THROWS_AS(from_text("ell=two"), ConfigError);
  CHECK_THROWS_AS(from_text("ell=1"), ConfigError);
  CHECK_THROWS_AS(from_text("law=poisson:1"), ConfigError);
  CHECK_THROWS_AS(from_text("beta=3:0:0.1"), ConfigError);
  CHECK_THROWS_AS(from_text("seed=-1"), ConfigError);
  CHECK_THROWS_AS(from_text("mode=sideways"), ConfigError);
  CHECK_THROWS_AS(from_text("delta=0"), ConfigError);
}

TEST_CASE("grid expansion") {
  const auto g = expand_grid("0:3:0.05");
  CHECK(g.size() == 61);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == doctest::Approx(3.0).epsilon(1e-15));
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
  CHECK(expand_grid("1.5") == std::vector<double>{1.5});
  CHECK(expand_grid("1:1:0.5") == std::vector<double>{1.0});
  CHECK(expand_grid("0:1:0.3").size() == 4);
  for (const char* bad : {"0:1", "0:1:0", "0:1:-1", "1:0:0.1", "a:b:c", "0:inf:1", "nan"}) {
    CHECK_THROWS_AS(expand_grid(bad), ConfigError);
  }
}

TEST_CASE("describe omits settings that never change results") {
  RunConfig a;
  a.command = "simulate";
  a.law = "constant:1";
  RunConfig b = a;
  b.threads = 8;
  b.output_dir = "elsewhere";
  CHECK(describe(a) == describe(b));
  CHECK(describe(a).find("threads") == std::string::npos);
  b.seed = 2;
  CHECK(describe(a) != describe(b));
}
